// Copyright 2026 The seqmcm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqmcm {

enum class ErrorKind {
  kValidation,
  kInfeasible,
  kConstruction,
  kInfiniteConfidence,
  kUnsupportedScale,
  kDomain,
  kInvariant,
  kState,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kConstruction: return "construction";
    case ErrorKind::kInfiniteConfidence: return "infinite-confidence";
    case ErrorKind::kUnsupportedScale: return "unsupported-scale";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kInvariant: return "invariant";
    case ErrorKind::kState: return "state";
  }
  return "unknown";
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input: shape mismatch, non-Hermitian, trace or norm off, ...
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

/// A requested operating point cannot be realized (gain too large,
/// inconclusive rate below the achievable minimum, ...).
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

/// Channel construction left a completeness residual.
class ConstructionError : public Error {
 public:
  ConstructionError(const std::string& what, double residual)
      : Error(ErrorKind::kConstruction, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// supp(rho_x) is not contained in supp(rho).
class InfiniteConfidenceError : public Error {
 public:
  explicit InfiniteConfidenceError(const std::string& what)
      : Error(ErrorKind::kInfiniteConfidence, what) {}
};

class UnsupportedScaleError : public Error {
 public:
  explicit UnsupportedScaleError(const std::string& what)
      : Error(ErrorKind::kUnsupportedScale, what) {}
};

/// Parameter outside the domain of a closed-form expression.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kDomain, what) {}
};

/// A mathematical guarantee failed numerically; indicates a bug.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::kInvariant, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what)
      : Error(ErrorKind::kState, what) {}
};

/// Failure of one party inside a sequential run. `party` is 1-based.
class SequenceError : public Error {
 public:
  SequenceError(std::size_t party, ErrorKind cause, const std::string& what)
      : Error(cause, "party " + std::to_string(party) + ": " + what),
        party_(party) {}
  std::size_t party() const noexcept { return party_; }

 private:
  std::size_t party_;
};

}  // namespace seqmcm
