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

// Maximum-confidence measurements: confidences, MCM projectors,
// complementary states, optimality checks and entropic identities.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "seqmcm/errors.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"

namespace seqmcm {

/// Relative tolerance for counting eigenvalues degenerate with the top one.
inline constexpr double kDegeneracyTol = 1e-9;
/// r_x at or below this is treated as zero (no complementary state).
inline constexpr double kWeightFloor = 1e-12;

struct McmEntry {
  double prior = 0.0;
  double confidence = 0.0;      // C_x
  std::size_t degeneracy = 0;   // d_x
  std::vector<PureState> basis; // |phi_x^i>, unit norm, not necessarily orthogonal
  std::optional<DensityMatrix> sigma;
  double weight_r = 0.0;        // r_x = C_x - q_x when sigma is present
  double mixing = 0.0;          // mu_x = q_x / C_x

  /// Orthogonal projector onto span{|phi_x^i>}; zero for an empty basis.
  ComplexMatrix projector() const {
    if (basis.empty()) return ComplexMatrix();
    ComplexMatrix sum = ComplexMatrix::Zero(static_cast<Eigen::Index>(basis.front().dim()),
                                            static_cast<Eigen::Index>(basis.front().dim()));
    for (const auto& v : basis) sum += v.projector();
    const ComplexMatrix r = range_basis(sum);
    return r * r.adjoint();
  }
};

struct McmSolution {
  std::vector<McmEntry> entries;

  std::size_t size() const { return entries.size(); }
  const McmEntry& operator[](std::size_t x) const { return entries.at(x); }

  bool rank_one() const {
    for (const auto& e : entries) {
      if (e.degeneracy != 1) return false;
    }
    return true;
  }

  /// Leading MCM vector per label. Throws StateError for empty bases.
  std::vector<PureState> projectors() const {
    std::vector<PureState> out;
    for (std::size_t x = 0; x < entries.size(); ++x) {
      if (entries[x].basis.empty()) {
        throw StateError("McmSolution: label " + std::to_string(x) +
                         " has no measurement vector (zero prior)");
      }
      out.push_back(entries[x].basis.front());
    }
    return out;
  }

  std::vector<double> confidences() const {
    std::vector<double> out;
    for (const auto& e : entries) out.push_back(e.confidence);
    return out;
  }
};

namespace detail {

/// Hermitian part with eigenvalues clipped at zero, renormalized to unit trace.
inline DensityMatrix clip_to_state(const ComplexMatrix& m) {
  const RawEigen e = eigh(hermitian_part(m));
  std::vector<double> v(static_cast<std::size_t>(e.values.size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    v[static_cast<std::size_t>(i)] = std::max(e.values[i], 0.0);
    total += v[static_cast<std::size_t>(i)];
  }
  for (double& x : v) x /= total;
  return DensityMatrix(spectral_map(e, v));
}

inline void require_label(const Ensemble& e, std::size_t x, const char* what) {
  if (x >= e.size()) {
    throw ValidationError(std::string(what) + ": label " + std::to_string(x) +
                          " out of range for " + std::to_string(e.size()) + " states");
  }
}

inline void require_support(const ComplexMatrix& rho, const ComplexMatrix& rho_x,
                            std::size_t x) {
  const ComplexMatrix p0 = kernel_projector(rho);
  const double leak = trace_product(p0, rho_x).real();
  if (leak > 1e-9) {
    throw InfiniteConfidenceError("max_confidence: support of state " + std::to_string(x) +
                                  " leaves the support of the average state (weight " +
                                  std::to_string(leak) + ")");
  }
}

}  // namespace detail

/// C_x as the largest eigenvalue of rho^{-1/2} q_x rho_x rho^{-1/2}, with the
/// MCM vectors rho^{-1/2}|lambda_x^i> and the complementary state.
inline McmEntry max_confidence(const Ensemble& e, std::size_t x) {
  detail::require_label(e, x, "max_confidence");
  McmEntry out;
  out.prior = e.prior(x);
  if (out.prior == 0.0) return out;

  const ComplexMatrix rho = e.average();
  const ComplexMatrix& rho_x = e.state(x).matrix();
  detail::require_support(rho, rho_x, x);
  const ComplexMatrix s = pinv_sqrt(rho).matrix;
  const ComplexMatrix b = hermitian_part(s * (out.prior * rho_x) * s);
  const detail::RawEigen eb = detail::eigh(b);
  out.confidence = eb.values[0];
  const double cut = out.confidence * (1.0 - kDegeneracyTol);
  for (Eigen::Index i = 0; i < eb.values.size() && eb.values[i] >= cut; ++i) {
    ComplexVector v = s * eb.vectors.col(i);
    fix_phase(v);
    out.basis.push_back(PureState::normalized(std::move(v)));
  }
  out.degeneracy = out.basis.size();
  out.mixing = out.prior / out.confidence;

  const ComplexMatrix root = sqrt_psd(rho);
  const ComplexMatrix rs = hermitian_part(
      root * (out.confidence * identity(e.dim()) - b) * root);
  const double r = rs.trace().real();
  if (r > kWeightFloor && out.degeneracy < e.dim()) {
    out.weight_r = r;
    out.sigma = detail::clip_to_state(rs / r);
  }
  return out;
}

/// r_x sigma_x for label x; nullopt sigma when r_x = 0.
struct Complementary {
  std::optional<DensityMatrix> sigma;
  double weight_r = 0.0;
};

inline Complementary complementary_state(const Ensemble& e, std::size_t x) {
  const McmEntry m = max_confidence(e, x);
  return {m.sigma, m.weight_r};
}

inline McmSolution solve_mcm(const Ensemble& e) {
  McmSolution sol;
  for (std::size_t x = 0; x < e.size(); ++x) sol.entries.push_back(max_confidence(e, x));
  return sol;
}

// ---------------------------------------------------------------------------
// Optimality conditions

struct KktLabelReport {
  double stationarity = 0.0;  // ||C rho - q rho_x - r sigma||_1
  double slackness = 0.0;     // |r tr[sigma M_x]|
};

struct KktReport {
  std::vector<KktLabelReport> labels;
  double tolerance = 0.0;
  bool passed = false;

  double worst() const {
    double w = 0.0;
    for (const auto& l : labels) w = std::max({w, l.stationarity, l.slackness});
    return w;
  }
};

inline KktReport verify_kkt(const Ensemble& e, const McmSolution& sol, const Povm& povm,
                            double tolerance = 1e-9) {
  if (povm.size() > sol.size() || sol.size() != e.size()) {
    throw ValidationError("verify_kkt: POVM labels exceed the solution's labels");
  }
  KktReport rep;
  rep.tolerance = tolerance;
  rep.passed = true;
  const ComplexMatrix rho = e.average();
  for (std::size_t x = 0; x < povm.size(); ++x) {
    const McmEntry& m = sol[x];
    ComplexMatrix resid = m.confidence * rho - m.prior * e.state(x).matrix();
    KktLabelReport l;
    if (m.sigma) {
      resid -= m.weight_r * m.sigma->matrix();
      l.slackness =
          std::abs(m.weight_r * trace_product(m.sigma->matrix(), povm.conclusive()[x]).real());
    }
    l.stationarity = trace_norm(hermitian_part(resid));
    if (l.stationarity > tolerance || l.slackness > tolerance) rep.passed = false;
    rep.labels.push_back(l);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Entropic quantities

/// D_max(rho || sigma) in bits; +infinity when supp(rho) is not inside supp(sigma).
inline double max_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw ValidationError("max_relative_entropy: dimension mismatch");
  }
  const ComplexMatrix p0 = kernel_projector(sigma.matrix());
  if (trace_product(p0, rho.matrix()).real() > tol::kRank) {
    return std::numeric_limits<double>::infinity();
  }
  const ComplexMatrix s = pinv_sqrt(sigma.matrix()).matrix;
  return std::log2(max_eigenvalue(hermitian_part(s * rho.matrix() * s)));
}

struct ConfidenceEntropy {
  double confidence = 0.0;  // dual eigenvalue
  double entropic = 0.0;    // q_x 2^{D_max(rho_x || rho)}
};

inline ConfidenceEntropy confidence_entropy_identity(const Ensemble& e, std::size_t x) {
  detail::require_label(e, x, "confidence_entropy_identity");
  ConfidenceEntropy out;
  out.confidence = max_confidence(e, x).confidence;
  const DensityMatrix avg(e.average());
  out.entropic = e.prior(x) * std::exp2(max_relative_entropy(e.state(x), avg));
  return out;
}

struct Guessing {
  double p_guess = 0.0;
  double h_min = 0.0;  // bits
};

/// Two states use 1/2 (1 + ||q1 rho1 - q2 rho2||_1), the singular-value sum
/// making orthogonal states give exactly 1. Larger ensembles use the
/// minimum-error SDP.
inline Guessing guessing_probability(const Ensemble& e) {
  Guessing g;
  if (e.size() == 1) {
    g.p_guess = 1.0;
  } else if (e.size() == 2) {
    g.p_guess = 0.5 * (1.0 + trace_norm(e.prior(0) * e.state(0).matrix() -
                                        e.prior(1) * e.state(1).matrix()));
  } else {
    g.p_guess = min_error_guessing(e).p_guess;
  }
  g.p_guess = std::min(g.p_guess, 1.0);
  g.h_min = g.p_guess >= 1.0 ? 0.0 : -std::log2(g.p_guess);
  return g;
}

}  // namespace seqmcm
