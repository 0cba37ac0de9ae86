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

// Dense complex linear algebra at small dimension and the quantum value
// types (states, ensembles, POVMs) the rest of the library consumes.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seqmcm/errors.hpp"

namespace seqmcm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using BlochVector = std::array<double, 3>;

inline constexpr std::size_t kMaxDim = 8;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kPsd = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kNorm = 1e-12;
inline constexpr double kPriorSum = 1e-12;
inline constexpr double kRank = 1e-10;
}  // namespace tol

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Matrix helpers

inline ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim));
}

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// max_ij |A - A^dagger|_ij
inline double hermitian_asymmetry(const ComplexMatrix& a) {
  return max_abs(a - a.adjoint());
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

inline Complex trace(const ComplexMatrix& a) { return a.trace(); }

/// tr[A B] without forming the product.
inline Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows()
       << "x" << a.cols();
    throw ValidationError(os.str());
  }
}

inline void require_dim_cap(std::size_t dim, const char* what) {
  if (dim == 0 || dim > kMaxDim) {
    throw UnsupportedScaleError(std::string(what) + ": dimension " +
                                std::to_string(dim) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

inline void require_hermitian(const ComplexMatrix& a, const char* what) {
  require_square(a, what);
  const double asym = hermitian_asymmetry(a);
  if (asym > tol::kHermitian * std::max(1.0, max_abs(a))) {
    std::ostringstream os;
    os.precision(3);
    os << what << ": matrix is not Hermitian (max |A - A^dagger| = " << asym
       << ")";
    throw ValidationError(os.str());
  }
}

/// Makes the first non-negligible component real and positive.
inline void fix_phase(ComplexVector& v) {
  const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > 1e-10 * scale) {
      v *= std::conj(v[i]) / mag;
      v[i] = Complex(mag, 0.0);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Pure states

class PureState {
 public:
  /// Takes amplitudes that are already unit norm (within 1e-12).
  explicit PureState(ComplexVector amplitudes) : amp_(std::move(amplitudes)) {
    require_dim_cap(static_cast<std::size_t>(amp_.size()), "PureState");
    const double n = amp_.norm();
    if (std::abs(n - 1.0) > tol::kNorm) {
      std::ostringstream os;
      os.precision(17);
      os << "PureState: norm " << n << " differs from 1";
      throw ValidationError(os.str());
    }
  }

  /// Normalizes arbitrary nonzero amplitudes.
  static PureState normalized(ComplexVector v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ValidationError("PureState: cannot normalize a zero vector");
    }
    v /= n;
    return PureState(std::move(v));
  }

  static PureState basis(std::size_t dim, std::size_t index) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return PureState(std::move(v));
  }

  const ComplexVector& amplitudes() const { return amp_; }
  std::size_t dim() const { return static_cast<std::size_t>(amp_.size()); }
  ComplexMatrix projector() const { return amp_ * amp_.adjoint(); }
  Complex inner(const PureState& other) const { return amp_.dot(other.amp_); }

 private:
  ComplexVector amp_;
};

// ---------------------------------------------------------------------------
// Eigendecomposition

namespace detail {

struct RawEigen {
  RealVector values;      // descending
  ComplexMatrix vectors;  // columns, phase-fixed
};

/// Eigendecomposition of the Hermitian part of `a`, descending order.
inline RawEigen eigh(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw InvariantError("eigh: eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  RawEigen out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    ComplexVector v = solver.eigenvectors().col(n - 1 - i);
    fix_phase(v);
    out.vectors.col(i) = v;
  }
  return out;
}

inline ComplexMatrix spectral_map(const RawEigen& e,
                                  const std::vector<double>& mapped) {
  const Eigen::Index n = e.values.size();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mapped[static_cast<std::size_t>(i)] != 0.0) {
      out += mapped[static_cast<std::size_t>(i)] * e.vectors.col(i) *
             e.vectors.col(i).adjoint();
    }
  }
  return out;
}

}  // namespace detail

struct Eigensystem {
  std::vector<double> values;       // descending
  std::vector<PureState> vectors;   // orthonormal, first nonzero entry > 0
};

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian
/// matrix. Throws ValidationError naming the asymmetry otherwise.
inline Eigensystem eig_hermitian(const ComplexMatrix& a) {
  require_hermitian(a, "eig_hermitian");
  const detail::RawEigen raw = detail::eigh(a);
  Eigensystem out;
  out.values.reserve(static_cast<std::size_t>(raw.values.size()));
  for (Eigen::Index i = 0; i < raw.values.size(); ++i) {
    out.values.push_back(raw.values[i]);
    ComplexVector v = raw.vectors.col(i);
    v.normalize();
    out.vectors.emplace_back(std::move(v));
  }
  return out;
}

inline double max_eigenvalue(const ComplexMatrix& hermitian) {
  return detail::eigh(hermitian).values[0];
}

inline double min_eigenvalue(const ComplexMatrix& hermitian) {
  const RealVector v = detail::eigh(hermitian).values;
  return v[v.size() - 1];
}

/// Rank threshold for support decisions: `rank_tol` relative to the largest
/// eigenvalue.
inline double support_threshold(const RealVector& descending, double rank_tol) {
  const double top = descending.size() ? descending[0] : 0.0;
  return rank_tol * std::max(top, 0.0);
}

struct PinvSqrt {
  ComplexMatrix matrix;
  std::size_t rank = 0;
};

/// Support-restricted inverse square root of a PSD matrix:
/// sum over eigenvalues above rank_tol * lambda_max of lambda^{-1/2} |v><v|.
inline PinvSqrt pinv_sqrt(const ComplexMatrix& a, double rank_tol = tol::kRank) {
  require_square(a, "pinv_sqrt");
  const detail::RawEigen e = detail::eigh(a);
  const double cut = support_threshold(e.values, rank_tol);
  std::vector<double> mapped(static_cast<std::size_t>(e.values.size()), 0.0);
  PinvSqrt out;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values[i] > cut) {
      mapped[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(e.values[i]);
      ++out.rank;
    }
  }
  out.matrix = detail::spectral_map(e, mapped);
  return out;
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues clip to 0.
inline ComplexMatrix sqrt_psd(const ComplexMatrix& a) {
  require_square(a, "sqrt_psd");
  const detail::RawEigen e = detail::eigh(a);
  // Eigenvalues at rounding level are zero; their square roots would not be.
  const double cut = 16.0 * std::numeric_limits<double>::epsilon() * e.values.cwiseAbs().maxCoeff();
  std::vector<double> mapped(static_cast<std::size_t>(e.values.size()));
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    mapped[static_cast<std::size_t>(i)] = e.values[i] > cut ? std::sqrt(e.values[i]) : 0.0;
  }
  return detail::spectral_map(e, mapped);
}

/// Orthogonal projector onto the kernel (eigenvalues <= rank_tol * lambda_max).
inline ComplexMatrix kernel_projector(const ComplexMatrix& psd,
                                      double rank_tol = tol::kRank) {
  const detail::RawEigen e = detail::eigh(psd);
  const double cut = support_threshold(e.values, rank_tol);
  std::vector<double> mapped(static_cast<std::size_t>(e.values.size()), 0.0);
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values[i] <= cut) mapped[static_cast<std::size_t>(i)] = 1.0;
  }
  return detail::spectral_map(e, mapped);
}

/// Orthonormal basis (columns) of the range of a PSD matrix.
inline ComplexMatrix range_basis(const ComplexMatrix& psd,
                                 double rank_tol = tol::kRank) {
  const detail::RawEigen e = detail::eigh(psd);
  const double cut = support_threshold(e.values, rank_tol);
  Eigen::Index rank = 0;
  while (rank < e.values.size() && e.values[rank] > cut) ++rank;
  return e.vectors.leftCols(rank);
}

/// Sum of singular values. The Hermitian path uses |eigenvalues|.
inline double trace_norm(const ComplexMatrix& a) {
  if (a.rows() == a.cols() &&
      hermitian_asymmetry(a) <= 1e-12 * std::max(1.0, max_abs(a))) {
    return detail::eigh(a).values.cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().sum();
}

// ---------------------------------------------------------------------------
// Density matrices

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), PSD (eigenvalues >= -1e-10) and unit
  /// trace (1e-10). Stores the exact Hermitian part.
  explicit DensityMatrix(const ComplexMatrix& m) {
    require_square(m, "DensityMatrix");
    require_dim_cap(static_cast<std::size_t>(m.rows()), "DensityMatrix");
    require_hermitian(m, "DensityMatrix");
    mat_ = hermitian_part(m);
    const double tr = mat_.trace().real();
    if (std::abs(tr - 1.0) > tol::kTrace) {
      std::ostringstream os;
      os.precision(17);
      os << "DensityMatrix: trace " << tr << " differs from 1";
      throw ValidationError(os.str());
    }
    const double lo = min_eigenvalue(mat_);
    if (lo < -tol::kPsd) {
      std::ostringstream os;
      os.precision(6);
      os << "DensityMatrix: not positive semidefinite (min eigenvalue " << lo
         << ")";
      throw ValidationError(os.str());
    }
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.projector());
  }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
  }

  const ComplexMatrix& matrix() const { return mat_; }
  std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }

 private:
  ComplexMatrix mat_;
};

/// tr[rho^2]
inline double purity(const DensityMatrix& rho) {
  return trace_product(rho.matrix(), rho.matrix()).real();
}

/// ||rho - sigma||_1 as the plain sum of singular values: orthogonal pure
/// states are at distance 2, not 1. No 1/2 normalization is applied.
inline double trace_norm_distance(const DensityMatrix& rho,
                                  const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw ValidationError("trace_norm_distance: dimension mismatch (" +
                          std::to_string(rho.dim()) + " vs " +
                          std::to_string(sigma.dim()) + ")");
  }
  return trace_norm(rho.matrix() - sigma.matrix());
}

// ---------------------------------------------------------------------------
// Qubit Bloch representation

inline const std::array<ComplexMatrix, 3>& pauli() {
  static const std::array<ComplexMatrix, 3> p = [] {
    std::array<ComplexMatrix, 3> out{ComplexMatrix(2, 2), ComplexMatrix(2, 2),
                                     ComplexMatrix(2, 2)};
    out[0] << 0.0, 1.0, 1.0, 0.0;
    out[1] << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    out[2] << 1.0, 0.0, 0.0, -1.0;
    return out;
  }();
  return p;
}

inline BlochVector to_bloch(const DensityMatrix& rho) {
  if (rho.dim() != 2) {
    throw ValidationError("to_bloch: qubit state required, got dimension " +
                          std::to_string(rho.dim()));
  }
  const auto& s = pauli();
  return {trace_product(rho.matrix(), s[0]).real(),
          trace_product(rho.matrix(), s[1]).real(),
          trace_product(rho.matrix(), s[2]).real()};
}

inline double norm(const BlochVector& r) {
  return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
}

/// rho = (1 + r . sigma) / 2; |r| may exceed 1 by at most 1e-10.
inline DensityMatrix from_bloch(const BlochVector& r) {
  const double len = norm(r);
  if (!(len <= 1.0 + 1e-10)) {
    std::ostringstream os;
    os.precision(17);
    os << "from_bloch: Bloch vector length " << len << " exceeds 1";
    throw ValidationError(os.str());
  }
  const auto& s = pauli();
  ComplexMatrix m = identity(2);
  for (std::size_t k = 0; k < 3; ++k) m += r[k] * s[k];
  m *= 0.5;
  if (len > 1.0) {
    // Clip the overshoot so the PSD check sees an exact pure state.
    m = 0.5 * (identity(2) + (m * 2.0 - identity(2)) / len);
  }
  return DensityMatrix(m);
}

// ---------------------------------------------------------------------------
// Ensembles

class Ensemble {
 public:
  Ensemble(std::vector<double> priors, std::vector<DensityMatrix> states)
      : priors_(std::move(priors)), states_(std::move(states)) {
    if (priors_.empty() || priors_.size() != states_.size()) {
      throw ValidationError("Ensemble: need equal, nonzero numbers of priors (" +
                            std::to_string(priors_.size()) + ") and states (" +
                            std::to_string(states_.size()) + ")");
    }
    double sum = 0.0;
    for (double q : priors_) {
      if (!(q >= 0.0)) throw ValidationError("Ensemble: negative prior");
      sum += q;
    }
    if (std::abs(sum - 1.0) > tol::kPriorSum) {
      std::ostringstream os;
      os.precision(17);
      os << "Ensemble: priors sum to " << sum;
      throw ValidationError(os.str());
    }
    for (const auto& s : states_) {
      if (s.dim() != states_.front().dim()) {
        throw ValidationError("Ensemble: states have different dimensions");
      }
    }
  }

  static Ensemble uniform(std::vector<DensityMatrix> states) {
    std::vector<double> q(states.size(), 1.0 / static_cast<double>(states.size()));
    return Ensemble(std::move(q), std::move(states));
  }

  std::size_t size() const { return states_.size(); }
  std::size_t dim() const { return states_.front().dim(); }
  double prior(std::size_t x) const { return priors_.at(x); }
  const DensityMatrix& state(std::size_t x) const { return states_.at(x); }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<DensityMatrix>& states() const { return states_; }

  /// rho = sum_x q_x rho_x
  ComplexMatrix average() const {
    ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim()),
                                            static_cast<Eigen::Index>(dim()));
    for (std::size_t x = 0; x < size(); ++x) rho += priors_[x] * states_[x].matrix();
    return hermitian_part(rho);
  }

 private:
  std::vector<double> priors_;
  std::vector<DensityMatrix> states_;
};

// ---------------------------------------------------------------------------
// POVMs

/// Conclusive elements are indexed by label: conclusive()[x] pairs with
/// state x of the ensemble. The inconclusive element is M0. Construction only
/// checks shapes; validate_povm() reports positivity and completeness.
class Povm {
 public:
  Povm(std::vector<ComplexMatrix> conclusive, ComplexMatrix inconclusive)
      : conclusive_(std::move(conclusive)), inconclusive_(std::move(inconclusive)) {
    require_square(inconclusive_, "Povm");
    for (const auto& m : conclusive_) {
      if (m.rows() != inconclusive_.rows() || m.cols() != inconclusive_.cols()) {
        throw ValidationError("Povm: element dimensions differ");
      }
    }
  }

  /// M0 = 1 - sum_x M_x.
  static Povm complete(std::vector<ComplexMatrix> conclusive) {
    if (conclusive.empty()) {
      throw ValidationError("Povm::complete: no conclusive elements");
    }
    ComplexMatrix m0 = identity(static_cast<std::size_t>(conclusive.front().rows()));
    for (const auto& m : conclusive) m0 -= m;
    return Povm(std::move(conclusive), hermitian_part(m0));
  }

  /// Rank-one elements a_x |phi_x><phi_x| completed by M0.
  static Povm rank_one(std::span<const PureState> projectors,
                       std::span<const double> weights) {
    if (projectors.size() != weights.size()) {
      throw ValidationError("Povm::rank_one: projector/weight count mismatch");
    }
    std::vector<ComplexMatrix> elems;
    for (std::size_t x = 0; x < projectors.size(); ++x) {
      elems.push_back(weights[x] * projectors[x].projector());
    }
    return complete(std::move(elems));
  }

  const std::vector<ComplexMatrix>& conclusive() const { return conclusive_; }
  const ComplexMatrix& inconclusive() const { return inconclusive_; }
  std::size_t size() const { return conclusive_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(inconclusive_.rows()); }

 private:
  std::vector<ComplexMatrix> conclusive_;
  ComplexMatrix inconclusive_;
};

struct PovmReport {
  std::vector<double> conclusive_min_eigenvalues;
  double inconclusive_min_eigenvalue = 0.0;
  double completeness_residual = 0.0;  // max entrywise |M0 + sum M_x - 1|
  double hermitian_residual = 0.0;
  bool passed = false;

  double psd_margin() const {
    double m = inconclusive_min_eigenvalue;
    for (double v : conclusive_min_eigenvalues) m = std::min(m, v);
    return m;
  }
};

inline PovmReport validate_povm(const Povm& p, double tolerance = tol::kPsd) {
  PovmReport r;
  ComplexMatrix sum = p.inconclusive();
  r.hermitian_residual = hermitian_asymmetry(p.inconclusive());
  for (const auto& m : p.conclusive()) {
    r.hermitian_residual = std::max(r.hermitian_residual, hermitian_asymmetry(m));
    r.conclusive_min_eigenvalues.push_back(min_eigenvalue(m));
    sum += m;
  }
  r.inconclusive_min_eigenvalue = min_eigenvalue(p.inconclusive());
  r.completeness_residual = max_abs(sum - identity(p.dim()));
  r.passed = r.psd_margin() >= -tolerance && r.completeness_residual <= tolerance &&
             r.hermitian_residual <= tolerance;
  return r;
}

}  // namespace seqmcm
