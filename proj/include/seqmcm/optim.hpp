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

// Small optimization programs: the rank-one inconclusive-rate SDP, the
// minimum-error guessing SDP, the closed-form two-state Lagrange solutions and
// derivative-free line/simplex searches.
//
// Both SDPs are solved with a primal log-barrier Newton method carried out in
// long double. At the optimum the slack matrices become singular and the
// barrier gradient is a difference of O(mu) terms, so the extra precision is
// what keeps the iterates accurate at mu ~ 1e10.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqmcm/errors.hpp"
#include "seqmcm/qcore.hpp"

namespace seqmcm {

namespace detail {

using LReal = long double;
using LComplex = std::complex<LReal>;
using LMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<LComplex, Eigen::Dynamic, 1>;
using LRealVector = Eigen::Matrix<LReal, Eigen::Dynamic, 1>;
using LRealMatrix = Eigen::Matrix<LReal, Eigen::Dynamic, Eigen::Dynamic>;

inline LMatrix widen(const ComplexMatrix& m) { return m.cast<LComplex>(); }

/// Orthonormal basis of d x d Hermitian matrices under <A,B> = tr[AB].
inline std::vector<LMatrix> hermitian_basis(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  const LReal r = 1.0L / std::sqrt(2.0L);
  std::vector<LMatrix> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    LMatrix e = LMatrix::Zero(n, n);
    e(i, i) = 1.0L;
    out.push_back(e);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      LMatrix s = LMatrix::Zero(n, n);
      s(i, j) = r;
      s(j, i) = r;
      out.push_back(s);
      LMatrix a = LMatrix::Zero(n, n);
      a(i, j) = LComplex(0.0L, -r);
      a(j, i) = LComplex(0.0L, r);
      out.push_back(a);
    }
  }
  return out;
}

inline LReal re_trace_product(const LMatrix& a, const LMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inconclusive-rate minimization for rank-one MCM elements

struct WeightSolution {
  std::vector<double> weights;    // a_x >= 0
  double inconclusive_rate = 1.0;  // eta_0 = 1 - sum_x a_x tr[rho Pi_x]
  double psd_margin = 0.0;        // min eigenvalue of 1 - sum_x a_x Pi_x
  double duality_gap = 0.0;       // barrier certificate (d + N) / mu
  bool polished = false;          // exact completion step applied
  std::size_t newton_steps = 0;
};

namespace detail {

class WeightBarrier {
 public:
  WeightBarrier(const ComplexMatrix& rho, std::span<const PureState> projectors)
      : n_(projectors.size()),
        d_(static_cast<std::size_t>(rho.rows())),
        phi_(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(n_)),
        c_(static_cast<Eigen::Index>(n_)) {
    const LMatrix r = widen(rho);
    for (std::size_t x = 0; x < n_; ++x) {
      const auto col = static_cast<Eigen::Index>(x);
      phi_.col(col) = projectors[x].amplitudes().cast<LComplex>();
      c_[col] = (phi_.col(col).adjoint() * r * phi_.col(col))(0, 0).real();
    }
  }

  LMatrix slack(const LRealVector& a) const {
    LMatrix f = LMatrix::Identity(static_cast<Eigen::Index>(d_),
                                  static_cast<Eigen::Index>(d_));
    for (std::size_t x = 0; x < n_; ++x) {
      const auto col = static_cast<Eigen::Index>(x);
      f -= a[col] * phi_.col(col) * phi_.col(col).adjoint();
    }
    return 0.5L * (f + f.adjoint());
  }

  bool strictly_feasible(const LRealVector& a) const {
    if ((a.array() <= 0.0L).any()) return false;
    Eigen::LLT<LMatrix> llt(slack(a));
    return llt.info() == Eigen::Success;
  }

  /// Damped Newton centering for fixed mu. Returns the number of steps.
  std::size_t center(LReal mu, LRealVector& a) const {
    const auto n = static_cast<Eigen::Index>(n_);
    std::size_t steps = 0;
    for (; steps < 200; ++steps) {
      Eigen::LLT<LMatrix> llt(slack(a));
      const LMatrix w = llt.solve(phi_);
      const LMatrix g = phi_.adjoint() * w;
      LRealVector grad(n);
      LRealMatrix hess(n, n);
      for (Eigen::Index x = 0; x < n; ++x) {
        grad[x] = -mu * c_[x] + g(x, x).real() - 1.0L / a[x];
        for (Eigen::Index y = 0; y < n; ++y) hess(x, y) = std::norm(g(x, y));
        hess(x, x) += 1.0L / (a[x] * a[x]);
      }
      const LRealVector step = -hess.ldlt().solve(grad);
      const LReal lam2 = -grad.dot(step);
      if (!(lam2 > 1e-24L)) break;
      LReal t = lam2 > 0.0625L ? 1.0L / (1.0L + std::sqrt(lam2)) : 1.0L;
      while (!strictly_feasible(a + t * step) && t > 1e-30L) t *= 0.5L;
      a += t * step;
    }
    return steps;
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  const LRealVector& costs() const { return c_; }

 private:
  std::size_t n_, d_;
  LMatrix phi_;
  LRealVector c_;
};

/// Moves `a` to the analytic center of the optimal face. With K the kernel of
/// the slack F = 1 - sum a_x Pi_x (eigenvalues below `kernel_tol`), the face
/// is {a >= 0 : F(a) K = 0}; the central path ends where sum log a_x +
/// log det(U^dag F U) is largest, U spanning the complement of K. Solved by
/// Newton steps in the null space of the face equations.
inline bool polish_optimal_face(std::span<const PureState> projectors, const ComplexMatrix& slack,
                                std::vector<double>& a, double kernel_tol = 1e-6) {
  const std::size_t n = projectors.size();
  const auto d = static_cast<Eigen::Index>(projectors.front().dim());
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(slack);
  Eigen::Index kdim = 0;
  while (kdim < d && es.eigenvalues()[kdim] < kernel_tol) ++kdim;
  if (kdim == 0) return false;
  const ComplexMatrix kern = es.eigenvectors().leftCols(kdim);
  const ComplexMatrix range = es.eigenvectors().rightCols(d - kdim);

  double amax = 0.0;
  for (double v : a) amax = std::max(amax, v);
  std::vector<std::size_t> active;
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] > 1e-6 * amax) active.push_back(x);
  }
  if (active.empty()) return false;
  const auto m = static_cast<Eigen::Index>(active.size());

  // sum_x a_x phi_x (phi_x^dag k) = k for each kernel vector k, split into
  // real and imaginary rows.
  const auto rows = 2 * d * kdim;
  Eigen::MatrixXd b(rows, m);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index k = 0; k < kdim; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::Index r = 2 * (k * d + i);
      rhs[r] = kern(i, k).real();
      rhs[r + 1] = kern(i, k).imag();
      for (Eigen::Index j = 0; j < m; ++j) {
        const ComplexVector& phi = projectors[active[static_cast<std::size_t>(j)]].amplitudes();
        const Complex v = phi[i] * phi.dot(kern.col(k));
        b(r, j) = v.real();
        b(r + 1, j) = v.imag();
      }
    }
  }
  Eigen::VectorXd cur(m);
  for (Eigen::Index j = 0; j < m; ++j) cur[j] = a[active[static_cast<std::size_t>(j)]];
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b);
  cod.setThreshold(1e-10);
  cur += cod.solve(rhs - b * cur);
  if ((b * cur - rhs).cwiseAbs().maxCoeff() > 1e-9) return false;
  if ((cur.array() <= 0.0).any()) return false;

  // Range-restricted slack G(a) = U^dag F(a) U and w_x = U^dag phi_x.
  const auto rdim = d - kdim;
  ComplexMatrix w(rdim, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    w.col(j) = range.adjoint() * projectors[active[static_cast<std::size_t>(j)]].amplitudes();
  }
  auto reduced = [&](const Eigen::VectorXd& v) {
    ComplexMatrix g = ComplexMatrix::Identity(rdim, rdim);
    for (Eigen::Index j = 0; j < m; ++j) g -= v[j] * w.col(j) * w.col(j).adjoint();
    return ComplexMatrix(0.5 * (g + g.adjoint()));
  };
  auto feasible = [&](const Eigen::VectorXd& v) {
    if ((v.array() <= 0.0).any()) return false;
    if (rdim == 0) return true;
    Eigen::LLT<ComplexMatrix> llt(reduced(v));
    return llt.info() == Eigen::Success;
  };
  if (!feasible(cur)) return false;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = 1e-10 * (sv.size() ? sv[0] : 0.0);
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  const Eigen::MatrixXd q = svd.matrixV().rightCols(m - rank);
  if (q.cols() > 0) {
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd inv = cur.cwiseInverse();
      Eigen::VectorXd grad = inv;
      Eigen::MatrixXd hess = inv.cwiseProduct(inv).asDiagonal();
      if (rdim > 0) {
        const ComplexMatrix gw = reduced(cur).llt().solve(w);
        const ComplexMatrix inner = w.adjoint() * gw;
        for (Eigen::Index x = 0; x < m; ++x) {
          grad[x] -= inner(x, x).real();
          for (Eigen::Index y = 0; y < m; ++y) hess(x, y) += std::norm(inner(x, y));
        }
      }
      // Maximize: ascend along q with the negated Hessian.
      const Eigen::VectorXd rg = q.transpose() * grad;
      const Eigen::VectorXd dy = (q.transpose() * hess * q).ldlt().solve(rg);
      const double lam2 = rg.dot(dy);
      if (!(lam2 > 1e-30)) break;
      double t = lam2 > 0.0625 ? 1.0 / (1.0 + std::sqrt(lam2)) : 1.0;
      Eigen::VectorXd next = cur + t * (q * dy);
      while (!feasible(next) && t > 1e-30) {
        t *= 0.5;
        next = cur + t * (q * dy);
      }
      cur = next;
    }
  }
  // Near-null directions may leave sum a_x Pi_x slightly above 1; rescale.
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < m; ++j) {
    total += cur[j] * projectors[active[static_cast<std::size_t>(j)]].projector();
  }
  const double top = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(total, Eigen::EigenvaluesOnly)
                         .eigenvalues()[d - 1];
  if (top > 1.0) cur /= top;
  std::fill(a.begin(), a.end(), 0.0);
  for (Eigen::Index j = 0; j < m; ++j) a[active[static_cast<std::size_t>(j)]] = cur[j];
  return true;
}

}  // namespace detail

/// Maximizes sum_x a_x tr[rho Pi_x] subject to a_x >= 0 and
/// 1 - sum_x a_x Pi_x >= 0, where rho is the ensemble average and Pi_x are
/// the rank-one projectors |phi_x><phi_x|.
inline WeightSolution min_inconclusive_rate(const Ensemble& e,
                                            std::span<const PureState> projectors) {
  if (projectors.empty()) {
    throw ValidationError("min_inconclusive_rate: no projectors");
  }
  for (const auto& p : projectors) {
    if (p.dim() != e.dim()) {
      throw ValidationError("min_inconclusive_rate: projector dimension mismatch");
    }
  }
  const detail::WeightBarrier barrier(e.average(), projectors);
  const std::size_t n = projectors.size();
  const auto m = static_cast<detail::LReal>(n + e.dim());
  detail::LRealVector a =
      detail::LRealVector::Constant(static_cast<Eigen::Index>(n),
                                    0.5L / static_cast<detail::LReal>(n));
  WeightSolution out;
  detail::LReal mu = 1.0L;
  const detail::LReal mu_max = m * 1e10L;
  while (true) {
    out.newton_steps += barrier.center(mu, a);
    if (mu >= mu_max) break;
    mu = std::min(mu * 8.0L, mu_max);
  }
  out.duality_gap = static_cast<double>(m / mu);
  out.weights.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    out.weights[x] = static_cast<double>(a[static_cast<Eigen::Index>(x)]);
  }

  auto evaluate = [&](const std::vector<double>& w, double& objective,
                      double& margin) {
    ComplexMatrix f = identity(e.dim());
    objective = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      f -= w[x] * projectors[x].projector();
      objective += w[x] * static_cast<double>(barrier.costs()[static_cast<Eigen::Index>(x)]);
    }
    margin = min_eigenvalue(f);
  };
  double objective = 0.0;
  evaluate(out.weights, objective, out.psd_margin);

  {
    std::vector<double> polished = out.weights;
    const ComplexMatrix slack = barrier.slack(a).cast<Complex>();
    if (detail::polish_optimal_face(projectors, slack, polished)) {
      double pobj = 0.0, pmargin = 0.0;
      evaluate(polished, pobj, pmargin);
      if (pmargin >= -1e-12 && pobj >= objective - 1e-9) {
        out.weights = std::move(polished);
        objective = pobj;
        out.psd_margin = pmargin;
        out.polished = true;
      }
    }
  }
  out.inconclusive_rate = std::clamp(1.0 - objective, 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Minimum-error discrimination

struct GuessingSolution {
  double p_guess = 0.0;      // dual value tr[Y] (upper bound)
  double lower_bound = 0.0;  // primal value of the recovered POVM
  double duality_gap = 0.0;
  std::vector<ComplexMatrix> povm;
};

inline constexpr std::size_t kGuessingMaxDim = 4;
inline constexpr std::size_t kGuessingMaxStates = 6;

/// max_M sum_x q_x tr[rho_x M_x] through the dual min tr[Y] s.t.
/// Y >= q_x rho_x for all x.
inline GuessingSolution min_error_guessing(const Ensemble& e) {
  if (e.dim() > kGuessingMaxDim || e.size() > kGuessingMaxStates) {
    throw UnsupportedScaleError(
        "min_error_guessing: supported up to d = 4 and N = 6, got d = " +
        std::to_string(e.dim()) + ", N = " + std::to_string(e.size()));
  }
  using namespace detail;
  const std::size_t d = e.dim();
  const std::size_t n = e.size();
  const auto di = static_cast<Eigen::Index>(d);
  const auto basis = hermitian_basis(d);
  const auto k = static_cast<Eigen::Index>(basis.size());
  std::vector<LMatrix> a;
  for (std::size_t x = 0; x < n; ++x) a.push_back(widen(e.prior(x) * e.state(x).matrix()));

  auto assemble = [&](const LRealVector& y) {
    LMatrix m = LMatrix::Zero(di, di);
    for (Eigen::Index i = 0; i < k; ++i) m += y[i] * basis[static_cast<std::size_t>(i)];
    return m;
  };
  auto feasible = [&](const LRealVector& y) {
    const LMatrix m = assemble(y);
    for (const auto& ax : a) {
      Eigen::LLT<LMatrix> llt(m - ax);
      if (llt.info() != Eigen::Success) return false;
    }
    return true;
  };

  // Y = 2 * 1 is strictly feasible since q_x rho_x <= 1.
  LRealVector y = LRealVector::Zero(k);
  for (Eigen::Index i = 0; i < di; ++i) y[i] = 2.0L;
  LRealVector trace_coeff(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    trace_coeff[i] = basis[static_cast<std::size_t>(i)].trace().real();
  }

  const auto m = static_cast<LReal>(n * d);
  LReal mu = 1.0L;
  const LReal mu_max = m * 1e10L;
  std::vector<LMatrix> z(n);
  while (true) {
    for (int it = 0; it < 200; ++it) {
      const LMatrix ym = assemble(y);
      LRealVector grad = mu * trace_coeff;
      LRealMatrix hess = LRealMatrix::Zero(k, k);
      for (std::size_t x = 0; x < n; ++x) {
        z[x] = (ym - a[x]).inverse();
        z[x] = 0.5L * (z[x] + z[x].adjoint());
        std::vector<LMatrix> ze(static_cast<std::size_t>(k));
        for (Eigen::Index i = 0; i < k; ++i) {
          ze[static_cast<std::size_t>(i)] = z[x] * basis[static_cast<std::size_t>(i)];
          grad[i] -= re_trace_product(z[x], basis[static_cast<std::size_t>(i)]);
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          for (Eigen::Index j = i; j < k; ++j) {
            const LReal v = re_trace_product(ze[static_cast<std::size_t>(i)],
                                             ze[static_cast<std::size_t>(j)]);
            hess(i, j) += v;
            if (j != i) hess(j, i) += v;
          }
        }
      }
      const LRealVector step = -hess.ldlt().solve(grad);
      const LReal lam2 = -grad.dot(step);
      if (!(lam2 > 1e-24L)) break;
      LReal t = lam2 > 0.0625L ? 1.0L / (1.0L + std::sqrt(lam2)) : 1.0L;
      while (!feasible(y + t * step) && t > 1e-30L) t *= 0.5L;
      y += t * step;
    }
    if (mu >= mu_max) break;
    mu = std::min(mu * 8.0L, mu_max);
  }

  GuessingSolution out;
  const LMatrix ym = assemble(y);
  out.p_guess = static_cast<double>(ym.trace().real());
  out.duality_gap = static_cast<double>(m / mu);
  // Primal recovery: M_x = (Y - A_x)^{-1} / mu, renormalized to sum to 1.
  LMatrix total = LMatrix::Zero(di, di);
  std::vector<ComplexMatrix> povm;
  for (std::size_t x = 0; x < n; ++x) {
    const LMatrix zx = (ym - a[x]).inverse() / mu;
    povm.push_back(hermitian_part(zx.cast<Complex>()));
    total += zx;
  }
  const ComplexMatrix s = pinv_sqrt(hermitian_part(total.cast<Complex>())).matrix;
  double lower = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    povm[x] = hermitian_part(s * povm[x] * s);
    lower += e.prior(x) * trace_product(e.state(x).matrix(), povm[x]).real();
  }
  out.lower_bound = lower;
  out.povm = std::move(povm);
  return out;
}

// ---------------------------------------------------------------------------
// Two-state least-disturbing MCM and the multi-party gain schedule

struct LeastDisturbing {
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;            // inconclusive weight, a + b = 1 / (1 - s^2)
  double new_overlap = 0.0;  // |<varphi_1|varphi_2>|
};

/// Equal-weight Kraus parameters that realize information gain `gain` with
/// the smallest possible overlap increase, for two states of confidence
/// `confidence` whose MCM vectors have overlap `overlap`.
inline LeastDisturbing two_state_least_disturbing(double confidence, double overlap,
                                                  double gain) {
  if (!(confidence > 0.0 && confidence <= 1.0)) {
    throw DomainError("two_state_least_disturbing: confidence must be in (0, 1]");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw DomainError("two_state_least_disturbing: overlap must be in [0, 1)");
  }
  const double max_gain = confidence * (1.0 - overlap);
  if (!(gain >= 0.0) || gain > max_gain * (1.0 + 1e-12)) {
    throw InfeasibleError("two_state_least_disturbing: gain " + std::to_string(gain) +
                          " exceeds the maximum C(1 - s) = " + std::to_string(max_gain));
  }
  gain = std::min(gain, max_gain);
  const double one_minus_s2 = 1.0 - overlap * overlap;
  LeastDisturbing out;
  out.a1 = out.a2 = gain / (confidence * one_minus_s2);
  out.b = std::max(0.0, 1.0 / one_minus_s2 - out.a1);
  out.new_overlap = std::min(1.0, overlap / (1.0 - gain / confidence));
  return out;
}

/// Same family parameterized by the overlap `target` of the post-measurement
/// states, target in [overlap, 1]. The gain is C(1 - overlap / target); the
/// weights avoid the cancellation in 1 - gain / C near target = 1.
inline LeastDisturbing two_state_least_disturbing_to_overlap(double overlap, double target) {
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw DomainError("two_state_least_disturbing_to_overlap: overlap must be in [0, 1)");
  }
  if (!(target <= 1.0) || target < overlap * (1.0 - 1e-12)) {
    throw InfeasibleError("two_state_least_disturbing_to_overlap: target overlap " +
                          std::to_string(target) + " outside [" + std::to_string(overlap) +
                          ", 1]");
  }
  const double ratio = target > 0.0 ? std::min(overlap / target, 1.0) : 0.0;
  const double one_minus_s2 = 1.0 - overlap * overlap;
  LeastDisturbing out;
  out.a1 = out.a2 = (1.0 - ratio) / one_minus_s2;
  out.b = ratio / one_minus_s2;
  out.new_overlap = std::max(target, overlap);
  return out;
}

struct GainSchedule {
  std::vector<double> gains;     // G^(j), j = 1..R
  std::vector<double> overlaps;  // s^(j), j = 1..R+1
  double joint_success = 0.0;    // P_J
  bool degenerate = false;       // s = 0: orthogonal effective states
  std::string note;
};

/// Equal-gain schedule maximizing P_J = prod_j G^(j) / C^{R-1} subject to
/// s = prod_j (1 - G^(j) / C).
inline GainSchedule optimal_joint_schedule(double confidence, double overlap,
                                           std::size_t parties) {
  if (parties == 0) throw ValidationError("optimal_joint_schedule: need R >= 1");
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw DomainError("optimal_joint_schedule: overlap must be in [0, 1]");
  }
  GainSchedule out;
  const double r = static_cast<double>(parties);
  if (overlap == 0.0) {
    out.degenerate = true;
    out.note = "s = 0: effective states are orthogonal, every party gains C";
    out.gains.assign(parties, confidence);
    out.overlaps.assign(parties + 1, 0.0);
    out.joint_success = confidence;
    return out;
  }
  const double root = std::pow(overlap, 1.0 / r);
  out.gains.assign(parties, confidence * (1.0 - root));
  for (std::size_t j = 1; j <= parties + 1; ++j) {
    out.overlaps.push_back(std::pow(overlap, 1.0 - static_cast<double>(j - 1) / r));
  }
  out.overlaps.back() = 1.0;
  out.joint_success = confidence * std::pow(1.0 - root, r);
  return out;
}

/// P_J = prod_j G^(j) / C^{R-1} for an arbitrary gain list.
inline double joint_success_for_gains(double confidence, std::span<const double> gains) {
  double p = confidence;
  for (double g : gains) p *= g / confidence;
  return p;
}

// ---------------------------------------------------------------------------
// Derivative-free searches

struct SearchResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
inline SearchResult golden_section(const std::function<double(double)>& f, double lo,
                                   double hi, double xtol = 1e-10,
                                   std::size_t max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  SearchResult out;
  out.evaluations = 2;
  for (; out.iterations < max_iter && (b - a) > xtol; ++out.iterations) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  out.converged = (b - a) <= xtol;
  // Endpoints are candidates too: the minimum may sit on the boundary.
  const double xs[] = {c, d, lo, hi};
  const double fs[] = {fc, fd, f(lo), f(hi)};
  out.evaluations += 2;
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  out.x = {xs[best]};
  out.value = fs[best];
  return out;
}

struct NelderMeadOptions {
  std::size_t max_iter = 500;
  double ftol = 1e-10;  // relative spread of simplex values
  double xtol = 1e-8;   // simplex diameter
};

inline SearchResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x0, std::vector<double> step,
                                const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (step.size() != n) throw ValidationError("nelder_mead: step size mismatch");
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  SearchResult out;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
  out.evaluations = n + 1;

  std::vector<std::size_t> order(n + 1);
  for (; out.iterations < opt.max_iter; ++out.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[n - 1];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
      }
    }
    const double spread = std::abs(fv[worst] - fv[best]);
    if (spread <= opt.ftol * (std::abs(fv[best]) + 1e-30) + 1e-300 &&
        diameter <= opt.xtol) {
      out.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      }
      return p;
    };
    std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    ++out.evaluations;
    if (fr < fv[best]) {
      std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      ++out.evaluations;
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      std::vector<double> xc = along(outside ? -0.5 : 0.5);
      const double fc = f(xc);
      ++out.evaluations;
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) {
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          fv[i] = f(simplex[i]);
          ++out.evaluations;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  out.x = simplex[best];
  out.value = fv[best];
  return out;
}

}  // namespace seqmcm
