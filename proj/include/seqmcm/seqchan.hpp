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

// Weak measurements, Kraus channels and multi-party sequential runs.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmcm/errors.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"

namespace seqmcm {

/// Label carried by Kraus operators of the inconclusive outcome.
inline constexpr std::size_t kInconclusive = std::numeric_limits<std::size_t>::max();

struct KrausOp {
  std::size_t label = kInconclusive;
  ComplexMatrix op;
};

class KrausChannel {
 public:
  /// Throws ConstructionError when max|sum K^dag K - 1| exceeds `tolerance`.
  explicit KrausChannel(std::vector<KrausOp> ops, double tolerance = 1e-9)
      : ops_(std::move(ops)) {
    if (ops_.empty()) throw ValidationError("KrausChannel: no operators");
    const auto d = ops_.front().op.cols();
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto& k : ops_) {
      if (k.op.rows() != d || k.op.cols() != d) {
        throw ValidationError("KrausChannel: operator dimensions differ");
      }
      sum += k.op.adjoint() * k.op;
    }
    residual_ = max_abs(sum - identity(static_cast<std::size_t>(d)));
    if (!(residual_ <= tolerance)) {
      throw ConstructionError("KrausChannel: completeness residual " +
                                  std::to_string(residual_) + " exceeds tolerance",
                              residual_);
    }
  }

  static KrausChannel identity_channel(std::size_t dim) {
    return KrausChannel({KrausOp{kInconclusive, identity(dim)}});
  }

  const std::vector<KrausOp>& operators() const { return ops_; }
  std::size_t dim() const { return static_cast<std::size_t>(ops_.front().op.cols()); }
  double completeness_residual() const { return residual_; }

  /// sum_i K_i rho K_i^dag
  DensityMatrix apply(const DensityMatrix& rho) const {
    if (rho.dim() != dim()) {
      throw ValidationError("KrausChannel::apply: dimension mismatch (" +
                            std::to_string(rho.dim()) + " vs " + std::to_string(dim()) + ")");
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    for (const auto& k : ops_) out += k.op * rho.matrix() * k.op.adjoint();
    return DensityMatrix(hermitian_part(out));
  }

  /// Maps every state; priors are unchanged.
  Ensemble apply(const Ensemble& e) const {
    std::vector<DensityMatrix> states;
    for (const auto& s : e.states()) states.push_back(apply(s));
    return Ensemble(e.priors(), std::move(states));
  }

  /// Effective POVM: M_x = sum over operators labelled x of K^dag K.
  Povm povm(std::size_t labels) const {
    const auto d = static_cast<Eigen::Index>(dim());
    std::vector<ComplexMatrix> conc(labels, ComplexMatrix::Zero(d, d));
    ComplexMatrix m0 = ComplexMatrix::Zero(d, d);
    for (const auto& k : ops_) {
      const ComplexMatrix e = k.op.adjoint() * k.op;
      if (k.label == kInconclusive) {
        m0 += e;
      } else if (k.label < labels) {
        conc[k.label] += e;
      } else {
        throw ValidationError("KrausChannel::povm: label " + std::to_string(k.label) +
                              " out of range");
      }
    }
    for (auto& m : conc) m = hermitian_part(m);
    return Povm(std::move(conc), hermitian_part(m0));
  }

 private:
  std::vector<KrausOp> ops_;
  double residual_ = 0.0;
};

// ---------------------------------------------------------------------------
// Weak MCMs

struct WeakMcm {
  Povm base;
  std::vector<double> alpha;  // per conclusive label, in [0, 1]
  /// Post-measurement state per label. Requires a rank-one base element;
  /// nullopt gives K_x = sqrt(alpha_x M_x).
  std::vector<std::optional<PureState>> retarget;
  /// Optional measurement vectors |phi_x> with M_x = a_x |phi_x><phi_x|. Their
  /// phases matter only for the inconclusive retarget form of K0; when empty
  /// they are taken from the eigendecomposition of M_x.
  std::vector<PureState> measurement;
  /// Unitary applied after sqrt(M0~); empty means identity.
  ComplexMatrix v0;
  /// When set, K0 = sum_x sqrt(b_x) |varphi_x><phi_x| with the conclusive
  /// retarget and measurement vectors instead of V0 sqrt(M0~).
  std::optional<std::vector<double>> inconclusive_retarget;
};

/// M~_x = alpha_x M_x, M~_0 = 1 - sum_x M~_x.
inline Povm weaken(const Povm& povm, std::span<const double> alpha) {
  if (alpha.size() != povm.size()) {
    throw ValidationError("weaken: expected " + std::to_string(povm.size()) +
                          " weakening factors, got " + std::to_string(alpha.size()));
  }
  std::vector<ComplexMatrix> conc;
  for (std::size_t x = 0; x < povm.size(); ++x) {
    if (!(alpha[x] >= 0.0 && alpha[x] <= 1.0)) {
      throw ValidationError("weaken: alpha must lie in [0, 1]");
    }
    conc.push_back(alpha[x] * povm.conclusive()[x]);
  }
  Povm out = Povm::complete(std::move(conc));
  const double lo = min_eigenvalue(out.inconclusive());
  if (lo < -tol::kPsd) {
    throw InfeasibleError("weaken: inconclusive element not positive semidefinite (min "
                          "eigenvalue " + std::to_string(lo) + ")");
  }
  return out;
}

inline Povm weaken(const Povm& povm, double alpha) {
  const std::vector<double> a(povm.size(), alpha);
  return weaken(povm, a);
}

namespace detail {

struct RankOne {
  double weight = 0.0;
  ComplexVector vector;
};

inline RankOne rank_one_factor(const ComplexMatrix& m, std::size_t label,
                               const PureState* given) {
  if (given) {
    const ComplexVector& v = given->amplitudes();
    const double a = (v.adjoint() * m * v)(0, 0).real();
    if (max_abs(m - a * v * v.adjoint()) > 1e-10 * std::max(1.0, a)) {
      throw ValidationError("kraus_from_weak: measurement vector of label " +
                            std::to_string(label) + " does not match its element");
    }
    return {std::max(a, 0.0), v};
  }
  const RawEigen e = eigh(m);
  RankOne out{std::max(e.values[0], 0.0), e.vectors.col(0)};
  if (e.values.size() > 1 && std::abs(e.values[1]) > 1e-10 * std::max(1.0, out.weight)) {
    throw ValidationError("kraus_from_weak: retarget given for label " +
                          std::to_string(label) + " whose element is not rank one");
  }
  return out;
}

}  // namespace detail

inline KrausChannel kraus_from_weak(const WeakMcm& w) {
  const std::size_t n = w.base.size();
  const std::size_t d = w.base.dim();
  const Povm weak = weaken(w.base, w.alpha);
  if (!w.retarget.empty() && w.retarget.size() != n) {
    throw ValidationError("kraus_from_weak: retarget list size mismatch");
  }
  if (!w.measurement.empty() && w.measurement.size() != n) {
    throw ValidationError("kraus_from_weak: measurement list size mismatch");
  }
  std::vector<KrausOp> ops;
  std::vector<detail::RankOne> factors(n);
  for (std::size_t x = 0; x < n; ++x) {
    const bool has_target = !w.retarget.empty() && w.retarget[x].has_value();
    if (has_target) {
      if (w.retarget[x]->dim() != d) {
        throw ValidationError("kraus_from_weak: retarget dimension mismatch");
      }
      factors[x] = detail::rank_one_factor(w.base.conclusive()[x], x,
                                           w.measurement.empty() ? nullptr : &w.measurement[x]);
    }
    if (max_abs(weak.conclusive()[x]) == 0.0) continue;
    if (has_target) {
      const double scale = std::sqrt(w.alpha[x] * factors[x].weight);
      ops.push_back({x, scale * w.retarget[x]->amplitudes() * factors[x].vector.adjoint()});
    } else {
      ops.push_back({x, sqrt_psd(weak.conclusive()[x])});
    }
  }
  ComplexMatrix k0;
  if (w.inconclusive_retarget) {
    const auto& b = *w.inconclusive_retarget;
    if (b.size() != n || w.retarget.size() != n) {
      throw ValidationError("kraus_from_weak: inconclusive retarget needs one weight and "
                            "one retarget state per label");
    }
    k0 = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t x = 0; x < n; ++x) {
      if (!w.retarget[x]) {
        throw ValidationError("kraus_from_weak: inconclusive retarget needs label " +
                              std::to_string(x) + " retargeted");
      }
      if (b[x] < 0.0) throw ValidationError("kraus_from_weak: negative b weight");
      k0 += std::sqrt(b[x]) * w.retarget[x]->amplitudes() * factors[x].vector.adjoint();
    }
  } else {
    k0 = sqrt_psd(weak.inconclusive());
    if (w.v0.size() != 0) {
      if (w.v0.rows() != k0.rows() || w.v0.cols() != k0.cols()) {
        throw ValidationError("kraus_from_weak: V0 dimension mismatch");
      }
      k0 = w.v0 * k0;
    }
  }
  if (max_abs(k0) > 0.0) ops.push_back({kInconclusive, std::move(k0)});
  return KrausChannel(std::move(ops));
}

// ---------------------------------------------------------------------------
// Figures of merit

/// sum_x q_x tr[rho_x M_x]
inline double information_gain(const Ensemble& e, const Povm& povm) {
  if (povm.size() != e.size() || povm.dim() != e.dim()) {
    throw ValidationError("information_gain: POVM does not match the ensemble");
  }
  double g = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x) {
    g += e.prior(x) * trace_product(e.state(x).matrix(), povm.conclusive()[x]).real();
  }
  return g;
}

/// Probability of the inconclusive outcome, sum_x q_x tr[rho_x M_0].
inline double inconclusive_rate(const Ensemble& e, const Povm& povm) {
  return trace_product(e.average(), povm.inconclusive()).real();
}

struct EnsembleDistance {
  double distance = 0.0;     // sum_x q_x ||rho_x - rho'_x||_1
  double lower_bound = 0.0;  // ||rho - rho'||_1 of the averages
};

inline EnsembleDistance ensemble_distance(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size()) {
    throw ValidationError("ensemble_distance: ensembles differ in length");
  }
  EnsembleDistance out;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (std::abs(a.prior(x) - b.prior(x)) > tol::kPriorSum) {
      throw ValidationError("ensemble_distance: priors differ at label " + std::to_string(x));
    }
    out.distance += a.prior(x) * trace_norm_distance(a.state(x), b.state(x));
  }
  out.lower_bound = trace_norm(a.average() - b.average());
  return out;
}

/// True iff the ranges of the nonzero elements are linearly independent
/// subspaces, i.e. their stacked range bases have full column rank.
inline bool linear_independence(std::span<const ComplexMatrix> elements) {
  std::vector<ComplexMatrix> blocks;
  Eigen::Index cols = 0;
  Eigen::Index rows = 0;
  for (const auto& m : elements) {
    const ComplexMatrix r = range_basis(hermitian_part(m));
    if (r.cols() == 0) continue;
    rows = r.rows();
    cols += r.cols();
    blocks.push_back(r);
  }
  if (cols == 0) return true;
  if (cols > rows) return false;
  ComplexMatrix stack(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    stack.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(stack);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1] > 1e-9 * sv[0];
}

// ---------------------------------------------------------------------------
// Weak MCM from a target inconclusive rate

struct WeakDesign {
  WeakMcm weak;
  std::vector<double> weights;  // SDP weights a_x of the full-strength MCM
  double eta_min = 0.0;         // smallest achievable inconclusive rate
  double alpha = 0.0;           // (1 - eta0) / (1 - eta_min)
};

/// Rank-one MCM weighted by the inconclusive-rate SDP and weakened so that
/// the inconclusive rate equals `eta0`. Retargets are left unset.
inline WeakDesign design_weak_mcm(const Ensemble& e, const McmSolution& mcm, double eta0) {
  if (!(eta0 >= 0.0 && eta0 <= 1.0)) {
    throw ValidationError("design_weak_mcm: eta0 must lie in [0, 1]");
  }
  const std::vector<PureState> phi = mcm.projectors();
  const WeightSolution ws = min_inconclusive_rate(e, phi);
  if (eta0 < ws.inconclusive_rate - 1e-9) {
    throw InfeasibleError("inconclusive rate " + std::to_string(eta0) +
                          " is below the achievable minimum " +
                          std::to_string(ws.inconclusive_rate));
  }
  const double denom = 1.0 - ws.inconclusive_rate;
  const double alpha = denom > 0.0 ? std::clamp((1.0 - eta0) / denom, 0.0, 1.0) : 0.0;
  WeakDesign out{WeakMcm{Povm::rank_one(phi, ws.weights),
                         std::vector<double>(e.size(), alpha),
                         {},
                         {},
                         {},
                         std::nullopt},
                 ws.weights, ws.inconclusive_rate, alpha};
  return out;
}

// ---------------------------------------------------------------------------
// Sequential runs

/// Builds party j's weak measurement (j is 1-based) from the exact incoming
/// ensemble and its MCM.
using Strategy =
    std::function<WeakMcm(const Ensemble& incoming, const McmSolution& mcm, std::size_t party)>;

struct PartyRecord {
  Ensemble ensemble;  // S^(j), before party j measures
  McmSolution mcm;
  Povm povm;          // the measurement actually performed
  KrausChannel channel;
  double gain = 0.0;
  double inconclusive_rate = 0.0;
  double disturbance = 0.0;
  double lower_bound = 0.0;
};

struct SequentialTrace {
  std::vector<PartyRecord> parties;
  std::optional<Ensemble> final_ensemble;  // S^(R+1)
  std::optional<McmSolution> final_mcm;
  double joint_success = 0.0;       // P_J
  double joint_inconclusive = 0.0;  // P_I
};

struct JointOutcomes {
  double joint_success = 0.0;
  double joint_inconclusive = 0.0;
  std::vector<ComplexMatrix> joint_conclusive;  // M^_x
  ComplexMatrix joint_inconclusive_op;          // M^_0
};

/// Pulls the last party's POVM back through the earlier channels, keeping
/// only Kraus operators carrying the same label.
inline JointOutcomes joint_outcomes(const SequentialTrace& trace,
                                    const std::optional<Povm>& final_povm = std::nullopt) {
  if (trace.parties.empty()) throw StateError("joint_outcomes: empty trace");
  const Povm& last = final_povm ? *final_povm : trace.parties.back().povm;
  const Ensemble& e0 = trace.parties.front().ensemble;
  if (last.size() != e0.size()) {
    throw ValidationError("joint_outcomes: final POVM label count mismatch");
  }
  JointOutcomes out;
  out.joint_conclusive = last.conclusive();
  out.joint_inconclusive_op = last.inconclusive();
  for (std::size_t j = trace.parties.size() - 1; j-- > 0;) {
    const auto& ops = trace.parties[j].channel.operators();
    for (std::size_t x = 0; x <= e0.size(); ++x) {
      const std::size_t label = x < e0.size() ? x : kInconclusive;
      ComplexMatrix& target = x < e0.size() ? out.joint_conclusive[x] : out.joint_inconclusive_op;
      ComplexMatrix next = ComplexMatrix::Zero(target.rows(), target.cols());
      for (const auto& k : ops) {
        if (k.label == label) next += k.op.adjoint() * target * k.op;
      }
      target = hermitian_part(next);
    }
  }
  for (std::size_t x = 0; x < e0.size(); ++x) {
    out.joint_success +=
        e0.prior(x) * trace_product(e0.state(x).matrix(), out.joint_conclusive[x]).real();
    out.joint_inconclusive +=
        e0.prior(x) * trace_product(e0.state(x).matrix(), out.joint_inconclusive_op).real();
  }
  return out;
}

inline constexpr double kMonotonicityTol = 1e-9;

/// Runs party j = 1..R with strategies[j-1]. Failures are rethrown as
/// SequenceError carrying the party index and the original error kind.
inline SequentialTrace run_sequence(const Ensemble& e0, std::span<const Strategy> strategies) {
  if (strategies.empty()) throw ValidationError("run_sequence: need at least one party");
  SequentialTrace trace;
  Ensemble current = e0;
  McmSolution mcm = solve_mcm(current);
  for (std::size_t j = 1; j <= strategies.size(); ++j) {
    try {
      const WeakMcm weak = strategies[j - 1](current, mcm, j);
      const Povm povm = weaken(weak.base, weak.alpha);
      KrausChannel channel = kraus_from_weak(weak);
      Ensemble next = channel.apply(current);
      const EnsembleDistance dist = ensemble_distance(current, next);
      McmSolution next_mcm = solve_mcm(next);
      for (std::size_t x = 0; x < current.size(); ++x) {
        if (next_mcm[x].confidence > mcm[x].confidence + kMonotonicityTol) {
          throw InvariantError("confidence of label " + std::to_string(x) + " increased from " +
                               std::to_string(mcm[x].confidence) + " to " +
                               std::to_string(next_mcm[x].confidence));
        }
      }
      trace.parties.push_back(PartyRecord{current, mcm, povm, std::move(channel),
                                          information_gain(current, povm),
                                          inconclusive_rate(current, povm), dist.distance,
                                          dist.lower_bound});
      current = std::move(next);
      mcm = std::move(next_mcm);
    } catch (const SequenceError&) {
      throw;
    } catch (const Error& err) {
      throw SequenceError(j, err.kind(), err.what());
    }
  }
  trace.final_ensemble = current;
  trace.final_mcm = mcm;
  const JointOutcomes jo = joint_outcomes(trace);
  trace.joint_success = jo.joint_success;
  trace.joint_inconclusive = jo.joint_inconclusive;
  return trace;
}

inline SequentialTrace run_sequence(const Ensemble& e0, const Strategy& strategy,
                                    std::size_t parties) {
  const std::vector<Strategy> all(parties, strategy);
  return run_sequence(e0, all);
}

}  // namespace seqmcm
