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

// The four qubit ensemble families: constructors, closed-form oracles and
// per-party strategies for run_sequence.
//
// Labels are 0-based. Geometrically uniform states use the phase
// exp(2 pi i (x + 1) / N) for label x, so label N - 1 sits on the +X axis.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "seqmcm/disturbance.hpp"
#include "seqmcm/errors.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm::families {

namespace detail {

inline PureState qubit(Complex a, Complex b) {
  ComplexVector v(2);
  v << a, b;
  return PureState::normalized(std::move(v));
}

/// (|0> + e^{i a}|1>) / sqrt(2): Bloch vector (cos a, sin a, 0).
inline PureState equator(double a) { return qubit(1.0, std::polar(1.0, a)); }

inline double gu_phase(std::size_t n, std::size_t x) {
  return 2.0 * kPi * static_cast<double>(x + 1) / static_cast<double>(n);
}

inline void require_etas(std::span<const double> etas) {
  for (double eta : etas) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("inconclusive rate outside [0, 1]");
  }
}

inline double eta_for_party(std::span<const double> etas, std::size_t party) {
  if (etas.empty()) throw ValidationError("strategy: no inconclusive rates given");
  return etas[std::min(party, etas.size()) - 1];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Two mixed states

struct TwoMixedParams {
  double p = 1.0;      // in (0, 1]
  double theta = 0.0;  // in (0, pi)
};

inline void validate(const TwoMixedParams& t) {
  if (!(t.p > 0.0 && t.p <= 1.0)) throw ValidationError("two_mixed: p must lie in (0, 1]");
  if (!(t.theta > 0.0 && t.theta < kPi)) {
    throw ValidationError("two_mixed: theta must lie in (0, pi)");
  }
}

/// |psi_x> = cos(theta/2)|0> -(-1)^x sin(theta/2)|1> for paper labels x = 1, 2.
inline PureState two_mixed_pure(const TwoMixedParams& t, std::size_t label) {
  const double sign = label == 0 ? 1.0 : -1.0;
  return detail::qubit(std::cos(t.theta / 2), sign * std::sin(t.theta / 2));
}

/// rho_x = p |psi_x><psi_x| + (1 - p) 1/2, uniform priors.
inline Ensemble two_mixed(const TwoMixedParams& t) {
  validate(t);
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < 2; ++x) {
    states.emplace_back(t.p * two_mixed_pure(t, x).projector() + (1.0 - t.p) * 0.5 * identity(2));
  }
  return Ensemble::uniform(std::move(states));
}

struct TwoMixedOracle {
  double confidence = 0.0;
  double overlap = 0.0;  // s = |<phi_1|phi_2>| = |p cos theta|
  std::array<PureState, 2> mcm_vectors;
  std::array<PureState, 2> perp;  // |phi_x^perp>
};

inline TwoMixedOracle two_mixed_oracle(const TwoMixedParams& t) {
  validate(t);
  const double pc = t.p * std::cos(t.theta);
  const double c = 0.5 * (1.0 + t.p * std::sin(t.theta) / std::sqrt(1.0 - pc * pc));
  const double u = std::sqrt((1.0 - pc) / 2), v = std::sqrt((1.0 + pc) / 2);
  return TwoMixedOracle{std::min(c, 1.0), std::abs(pc),
                        {detail::qubit(u, v), detail::qubit(u, -v)},
                        {detail::qubit(-v, u), detail::qubit(v, u)}};
}

/// Optimal equal-gain schedule for R parties.
inline GainSchedule two_mixed_schedule(const TwoMixedParams& t, std::size_t parties) {
  const TwoMixedOracle o = two_mixed_oracle(t);
  return optimal_joint_schedule(o.confidence, o.overlap, parties);
}

namespace detail {

/// Two-outcome weak MCM with Kraus parameters from `params(C, s)`.
template <class Params>
WeakMcm two_state_weak_mcm_with(const Ensemble& e, const McmSolution& mcm, Params params) {
  if (e.size() != 2 || e.dim() != 2) {
    throw ValidationError("two_state_weak_mcm: two qubit states required");
  }
  const auto phi = mcm.projectors();
  ComplexVector u1 = phi[0].amplitudes();
  ComplexVector u2 = phi[1].amplitudes();
  Complex g = u1.dot(u2);
  if (std::abs(g) > 0.0) u2 *= std::conj(g) / std::abs(g);
  const double s = std::min(std::abs(g), 1.0);
  // Confidences of 1 + O(eps) come from rounding.
  const double c = std::min({mcm[0].confidence, mcm[1].confidence, 1.0});
  const LeastDisturbing ld = params(c, s);

  // Symmetric frame of the rephased vectors: u_{1,2} = cos(gamma) e +- sin(gamma) f.
  ComplexVector ev = u1 + u2;
  ComplexVector fv = u1 - u2;
  ev.normalize();
  fv.normalize();
  const double gamma = 0.5 * std::acos(std::clamp(ld.new_overlap, -1.0, 1.0));
  const ComplexVector v1 = -std::sin(gamma) * ev + std::cos(gamma) * fv;
  const ComplexVector v2 = -(std::sin(gamma) * ev + std::cos(gamma) * fv);
  const std::vector<PureState> meas{PureState::normalized(u1), PureState::normalized(u2)};
  return WeakMcm{Povm::rank_one(meas, std::vector<double>{ld.a1, ld.a2}),
                 {1.0, 1.0},
                 {PureState::normalized(v2), PureState::normalized(v1)},
                 meas,
                 {},
                 std::vector<double>{ld.b, ld.b}};
}

}  // namespace detail

/// Least-disturbing two-outcome MCM realizing gain `gain` on a two-state
/// ensemble with equal confidences.
inline WeakMcm two_state_weak_mcm(const Ensemble& e, const McmSolution& mcm, double gain) {
  return detail::two_state_weak_mcm_with(e, mcm, [gain](double c, double s) {
    return two_state_least_disturbing(c, s, gain);
  });
}

/// Least-disturbing two-outcome MCM whose post-measurement states have
/// overlap `target`.
inline WeakMcm two_state_weak_mcm_to_overlap(const Ensemble& e, const McmSolution& mcm,
                                             double target) {
  return detail::two_state_weak_mcm_with(e, mcm, [target](double, double s) {
    return two_state_least_disturbing_to_overlap(s, target);
  });
}

/// Party j uses gains[j - 1].
inline Strategy two_mixed_strategy(std::vector<double> gains) {
  return [gains = std::move(gains)](const Ensemble& e, const McmSolution& mcm,
                                     std::size_t party) {
    if (party > gains.size()) throw ValidationError("two_mixed_strategy: no gain for party");
    return two_state_weak_mcm(e, mcm, gains[party - 1]);
  };
}

/// Party j steers the overlap to the schedule's s^(j+1); the last party
/// leaves identical states.
inline Strategy two_mixed_strategy(const GainSchedule& schedule) {
  return [overlaps = schedule.overlaps](const Ensemble& e, const McmSolution& mcm,
                                        std::size_t party) {
    if (party >= overlaps.size()) throw ValidationError("two_mixed_strategy: no overlap for party");
    return two_state_weak_mcm_to_overlap(e, mcm, overlaps[party]);
  };
}

// ---------------------------------------------------------------------------
// Geometrically uniform states

struct GuParams {
  std::size_t n = 3;
};

inline PureState gu_state(std::size_t n, std::size_t x) {
  return detail::equator(detail::gu_phase(n, x));
}

inline Ensemble gu(const GuParams& g) {
  if (g.n < 2) throw ValidationError("gu: N must be at least 2");
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < g.n; ++x) states.push_back(DensityMatrix::from_pure(gu_state(g.n, x)));
  return Ensemble::uniform(std::move(states));
}

struct GuOracle {
  double confidence = 0.0;  // 2/N
  double weight = 0.0;      // a_x = 2/N
};

inline GuOracle gu_oracle(const GuParams& g) {
  const double v = 2.0 / static_cast<double>(g.n);
  return {v, v};
}

/// P_+ seen by the party after those with inconclusive rates `earlier`.
inline double gu_p_plus(std::span<const double> earlier) {
  double prod = 1.0;
  for (double eta : earlier) prod *= 0.5 * (1.0 + eta);
  return 0.5 * (1.0 + prod);
}

inline double gu_confidence(std::size_t n, std::span<const double> earlier) {
  return 2.0 / static_cast<double>(n) * gu_p_plus(earlier);
}

/// Weak MCM with retarget |psi_x>; party j uses etas[min(j, size) - 1].
inline Strategy gu_strategy(std::size_t n, std::vector<double> etas) {
  detail::require_etas(etas);
  return [n, etas = std::move(etas)](const Ensemble& e, const McmSolution& mcm,
                                     std::size_t party) {
    WeakDesign d = design_weak_mcm(e, mcm, detail::eta_for_party(etas, party));
    for (std::size_t x = 0; x < n; ++x) d.weak.retarget.emplace_back(gu_state(n, x));
    return d.weak;
  };
}

/// Covariant retarget family (polar t, azimuth offset delta).
inline RetargetParameterization gu_retarget_family(std::size_t n) {
  return {{{0.0, kPi}, {-kPi, kPi}}, [n](std::span<const double> p) {
            std::vector<PureState> out;
            for (std::size_t x = 0; x < n; ++x) {
              out.push_back(detail::qubit(std::cos(p[0] / 2),
                                          std::polar(std::sin(p[0] / 2),
                                                     detail::gu_phase(n, x) + p[1])));
            }
            return out;
          }};
}

// ---------------------------------------------------------------------------
// Lifted geometrically uniform states

struct LiftedGuParams {
  std::size_t n = 3;
  double theta = kPi / 2;  // polar angle in (0, pi/2]
  double lambda = 1.0;     // in [0, 1]
};

inline void validate(const LiftedGuParams& l) {
  if (l.n < 2) throw ValidationError("lifted_gu: N must be at least 2");
  if (!(l.theta > 0.0 && l.theta <= kPi / 2 + 1e-15)) {
    throw ValidationError("lifted_gu: theta must lie in (0, pi/2]");
  }
  if (!(l.lambda >= 0.0 && l.lambda <= 1.0)) {
    throw ValidationError("lifted_gu: lambda must lie in [0, 1]");
  }
}

/// cos(theta/2)|0> + e^{i w_x} sin(theta/2)|1>
inline PureState lifted_gu_pure(const LiftedGuParams& l, std::size_t x) {
  return detail::qubit(std::cos(l.theta / 2),
                       std::polar(std::sin(l.theta / 2), detail::gu_phase(l.n, x)));
}

/// rho_x = lambda |psi_x><psi_x| + (1 - lambda) rho_bar with rho_bar the
/// projection of |psi_x><psi_x| onto the Z axis.
inline DensityMatrix lifted_gu_state(const LiftedGuParams& l, std::size_t x) {
  const double c = std::cos(l.theta), s = std::sin(l.theta);
  const double w = detail::gu_phase(l.n, x);
  ComplexMatrix m(2, 2);
  m << 1.0 + c, std::polar(l.lambda * s, -w), std::polar(l.lambda * s, w), 1.0 - c;
  return DensityMatrix(0.5 * m);
}

inline Ensemble lifted_gu(const LiftedGuParams& l) {
  validate(l);
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < l.n; ++x) states.push_back(lifted_gu_state(l, x));
  return Ensemble::uniform(std::move(states));
}

struct LiftedGuOracle {
  double confidence = 0.0;  // (1 + lambda) / N
  double weight = 0.0;      // 2 / (N (1 + cos theta))
  double eta_min = 0.0;     // cos theta
  std::vector<PureState> mcm_vectors;
};

inline LiftedGuOracle lifted_gu_oracle(const LiftedGuParams& l) {
  validate(l);
  const double n = static_cast<double>(l.n);
  LiftedGuOracle o{(1.0 + l.lambda) / n, 2.0 / (n * (1.0 + std::cos(l.theta))),
                   std::max(std::cos(l.theta), 0.0), {}};
  for (std::size_t x = 0; x < l.n; ++x) {
    o.mcm_vectors.push_back(detail::qubit(
        std::sin(l.theta / 2), std::polar(std::cos(l.theta / 2), detail::gu_phase(l.n, x))));
  }
  return o;
}

/// One-party contraction of lambda: [(1 - eta)/2 + sqrt(eta^2 - cos^2)] / sin.
inline double lifted_gu_delta(double eta, double theta) {
  const double c = std::cos(theta);
  const double disc = eta * eta - c * c;
  if (eta < c - 1e-12 || disc < -1e-12) {
    throw InfeasibleError("lifted_gu: inconclusive rate " + std::to_string(eta) +
                          " below cos(theta) = " + std::to_string(c));
  }
  return (0.5 * (1.0 - eta) + std::sqrt(std::max(disc, 0.0))) / std::sin(theta);
}

/// D of one party with the optimal retarget: lambda sin(theta) (1 - Delta).
inline double lifted_gu_disturbance(double lambda, double theta, double eta) {
  return lambda * std::sin(theta) * (1.0 - lifted_gu_delta(eta, theta));
}

/// lambda^(j) for j = 1..R+1 with lambda^(1) = lambda.
inline std::vector<double> lifted_gu_lambdas(const LiftedGuParams& l,
                                             std::span<const double> etas) {
  std::vector<double> out{l.lambda};
  for (double eta : etas) out.push_back(out.back() * lifted_gu_delta(eta, l.theta));
  return out;
}

struct PartyBound {
  double bound = 0.0;       // 1 + log(N C_th - 1) / log Delta
  std::size_t r_max = 0;    // largest R with C^(R) >= C_th
  bool unbounded = false;   // Delta = 1
};

/// Parties that can each reach confidence `threshold` at a fixed rate `eta`.
inline PartyBound lifted_gu_party_bound(const LiftedGuParams& l, double eta, double threshold) {
  validate(l);
  const double n = static_cast<double>(l.n);
  if (!(n * threshold > 1.0) || (1.0 + l.lambda) / n < threshold) {
    throw DomainError("lifted_gu_party_bound: threshold must lie in (1/N, C^(1)]");
  }
  const double delta = lifted_gu_delta(eta, l.theta);
  PartyBound b;
  if (delta >= 1.0) {
    b.unbounded = true;
    b.bound = std::numeric_limits<double>::infinity();
    b.r_max = std::numeric_limits<std::size_t>::max();
    return b;
  }
  // C^(j) = (1 + lambda Delta^{j-1}) / N >= threshold.
  b.bound = 1.0 + std::log((n * threshold - 1.0) / l.lambda) / std::log(delta);
  b.r_max = static_cast<std::size_t>(std::floor(b.bound + 1e-12));
  return b;
}

inline PureState lifted_gu_retarget(std::size_t n, std::size_t x, double polar = kPi / 2) {
  return detail::qubit(std::cos(polar / 2),
                       std::polar(std::sin(polar / 2), detail::gu_phase(n, x)));
}

/// Retarget polar angle as the single free parameter.
inline RetargetParameterization lifted_gu_retarget_family(std::size_t n) {
  return {{{0.0, kPi}}, [n](std::span<const double> p) {
            std::vector<PureState> out;
            for (std::size_t x = 0; x < n; ++x) out.push_back(lifted_gu_retarget(n, x, p[0]));
            return out;
          }};
}

inline Strategy lifted_gu_strategy(std::size_t n, std::vector<double> etas) {
  detail::require_etas(etas);
  return [n, etas = std::move(etas)](const Ensemble& e, const McmSolution& mcm,
                                     std::size_t party) {
    WeakDesign d = design_weak_mcm(e, mcm, detail::eta_for_party(etas, party));
    for (std::size_t x = 0; x < n; ++x) d.weak.retarget.emplace_back(lifted_gu_retarget(n, x));
    return d.weak;
  };
}

// ---------------------------------------------------------------------------
// Mirror-symmetric states

/// Bloch vectors (r1, 0, 0) and r2 (cos theta, +-sin theta, 0), uniform priors.
struct MirrorState {
  double r1 = 1.0;
  double r2 = 1.0;
  double theta = 2.0 * kPi / 3.0;
};

struct MirrorParams {
  double theta = 2.0 * kPi / 3.0;  // in (0, pi)
};

inline Ensemble mirror(const MirrorState& m) {
  if (!(m.r1 >= 0.0 && m.r1 <= 1.0 + 1e-12 && m.r2 >= 0.0 && m.r2 <= 1.0 + 1e-12)) {
    throw ValidationError("mirror: Bloch lengths must lie in [0, 1]");
  }
  std::vector<DensityMatrix> states{
      from_bloch({m.r1, 0.0, 0.0}),
      from_bloch({m.r2 * std::cos(m.theta), m.r2 * std::sin(m.theta), 0.0}),
      from_bloch({m.r2 * std::cos(m.theta), -m.r2 * std::sin(m.theta), 0.0})};
  return Ensemble::uniform(std::move(states));
}

inline Ensemble mirror(const MirrorParams& p) {
  if (!(p.theta > 0.0 && p.theta < kPi)) throw ValidationError("mirror: theta must lie in (0, pi)");
  return mirror(MirrorState{1.0, 1.0, p.theta});
}

/// Reads (r1, r2, theta) back from a mirror-symmetric ensemble.
inline MirrorState mirror_state_of(const Ensemble& e) {
  if (e.size() != 3 || e.dim() != 2) throw ValidationError("mirror_state_of: three qubits required");
  const BlochVector a = to_bloch(e.state(0));
  const BlochVector b = to_bloch(e.state(1));
  return {a[0], std::hypot(b[0], b[1]), std::atan2(b[1], b[0])};
}

struct MirrorOracle {
  double cos_phi = 0.0;     // MCM angle of labels 2, 3
  double a1 = 0.0;          // -2 cos phi / (1 - cos phi)
  double a2 = 0.0;          // 1 / (1 - cos phi), also a3
  double c1 = 0.0;          // 1 / (2 + cos theta)
  double c2 = 0.0;          // (3 + 2 cos theta) / (4 + 2 cos theta), also C3
  double cos_varphi = 0.0;  // retarget angle making the lower bound vanish
};

inline double mirror_lower_bound_cos_varphi(const MirrorState& m, double cos_phi) {
  const double r = (m.r1 + 2.0 * m.r2 * std::cos(m.theta)) / 3.0;
  return (r + cos_phi) / (1.0 + r * cos_phi);
}

/// First-party closed forms for pure mirror states.
inline MirrorOracle mirror_oracle(const MirrorParams& p) {
  const double c = std::cos(p.theta);
  const double den = 6.0 - 2.0 * c - 4.0 * std::cos(2 * p.theta);
  if (!(p.theta > 1e-6 && p.theta < kPi) || std::abs(den) < 1e-12) {
    throw DomainError("mirror_oracle: theta too close to a degenerate point");
  }
  MirrorOracle o;
  o.cos_phi = (-4.0 + c + 2.0 * std::cos(2 * p.theta) + std::cos(3 * p.theta)) / den;
  o.a1 = -2.0 * o.cos_phi / (1.0 - o.cos_phi);
  o.a2 = 1.0 / (1.0 - o.cos_phi);
  o.c1 = 1.0 / (2.0 + c);
  o.c2 = (3.0 + 2.0 * c) / (4.0 + 2.0 * c);
  o.cos_varphi = mirror_lower_bound_cos_varphi({1.0, 1.0, p.theta}, o.cos_phi);
  return o;
}

struct QubitMcm {
  double confidence = 0.0;
  BlochVector direction{};  // Bloch vector of the MCM projector
};

/// Qubit MCM from Bloch data: C is the larger root of
/// (C - q)^2 = |C R - q r|^2, direction (q r - C R) / (C - q).
inline QubitMcm qubit_mcm_bloch(double q, const BlochVector& r, const BlochVector& avg) {
  auto dot = [](const BlochVector& a, const BlochVector& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  };
  const double a = 1.0 - dot(avg, avg);
  const double b = -2.0 * q * (1.0 - dot(avg, r));
  const double c = q * q * (1.0 - dot(r, r));
  const double disc = std::sqrt(std::max(b * b - 4.0 * a * c, 0.0));
  QubitMcm out;
  out.confidence = a > 1e-15 ? (-b + disc) / (2.0 * a) : -c / b;
  const double w = out.confidence - q;
  for (int k = 0; k < 3; ++k) out.direction[k] = (q * r[k] - out.confidence * avg[k]) / w;
  const double len = norm(out.direction);
  for (double& v : out.direction) v /= len;
  return out;
}

struct MirrorStep {
  std::array<double, 3> confidences{};
  double cos_phi = 0.0;
  std::array<double, 3> weights{};
  double cos_varphi = 0.0;
  MirrorState next;
};

/// One party in Bloch algebra: rho' = eta rho + (1 - eta) sum_x a_x <phi_x|rho|phi_x> |varphi_x><varphi_x|.
/// A NaN `cos_varphi` selects the lower-bound retarget.
inline MirrorStep mirror_step(const MirrorState& m, double eta,
                              double cos_varphi = std::numeric_limits<double>::quiet_NaN()) {
  const double q = 1.0 / 3.0;
  const std::array<BlochVector, 3> r{BlochVector{m.r1, 0.0, 0.0},
                                     BlochVector{m.r2 * std::cos(m.theta), m.r2 * std::sin(m.theta), 0.0},
                                     BlochVector{m.r2 * std::cos(m.theta), -m.r2 * std::sin(m.theta), 0.0}};
  const BlochVector avg{(r[0][0] + r[1][0] + r[2][0]) / 3.0, 0.0, 0.0};
  MirrorStep s;
  std::array<BlochVector, 3> n{};
  for (std::size_t x = 0; x < 3; ++x) {
    const QubitMcm mc = qubit_mcm_bloch(q, r[x], avg);
    s.confidences[x] = mc.confidence;
    n[x] = mc.direction;
  }
  s.cos_phi = n[1][0];
  s.weights = {-2.0 * s.cos_phi / (1.0 - s.cos_phi), 1.0 / (1.0 - s.cos_phi),
               1.0 / (1.0 - s.cos_phi)};
  s.cos_varphi = std::isnan(cos_varphi) ? mirror_lower_bound_cos_varphi(m, s.cos_phi) : cos_varphi;
  const double sv = std::sqrt(std::max(0.0, 1.0 - s.cos_varphi * s.cos_varphi));
  const std::array<BlochVector, 3> target{BlochVector{1.0, 0.0, 0.0},
                                          BlochVector{s.cos_varphi, sv, 0.0},
                                          BlochVector{s.cos_varphi, -sv, 0.0}};
  std::array<BlochVector, 3> out{};
  for (std::size_t y = 0; y < 3; ++y) {
    for (int k = 0; k < 3; ++k) out[y][k] = eta * r[y][k];
    for (std::size_t x = 0; x < 3; ++x) {
      const double p = 0.5 * (1.0 + n[x][0] * r[y][0] + n[x][1] * r[y][1] + n[x][2] * r[y][2]);
      for (int k = 0; k < 3; ++k) out[y][k] += (1.0 - eta) * s.weights[x] * p * target[x][k];
    }
  }
  s.next = {out[0][0], std::hypot(out[1][0], out[1][1]), std::atan2(out[1][1], out[1][0])};
  return s;
}

/// Retarget family {+X, e^{+i v}, e^{-i v}} with v in [0, pi].
inline RetargetParameterization mirror_retarget_family() {
  return {{{0.0, kPi}}, [](std::span<const double> p) {
            return std::vector<PureState>{detail::equator(0.0), detail::equator(p[0]),
                                          detail::equator(-p[0])};
          }};
}

enum class MirrorRetarget {
  kLowerBound,  // closed-form zero of ||rho - rho'||_1
  kNumeric,     // numeric minimum of D
};

inline Strategy mirror_strategy(std::vector<double> etas, MirrorRetarget rule) {
  detail::require_etas(etas);
  return [etas = std::move(etas), rule](const Ensemble& e, const McmSolution& mcm,
                                        std::size_t party) {
    const double eta = detail::eta_for_party(etas, party);
    if (rule == MirrorRetarget::kNumeric) {
      const DisturbanceResult r = minimize_disturbance_numeric(e, mcm, eta, mirror_retarget_family());
      WeakDesign d = design_weak_mcm(e, mcm, eta);
      for (const auto& s : r.retarget) d.weak.retarget.emplace_back(s);
      return d.weak;
    }
    WeakDesign d = design_weak_mcm(e, mcm, eta);
    const BlochVector n2 = to_bloch(DensityMatrix::from_pure(mcm.projectors()[1]));
    const double cv = mirror_lower_bound_cos_varphi(mirror_state_of(e), n2[0]);
    const double v = std::acos(std::clamp(cv, -1.0, 1.0));
    for (const auto& s : mirror_retarget_family().states(std::span<const double>(&v, 1))) {
      d.weak.retarget.emplace_back(s);
    }
    return d.weak;
  };
}

}  // namespace seqmcm::families
