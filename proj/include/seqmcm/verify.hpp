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

// Invariant suites over seeded random corpora and the built-in families.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "seqmcm/errors.hpp"
#include "seqmcm/families.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/random.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm::verify {

struct Check {
  std::string suite;
  std::string module;
  std::string invariant;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // largest residual seen
  double tolerance = 0.0;
  std::string witness;  // first violating instance

  bool passed() const { return violations == 0; }
};

struct Report {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
  }
};

struct Options {
  std::uint64_t seed = 7;
  std::size_t count = 500;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"duality", "kkt",      "monotonicity",
                                              "proposition", "channels", "families"};
  return names;
}

namespace detail {

/// Records `residual` against `tol`; the first failure keeps its witness.
inline void record(Check& c, double residual, const std::string& witness) {
  ++c.instances;
  if (!(residual <= c.tolerance)) {
    if (c.violations++ == 0) c.witness = witness;
  }
  if (std::isnan(residual) || residual > c.worst) c.worst = residual;
}

inline void record_flag(Check& c, bool ok, const std::string& witness) {
  record(c, ok ? 0.0 : 1.0, witness);
}

inline std::string instance(std::size_t i, std::size_t d, std::size_t n) {
  return "instance " + std::to_string(i) + " (d=" + std::to_string(d) + ", N=" + std::to_string(n) +
         ")";
}

inline Check make(const std::string& suite, const std::string& module,
                  const std::string& invariant, double tol) {
  Check c;
  c.suite = suite;
  c.module = module;
  c.invariant = invariant;
  c.tolerance = tol;
  return c;
}

/// Valid POVM sharing the MCM supports: projectors scaled by 1/N.
inline Povm scaled_mcm_povm(const McmSolution& sol, std::size_t dim) {
  std::vector<ComplexMatrix> elems;
  for (const auto& m : sol.entries) {
    elems.push_back(m.basis.empty() ? ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                                          static_cast<Eigen::Index>(dim))
                                    : ComplexMatrix(m.projector() / static_cast<double>(sol.size())));
  }
  return Povm::complete(std::move(elems));
}

}  // namespace detail

inline std::vector<Check> duality(const Options& o) {
  random::Rng rng(o.seed);
  std::uniform_int_distribution<std::size_t> size(2, 5);
  Check ent = detail::make("duality", "mcm", "C_x = q_x 2^Dmax(rho_x||rho)", 1e-9);
  Check primal = detail::make("duality", "mcm", "primal value at MCM equals dual eigenvalue", 1e-9);
  for (std::size_t i = 0; i < o.count; ++i) {
    const std::size_t n = size(rng);
    const Ensemble e = random::ensemble(rng, 2, n);
    const McmSolution sol = solve_mcm(e);
    for (std::size_t x = 0; x < n; ++x) {
      const ConfidenceEntropy ce = confidence_entropy_identity(e, x);
      detail::record(ent, std::abs(ce.confidence - ce.entropic), detail::instance(i, 2, n));
      const ComplexMatrix p = sol[x].projector();
      const double num = e.prior(x) * trace_product(e.state(x).matrix(), p).real();
      const double den = trace_product(e.average(), p).real();
      detail::record(primal, std::abs(num / den - sol[x].confidence), detail::instance(i, 2, n));
    }
  }
  return {ent, primal};
}

inline std::vector<Check> kkt(const Options& o) {
  random::Rng rng(o.seed + 1);
  std::uniform_int_distribution<std::size_t> size(2, 4), dim(2, 3);
  Check c = detail::make("kkt", "mcm", "stationarity and complementary slackness", 1e-9);
  auto run = [&](const Ensemble& e, const std::string& w) {
    const McmSolution sol = solve_mcm(e);
    const KktReport r = verify_kkt(e, sol, detail::scaled_mcm_povm(sol, e.dim()), c.tolerance);
    detail::record(c, r.worst(), w);
  };
  for (std::size_t i = 0; i < o.count; ++i) {
    const std::size_t d = dim(rng), n = size(rng);
    run(random::ensemble(rng, d, n), detail::instance(i, d, n));
  }
  for (std::size_t n = 3; n <= 6; ++n) run(families::gu({n}), "gu N=" + std::to_string(n));
  run(families::lifted_gu({3, 1.0, 0.7}), "lifted_gu N=3 theta=1 lambda=0.7");
  run(families::mirror(families::MirrorParams{5 * kPi / 9}), "mirror theta=5pi/9");
  run(families::two_mixed({0.6, 1.1}), "two_mixed p=0.6 theta=1.1");
  return {c};
}

inline std::vector<Check> monotonicity(const Options& o) {
  random::Rng rng(o.seed + 2);
  std::uniform_int_distribution<std::size_t> size(2, 4), dim(2, 3), kraus(1, 3);
  Check c = detail::make("monotonicity", "seqchan", "C_x does not increase under a channel", 1e-9);
  for (std::size_t i = 0; i < o.count; ++i) {
    const std::size_t d = dim(rng), n = size(rng);
    const Ensemble e = random::ensemble(rng, d, n);
    const KrausChannel ch = random::channel(rng, d, kraus(rng));
    const McmSolution before = solve_mcm(e);
    const McmSolution after = solve_mcm(ch.apply(e));
    double worst = -1.0;
    for (std::size_t x = 0; x < n; ++x) {
      worst = std::max(worst, after[x].confidence - before[x].confidence);
    }
    detail::record(c, std::max(worst, 0.0), detail::instance(i, d, n));
  }
  return {c};
}

inline std::vector<Check> proposition(const Options&) {
  Check indep = detail::make("proposition", "seqchan", "linear independence of MCM elements", 0.0);
  auto elements = [](const Ensemble& e) {
    std::vector<ComplexMatrix> out;
    for (const auto& m : solve_mcm(e).entries) out.push_back(m.projector());
    return out;
  };
  detail::record_flag(indep, !linear_independence(elements(families::gu({3}))),
                      "trine reported independent");
  detail::record_flag(indep, !linear_independence(elements(families::gu({4}))),
                      "gu N=4 reported independent");
  detail::record_flag(indep, linear_independence(elements(families::two_mixed({0.8, 1.0}))),
                      "two-state reported dependent");

  Check equal = detail::make("proposition", "seqchan", "two-state confidences stay equal", 1e-10);
  for (std::size_t r = 1; r <= 5; ++r) {
    const families::TwoMixedParams t{0.9, 0.8};
    const auto sched = families::two_mixed_schedule(t, r);
    const SequentialTrace tr =
        run_sequence(families::two_mixed(t), std::vector<Strategy>(r, families::two_mixed_strategy(sched)));
    const double c1 = tr.parties.front().mcm[0].confidence;
    double worst = 0.0;
    for (const auto& p : tr.parties) {
      for (double c : p.mcm.confidences()) worst = std::max(worst, std::abs(c - c1));
    }
    detail::record(equal, worst, "R=" + std::to_string(r));
  }

  Check drop = detail::make("proposition", "seqchan", "trine confidence drops after one party", 0.0);
  for (double eta : {0.0, 0.3, 0.6, 0.9}) {
    const SequentialTrace tr = run_sequence(families::gu({3}), families::gu_strategy(3, {eta}), 1);
    const double gap = tr.parties[0].mcm[0].confidence - (*tr.final_mcm)[0].confidence;
    detail::record_flag(drop, gap >= 1e-6, "eta0=" + std::to_string(eta));
  }
  return {indep, equal, drop};
}

inline std::vector<Check> channels(const Options& o) {
  random::Rng rng(o.seed + 3);
  std::uniform_int_distribution<std::size_t> size(2, 4), dim(2, 3), kraus(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Check tp = detail::make("channels", "seqchan", "trace preservation", 1e-10);
  Check pos = detail::make("channels", "seqchan", "output positivity", 1e-10);
  Check povm = detail::make("channels", "qcore", "weak MCM POVM validity", 1e-10);
  Check comp = detail::make("channels", "seqchan", "weak MCM Kraus completeness", 1e-9);
  Check bound = detail::make("channels", "seqchan", "D >= ||rho - rho'||_1", 1e-12);
  for (std::size_t i = 0; i < o.count; ++i) {
    const std::size_t d = dim(rng), n = size(rng);
    const std::string w = detail::instance(i, d, n);
    const KrausChannel ch = random::channel(rng, d, kraus(rng));
    const DensityMatrix rho = random::density_matrix(rng, d, d);
    const DensityMatrix out = ch.apply(rho);
    detail::record(tp, std::abs(out.matrix().trace().real() - 1.0), w);
    detail::record(pos, std::max(0.0, -min_eigenvalue(out.matrix())), w);

    // Weak MCM on a random qubit ensemble with a random admissible rate.
    const Ensemble e = random::ensemble(rng, 2, n);
    const McmSolution sol = solve_mcm(e);
    const WeightSolution ws = min_inconclusive_rate(e, sol.projectors());
    const double eta = ws.inconclusive_rate + (1.0 - ws.inconclusive_rate) * unit(rng);
    const WeakDesign design = design_weak_mcm(e, sol, eta);
    WeakMcm weak = design.weak;
    for (std::size_t x = 0; x < n; ++x) weak.retarget.emplace_back(random::pure_state(rng, 2));
    const PovmReport pr = validate_povm(weaken(weak.base, weak.alpha));
    detail::record(povm, std::max(-pr.psd_margin(), pr.completeness_residual),
                   detail::instance(i, 2, n));
    const KrausChannel kc = kraus_from_weak(weak);
    detail::record(comp, kc.completeness_residual(), detail::instance(i, 2, n));
    const EnsembleDistance dist = ensemble_distance(e, kc.apply(e));
    detail::record(bound, std::max(0.0, dist.lower_bound - dist.distance),
                   detail::instance(i, 2, n));
  }
  return {tp, pos, povm, comp, bound};
}

inline std::vector<Check> family_checks(const Options&) {
  Check gu = detail::make("families", "families", "gu confidence and weights", 1e-9);
  for (std::size_t n = 3; n <= 6; ++n) {
    const Ensemble e = families::gu({n});
    const McmSolution sol = solve_mcm(e);
    const WeightSolution w = min_inconclusive_rate(e, sol.projectors());
    const auto o = families::gu_oracle({n});
    double worst = std::abs(w.inconclusive_rate);
    for (std::size_t x = 0; x < n; ++x) {
      worst = std::max({worst, std::abs(sol[x].confidence - o.confidence),
                        std::abs(w.weights[x] - o.weight)});
    }
    detail::record(gu, worst, "N=" + std::to_string(n));
  }
  Check lifted = detail::make("families", "families", "lifted gu confidence and weights", 1e-7);
  for (double theta : {0.6, 1.0, 1.3, kPi / 2}) {
    const families::LiftedGuParams l{3, theta, 0.8};
    const Ensemble e = families::lifted_gu(l);
    const McmSolution sol = solve_mcm(e);
    const WeightSolution w = min_inconclusive_rate(e, sol.projectors());
    const auto o = families::lifted_gu_oracle(l);
    double worst = std::abs(w.inconclusive_rate - o.eta_min);
    for (std::size_t x = 0; x < 3; ++x) {
      worst = std::max({worst, std::abs(sol[x].confidence - o.confidence),
                        std::abs(w.weights[x] - o.weight)});
    }
    detail::record(lifted, worst, "theta=" + std::to_string(theta));
  }
  Check mirror = detail::make("families", "families", "mirror first-party closed forms", 1e-9);
  for (double theta : {kPi / 3, 5 * kPi / 9, 2 * kPi / 3, 7 * kPi / 9}) {
    const Ensemble e = families::mirror(families::MirrorParams{theta});
    const McmSolution sol = solve_mcm(e);
    const auto o = families::mirror_oracle({theta});
    const WeightSolution w = min_inconclusive_rate(e, sol.projectors());
    const double worst = std::max({std::abs(sol[0].confidence - o.c1),
                                   std::abs(sol[1].confidence - o.c2),
                                   std::abs(sol[2].confidence - o.c2),
                                   std::abs(w.weights[0] - o.a1), std::abs(w.weights[1] - o.a2)});
    detail::record(mirror, worst, "theta=" + std::to_string(theta));
  }
  Check two = detail::make("families", "families", "two-state confidence", 1e-10);
  for (double p : {0.2, 0.5, 0.9, 1.0}) {
    for (double theta : {0.3, 1.0, 2.0}) {
      const families::TwoMixedParams t{p, theta};
      const McmSolution sol = solve_mcm(families::two_mixed(t));
      const double c = families::two_mixed_oracle(t).confidence;
      detail::record(two, std::max(std::abs(sol[0].confidence - c), std::abs(sol[1].confidence - c)),
                     "p=" + std::to_string(p) + " theta=" + std::to_string(theta));
    }
  }
  return {gu, lifted, mirror, two};
}

/// Runs one suite by name, or all of them for "all".
inline Report run(const std::string& suite, const Options& o = {}) {
  Report r;
  auto add = [&](std::vector<Check> cs) {
    for (auto& c : cs) r.checks.push_back(std::move(c));
  };
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "duality") add(duality(o)), known = true;
  if (all || suite == "kkt") add(kkt(o)), known = true;
  if (all || suite == "monotonicity") add(monotonicity(o)), known = true;
  if (all || suite == "proposition") add(proposition(o)), known = true;
  if (all || suite == "channels") add(channels(o)), known = true;
  if (all || suite == "families") add(family_checks(o)), known = true;
  if (!known) throw ValidationError("unknown verify suite '" + suite + "'");
  return r;
}

}  // namespace seqmcm::verify
