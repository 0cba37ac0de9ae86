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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqmcm/disturbance.hpp"
#include "seqmcm/families.hpp"
#include "seqmcm/mcm.hpp"

namespace seqmcm {
namespace {

namespace f = families;

TEST(TwoMixed, PureStatesAreUnambiguous) {
  for (double theta : {0.2, 1.0, 2.0, 3.0}) {
    EXPECT_NEAR(f::two_mixed_oracle({1.0, theta}).confidence, 1.0, 1e-14);
    EXPECT_NEAR(solve_mcm(f::two_mixed({1.0, theta}))[0].confidence, 1.0, 1e-10);
  }
}

TEST(TwoMixed, OrthogonalBlochDirections) {
  const auto o = f::two_mixed_oracle({0.5, kPi / 2});
  EXPECT_NEAR(o.confidence, 0.75, 1e-15);
  EXPECT_NEAR(o.overlap, 0.0, 1e-15);
}

TEST(TwoMixed, WorkedPointAgainstEigenOracle) {
  const f::TwoMixedParams t{0.8, kPi / 3};
  const auto o = f::two_mixed_oracle(t);
  EXPECT_NEAR(o.overlap, 0.4, 1e-15);
  EXPECT_NEAR(o.confidence, 0.5 * (1.0 + 0.8 * std::sqrt(3.0) / 2.0 / std::sqrt(0.84)), 1e-15);
  EXPECT_NEAR(o.confidence, 0.8779644730092272, 1e-12);
  EXPECT_NEAR(o.confidence, oracle::confidence(f::two_mixed(t), 0), 1e-12);
}

TEST(TwoMixed, OracleVectorsAreTheMcm) {
  const f::TwoMixedParams t{0.6, 2.2};
  const auto o = f::two_mixed_oracle(t);
  const auto v = solve_mcm(f::two_mixed(t)).projectors();
  EXPECT_NEAR(std::abs(v[0].inner(o.mcm_vectors[0])), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(v[1].inner(o.mcm_vectors[1])), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(o.perp[0].inner(o.mcm_vectors[0])), 0.0, 1e-15);
}

TEST(TwoMixed, RejectsParameters) {
  EXPECT_THROW(f::two_mixed({0.0, 1.0}), ValidationError);
  EXPECT_THROW(f::two_mixed({0.5, 0.0}), ValidationError);
  EXPECT_THROW(f::two_mixed({1.2, 1.0}), ValidationError);
}

TEST(Gu, NoMeasurementKeepsConfidence) {
  const SequentialTrace t = run_sequence(f::gu({3}), f::gu_strategy(3, {1.0}), 5);
  for (const auto& p : t.parties) EXPECT_NEAR(p.mcm[0].confidence, 2.0 / 3.0, 1e-14);
}

TEST(Gu, SecondPartyAfterFullStrength) {
  const std::vector<double> earlier{0.0};
  EXPECT_NEAR(f::gu_p_plus(earlier), 0.75, 1e-16);
  EXPECT_NEAR(f::gu_confidence(3, earlier), 0.5, 1e-16);
}

TEST(Gu, FiveStatesThirdParty) {
  const std::vector<double> earlier{0.5, 0.5};
  EXPECT_NEAR(f::gu_p_plus(earlier), 0.78125, 1e-16);
  EXPECT_NEAR(f::gu_confidence(5, earlier), 0.3125, 1e-16);
  const SequentialTrace t = run_sequence(f::gu({5}), f::gu_strategy(5, {0.5}), 3);
  EXPECT_NEAR(t.parties[2].mcm[0].confidence, 0.3125, 1e-12);
}

TEST(Gu, OptimalRetargetIsTheStateItself) {
  const Ensemble e = f::gu({3});
  const DisturbanceResult r = minimize_disturbance_numeric(e, solve_mcm(e), 0.5, f::gu_retarget_family(3));
  for (std::size_t x = 0; x < 3; ++x) {
    EXPECT_NEAR(std::abs(r.retarget[x].inner(f::gu_state(3, x))), 1.0, 1e-6);
  }
  // Brute force over the covariant family.
  double best = 1e9;
  const auto fam = f::gu_retarget_family(3);
  const WeakDesign base = design_weak_mcm(e, solve_mcm(e), 0.5);
  for (int i = 0; i <= 60; ++i) {
    for (int k = 0; k <= 60; ++k) {
      const std::vector<double> p{kPi * i / 60.0, -kPi + 2 * kPi * k / 60.0};
      WeakMcm w = base.weak;
      for (auto& s : fam.states(p)) w.retarget.emplace_back(s);
      best = std::min(best, ensemble_distance(e, kraus_from_weak(w).apply(e)).distance);
    }
  }
  EXPECT_LE(r.disturbance, best + 1e-9);
}

TEST(LiftedGu, EquatorialDelta) {
  for (double eta : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_NEAR(f::lifted_gu_delta(eta, kPi / 2), 0.5 * (1.0 + eta), 1e-15);
  }
}

TEST(LiftedGu, NoMeasurementLimit) {
  EXPECT_NEAR(f::lifted_gu_delta(1.0, kPi / 2), 1.0, 1e-15);
  const SequentialTrace t = run_sequence(f::lifted_gu({3, kPi / 2, 0.8}), f::lifted_gu_strategy(3, {1.0}), 3);
  for (const auto& p : t.parties) EXPECT_NEAR(p.mcm[0].confidence, 1.8 / 3.0, 1e-12);
}

TEST(LiftedGu, PartyBoundExample) {
  const f::PartyBound b = f::lifted_gu_party_bound({3, kPi / 2, 1.0}, 0.5, 0.4);
  EXPECT_NEAR(b.bound, 1.0 + std::log(0.2) / std::log(0.75), 1e-14);
  EXPECT_NEAR(b.bound, 6.594, 1e-3);
  EXPECT_EQ(b.r_max, 6u);
  const SequentialTrace t = run_sequence(f::lifted_gu({3, kPi / 2, 1.0}), f::lifted_gu_strategy(3, {0.5}), 7);
  EXPECT_GE(t.parties[5].mcm[0].confidence, 0.4);
  EXPECT_LT(t.parties[6].mcm[0].confidence, 0.4);
}

TEST(LiftedGu, RateBelowCosThetaIsInfeasible) {
  EXPECT_THROW(f::lifted_gu_delta(0.3, 1.0), InfeasibleError);
  EXPECT_THROW(f::lifted_gu_party_bound({3, 1.0, 1.0}, 0.3, 0.5), InfeasibleError);
}

TEST(LiftedGu, OracleMatchesEngine) {
  for (double theta : {0.5, 1.0, 1.4}) {
    const f::LiftedGuParams l{4, theta, 0.6};
    const auto o = f::lifted_gu_oracle(l);
    const McmSolution sol = solve_mcm(f::lifted_gu(l));
    for (std::size_t x = 0; x < 4; ++x) {
      EXPECT_NEAR(sol[x].confidence, o.confidence, 1e-12);
      EXPECT_NEAR(std::abs(sol[x].basis[0].inner(o.mcm_vectors[x])), 1.0, 1e-10);
    }
  }
}

TEST(LiftedGu, NumericRetargetPrefersEquator) {
  const f::LiftedGuParams l{3, 1.1, 1.0};
  const Ensemble e = f::lifted_gu(l);
  const DisturbanceResult r = minimize_disturbance_numeric(e, solve_mcm(e), 0.6, f::lifted_gu_retarget_family(3));
  EXPECT_NEAR(r.params[0], kPi / 2, 1e-4);
  EXPECT_NEAR(r.disturbance, f::lifted_gu_disturbance(1.0, l.theta, 0.6), 1e-8);
}

TEST(Mirror, TrineLimit) {
  const auto o = f::mirror_oracle({2 * kPi / 3});
  EXPECT_NEAR(o.cos_phi, -0.5, 1e-15);
  EXPECT_NEAR(o.a1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(o.a2, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(o.c1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(o.c2, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(o.cos_varphi, -0.5, 1e-15);
}

TEST(Mirror, OracleMatchesEngineAndIndependentForm) {
  for (double theta : {0.7, 1.5, 2.5}) {
    const auto o = f::mirror_oracle({theta});
    EXPECT_NEAR(o.cos_phi, oracle::mirror_cos_phi(theta), 1e-15);
    const Ensemble e = f::mirror(f::MirrorParams{theta});
    const McmSolution sol = solve_mcm(e);
    EXPECT_NEAR(sol[0].confidence, oracle::confidence(e, 0), 1e-12);
    EXPECT_NEAR(sol[0].confidence, o.c1, 1e-12);
    EXPECT_NEAR(sol[1].confidence, o.c2, 1e-12);
    EXPECT_NEAR(to_bloch(DensityMatrix::from_pure(sol[1].basis[0]))[0], o.cos_phi, 1e-12);
  }
}

TEST(Mirror, TrineAngleIsAFixedPoint) {
  f::MirrorState s{1.0, 1.0, 2 * kPi / 3};
  for (int j = 0; j < 5; ++j) {
    const f::MirrorStep step = f::mirror_step(s, 0.5);
    EXPECT_NEAR(step.next.theta, s.theta, 1e-12);
    s = step.next;
  }
}

TEST(Mirror, Trichotomy) {
  const double eta = 0.5;
  const auto below = f::mirror_step({1.0, 1.0, 5 * kPi / 9}, eta);
  const auto above = f::mirror_step({1.0, 1.0, 7 * kPi / 9}, eta);
  EXPECT_LT(below.next.theta, 5 * kPi / 9);
  EXPECT_GT(above.next.theta, 7 * kPi / 9);
  // The numeric minimizer of D agrees on the direction.
  for (double theta : {5 * kPi / 9, 7 * kPi / 9}) {
    const SequentialTrace t =
        run_sequence(f::mirror(f::MirrorParams{theta}), f::mirror_strategy({eta}, f::MirrorRetarget::kNumeric), 1);
    const double next = f::mirror_state_of(*t.final_ensemble).theta;
    EXPECT_EQ(next > theta, theta > 2 * kPi / 3);
  }
}

TEST(Mirror, EngineFollowsBlochRecursion) {
  const f::MirrorState s0{1.0, 1.0, 1.9};
  const SequentialTrace t =
      run_sequence(f::mirror(s0), f::mirror_strategy({0.4}, f::MirrorRetarget::kLowerBound), 3);
  f::MirrorState s = s0;
  for (std::size_t j = 0; j < 3; ++j) {
    const f::MirrorStep step = f::mirror_step(s, 0.4);
    const f::MirrorState got = f::mirror_state_of(j + 1 < 3 ? t.parties[j + 1].ensemble : *t.final_ensemble);
    EXPECT_NEAR(got.r1, step.next.r1, 1e-10);
    EXPECT_NEAR(got.r2, step.next.r2, 1e-10);
    EXPECT_NEAR(got.theta, step.next.theta, 1e-10);
    EXPECT_NEAR(t.parties[j].mcm[0].confidence, step.confidences[0], 1e-10);
    s = step.next;
  }
}

TEST(Mirror, DegenerateAngle) {
  EXPECT_THROW(f::mirror_oracle({1e-9}), DomainError);
  EXPECT_THROW(f::mirror(f::MirrorParams{0.0}), ValidationError);
}

TEST(QubitMcmBloch, MatchesEigenSolver) {
  const Ensemble e = f::mirror(f::MirrorState{0.7, 0.9, 2.0});
  const ComplexMatrix avg = e.average();
  const BlochVector ravg = to_bloch(DensityMatrix(avg));
  for (std::size_t x = 0; x < 3; ++x) {
    const f::QubitMcm q = f::qubit_mcm_bloch(1.0 / 3.0, to_bloch(e.state(x)), ravg);
    EXPECT_NEAR(q.confidence, oracle::confidence(e, x), 1e-12);
  }
}

}  // namespace
}  // namespace seqmcm
