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
#include "seqmcm/families.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"

namespace seqmcm {
namespace {

TEST(MinInconclusiveRate, Trine) {
  const Ensemble e = families::gu({3});
  const WeightSolution w = min_inconclusive_rate(e, solve_mcm(e).projectors());
  for (double a : w.weights) EXPECT_NEAR(a, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(w.inconclusive_rate, 0.0, 1e-12);
  EXPECT_GE(w.psd_margin, -1e-12);
}

TEST(MinInconclusiveRate, LiftedGu) {
  const families::LiftedGuParams l{3, kPi / 3, 1.0};
  const Ensemble e = families::lifted_gu(l);
  const WeightSolution w = min_inconclusive_rate(e, solve_mcm(e).projectors());
  for (double a : w.weights) EXPECT_NEAR(a, 4.0 / 9.0, 1e-9);
  EXPECT_NEAR(w.inconclusive_rate, 0.5, 1e-9);
}

TEST(MinInconclusiveRate, MirrorWeightsCompleteIdentity) {
  for (double theta : {kPi / 3, 5 * kPi / 9, 7 * kPi / 9}) {
    const Ensemble e = families::mirror(families::MirrorParams{theta});
    const WeightSolution w = min_inconclusive_rate(e, solve_mcm(e).projectors());
    const auto o = families::mirror_oracle({theta});
    EXPECT_NEAR(w.inconclusive_rate, 0.0, 1e-9);
    EXPECT_NEAR(w.weights[0], o.a1, 1e-9);
    EXPECT_NEAR(w.weights[1], o.a2, 1e-9);
    EXPECT_NEAR(w.weights[2], o.a2, 1e-9);
  }
}

TEST(MinInconclusiveRate, SingleNonOrthogonalPairNeedsInconclusive) {
  const Ensemble e = families::two_mixed({1.0, kPi / 3});
  const WeightSolution w = min_inconclusive_rate(e, solve_mcm(e).projectors());
  // Unambiguous discrimination of equiprobable pure states: eta = |<psi1|psi2>|.
  EXPECT_NEAR(w.inconclusive_rate, 0.5, 1e-9);
}

TEST(MinErrorGuessing, Helstrom) {
  const GuessingSolution g = min_error_guessing(families::two_mixed({1.0, kPi / 4}));
  EXPECT_NEAR(g.p_guess, 0.5 * (1.0 + std::sqrt(0.5)), 1e-8);
  EXPECT_LE(g.lower_bound, g.p_guess + 1e-12);
}

TEST(MinErrorGuessing, TrineMatchesCovariantGrid) {
  // Covariant rank-one POVMs (2/3)|phi_x><phi_x| with phi_x rotated by t.
  double best = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = -kPi + 2 * kPi * k / 2000.0;
    double p = 0.0;
    for (std::size_t x = 0; x < 3; ++x) {
      const PureState phi = families::detail::equator(families::detail::gu_phase(3, x) + t);
      p += (1.0 / 3.0) * (2.0 / 3.0) * std::norm(phi.inner(families::gu_state(3, x)));
    }
    best = std::max(best, p);
  }
  const GuessingSolution g = min_error_guessing(families::gu({3}));
  EXPECT_NEAR(g.p_guess, best, 1e-8);
  EXPECT_NEAR(g.p_guess, 2.0 / 3.0, 1e-8);
}

TEST(MinErrorGuessing, ScaleCap) {
  std::vector<DensityMatrix> s(2, DensityMatrix::maximally_mixed(5));
  EXPECT_THROW(min_error_guessing(Ensemble::uniform(s)), UnsupportedScaleError);
}

TEST(TwoStateLeastDisturbing, NoGain) {
  const LeastDisturbing r = two_state_least_disturbing(0.8, 0.3, 0.0);
  EXPECT_EQ(r.a1, 0.0);
  EXPECT_EQ(r.a2, 0.0);
  EXPECT_NEAR(r.new_overlap, 0.3, 1e-15);
}

TEST(TwoStateLeastDisturbing, MaximalGainMergesStates) {
  const LeastDisturbing r = two_state_least_disturbing(0.8, 0.3, 0.8 * 0.7);
  EXPECT_NEAR(r.new_overlap, 1.0, 1e-12);
}

TEST(TwoStateLeastDisturbing, WorkedPoint) {
  const LeastDisturbing r = two_state_least_disturbing(0.75, 0.4, 0.15);
  EXPECT_NEAR(r.a1, 0.15 / (0.75 * 0.84), 1e-14);
  EXPECT_NEAR(r.a2, r.a1, 1e-15);
  EXPECT_NEAR(r.a1 + r.b, 1.0 / 0.84, 1e-14);
  EXPECT_NEAR(r.new_overlap, 0.5, 1e-14);
}

TEST(TwoStateLeastDisturbing, GainAboveBound) {
  EXPECT_THROW(two_state_least_disturbing(0.75, 0.4, 0.5), InfeasibleError);
}

TEST(OptimalJointSchedule, SingleParty) {
  const GainSchedule s = optimal_joint_schedule(0.9, 0.3, 1);
  EXPECT_NEAR(s.joint_success, 0.9 * 0.7, 1e-15);
  EXPECT_NEAR(s.gains[0], 0.9 * 0.7, 1e-15);
}

TEST(OptimalJointSchedule, IndistinguishableStates) {
  EXPECT_NEAR(optimal_joint_schedule(0.5, 1.0, 3).joint_success, 0.0, 1e-15);
}

TEST(OptimalJointSchedule, TwoPartiesWorkedPoint) {
  const GainSchedule s = optimal_joint_schedule(1.0, 0.5, 2);
  EXPECT_NEAR(s.joint_success, std::pow(1.0 - std::sqrt(0.5), 2), 1e-15);
  EXPECT_NEAR(s.joint_success, 0.08578643762690485, 1e-15);
  EXPECT_NEAR(s.overlaps[1], std::sqrt(0.5), 1e-15);
}

TEST(OptimalJointSchedule, OrthogonalIsDegenerate) {
  const GainSchedule s = optimal_joint_schedule(1.0, 0.0, 3);
  EXPECT_TRUE(s.degenerate);
  EXPECT_FALSE(s.note.empty());
  for (double g : s.gains) EXPECT_EQ(g, 1.0);
}

TEST(OptimalJointSchedule, BeatsEveryFeasibleSplit) {
  const double c = 0.85, s = 0.35;
  const GainSchedule best = optimal_joint_schedule(c, s, 2);
  for (int k = 1; k < 400; ++k) {
    // (1 - G1/C)(1 - G2/C) = s
    const double u = s + (1.0 - s) * k / 400.0;
    const double g1 = c * (1.0 - u);
    const double g2 = c * (1.0 - s / u);
    const std::vector<double> gains{g1, g2};
    EXPECT_LE(joint_success_for_gains(c, gains), best.joint_success + 1e-15);
  }
  EXPECT_NEAR(best.joint_success, oracle::two_state_joint(c, s, 2), 1e-15);
}

TEST(LeastDisturbing, OverlapTargetMatchesGainForm) {
  const double c = 0.75, s = 0.4;
  const LeastDisturbing by_gain = two_state_least_disturbing(c, s, 0.15);
  const LeastDisturbing by_overlap = two_state_least_disturbing_to_overlap(s, by_gain.new_overlap);
  EXPECT_NEAR(by_overlap.a1, by_gain.a1, 1e-14);
  EXPECT_NEAR(by_overlap.b, by_gain.b, 1e-14);
}

TEST(LeastDisturbing, FullOverlapTargetIsExact) {
  const LeastDisturbing ld = two_state_least_disturbing_to_overlap(0.3, 1.0);
  EXPECT_EQ(ld.new_overlap, 1.0);
  EXPECT_NEAR(ld.a1 + ld.b, 1.0 / (1.0 - 0.09), 1e-15);
  EXPECT_THROW(two_state_least_disturbing_to_overlap(0.5, 0.2), InfeasibleError);
}

TEST(MinInconclusiveRate, NonUniqueOptimumEndsAtSymmetricWeights) {
  // Five lifted GU projectors: the optimal face is a segment or larger.
  const Ensemble e = families::lifted_gu({5, 1.4, 1.0});
  const WeightSolution w = min_inconclusive_rate(e, solve_mcm(e).projectors());
  EXPECT_TRUE(w.polished);
  for (double a : w.weights) EXPECT_NEAR(a, 2.0 / (5.0 * (1.0 + std::cos(1.4))), 1e-9);
  EXPECT_GE(w.psd_margin, -1e-12);
}

TEST(GoldenSection, Parabola) {
  const SearchResult r = golden_section([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, -1.0, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 0.3, 1e-7);
  EXPECT_NEAR(r.value, 1.0, 1e-15);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](std::span<const double> p) {
    return 100.0 * std::pow(p[1] - p[0] * p[0], 2) + std::pow(1.0 - p[0], 2);
  };
  NelderMeadOptions opt;
  opt.max_iter = 5000;
  const SearchResult r = nelder_mead(f, std::vector<double>{-1.2, 1.0}, std::vector<double>{0.5, 0.5}, opt);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(NelderMead, IterationCapIsReported) {
  auto f = [](std::span<const double> p) { return std::pow(p[0] - 3.0, 2) + std::pow(p[1] + 1.0, 2); };
  NelderMeadOptions opt;
  opt.max_iter = 3;
  const SearchResult r = nelder_mead(f, std::vector<double>{0.0, 0.0}, std::vector<double>{0.1, 0.1}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isfinite(r.value));
}

}  // namespace
}  // namespace seqmcm
