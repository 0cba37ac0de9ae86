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
#include "seqmcm/random.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm {
namespace {

Povm trine_povm() {
  std::vector<ComplexMatrix> elems;
  for (std::size_t x = 0; x < 3; ++x) elems.push_back(2.0 / 3.0 * families::gu_state(3, x).projector());
  return Povm(elems, ComplexMatrix::Zero(2, 2));
}

WeakMcm trine_weak(double eta) {
  WeakMcm w{trine_povm(), std::vector<double>(3, 1.0 - eta), {}, {}, {}, std::nullopt};
  for (std::size_t x = 0; x < 3; ++x) w.retarget.emplace_back(families::gu_state(3, x));
  return w;
}

TEST(Weaken, FullStrengthIsIdentical) {
  const Povm p = weaken(trine_povm(), 1.0);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_LT(max_abs(p.conclusive()[x] - trine_povm().conclusive()[x]), 1e-16);
}

TEST(Weaken, ZeroStrengthIsAllInconclusive) {
  const Povm p = weaken(trine_povm(), 0.0);
  EXPECT_LT(max_abs(p.inconclusive() - identity(2)), 1e-16);
}

TEST(Weaken, TrineHalfStrength) {
  const Povm p = weaken(trine_povm(), 0.5);
  EXPECT_LT(max_abs(p.inconclusive() - 0.5 * identity(2)), 1e-15);
  EXPECT_NEAR(inconclusive_rate(families::gu({3}), p), 0.5, 1e-15);
}

TEST(Weaken, RejectsBadFactors) {
  EXPECT_THROW(weaken(trine_povm(), std::vector<double>{0.5, 0.5}), ValidationError);
  EXPECT_THROW(weaken(trine_povm(), 1.5), ValidationError);
}

TEST(KrausFromWeak, TrineInconclusiveIsScaledIdentity) {
  const double eta = 0.3;
  const KrausChannel ch = kraus_from_weak(trine_weak(eta));
  EXPECT_LT(ch.completeness_residual(), 1e-14);
  bool found = false;
  for (const auto& k : ch.operators()) {
    if (k.label == kInconclusive) {
      found = true;
      EXPECT_LT(max_abs(k.op - std::sqrt(eta) * identity(2)), 1e-14);
    }
  }
  EXPECT_TRUE(found);
}

TEST(KrausFromWeak, ZeroStrengthIsIdentityChannel) {
  const KrausChannel ch = kraus_from_weak(trine_weak(1.0));
  ASSERT_EQ(ch.operators().size(), 1u);
  EXPECT_LT(max_abs(ch.operators()[0].op - identity(2)), 1e-15);
}

TEST(KrausFromWeak, TwoStateInconclusiveWeightsSatisfyConstraint) {
  const Ensemble e = families::two_mixed({0.8, 1.1});
  const McmSolution sol = solve_mcm(e);
  const auto o = families::two_mixed_oracle({0.8, 1.1});
  const double gain = 0.5 * o.confidence * (1.0 - o.overlap);
  const WeakMcm w = families::two_state_weak_mcm(e, sol, gain);
  ASSERT_TRUE(w.inconclusive_retarget.has_value());
  const double a = trace_product(w.base.conclusive()[0], identity(2)).real();
  for (double b : *w.inconclusive_retarget) {
    EXPECT_NEAR(a + b, 1.0 / (1.0 - o.overlap * o.overlap), 1e-12);
  }
  EXPECT_LT(kraus_from_weak(w).completeness_residual(), 1e-12);
}

TEST(KrausChannel, IncompleteOperatorsRaise) {
  try {
    KrausChannel({KrausOp{0, 0.9 * identity(2)}});
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NEAR(e.residual(), 0.19, 1e-12);
  }
}

TEST(Apply, IdentityChannel) {
  const DensityMatrix rho = from_bloch({0.1, 0.2, 0.3});
  EXPECT_LT(max_abs(KrausChannel::identity_channel(2).apply(rho).matrix() - rho.matrix()), 1e-16);
}

TEST(Apply, DimensionMismatch) {
  EXPECT_THROW(KrausChannel::identity_channel(2).apply(DensityMatrix::maximally_mixed(3)), ValidationError);
}

TEST(Apply, TrineChannelShrinksTowardPerp) {
  for (double eta : {0.0, 0.4, 0.9}) {
    const KrausChannel ch = kraus_from_weak(trine_weak(eta));
    const double pp = 0.5 * (1.0 + 0.5 * (1.0 + eta));
    for (std::size_t x = 0; x < 3; ++x) {
      const PureState psi = families::gu_state(3, x);
      const ComplexMatrix perp = identity(2) - psi.projector();
      const ComplexMatrix expected = pp * psi.projector() + (1.0 - pp) * perp;
      EXPECT_LT(max_abs(ch.apply(DensityMatrix::from_pure(psi)).matrix() - expected), 1e-14);
    }
  }
}

TEST(Apply, LiftedGuContraction) {
  const families::LiftedGuParams l{3, 1.1, 0.9};
  const double eta = 0.7;
  const Ensemble e = families::lifted_gu(l);
  const SequentialTrace t = run_sequence(e, families::lifted_gu_strategy(3, {eta}), 1);
  const double delta = oracle::lifted_delta(eta, l.theta);
  for (std::size_t x = 0; x < 3; ++x) {
    const DensityMatrix expected = families::lifted_gu_state({3, l.theta, l.lambda * delta}, x);
    EXPECT_LT(max_abs(t.final_ensemble->state(x).matrix() - expected.matrix()), 1e-9);
  }
}

TEST(InformationGain, NoMeasurementGainsNothing) {
  EXPECT_EQ(information_gain(families::gu({3}), weaken(trine_povm(), 0.0)), 0.0);
}

TEST(InformationGain, FullTrineEqualsConfidence) {
  EXPECT_NEAR(information_gain(families::gu({3}), trine_povm()), 2.0 / 3.0, 1e-15);
}

TEST(InformationGain, TwoStateFormula) {
  const families::TwoMixedParams t{0.7, 0.9};
  const Ensemble e = families::two_mixed(t);
  const auto o = families::two_mixed_oracle(t);
  const WeakMcm w = families::two_state_weak_mcm(e, solve_mcm(e), 0.1);
  const double a = trace_product(w.base.conclusive()[0], identity(2)).real();
  const double g = information_gain(e, weaken(w.base, w.alpha));
  EXPECT_NEAR(g, 0.5 * o.confidence * (a + a) * (1.0 - o.overlap * o.overlap), 1e-12);
  EXPECT_NEAR(g, 0.1, 1e-12);
}

TEST(EnsembleDistance, IdenticalEnsembles) {
  const EnsembleDistance d = ensemble_distance(families::gu({3}), families::gu({3}));
  EXPECT_EQ(d.distance, 0.0);
  EXPECT_NEAR(d.lower_bound, 0.0, 1e-16);
}

TEST(EnsembleDistance, LiftedGuClosedForm) {
  const families::LiftedGuParams l{3, 1.2, 0.8};
  const SequentialTrace t = run_sequence(families::lifted_gu(l), families::lifted_gu_strategy(3, {0.6}), 1);
  const double expected = l.lambda * std::sin(l.theta) * (1.0 - oracle::lifted_delta(0.6, l.theta));
  EXPECT_NEAR(t.parties[0].disturbance, expected, 1e-9);
}

TEST(EnsembleDistance, PriorMismatch) {
  std::vector<DensityMatrix> s{DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2)};
  EXPECT_THROW(ensemble_distance(Ensemble({0.5, 0.5}, s), Ensemble({0.4, 0.6}, s)), ValidationError);
}

TEST(EnsembleDistance, RandomChannelsRespectLowerBound) {
  random::Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const Ensemble e = random::ensemble(rng, 3, 3);
    const EnsembleDistance d = ensemble_distance(e, random::channel(rng, 3, 2).apply(e));
    EXPECT_GE(d.distance, d.lower_bound - 1e-12);
  }
}

TEST(RunSequence, SinglePartyIsTheMcm) {
  const Ensemble e = families::gu({3});
  const SequentialTrace t = run_sequence(e, families::gu_strategy(3, {0.0}), 1);
  ASSERT_EQ(t.parties.size(), 1u);
  EXPECT_NEAR(t.parties[0].mcm[0].confidence, 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(t.joint_success, t.parties[0].gain, 1e-14);
  EXPECT_NEAR(t.joint_success, 2.0 / 3.0, 1e-12);
}

TEST(RunSequence, TrineConfidenceRecursion) {
  const SequentialTrace t = run_sequence(families::gu({3}), families::gu_strategy(3, {0.5}), 6);
  for (std::size_t j = 1; j <= 6; ++j) {
    const double expected = 2.0 / 3.0 * oracle::gu_p_plus(0.5, j);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(t.parties[j - 1].mcm[x].confidence, expected, 1e-12);
  }
}

TEST(RunSequence, TwoStateOverlapSchedule) {
  const families::TwoMixedParams p{0.9, 1.2};
  const auto o = families::two_mixed_oracle(p);
  const auto sched = families::two_mixed_schedule(p, 3);
  const SequentialTrace t = run_sequence(families::two_mixed(p), families::two_mixed_strategy(sched.gains), 3);
  for (std::size_t j = 1; j <= 3; ++j) {
    const auto v = t.parties[j - 1].mcm.projectors();
    EXPECT_NEAR(std::abs(v[0].inner(v[1])), std::pow(o.overlap, 1.0 - (j - 1) / 3.0), 1e-10);
  }
}

TEST(RunSequence, InfeasibleRateNamesParty) {
  const families::LiftedGuParams l{3, 1.0, 1.0};
  try {
    run_sequence(families::lifted_gu(l), families::lifted_gu_strategy(3, {0.9, 0.1}), 3);
    FAIL() << "expected SequenceError";
  } catch (const SequenceError& e) {
    EXPECT_EQ(e.party(), 2u);
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
    EXPECT_NE(std::string(e.what()).find("party 2"), std::string::npos);
  }
}

TEST(JointOutcomes, MatchesForwardCompositionAndFormula) {
  const SequentialTrace t = run_sequence(families::two_mixed({1.0, kPi / 3}),
                                         families::two_mixed_strategy(families::two_mixed_schedule({1.0, kPi / 3}, 2).gains), 2);
  const oracle::Joint f = oracle::forward_joint(t);
  EXPECT_NEAR(t.joint_success, f.success, 1e-12);
  EXPECT_NEAR(t.joint_inconclusive, f.inconclusive, 1e-12);
  EXPECT_NEAR(t.joint_success, std::pow(1.0 - std::sqrt(0.5), 2), 1e-12);
  EXPECT_NEAR(t.joint_inconclusive, 0.5, 1e-12);
}

TEST(JointOutcomes, LabelMismatch) {
  const SequentialTrace t = run_sequence(families::gu({3}), families::gu_strategy(3, {0.5}), 2);
  EXPECT_THROW(joint_outcomes(t, Povm::complete({identity(2) / 2.0})), ValidationError);
  EXPECT_THROW(joint_outcomes(SequentialTrace{}), StateError);
}

TEST(LinearIndependence, Cases) {
  auto elems = [](const Ensemble& e) {
    std::vector<ComplexMatrix> out;
    for (const auto& m : solve_mcm(e).entries) out.push_back(m.projector());
    return out;
  };
  EXPECT_TRUE(linear_independence(elems(families::two_mixed({0.6, 1.0}))));
  EXPECT_FALSE(linear_independence(elems(families::gu({3}))));
  EXPECT_FALSE(linear_independence(elems(families::gu({4}))));
}

TEST(LinearIndependence, SvdOracleOnGuFour) {
  // Four rank-one projectors in a 2-dimensional space cannot have independent ranges.
  ComplexMatrix stack(2, 4);
  for (std::size_t x = 0; x < 4; ++x) stack.col(static_cast<Eigen::Index>(x)) = families::gu_state(4, x).amplitudes();
  Eigen::JacobiSVD<ComplexMatrix> svd(stack);
  EXPECT_LE(svd.rank(), 2);
}

TEST(TwoStateWeakMcm, WorkedPointThroughChannel) {
  // p cos(theta) = 0.4 and p sin(theta) = 0.5 sqrt(0.84) give C = 0.75, s = 0.4.
  const double pc = 0.4, ps = 0.5 * std::sqrt(0.84);
  const families::TwoMixedParams t{std::hypot(pc, ps), std::atan2(ps, pc)};
  const auto o = families::two_mixed_oracle(t);
  ASSERT_NEAR(o.confidence, 0.75, 1e-14);
  ASSERT_NEAR(o.overlap, 0.4, 1e-14);
  const SequentialTrace tr = run_sequence(families::two_mixed(t), families::two_mixed_strategy({0.15}), 1);
  const auto v = tr.final_mcm->projectors();
  EXPECT_NEAR(std::abs(v[0].inner(v[1])), 0.5, 1e-10);
  EXPECT_NEAR(tr.parties[0].gain, 0.15, 1e-12);
}

}  // namespace
}  // namespace seqmcm
