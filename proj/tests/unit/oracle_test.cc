// Copyright 2026 The perpolicy Authors. All rights reserved.
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

#include "perpolicy/oracle.h"

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "perpolicy/cape.h"
#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

using testing::BinaryEnv;
using testing::PointMassEnv;

Environment EpsEnv(double eps, std::uint64_t seed = 1) {
  return BinaryEnv({-eps, eps}, seed);
}

PolicyPtr NonSumPolicy(int cap) {
  // Stops on two equal consecutive samples, accepts if the last one is +1.
  return std::make_shared<FunctionPolicy>(
      cap,
      [](std::span<const double> p) {
        return p.size() >= 2 && p[p.size() - 1] == p[p.size() - 2];
      },
      [](std::span<const double> p) { return p.back() > 0.0; }, "pair");
}

TEST(ExactPolicyValueTest, OneSamplePolicyOnEpsFixture) {
  const PolicyValue v = ExactPolicyValue(*testing::OneSamplePolicy(), EpsEnv(0.2));
  EXPECT_NEAR(v.reward, 0.02, 1e-15);
  EXPECT_EQ(v.cost, 1.0);
  EXPECT_EQ(v.method, ValueMethod::kExact);
}

TEST(ExactPolicyValueTest, AlwaysRejectIsZero) {
  for (const Environment& env : {EpsEnv(0.3), PointMassEnv(1.0),
                                 BinaryEnv({-1.0, 0.0, 1.0}, 2)}) {
    const PolicyValue v = ExactPolicyValue(*MakeAllReject(1), env);
    EXPECT_EQ(v.reward, 0.0);
    EXPECT_EQ(v.cost, 1.0);
    EXPECT_EQ(v.g3, 0.0);
  }
}

TEST(ExactPolicyValueTest, PointMassAlwaysAccept) {
  const PolicyValue v = ExactPolicyValue(*testing::AlwaysAccept(3), PointMassEnv(1.0));
  EXPECT_DOUBLE_EQ(v.reward, 1.0);
  EXPECT_DOUBLE_EQ(v.cost, 3.0);
  EXPECT_DOUBLE_EQ(v.g3, 1.0 / 3.0);
}

TEST(ExactPolicyValueTest, DynamicProgramMatchesEnumeration) {
  const CappedHoeffdingFamily family(0.45, 12, 1000, 0.1);
  const Environment env = BinaryEnv({-0.3, 0.0, 0.5}, 1);
  for (int k : {1, 4, 12}) {
    const PolicyPtr policy = family.Make(k);
    const PolicyValue dp = ExactPolicyValue(*policy, env);
    const PolicyValue en = EnumeratePolicyValue(*policy, env);
    EXPECT_NEAR(dp.reward, en.reward, 1e-12);
    EXPECT_NEAR(dp.cost, en.cost, 1e-12);
    EXPECT_NEAR(dp.g3, en.g3, 1e-12);
  }
  const Environment bern(ValueDistribution::UniformFinite({0.0, 0.4, 0.9}),
                         SampleModel::Bernoulli01(), 1);
  const PolicyPtr policy = family.Make(9);
  EXPECT_NEAR(ExactPolicyValue(*policy, bern).reward,
              EnumeratePolicyValue(*policy, bern).reward, 1e-12);
}

TEST(ExactPolicyValueTest, GuardErrorOnLargeTree) {
  const PolicyPtr never_stops = std::make_shared<FunctionPolicy>(
      12, [](std::span<const double>) { return false; },
      [](std::span<const double>) { return true; });
  EXPECT_THROW(ExactPolicyValue(*never_stops, EpsEnv(0.1), 1000), GuardError);
  EXPECT_NO_THROW(ExactPolicyValue(*never_stops, EpsEnv(0.1), 1 << 14));
}

TEST(ExactPolicyValueTest, ContinuousSamplesUnsupported) {
  const Environment env(ValueDistribution::PointMass(0.0),
                        SampleModel::UniformWindow(0.5), 1);
  EXPECT_FALSE(SupportsExact(env));
  EXPECT_THROW(ExactPolicyValue(*testing::AlwaysAccept(1), env),
               PreconditionError);
}

TEST(McPolicyValueTest, AgreesWithExact) {
  const Environment env = EpsEnv(0.2);
  const PolicyPtr policy = testing::OneSamplePolicy();
  const PolicyValue exact = ExactPolicyValue(*policy, env);
  const PolicyValue mc = McPolicyValue(*policy, env, 50000, 7);
  EXPECT_EQ(mc.method, ValueMethod::kMonteCarlo);
  EXPECT_LE(std::abs(mc.reward - exact.reward), 3.0 * mc.reward_se);
  EXPECT_EQ(mc.cost, 1.0);
}

TEST(McPolicyValueTest, AgreesWithExactOnFixtures) {
  const Environment envs[] = {EpsEnv(0.1), testing::GapEnv(1),
                              BinaryEnv({-1.0, 0.0, 1.0}, 3)};
  const PolicyPtr policies[] = {NonSumPolicy(6),
                                CappedHoeffdingFamily(0.54, 16, 1000, 0.1).Make(16)};
  for (const Environment& env : envs) {
    for (const PolicyPtr& policy : policies) {
      const PolicyValue exact = ExactPolicyValue(*policy, env);
      const PolicyValue mc = McPolicyValue(*policy, env, 20000, 11);
      EXPECT_LE(std::abs(mc.reward - exact.reward), 4.0 * mc.reward_se + 1e-12);
      EXPECT_LE(std::abs(mc.cost - exact.cost), 4.0 * mc.cost_se + 1e-12);
      EXPECT_LE(std::abs(mc.g3 - exact.g3), 4.0 * mc.g3_se + 1e-12);
    }
  }
}

TEST(McPolicyValueTest, DeterministicEnvironmentHasZeroError) {
  const PolicyValue mc = McPolicyValue(*testing::AlwaysAccept(3), PointMassEnv(1.0), 100, 1);
  EXPECT_EQ(mc.reward, 1.0);
  EXPECT_EQ(mc.reward_se, 0.0);
  EXPECT_EQ(mc.cost_se, 0.0);
}

TEST(McPolicyValueTest, StandardErrorScaling) {
  const Environment env = EpsEnv(0.5);
  const PolicyPtr policy = testing::OneSamplePolicy();
  const double se1 = McPolicyValue(*policy, env, 20000, 3).reward_se;
  const double se2 = McPolicyValue(*policy, env, 40000, 3).reward_se;
  EXPECT_LE(se2 / se1, 1.0 / std::sqrt(2.0) * 1.1);
  EXPECT_GE(se2 / se1, 1.0 / std::sqrt(2.0) * 0.9);
}

TEST(McPolicyValueTest, NeedsTwoTrials) {
  EXPECT_THROW(McPolicyValue(*MakeAllReject(1), EpsEnv(0.1), 1, 0),
               PreconditionError);
}

TEST(OracleTest, BenchmarkArgmaxAndGap) {
  const OracleValues oracle = ComputeOracle(testing::GapClass(), testing::GapEnv(1));
  EXPECT_NEAR(oracle.benchmark, 0.405, 1e-12);
  EXPECT_EQ(oracle.argmax, std::vector<int>{1});
  EXPECT_NEAR(oracle.gap, 0.2025, 1e-12);
  EXPECT_TRUE(oracle.IsOptimal(1));
  EXPECT_FALSE(oracle.IsOptimal(2));
  for (int k = 1; k <= oracle.size(); ++k) {
    EXPECT_LE(oracle.Ratio(k), oracle.benchmark);
    EXPECT_GE(oracle.values[k - 1].cost, 1.0);
    EXPECT_LE(std::abs(oracle.values[k - 1].reward), 1.0);
  }
}

TEST(OracleTest, TiedOptimaGiveInfiniteGap) {
  const PolicyClass tied({testing::OneSamplePolicy(), testing::OneSamplePolicy(),
                          testing::AlwaysAccept(3)});
  const OracleValues oracle = ComputeOracle(tied, EpsEnv(0.2));
  EXPECT_EQ(oracle.argmax, (std::vector<int>{1, 2}));
  EXPECT_TRUE(oracle.gap_is_infinite());
  const OracleValues single =
      ComputeOracle(PolicyClass({testing::OneSamplePolicy()}), EpsEnv(0.2));
  EXPECT_TRUE(single.gap_is_infinite());
}

TEST(OracleTest, MonteCarloMode) {
  OracleOptions options;
  options.mode = OracleOptions::Mode::kMonteCarlo;
  options.mc_trials = 2000;
  const OracleValues oracle = ComputeOracle(testing::GapClass(), testing::GapEnv(1), options);
  for (const PolicyValue& v : oracle.values) {
    EXPECT_EQ(v.method, ValueMethod::kMonteCarlo);
  }
}

TEST(RegretTest, Arithmetic) {
  const std::vector<RunTotals> totals{{300.0, 1000.0}, {300.0, 1000.0}};
  const RegretReport report = Regret(totals, 0.5);
  EXPECT_DOUBLE_EQ(report.realized_ratio, 0.3);
  EXPECT_DOUBLE_EQ(report.regret, 0.2);
  EXPECT_EQ(report.trials, 2);
  EXPECT_EQ(report.realized_se, 0.0);
  EXPECT_EQ(report.per_trial_ratios, (std::vector<double>{0.3, 0.3}));
}

TEST(RegretTest, RatioOfMeansNotMeanOfRatios) {
  const std::vector<RunTotals> totals{{1.0, 10.0}, {3.0, 10.0}, {0.0, 20.0}};
  EXPECT_DOUBLE_EQ(Regret(totals, 0.0).realized_ratio, 4.0 / 40.0);
}

TEST(RegretTest, FixedPolicyHasNoRegret) {
  const Environment env = EpsEnv(0.2);
  const PolicyPtr policy = testing::OneSamplePolicy();
  const OracleValues oracle = ComputeOracle(PolicyClass({policy}), env);
  std::vector<RunLog> logs;
  for (int t = 0; t < 40; ++t) {
    const Environment trial = env.WithSeed(100 + t);
    RunLog& log = logs.emplace_back(false);
    for (int i = 1; i <= 1000; ++i) {
      Task task = trial.NewTask(i);
      const TaskOutcome out = RunPolicy(*policy, task);
      log.Append(Phase::kFixed, 1, out.duration, out.decision, task.mu());
    }
  }
  const RegretReport report = Regret(logs, oracle);
  EXPECT_LE(std::abs(report.regret), 4.0 * report.realized_se);
}

TEST(RegretTest, CapeDeterministicFixtureWithinExplorationBound) {
  const PolicyClass policies({testing::ConstantMeanPolicy(1, 1.0),
                              testing::ConstantMeanPolicy(4, 1.0)});
  const OracleValues oracle = ComputeOracle(policies, PointMassEnv(1.0));
  constexpr long long kN = 20000;
  const long long n_ex = DefaultExplorationCap(kN);
  std::vector<RunLog> logs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RunLog& log = logs.emplace_back(false);
    RunCape(policies, PointMassEnv(1.0, seed), {kN, 0.1, 0}, log);
  }
  const RegretReport report = Regret(logs, oracle);
  EXPECT_GE(report.regret, 0.0);
  EXPECT_LE(report.regret, (2.0 * 4 + 1) * n_ex / static_cast<double>(kN));
}

TEST(ObjectiveTest, G2Boundaries) {
  const Environment env = PointMassEnv(1.0);
  const PolicyPtr policy = testing::AlwaysAccept(1);
  EXPECT_EQ(ObjectiveG2(*policy, env, 1, 10, 1).value, 0.0);
  EXPECT_DOUBLE_EQ(ObjectiveG2(*policy, env, 100, 10, 1).value, 0.99);
  // tau = 3 on T = 10: tasks end at 3, 6, 9; the fourth is cut off.
  EXPECT_DOUBLE_EQ(ObjectiveG2(*testing::AlwaysAccept(3), env, 10, 4, 1).value,
                   0.3);
}

TEST(ObjectiveTest, G2ConvergesToRatio) {
  const Environment env = EpsEnv(0.2);
  const PolicyPtr policy = testing::OneSamplePolicy();
  const McEstimate g2 = ObjectiveG2(*policy, env, 100000, 20, 5);
  EXPECT_LE(std::abs(g2.value - 0.02), 2.0 / 1e4);
}

TEST(ObjectiveTest, G1IsRatioOfMeans) {
  const Environment env = PointMassEnv(1.0);
  EXPECT_DOUBLE_EQ(ObjectiveG1(*testing::AlwaysAccept(4), env, 50, 3, 1).value,
                   0.25);
}

TEST(ObjectiveTest, G3Examples) {
  for (int d : {1, 2, 5}) {
    EXPECT_DOUBLE_EQ(ObjectiveG3(*testing::AlwaysAccept(d), PointMassEnv(1.0)),
                     1.0 / d);
  }
  EXPECT_EQ(ObjectiveG3(*MakeAllReject(3), EpsEnv(0.4)), 0.0);
  const McEstimate mc = ObjectiveG3Mc(*testing::AlwaysAccept(2), PointMassEnv(1.0), 10, 1);
  EXPECT_DOUBLE_EQ(mc.value, 0.5);
}

TEST(ObjectiveTest, G3OverRatioGrowsWithK) {
  const Environment env = BinaryEnv({-1.0, 0.0, 1.0}, 1);
  const CappedHoeffdingFamily family(0.54, 64, 1000, 0.1);
  double previous = 0.0;
  for (int k : {16, 32, 64}) {
    const PolicyValue v = ExactPolicyValue(*family.Make(k), env);
    const double q = v.g3 / v.ratio();
    EXPECT_GT(q, previous) << "k=" << k;
    previous = q;
  }
}

TEST(MethodNameTest, Names) {
  EXPECT_EQ(MethodName(ValueMethod::kExact), "exact");
  EXPECT_EQ(MethodName(ValueMethod::kMonteCarlo), "monte_carlo");
}

}  // namespace
}  // namespace perpolicy
