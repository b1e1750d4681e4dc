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

#ifndef PERPOLICY_ORACLE_H_
#define PERPOLICY_ORACLE_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "perpolicy/environment.h"
#include "perpolicy/policy.h"
#include "perpolicy/run_log.h"

namespace perpolicy {

inline constexpr long long kDefaultPathGuard = 1LL << 24;

enum class ValueMethod { kExact, kMonteCarlo };

std::string MethodName(ValueMethod method);

struct PolicyValue {
  double reward = 0.0;
  double cost = 0.0;
  // E[reward / cost], the per-task payoff rate.
  double g3 = 0.0;
  ValueMethod method = ValueMethod::kExact;
  double reward_se = 0.0;
  double cost_se = 0.0;
  double g3_se = 0.0;

  double ratio() const { return reward / cost; }
};

// Whether the exact oracle can evaluate this environment at all.
bool SupportsExact(const Environment& env);

// Exact expectations over the value distribution and every sample path.
// Sum-statistic policies go through a dynamic program over (n, partial sum);
// other policies are enumerated path by path with pruning at the stopping
// time, and GuardError is thrown once more than `max_paths` leaves are
// visited. Throws PreconditionError for continuous sample models.
PolicyValue ExactPolicyValue(const Policy& policy, const Environment& env,
                             long long max_paths = kDefaultPathGuard);

// Forces path enumeration even for sum-statistic policies.
PolicyValue EnumeratePolicyValue(const Policy& policy, const Environment& env,
                                 long long max_paths = kDefaultPathGuard);

// Sample means and standard errors over `trials` independent tasks.
PolicyValue McPolicyValue(const Policy& policy, const Environment& env,
                          long long trials, std::uint64_t seed);

struct OracleOptions {
  enum class Mode { kAuto, kExact, kMonteCarlo };
  Mode mode = Mode::kAuto;
  long long mc_trials = 100000;
  std::uint64_t mc_seed = 0x5eed;
  long long max_paths = kDefaultPathGuard;
  // Ratios within this distance of the benchmark count as optimal.
  double tie_tolerance = 1e-12;
};

struct OracleValues {
  std::vector<PolicyValue> values;  // values[k - 1] for policy k
  double benchmark = 0.0;
  std::vector<int> argmax;
  // Benchmark minus the best suboptimal ratio; +infinity when several
  // policies attain the benchmark or no policy is suboptimal.
  double gap = std::numeric_limits<double>::infinity();

  int size() const { return static_cast<int>(values.size()); }
  double Ratio(int k) const { return values.at(static_cast<std::size_t>(k - 1)).ratio(); }
  bool IsOptimal(int k) const;
  bool gap_is_infinite() const { return gap == std::numeric_limits<double>::infinity(); }
};

// Benchmark, argmax set and gap from per-policy values.
OracleValues SummarizeOracle(std::vector<PolicyValue> values,
                             double tie_tolerance = 1e-12);

OracleValues ComputeOracle(const PolicyClass& policies, const Environment& env,
                           const OracleOptions& options = {});

struct RunTotals {
  double reward = 0.0;
  double cost = 0.0;
};

struct RegretReport {
  double benchmark = 0.0;
  double realized_ratio = 0.0;  // mean total reward / mean total cost
  double regret = 0.0;
  long long trials = 0;
  double mean_reward = 0.0;
  double mean_cost = 0.0;
  // Delta-method standard error of realized_ratio.
  double realized_se = 0.0;
  std::vector<double> per_trial_ratios;
};

RegretReport Regret(std::span<const RunTotals> trials, double benchmark);
RegretReport Regret(std::span<const RunLog> logs, const OracleValues& oracle);

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// E[sum reward] / E[sum cost] over N tasks of a fixed policy.
McEstimate ObjectiveG1(const Policy& policy, const Environment& env,
                       long long N, long long trials, std::uint64_t seed);

// Tasks run until the cumulative sample count reaches T; the task during
// which the budget is reached earns nothing. Returns the mean over trials of
// (sum of rewards of completed tasks) / T.
McEstimate ObjectiveG2(const Policy& policy, const Environment& env,
                       long long T, long long trials, std::uint64_t seed);

// E[reward / cost]: exact when the environment allows it.
double ObjectiveG3(const Policy& policy, const Environment& env);
McEstimate ObjectiveG3Mc(const Policy& policy, const Environment& env,
                         long long trials, std::uint64_t seed);

}  // namespace perpolicy

#endif  // PERPOLICY_ORACLE_H_
