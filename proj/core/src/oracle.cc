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

#include <algorithm>
#include <cmath>

#include "perpolicy/errors.h"
#include "perpolicy/random.h"

namespace perpolicy {
namespace {

struct Moments {
  double reward = 0.0;
  double cost = 0.0;
  double g3 = 0.0;

  void AddTerminal(double prob, double mu, int n, bool accept) {
    cost += prob * n;
    if (accept) {
      reward += prob * mu;
      g3 += prob * mu / n;
    }
  }
};

class PathEnumerator {
 public:
  PathEnumerator(const Policy& policy, const SampleModel& model,
                 long long max_paths)
      : policy_(policy), model_(model), max_paths_(max_paths) {
    prefix_.reserve(static_cast<std::size_t>(policy.cap()));
  }

  void Run(double mu, double weight, Moments& out) {
    outcomes_ = model_.Outcomes(mu);
    Descend(mu, weight, out);
  }

 private:
  void Descend(double mu, double prob, Moments& out) {
    for (const auto& outcome : outcomes_) {
      if (outcome.prob <= 0.0) continue;
      prefix_.push_back(outcome.value);
      const double p = prob * outcome.prob;
      const int n = static_cast<int>(prefix_.size());
      if (n == policy_.cap() || policy_.ShouldStop(prefix_)) {
        if (++leaves_ > max_paths_) {
          throw GuardError("exact oracle exceeded " +
                           std::to_string(max_paths_) + " sample paths");
        }
        out.AddTerminal(p, mu, n, policy_.Accept(prefix_));
      } else {
        Descend(mu, p, out);
      }
      prefix_.pop_back();
    }
  }

  const Policy& policy_;
  const SampleModel& model_;
  long long max_paths_;
  long long leaves_ = 0;
  std::vector<SampleModel::Outcome> outcomes_;
  std::vector<double> prefix_;
};

// Distribution of the number of `high` outcomes among the samples drawn so
// far, restricted to paths that have not stopped.
void SumDynamicProgram(const Policy& policy, const SampleModel& model,
                       double mu, double weight, Moments& out) {
  const auto outcomes = model.Outcomes(mu);
  const double high = outcomes[0].value;
  const double p_high = outcomes[0].prob;
  const double low = outcomes[1].value;
  const double p_low = outcomes[1].prob;
  const int cap = policy.cap();
  std::vector<double> alive{weight};
  std::vector<double> next;
  for (int n = 1; n <= cap; ++n) {
    next.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int h = 0; h < n; ++h) {
      const double p = alive[static_cast<std::size_t>(h)];
      if (p == 0.0) continue;
      next[static_cast<std::size_t>(h)] += p * p_low;
      next[static_cast<std::size_t>(h) + 1] += p * p_high;
    }
    for (int h = 0; h <= n; ++h) {
      double& p = next[static_cast<std::size_t>(h)];
      if (p == 0.0) continue;
      const double sum = h * high + (n - h) * low;
      if (n == cap || policy.ShouldStopSum(n, sum)) {
        out.AddTerminal(p, mu, n, policy.AcceptSum(n, sum));
        p = 0.0;
      }
    }
    alive.swap(next);
  }
}

void RequireFinite(const Environment& env) {
  if (!env.samples().HasFiniteSupport()) {
    throw PreconditionError("exact oracle needs a finite-support sample model");
  }
}

PolicyValue ToValue(const Moments& m) {
  PolicyValue v;
  v.reward = m.reward;
  v.cost = m.cost;
  v.g3 = m.g3;
  v.method = ValueMethod::kExact;
  return v;
}

double StdError(double sum, double sum_sq, long long n) {
  if (n < 2) return 0.0;
  const double mean = sum / static_cast<double>(n);
  const double var =
      std::max(0.0, (sum_sq - n * mean * mean) / static_cast<double>(n - 1));
  return std::sqrt(var / static_cast<double>(n));
}

}  // namespace

std::string MethodName(ValueMethod method) {
  return method == ValueMethod::kExact ? "exact" : "monte_carlo";
}

bool SupportsExact(const Environment& env) {
  return env.samples().HasFiniteSupport();
}

PolicyValue EnumeratePolicyValue(const Policy& policy, const Environment& env,
                                 long long max_paths) {
  RequireFinite(env);
  Moments m;
  PathEnumerator walker(policy, env.samples(), max_paths);
  for (const auto& atom : env.values().support()) {
    if (atom.prob <= 0.0) continue;
    walker.Run(atom.value, atom.prob, m);
  }
  return ToValue(m);
}

PolicyValue ExactPolicyValue(const Policy& policy, const Environment& env,
                             long long max_paths) {
  if (!policy.DependsOnlyOnSum()) {
    return EnumeratePolicyValue(policy, env, max_paths);
  }
  RequireFinite(env);
  Moments m;
  for (const auto& atom : env.values().support()) {
    if (atom.prob <= 0.0) continue;
    SumDynamicProgram(policy, env.samples(), atom.value, atom.prob, m);
  }
  return ToValue(m);
}

PolicyValue McPolicyValue(const Policy& policy, const Environment& env,
                          long long trials, std::uint64_t seed) {
  if (trials < 2) throw PreconditionError("Monte Carlo needs trials >= 2");
  const Environment local = env.WithSeed(seed);
  double r = 0.0, r2 = 0.0, c = 0.0, c2 = 0.0, g = 0.0, g2 = 0.0;
  for (long long t = 0; t < trials; ++t) {
    Task task = local.NewTask(t);
    const TaskOutcome out = RunPolicy(policy, task);
    const double rate = out.reward / out.cost;
    r += out.reward;
    r2 += out.reward * out.reward;
    c += out.cost;
    c2 += out.cost * out.cost;
    g += rate;
    g2 += rate * rate;
  }
  const double n = static_cast<double>(trials);
  PolicyValue v;
  v.method = ValueMethod::kMonteCarlo;
  v.reward = r / n;
  v.cost = c / n;
  v.g3 = g / n;
  v.reward_se = StdError(r, r2, trials);
  v.cost_se = StdError(c, c2, trials);
  v.g3_se = StdError(g, g2, trials);
  return v;
}

bool OracleValues::IsOptimal(int k) const {
  return std::find(argmax.begin(), argmax.end(), k) != argmax.end();
}

OracleValues SummarizeOracle(std::vector<PolicyValue> values,
                             double tie_tolerance) {
  if (values.empty()) throw PreconditionError("oracle over an empty class");
  OracleValues out;
  out.values = std::move(values);
  out.benchmark = -HUGE_VAL;
  for (const auto& v : out.values) {
    if (!(v.cost >= 1.0 - 1e-12)) {
      throw PreconditionError("policy cost below 1");
    }
    out.benchmark = std::max(out.benchmark, v.ratio());
  }
  double best_suboptimal = -HUGE_VAL;
  for (int k = 1; k <= out.size(); ++k) {
    const double ratio = out.Ratio(k);
    if (out.benchmark - ratio <= tie_tolerance) {
      out.argmax.push_back(k);
    } else {
      best_suboptimal = std::max(best_suboptimal, ratio);
    }
  }
  if (out.argmax.size() == 1 && best_suboptimal > -HUGE_VAL) {
    out.gap = out.benchmark - best_suboptimal;
  }
  return out;
}

OracleValues ComputeOracle(const PolicyClass& policies, const Environment& env,
                           const OracleOptions& options) {
  using Mode = OracleOptions::Mode;
  std::vector<PolicyValue> values;
  values.reserve(static_cast<std::size_t>(policies.size()));
  const bool exact =
      options.mode == Mode::kExact ||
      (options.mode == Mode::kAuto && SupportsExact(env));
  for (int k = 1; k <= policies.size(); ++k) {
    if (exact) {
      values.push_back(ExactPolicyValue(policies.at(k), env, options.max_paths));
    } else {
      values.push_back(McPolicyValue(policies.at(k), env, options.mc_trials,
                                     DeriveKey(options.mc_seed,
                                               {static_cast<std::uint64_t>(k)})));
    }
  }
  return SummarizeOracle(std::move(values), options.tie_tolerance);
}

RegretReport Regret(std::span<const RunTotals> trials, double benchmark) {
  if (trials.empty()) throw PreconditionError("regret over zero trials");
  RegretReport out;
  out.benchmark = benchmark;
  out.trials = static_cast<long long>(trials.size());
  const double n = static_cast<double>(trials.size());
  for (const auto& t : trials) {
    out.mean_reward += t.reward;
    out.mean_cost += t.cost;
    out.per_trial_ratios.push_back(t.cost > 0.0 ? t.reward / t.cost : 0.0);
  }
  out.mean_reward /= n;
  out.mean_cost /= n;
  out.realized_ratio = out.mean_reward / out.mean_cost;
  out.regret = benchmark - out.realized_ratio;
  if (trials.size() >= 2) {
    double var_r = 0.0, var_c = 0.0, cov = 0.0;
    for (const auto& t : trials) {
      const double dr = t.reward - out.mean_reward;
      const double dc = t.cost - out.mean_cost;
      var_r += dr * dr;
      var_c += dc * dc;
      cov += dr * dc;
    }
    var_r /= n - 1.0;
    var_c /= n - 1.0;
    cov /= n - 1.0;
    const double R = out.realized_ratio;
    const double C = out.mean_cost;
    const double var = (var_r - 2.0 * R * cov + R * R * var_c) / (C * C);
    out.realized_se = std::sqrt(std::max(0.0, var) / n);
  }
  return out;
}

RegretReport Regret(std::span<const RunLog> logs, const OracleValues& oracle) {
  std::vector<RunTotals> totals;
  totals.reserve(logs.size());
  for (const auto& log : logs) {
    if (log.selected_k && *log.selected_k > oracle.size()) {
      throw PreconditionError("log uses a policy the oracle does not cover");
    }
    totals.push_back({log.total_reward(), log.total_cost()});
  }
  return Regret(totals, oracle.benchmark);
}

McEstimate ObjectiveG1(const Policy& policy, const Environment& env,
                       long long N, long long trials, std::uint64_t seed) {
  if (N < 1 || trials < 1) throw PreconditionError("N and trials must be >= 1");
  std::vector<RunTotals> totals;
  totals.reserve(static_cast<std::size_t>(trials));
  for (long long t = 0; t < trials; ++t) {
    const Environment local =
        env.WithSeed(DeriveKey(seed, {static_cast<std::uint64_t>(t)}));
    RunTotals sum;
    for (long long n = 0; n < N; ++n) {
      Task task = local.NewTask(n);
      const TaskOutcome out = RunPolicy(policy, task);
      sum.reward += out.reward;
      sum.cost += out.cost;
    }
    totals.push_back(sum);
  }
  const RegretReport report = Regret(totals, 0.0);
  return {report.realized_ratio, report.realized_se};
}

McEstimate ObjectiveG2(const Policy& policy, const Environment& env,
                       long long T, long long trials, std::uint64_t seed) {
  if (T < 1 || trials < 1) throw PreconditionError("T and trials must be >= 1");
  double s = 0.0, s2 = 0.0;
  for (long long t = 0; t < trials; ++t) {
    const Environment local =
        env.WithSeed(DeriveKey(seed, {static_cast<std::uint64_t>(t)}));
    long long used = 0;
    double reward = 0.0;
    for (long long n = 0;; ++n) {
      Task task = local.NewTask(n);
      const TaskOutcome out = RunPolicy(policy, task);
      used += out.duration;
      if (used >= T) break;
      reward += out.reward;
    }
    const double value = reward / static_cast<double>(T);
    s += value;
    s2 += value * value;
  }
  return {s / static_cast<double>(trials), StdError(s, s2, trials)};
}

double ObjectiveG3(const Policy& policy, const Environment& env) {
  return ExactPolicyValue(policy, env).g3;
}

McEstimate ObjectiveG3Mc(const Policy& policy, const Environment& env,
                         long long trials, std::uint64_t seed) {
  const PolicyValue v = McPolicyValue(policy, env, trials, seed);
  return {v.g3, v.g3_se};
}

}  // namespace perpolicy
