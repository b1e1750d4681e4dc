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

#include "perpolicy/esc.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

// (second-half mean) * accept(tau, first half) for one 2D-sample record.
double RewardTerm(const Policy& policy, std::span<const double> record) {
  const std::size_t block = static_cast<std::size_t>(policy.cap());
  if (record.size() != 2 * block) {
    throw PreconditionError("record must hold exactly 2 D_k samples");
  }
  const auto first = record.first(block);
  const auto second = record.subspan(block);
  const int d = policy.Duration(first);
  if (!policy.Accept(first.first(static_cast<std::size_t>(d)))) return 0.0;
  return std::accumulate(second.begin(), second.end(), 0.0) /
         static_cast<double>(block);
}

long long PowerOfTwo(int j) {
  if (j < 0 || j > 62) throw GuardError("doubling index overflow");
  return 1LL << j;
}

}  // namespace

double EscConfig::Epsilon(int j) const {
  if (epsilons.empty()) throw PreconditionError("no accuracy levels");
  const std::size_t i = std::min(static_cast<std::size_t>(j - 1),
                                 epsilons.size() - 1);
  return epsilons[i];
}

long long ScheduleM(int j, double eps, double delta) {
  if (j < 1) throw PreconditionError("j must be >= 1");
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  const double jj = static_cast<double>(j);
  const double m = std::ceil(std::log(jj * (jj + 1.0) / delta) /
                             (2.0 * eps * eps));
  return std::max<long long>(1, static_cast<long long>(m));
}

double RewardLcb(const Policy& policy,
                 std::span<const std::vector<double>> records, double eps) {
  if (records.empty()) throw PreconditionError("no records");
  double total = 0.0;
  for (const auto& record : records) total += RewardTerm(policy, record);
  return total / static_cast<double>(records.size()) - 2.0 * eps;
}

double CostAvg(std::span<const int> durations) {
  if (durations.empty()) throw PreconditionError("no durations");
  double total = 0.0;
  for (int d : durations) total += d;
  return total / static_cast<double>(durations.size());
}

double CostAvg(const Policy& policy,
               std::span<const std::vector<double>> records) {
  std::vector<int> durations;
  durations.reserve(records.size());
  for (const auto& record : records) durations.push_back(policy.Duration(record));
  return CostAvg(durations);
}

double EscSampleBound(long long K, int D_K, double eps, double delta) {
  const double log2_k = std::log2(static_cast<double>(K));
  return 4.0 * log2_k * D_K * std::log(log2_k / delta) / (eps * eps);
}

EscResult RunEsc(const PolicyGenerator& generator, const Environment& env,
                 const EscConfig& config, RunLog& log, long long first_task) {
  if (config.task_budget < 1) throw PreconditionError("task_budget must be >= 1");
  EscResult result;
  result.min_epsilon = HUGE_VAL;
  long long next_task = first_task;
  long long M = 0;

  auto out_of_budget = [&](long long planned_samples) {
    if (result.tasks_used >= config.task_budget) return true;
    if (result.samples_used + planned_samples > config.sample_budget) {
      result.sample_budget_hit = true;
      return true;
    }
    return false;
  };

  // Phase 1: find an index with a positive reward lower bound.
  for (int j = 1; result.j0 == 0; ++j) {
    const double eps = config.Epsilon(j);
    const long long k = PowerOfTwo(j);
    const PolicyPtr policy = generator.At(k);
    const int block = policy->cap();
    EscStage stage{1, j, k, ScheduleM(j, eps, config.delta), 0, 0.0, 0.0};
    M += stage.m;
    result.M.push_back(M);
    result.min_epsilon = std::min(result.min_epsilon, eps);
    double total = 0.0;
    for (long long t = 0; t < stage.m; ++t) {
      if (out_of_budget(2LL * block)) {
        result.stages.push_back(stage);
        return result;
      }
      Task task = env.NewTask(next_task++);
      task.stream().DrawUntil(2 * static_cast<std::size_t>(block));
      total += RewardTerm(*policy, task.stream().drawn());
      log.Append(Phase::kEsc1, static_cast<int>(k), 2 * block, false,
                 task.mu());
      ++result.tasks_used;
      result.samples_used += 2LL * block;
      ++stage.tasks_run;
    }
    stage.estimate = total / static_cast<double>(stage.m) - 2.0 * eps;
    result.stages.push_back(stage);
    if (stage.estimate > 0.0) {
      result.j0 = j;
      result.k0 = k;
      result.r_lcb_k0 = stage.estimate;
    }
  }

  // Phase 2: grow the index until the average duration exceeds what an
  // optimal policy could afford.
  const int d_k0 = generator.Cap(result.k0);
  for (int l = result.j0 + 1;; ++l) {
    const double eps = config.Epsilon(l);
    const long long k = PowerOfTwo(l);
    const PolicyPtr policy = generator.At(k);
    const int cap = policy->cap();
    EscStage stage{2, l, k, ScheduleM(l, eps, config.delta), 0, 0.0, 0.0};
    stage.threshold = cap * eps + d_k0 / result.r_lcb_k0;
    M += stage.m;
    result.M.push_back(M);
    result.min_epsilon = std::min(result.min_epsilon, eps);
    double total = 0.0;
    for (long long t = 0; t < stage.m; ++t) {
      if (out_of_budget(cap)) {
        result.stages.push_back(stage);
        return result;
      }
      Task task = env.NewTask(next_task++);
      const TaskOutcome out = RunPolicy(*policy, task);
      total += out.duration;
      log.Append(Phase::kEsc2, static_cast<int>(k), out.duration, false,
                 task.mu());
      ++result.tasks_used;
      result.samples_used += out.duration;
      ++stage.tasks_run;
    }
    stage.estimate = total / static_cast<double>(stage.m);
    result.stages.push_back(stage);
    if (stage.estimate > stage.threshold) {
      result.halted = true;
      result.j1 = l;
      result.K = k;
      return result;
    }
  }
}

EscCapeResult RunEscCape(const PolicyGenerator& generator,
                         const Environment& env, const EscConfig& esc,
                         const CapeConfig& cape, RunLog& log,
                         const CapeObserver& observer) {
  if (cape.N < 1) throw PreconditionError("N must be >= 1");
  EscConfig bounded = esc;
  bounded.task_budget = std::min(esc.task_budget > 0 ? esc.task_budget : cape.N,
                                 cape.N);
  EscCapeResult result;
  result.esc = RunEsc(generator, env, bounded, log, 1);
  const long long remaining = cape.N - result.esc.tasks_used;
  long long next_task = 1 + result.esc.tasks_used;
  if (remaining <= 0) return result;
  if (result.esc.halted) {
    CapeConfig rest = cape;
    rest.N = remaining;
    rest.n_ex = cape.n_ex > 0 ? cape.n_ex : DefaultExplorationCap(cape.N);
    result.cape = RunCape(generator.Prefix(result.esc.K), env, rest, log,
                          next_task, observer);
    return result;
  }
  const PolicyPtr reject = MakeAllReject(1);
  for (long long i = 0; i < remaining; ++i) {
    Task task = env.NewTask(next_task++);
    const TaskOutcome out = RunPolicy(*reject, task);
    log.Append(Phase::kFixed, 0, out.duration, false, task.mu());
  }
  return result;
}

}  // namespace perpolicy
