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

#include "perpolicy/cape.h"

#include <algorithm>
#include <cmath>

#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

__extension__ typedef __int128 Int128;

double LowerRatioAgainstNonnegative(const PolicyBounds& b) {
  return b.reward.lower / b.cost.upper;
}

double LowerRatioAgainstNegative(const PolicyBounds& b) {
  return b.reward.lower / b.cost.lower;
}

void CheckBounds(const CandidateSet& live,
                 const std::vector<PolicyBounds>& bounds) {
  if (live.empty()) throw PreconditionError("empty candidate set");
  if (live.indices().front() < 1 ||
      live.max() > static_cast<int>(bounds.size())) {
    throw PreconditionError("candidate without bounds");
  }
  for (int k : live.indices()) {
    const PolicyBounds& b = bounds[static_cast<std::size_t>(k - 1)];
    if (!(b.cost.lower > 0.0)) {
      throw NonPositiveCostBound("cost lower bound of policy " +
                                 std::to_string(k) + " is not positive");
    }
  }
}

// Bounds with the cost interval intersected with [1, D_k]; every duration
// lies in that range.
std::vector<PolicyBounds> ClampedBounds(const EstimatorState& state) {
  std::vector<PolicyBounds> out = CollectBounds(state);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double cap = state.cap(static_cast<int>(i) + 1);
    out[i].cost.lower = std::clamp(out[i].cost.lower, 1.0, cap);
    out[i].cost.upper = std::clamp(out[i].cost.upper, 1.0, cap);
  }
  return out;
}

}  // namespace

long long DefaultExplorationCap(long long N) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  const Int128 target = static_cast<Int128>(N) * N;
  auto m = static_cast<long long>(
      std::ceil(std::cbrt(static_cast<double>(N)) *
                std::cbrt(static_cast<double>(N))));
  while (m > 1 && static_cast<Int128>(m - 1) * (m - 1) * (m - 1) >= target) {
    --m;
  }
  while (static_cast<Int128>(m) * m * m < target) ++m;
  return m;
}

double EliminationThreshold(int K, int D_K, long long n_ex, double delta) {
  return 2.0 * D_K * D_K *
         std::log(4.0 * K * static_cast<double>(n_ex) / delta);
}

CandidateSet Eliminate(const CandidateSet& live,
                       const std::vector<PolicyBounds>& bounds) {
  CheckBounds(live, bounds);
  double best_vs_nonnegative = -HUGE_VAL;
  double best_vs_negative = -HUGE_VAL;
  for (int j : live.indices()) {
    const PolicyBounds& b = bounds[static_cast<std::size_t>(j - 1)];
    best_vs_nonnegative =
        std::max(best_vs_nonnegative, LowerRatioAgainstNonnegative(b));
    best_vs_negative = std::max(best_vs_negative, LowerRatioAgainstNegative(b));
  }
  std::vector<int> kept;
  for (int k : live.indices()) {
    const PolicyBounds& b = bounds[static_cast<std::size_t>(k - 1)];
    const bool dominated =
        b.reward.upper >= 0.0
            ? b.reward.upper / b.cost.lower < best_vs_nonnegative
            : b.reward.upper / b.cost.upper < best_vs_negative;
    if (!dominated) kept.push_back(k);
  }
  if (kept.empty()) {
    // Unreachable with well-formed intervals: the index with the largest
    // optimistic ratio is never dominated.
    kept.push_back(SelectFinal(live, bounds));
  }
  return CandidateSet(std::move(kept));
}

int SelectFinal(const CandidateSet& live,
                const std::vector<PolicyBounds>& bounds) {
  if (live.empty()) throw PreconditionError("empty candidate set");
  if (live.max() > static_cast<int>(bounds.size())) {
    throw PreconditionError("candidate without bounds");
  }
  bool any_nonnegative = false;
  for (int k : live.indices()) {
    if (bounds[static_cast<std::size_t>(k - 1)].reward.upper >= 0.0) {
      any_nonnegative = true;
    }
  }
  int best = 0;
  double best_value = 0.0;
  for (int k : live.indices()) {
    const PolicyBounds& b = bounds[static_cast<std::size_t>(k - 1)];
    const double divisor = any_nonnegative ? b.cost.lower : b.cost.upper;
    if (!(divisor > 0.0)) {
      throw NonPositiveCostBound("cost bound of policy " + std::to_string(k) +
                                 " is not positive");
    }
    const double value = b.reward.upper / divisor;
    if (best == 0 || value > best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

CandidateSet Eliminate(const CandidateSet& live, const EstimatorState& state) {
  const double threshold = EliminationThreshold(
      state.K(), state.cap(state.K()), state.n_ex(), state.delta());
  if (static_cast<double>(state.n()) < threshold) {
    throw PreconditionError("elimination before n >= 2 D_K^2 ln(4 K N_ex / delta)");
  }
  return Eliminate(live, CollectBounds(state));
}

int SelectFinal(const CandidateSet& live, const EstimatorState& state) {
  return SelectFinal(live, CollectBounds(state));
}

CapeResult RunCape(const PolicyClass& policies, const Environment& env,
                   const CapeConfig& config, RunLog& log, long long first_task,
                   const CapeObserver& observer) {
  if (config.N < 1) throw PreconditionError("CAPE needs N >= 1");
  const long long n_ex =
      config.n_ex > 0 ? config.n_ex : DefaultExplorationCap(config.N);
  const int K = policies.size();
  std::vector<int> caps(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) caps[static_cast<std::size_t>(k - 1)] = policies.cap(k);
  EstimatorState state(caps, n_ex, config.delta);
  const double threshold =
      EliminationThreshold(K, policies.max_cap(), n_ex, config.delta);

  CapeResult result;
  CandidateSet live = CandidateSet::All(K);
  long long next_task = first_task;
  const long long explore_limit = std::min(n_ex, config.N);
  for (long long n = 1; n <= explore_limit; ++n) {
    const int top = live.max();
    const int block = policies.cap(top);
    Task task = env.NewTask(next_task++);
    const OversampledOutcome out =
        RunPolicyOversampled(policies.at(top), block, task);
    log.Append(Phase::kExplore, top, 2 * block, out.decision, task.mu(),
               live.size());
    state.Update(out, live, policies);
    ++result.explore_tasks;
    if (observer) observer(n, live, state);

    if (static_cast<double>(n) >= threshold) {
      CandidateSet next = Eliminate(live, CollectBounds(state));
      for (int k : live.indices()) {
        if (!next.contains(k)) log.eliminated_at[k] = log.tasks();
      }
      live = std::move(next);
    }
    if (live.size() == 1) {
      log.singleton_task = log.tasks();
      result.broke_early = true;
      break;
    }
  }

  if (live.size() == 1) {
    result.selected_k = live.max();
  } else {
    try {
      result.selected_k = SelectFinal(live, state);
    } catch (const NonPositiveCostBound&) {
      // Exploration ended before the cost intervals separated from zero.
      result.selected_k = SelectFinal(live, ClampedBounds(state));
    }
  }
  result.final_set = live;
  log.selected_k = result.selected_k;

  const Policy& chosen = policies.at(result.selected_k);
  const long long remaining = config.N - result.explore_tasks;
  for (long long i = 0; i < remaining; ++i) {
    Task task = env.NewTask(next_task++);
    const TaskOutcome out = RunPolicy(chosen, task);
    log.Append(Phase::kExploit, result.selected_k, out.duration, out.decision,
               task.mu());
  }
  return result;
}

}  // namespace perpolicy
