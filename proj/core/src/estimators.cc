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

#include "perpolicy/estimators.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "perpolicy/errors.h"

namespace perpolicy {

CandidateSet CandidateSet::All(int K) {
  std::vector<int> all(static_cast<std::size_t>(K));
  std::iota(all.begin(), all.end(), 1);
  return CandidateSet(std::move(all));
}

CandidateSet::CandidateSet(std::vector<int> indices)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()),
                 indices_.end());
}

bool CandidateSet::contains(int k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

bool CandidateSet::IsSubsetOf(const CandidateSet& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(),
                       indices_.begin(), indices_.end());
}

double ConfidenceRadius(long long n, int K, long long n_ex, double delta) {
  if (n < 1) throw PreconditionError("radius needs n >= 1");
  const double log_term =
      std::log(4.0 * K * static_cast<double>(n_ex) / delta);
  return std::sqrt(log_term / (2.0 * static_cast<double>(n)));
}

EstimatorState::EstimatorState(std::vector<int> caps, long long n_ex,
                               double delta)
    : caps_(std::move(caps)),
      n_ex_(n_ex),
      delta_(delta),
      tracked_(static_cast<int>(caps_.size())),
      reward_sum_(caps_.size(), 0.0),
      cost_sum_(caps_.size(), 0.0) {
  if (caps_.empty()) throw PreconditionError("estimator needs K >= 1");
  if (n_ex < 1) throw PreconditionError("estimator needs N_ex >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1)");
  }
}

std::size_t EstimatorState::Slot(int k) const {
  if (k < 1 || k > K()) throw PreconditionError("policy index out of range");
  return static_cast<std::size_t>(k - 1);
}

void EstimatorState::Update(const OversampledOutcome& record,
                            const CandidateSet& live,
                            const PolicyClass& policies) {
  if (live.empty()) throw PreconditionError("empty candidate set");
  const int top = live.max();
  if (record.block < policies.cap(top)) {
    throw PreconditionError("block shorter than the cap of max(candidates)");
  }
  if (record.samples.size() != 2 * static_cast<std::size_t>(record.block)) {
    throw PreconditionError("record must hold exactly 2 * block samples");
  }
  const auto first = record.first_block();
  const auto second = record.second_block();
  const double second_mean =
      std::accumulate(second.begin(), second.end(), 0.0) / record.block;

  std::vector<double> terms(static_cast<std::size_t>(top));
  std::vector<int> durations(static_cast<std::size_t>(top));
  for (int k = 1; k <= top; ++k) {
    const Policy& policy = policies.at(k);
    const int d = policy.Duration(first);
    const bool accept = policy.Accept(first.first(static_cast<std::size_t>(d)));
    terms[static_cast<std::size_t>(k - 1)] = accept ? second_mean : 0.0;
    durations[static_cast<std::size_t>(k - 1)] = d;
  }
  Record(terms, durations);
}

void EstimatorState::Record(std::span<const double> reward_terms,
                            std::span<const int> durations) {
  if (reward_terms.size() != durations.size() || reward_terms.empty() ||
      reward_terms.size() > caps_.size()) {
    throw PreconditionError("mismatched estimator record");
  }
  for (std::size_t i = 0; i < reward_terms.size(); ++i) {
    reward_sum_[i] += reward_terms[i];
    cost_sum_[i] += durations[i];
  }
  tracked_ = std::min(tracked_, static_cast<int>(reward_terms.size()));
  ++n_;
}

double EstimatorState::MeanReward(int k) const {
  if (n_ < 1) throw PreconditionError("estimator has no tasks yet");
  if (k > tracked_) throw PreconditionError("policy not tracked on every task");
  return reward_sum_[Slot(k)] / static_cast<double>(n_);
}

double EstimatorState::MeanCost(int k) const {
  if (n_ < 1) throw PreconditionError("estimator has no tasks yet");
  if (k > tracked_) throw PreconditionError("policy not tracked on every task");
  return cost_sum_[Slot(k)] / static_cast<double>(n_);
}

double EstimatorState::Radius() const {
  return ConfidenceRadius(n_, K(), n_ex_, delta_);
}

IntervalEstimate EstimatorState::RewardBounds(int k) const {
  const double mean = MeanReward(k);
  const double eps = Radius();
  return {mean - 2.0 * eps, mean + 2.0 * eps};
}

IntervalEstimate EstimatorState::CostBounds(int k) const {
  const double mean = MeanCost(k);
  const double half = (cap(k) - 1) * Radius();
  return {mean - half, mean + half};
}

double PolicyBounds::UpperRatio() const {
  const double divisor = reward.upper >= 0.0 ? cost.lower : cost.upper;
  if (!(divisor > 0.0)) {
    throw NonPositiveCostBound("cost bound is not positive");
  }
  return reward.upper / divisor;
}

std::vector<PolicyBounds> CollectBounds(const EstimatorState& state) {
  std::vector<PolicyBounds> out;
  out.reserve(static_cast<std::size_t>(state.tracked()));
  for (int k = 1; k <= state.tracked(); ++k) {
    out.push_back({state.RewardBounds(k), state.CostBounds(k)});
  }
  return out;
}

}  // namespace perpolicy
