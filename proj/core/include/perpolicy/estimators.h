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

#ifndef PERPOLICY_ESTIMATORS_H_
#define PERPOLICY_ESTIMATORS_H_

#include <span>
#include <vector>

#include "perpolicy/policy.h"

namespace perpolicy {

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool Contains(double v) const { return lower <= v && v <= upper; }
};

// Live indices of a finite class, kept sorted ascending.
class CandidateSet {
 public:
  CandidateSet() = default;
  static CandidateSet All(int K);
  explicit CandidateSet(std::vector<int> indices);

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  int max() const { return indices_.back(); }
  bool contains(int k) const;
  bool IsSubsetOf(const CandidateSet& other) const;

 private:
  std::vector<int> indices_;
};

// sqrt(ln(4 K N_ex / delta) / (2 n)).
double ConfidenceRadius(long long n, int K, long long n_ex, double delta);

// Running sums behind the reward and cost intervals of every policy of a
// finite class. Reward terms are stored already normalized by the block
// length used on their task, since the block shrinks as candidates are
// eliminated.
class EstimatorState {
 public:
  EstimatorState(std::vector<int> caps, long long n_ex, double delta);

  int K() const { return static_cast<int>(caps_.size()); }
  long long n() const { return n_; }
  long long n_ex() const { return n_ex_; }
  double delta() const { return delta_; }
  int cap(int k) const { return caps_[static_cast<std::size_t>(k - 1)]; }
  // Highest index updated on every task so far; bounds are defined for
  // k <= tracked().
  int tracked() const { return tracked_; }

  // Folds in one oversampled task. Every k <= max(live) is replayed on the
  // first block of the shared sample vector. Throws PreconditionError if the
  // block is shorter than the cap of max(live).
  void Update(const OversampledOutcome& record, const CandidateSet& live,
              const PolicyClass& policies);

  // Lower-level form: per-task reward terms and durations for k = 1..m.
  void Record(std::span<const double> reward_terms,
              std::span<const int> durations);

  double reward_sum(int k) const { return reward_sum_[Slot(k)]; }
  double cost_sum(int k) const { return cost_sum_[Slot(k)]; }
  double MeanReward(int k) const;
  double MeanCost(int k) const;

  double Radius() const;
  // mean reward +- 2 radius.
  IntervalEstimate RewardBounds(int k) const;
  // mean cost +- (D_k - 1) radius.
  IntervalEstimate CostBounds(int k) const;

 private:
  std::size_t Slot(int k) const;

  std::vector<int> caps_;
  long long n_ex_;
  double delta_;
  long long n_ = 0;
  int tracked_;
  std::vector<double> reward_sum_;
  std::vector<double> cost_sum_;
};

// Reward and cost intervals of one policy, the input of the elimination and
// selection rules.
struct PolicyBounds {
  IntervalEstimate reward;
  IntervalEstimate cost;

  // Optimistic ratio: r+/c- when r+ >= 0, r+/c+ otherwise. Throws
  // NonPositiveCostBound if the divisor is not positive.
  double UpperRatio() const;
};

std::vector<PolicyBounds> CollectBounds(const EstimatorState& state);

}  // namespace perpolicy

#endif  // PERPOLICY_ESTIMATORS_H_
