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

#ifndef PERPOLICY_CAPE_H_
#define PERPOLICY_CAPE_H_

#include <functional>
#include <vector>

#include "perpolicy/environment.h"
#include "perpolicy/estimators.h"
#include "perpolicy/policy.h"
#include "perpolicy/run_log.h"

namespace perpolicy {

struct CapeConfig {
  long long N = 0;     // tasks handed to the learner
  double delta = 0.1;
  long long n_ex = 0;  // exploration cap; 0 means ceil(N^(2/3))
};

// ceil(N^(2/3)), computed without floating-point drift at perfect cubes.
long long DefaultExplorationCap(long long N);

// 2 D_K^2 ln(4 K N_ex / delta): tasks needed before elimination may run.
double EliminationThreshold(int K, int D_K, long long n_ex, double delta);

// Pure elimination rule over interval bounds (bounds[k - 1] for policy k).
// Removes k when, for some live j,
//   r+(k) >= 0 and r+(k)/c-(k) < r-(j)/c+(j), or
//   r+(k) <  0 and r+(k)/c+(k) < r-(j)/c-(j).
CandidateSet Eliminate(const CandidateSet& live,
                       const std::vector<PolicyBounds>& bounds);

// argmax of r+/c- over live k when some r+(k) >= 0, else argmax of r+/c+;
// ties go to the smallest index.
int SelectFinal(const CandidateSet& live,
                const std::vector<PolicyBounds>& bounds);

// State-based forms. Eliminate throws PreconditionError when called before
// n reaches EliminationThreshold with D_K = cap of the last policy.
CandidateSet Eliminate(const CandidateSet& live, const EstimatorState& state);
int SelectFinal(const CandidateSet& live, const EstimatorState& state);

// Called after every exploration update with the task count n, the set C_n
// the task was run with and the updated estimator.
using CapeObserver = std::function<void(
    long long n, const CandidateSet& live, const EstimatorState& state)>;

struct CapeResult {
  int selected_k = 0;
  long long explore_tasks = 0;
  bool broke_early = false;  // the set became a singleton inside the loop
  CandidateSet final_set;
};

// Runs CAPE for config.N tasks, drawing task indices first_task,
// first_task + 1, ... from `env` and appending every task to `log`.
CapeResult RunCape(const PolicyClass& policies, const Environment& env,
                   const CapeConfig& config, RunLog& log,
                   long long first_task = 1, const CapeObserver& observer = {});

}  // namespace perpolicy

#endif  // PERPOLICY_CAPE_H_
