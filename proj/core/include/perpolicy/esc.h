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

#ifndef PERPOLICY_ESC_H_
#define PERPOLICY_ESC_H_

#include <optional>
#include <span>
#include <vector>

#include "perpolicy/cape.h"
#include "perpolicy/environment.h"
#include "perpolicy/policy.h"
#include "perpolicy/run_log.h"

namespace perpolicy {

struct EscConfig {
  double delta = 0.1;
  // Accuracy levels eps_1, eps_2, ...; the last entry repeats.
  std::vector<double> epsilons;
  long long task_budget = 0;  // required, >= 1
  // Samples ESC may draw before giving up. Phase-1 task sizes double with j,
  // so a run that never halts would otherwise exhaust memory first.
  long long sample_budget = 100'000'000;

  double Epsilon(int j) const;
};

// m_j(eps, delta) = ceil(ln(j (j + 1) / delta) / (2 eps^2)).
long long ScheduleM(int j, double eps, double delta);

// Mean over tasks of (second-half mean) * accept(tau_k, first half), minus
// 2 eps. Every record must hold exactly 2 D_k samples.
double RewardLcb(const Policy& policy,
                 std::span<const std::vector<double>> records, double eps);

// Mean duration.
double CostAvg(std::span<const int> durations);
// Mean of tau_k over the given sample vectors.
double CostAvg(const Policy& policy,
               std::span<const std::vector<double>> records);

// 4 log2(K) D_K ln(log2(K) / delta) / eps^2.
double EscSampleBound(long long K, int D_K, double eps, double delta);

struct EscStage {
  int phase = 1;  // 1 or 2
  int j = 0;
  long long k = 0;  // probed index 2^j
  long long m = 0;  // tasks planned
  long long tasks_run = 0;
  double estimate = 0.0;  // r-hat minus (phase 1) or c-bar (phase 2)
  double threshold = 0.0;  // halting threshold (phase 2)
};

struct EscResult {
  bool halted = false;
  bool sample_budget_hit = false;
  long long K = 0;  // 2^{j1} on success
  int j0 = 0;       // 0 if phase 1 never succeeded
  int j1 = 0;
  long long k0 = 0;
  double r_lcb_k0 = 0.0;
  long long tasks_used = 0;
  long long samples_used = 0;
  double min_epsilon = 0.0;  // smallest accuracy level used
  std::vector<long long> M;  // cumulative m_1 + ... + m_j per iteration
  std::vector<EscStage> stages;
};

EscResult RunEsc(const PolicyGenerator& generator, const Environment& env,
                 const EscConfig& config, RunLog& log,
                 long long first_task = 1);

struct EscCapeResult {
  EscResult esc;
  std::optional<CapeResult> cape;
};

// ESC with budget min(task_budget, N), then CAPE on pi_1..pi_K for the
// remaining tasks. When ESC does not halt the remaining tasks run (1, 0).
EscCapeResult RunEscCape(const PolicyGenerator& generator,
                         const Environment& env, const EscConfig& esc,
                         const CapeConfig& cape, RunLog& log,
                         const CapeObserver& observer = {});

}  // namespace perpolicy

#endif  // PERPOLICY_ESC_H_
