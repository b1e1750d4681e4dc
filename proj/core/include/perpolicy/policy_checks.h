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

#ifndef PERPOLICY_POLICY_CHECKS_H_
#define PERPOLICY_POLICY_CHECKS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "perpolicy/policy.h"

namespace perpolicy {

struct MeasurabilityReport {
  int trials = 0;
  int duration_violations = 0;
  int decision_violations = 0;
  int cap_violations = 0;
  std::vector<std::string> examples;  // first few offending cases

  bool ok() const {
    return duration_violations == 0 && decision_violations == 0 &&
           cap_violations == 0;
  }
};

// Randomized suffix-perturbation check of the duration/decision contracts:
// for random streams x, rewriting x beyond tau(x) must not change tau(x) or
// accept(tau(x), x), and rewriting x beyond a random n must not change
// accept(n, x). Streams mix {-1, +1} coin flips and uniform [-1, 1] values.
MeasurabilityReport CheckPrefixMeasurable(const Policy& policy, int trials,
                                          std::uint64_t seed);

}  // namespace perpolicy

#endif  // PERPOLICY_POLICY_CHECKS_H_
