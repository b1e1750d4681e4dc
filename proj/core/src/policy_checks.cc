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

#include "perpolicy/policy_checks.h"

#include <sstream>

#include "perpolicy/random.h"

namespace perpolicy {
namespace {

double RandomValue(SplitMix64& rng, bool coin) {
  const double u = rng.Unit();
  if (coin) return u < 0.5 ? -1.0 : 1.0;
  return 2.0 * u - 1.0;
}

}  // namespace

MeasurabilityReport CheckPrefixMeasurable(const Policy& policy, int trials,
                                          std::uint64_t seed) {
  MeasurabilityReport report;
  report.trials = trials;
  SplitMix64 rng(seed);
  const std::size_t length = static_cast<std::size_t>(policy.cap()) + 4;
  for (int t = 0; t < trials; ++t) {
    const bool coin = (t % 2) == 0;
    std::vector<double> x(length);
    for (double& v : x) v = RandomValue(rng, coin);

    const int d = policy.Duration(x);
    const bool a = policy.Accept(std::span<const double>(x).first(d));
    if (d < 1 || d > policy.cap()) {
      ++report.cap_violations;
      continue;
    }

    std::vector<double> y = x;
    for (std::size_t i = static_cast<std::size_t>(d); i < y.size(); ++i) {
      y[i] = RandomValue(rng, !coin);
    }
    const int d2 = policy.Duration(y);
    if (d2 != d) {
      ++report.duration_violations;
      if (report.examples.size() < 5) {
        std::ostringstream msg;
        msg << "trial " << t << ": duration " << d << " became " << d2;
        report.examples.push_back(msg.str());
      }
    } else if (policy.Accept(std::span<const double>(y).first(d2)) != a) {
      ++report.decision_violations;
    }

    // accept(n, x) for an arbitrary n must ignore x[n..).
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                   policy.cap()));
    std::vector<double> z = x;
    for (std::size_t i = static_cast<std::size_t>(n); i < z.size(); ++i) {
      z[i] = RandomValue(rng, coin);
    }
    if (policy.Accept(std::span<const double>(x).first(n)) !=
        policy.Accept(std::span<const double>(z).first(n))) {
      ++report.decision_violations;
    }
  }
  return report;
}

}  // namespace perpolicy
