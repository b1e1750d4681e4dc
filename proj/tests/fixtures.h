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

#ifndef PERPOLICY_TESTS_FIXTURES_H_
#define PERPOLICY_TESTS_FIXTURES_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "perpolicy/environment.h"
#include "perpolicy/policy.h"

namespace perpolicy::testing {

inline Environment BinaryEnv(std::vector<double> values, std::uint64_t seed) {
  return Environment(ValueDistribution::UniformFinite(std::move(values)),
                     SampleModel::BinaryPm1(), seed);
}

inline Environment PointMassEnv(double mu, std::uint64_t seed = 1) {
  return Environment(ValueDistribution::PointMass(mu), SampleModel::BinaryPm1(),
                     seed);
}

// Constant duration d, accept iff the sample mean is at least `level`.
inline PolicyPtr ConstantMeanPolicy(int d, double level) {
  return MakeConstantPolicy(d, {AcceptRule::Kind::kMeanAtLeast, level});
}

inline PolicyPtr AlwaysAccept(int d) {
  return MakeConstantPolicy(d, {AcceptRule::Kind::kAlways, 0.0});
}

// mu uniform on {-0.9, 0.9}: accept on one +1 (ratio 0.405), on two +1s
// (0.2025), or on a majority of three (0.1478). Gap 0.2025, D_K = 3.
inline Environment GapEnv(std::uint64_t seed) {
  return BinaryEnv({-0.9, 0.9}, seed);
}

inline PolicyClass GapClass() {
  return PolicyClass({ConstantMeanPolicy(1, 1.0), ConstantMeanPolicy(2, 1.0),
                      ConstantMeanPolicy(3, 0.01)});
}

// The one-sample policy of the FDR comparison: accept iff x_1 = +1.
inline PolicyPtr OneSamplePolicy() { return ConstantMeanPolicy(1, 1.0); }

// c^2 ln(K N / delta) = 4 exactly: |mean| = 1 first crosses 2 / sqrt(n) at
// n = 4.
struct UnitScaleHoeffding {
  static constexpr double c = 1.0;
  static constexpr long long K = 1;
  static constexpr long long N = 1;
  static double delta() { return std::exp(-4.0); }
};

}  // namespace perpolicy::testing

#endif  // PERPOLICY_TESTS_FIXTURES_H_
