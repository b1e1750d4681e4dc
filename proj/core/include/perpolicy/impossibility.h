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

#ifndef PERPOLICY_IMPOSSIBILITY_H_
#define PERPOLICY_IMPOSSIBILITY_H_

#include <span>
#include <vector>

namespace perpolicy {

// Searches for f: {0, 1} -> R with E[f(X)] = E[X]^2 for a Bernoulli(mu)
// sample X. Each mu contributes the linear constraint
//   f(1) mu + f(0) (1 - mu) = mu^2.
struct ImpossibilityReport {
  struct Line {
    double mu = 0.0;
    double coef_f0 = 0.0;  // 1 - mu
    double coef_f1 = 0.0;  // mu
    double rhs = 0.0;      // mu^2
    bool forces_f0_zero = false;  // mu == 0
    // f(1) as a function of f(0): mu - f(0) (1 - mu) / mu, for mu != 0.
    double f1_intercept = 0.0;
    double f1_slope = 0.0;
  };

  std::vector<Line> lines;
  // Least-squares solution and residual norm over the given values together
  // with mu = 0, which every estimator valid on [0, 1] must also satisfy.
  double f0 = 0.0;
  double f1 = 0.0;
  double residual = 0.0;
  // Same over the given values alone.
  double residual_unanchored = 0.0;
  bool consistent = true;  // residual <= tolerance
  double tolerance = 1e-6;
};

// Throws ConfigError if `mu_values` is empty, has duplicates or leaves
// [0, 1].
ImpossibilityReport ImpossibilityCheck(std::span<const double> mu_values,
                                       double tolerance = 1e-6);

}  // namespace perpolicy

#endif  // PERPOLICY_IMPOSSIBILITY_H_
