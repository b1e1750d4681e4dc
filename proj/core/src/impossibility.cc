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

#include "perpolicy/impossibility.h"

#include <algorithm>
#include <cmath>

#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

struct Fit {
  double f0 = 0.0;
  double f1 = 0.0;
  double residual = 0.0;
};

// Least squares for rows (1 - mu, mu) . (f0, f1) = mu^2 via the normal
// equations; a rank-one system takes the minimum-norm solution.
Fit LeastSquares(const std::vector<double>& mus) {
  double a = 0.0, b = 0.0, d = 0.0, u = 0.0, v = 0.0;
  for (double mu : mus) {
    const double x0 = 1.0 - mu;
    const double x1 = mu;
    const double y = mu * mu;
    a += x0 * x0;
    b += x0 * x1;
    d += x1 * x1;
    u += x0 * y;
    v += x1 * y;
  }
  Fit fit;
  const double det = a * d - b * b;
  if (std::abs(det) > 1e-14 * std::max(1.0, a * d)) {
    fit.f0 = (d * u - b * v) / det;
    fit.f1 = (a * v - b * u) / det;
  } else if (!mus.empty()) {
    // Distinct values give independent rows, so this is a single row.
    const double x0 = 1.0 - mus.front();
    const double x1 = mus.front();
    const double y = x1 * x1;
    const double len2 = x0 * x0 + x1 * x1;
    fit.f0 = x0 * y / len2;
    fit.f1 = x1 * y / len2;
  }
  double ss = 0.0;
  for (double mu : mus) {
    const double r = fit.f0 * (1.0 - mu) + fit.f1 * mu - mu * mu;
    ss += r * r;
  }
  fit.residual = std::sqrt(ss);
  return fit;
}

}  // namespace

ImpossibilityReport ImpossibilityCheck(std::span<const double> mu_values,
                                       double tolerance) {
  if (mu_values.empty()) {
    throw ConfigError("mu", "at least one value is required");
  }
  std::vector<double> mus(mu_values.begin(), mu_values.end());
  for (double mu : mus) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw ConfigError("mu", "values must lie in [0, 1]");
    }
  }
  std::vector<double> sorted = mus;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("mu", "values must be distinct");
  }

  ImpossibilityReport report;
  report.tolerance = tolerance;
  for (double mu : mus) {
    ImpossibilityReport::Line line;
    line.mu = mu;
    line.coef_f0 = 1.0 - mu;
    line.coef_f1 = mu;
    line.rhs = mu * mu;
    line.forces_f0_zero = mu == 0.0;
    if (mu != 0.0) {
      line.f1_intercept = mu;
      line.f1_slope = -(1.0 - mu) / mu;
    }
    report.lines.push_back(line);
  }

  report.residual_unanchored = LeastSquares(mus).residual;
  std::vector<double> anchored = mus;
  if (!std::binary_search(sorted.begin(), sorted.end(), 0.0)) {
    anchored.push_back(0.0);
  }
  const Fit fit = LeastSquares(anchored);
  report.f0 = fit.f0;
  report.f1 = fit.f1;
  report.residual = fit.residual;
  report.consistent = fit.residual <= tolerance;
  return report;
}

}  // namespace perpolicy
