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

#include "perpolicy/environment.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

constexpr double kProbTolerance = 1e-12;
constexpr std::uint64_t kValueLane = 0;
constexpr std::uint64_t kSampleLane = 1;

}  // namespace

ValueDistribution::ValueDistribution(Kind kind, std::vector<Atom> support)
    : kind_(kind), support_(std::move(support)) {
  if (support_.empty()) {
    throw ConfigError("values.support", "value distribution has empty support");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const Atom& atom = support_[i];
    if (!(atom.value >= -1.0 && atom.value <= 1.0)) {
      std::ostringstream msg;
      msg << "value " << atom.value << " outside [-1, 1]";
      throw ConfigError("values.support", msg.str());
    }
    if (!(atom.prob >= 0.0)) {
      throw ConfigError("values.support", "negative probability");
    }
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total << ", expected 1";
    throw ConfigError("values.support", msg.str());
  }
  cdf_.reserve(support_.size());
  double acc = 0.0;
  for (const Atom& atom : support_) {
    acc += atom.prob;
    cdf_.push_back(acc);
  }
}

ValueDistribution ValueDistribution::Discrete(std::vector<Atom> support) {
  return ValueDistribution(Kind::kDiscrete, std::move(support));
}

ValueDistribution ValueDistribution::UniformFinite(std::vector<double> values) {
  if (values.empty()) {
    throw ConfigError("values.values", "uniform_finite needs at least one value");
  }
  std::vector<Atom> support;
  support.reserve(values.size());
  const double p = 1.0 / static_cast<double>(values.size());
  for (double v : values) support.push_back({v, p});
  return ValueDistribution(Kind::kUniformFinite, std::move(support));
}

ValueDistribution ValueDistribution::PointMass(double value) {
  return Discrete({{value, 1.0}});
}

double ValueDistribution::Mean() const {
  double m = 0.0;
  for (const Atom& atom : support_) m += atom.value * atom.prob;
  return m;
}

double ValueDistribution::Quantile(double u) const {
  // The last atom absorbs rounding slack in the cumulative sums.
  for (std::size_t i = 0; i + 1 < cdf_.size(); ++i) {
    if (u < cdf_[i] && support_[i].prob > 0.0) return support_[i].value;
  }
  for (std::size_t i = support_.size(); i-- > 0;) {
    if (support_[i].prob > 0.0) return support_[i].value;
  }
  return support_.back().value;
}

SampleModel SampleModel::UniformWindow(double halfwidth) {
  if (!(halfwidth >= 0.0 && halfwidth <= 1.0)) {
    throw ConfigError("samples.halfwidth", "halfwidth must lie in [0, 1]");
  }
  return SampleModel(Kind::kUniformWindow, halfwidth);
}

std::string SampleModel::Name() const {
  switch (kind_) {
    case Kind::kBinaryPm1:
      return "binary_pm1";
    case Kind::kBernoulli01:
      return "bernoulli01";
    case Kind::kUniformWindow:
      return "uniform_window";
  }
  return "unknown";
}

bool SampleModel::Admits(double mu) const {
  switch (kind_) {
    case Kind::kBinaryPm1:
      return mu >= -1.0 && mu <= 1.0;
    case Kind::kBernoulli01:
      return mu >= 0.0 && mu <= 1.0;
    case Kind::kUniformWindow:
      return mu >= -1.0 && mu <= 1.0 && halfwidth_ <= 1.0 - std::abs(mu);
  }
  return false;
}

double SampleModel::AnalyticMean(double mu) const {
  switch (kind_) {
    case Kind::kBinaryPm1: {
      const double p_up = (1.0 + mu) / 2.0;
      return p_up * 1.0 + (1.0 - p_up) * -1.0;
    }
    case Kind::kBernoulli01:
      return mu * 1.0 + (1.0 - mu) * 0.0;
    case Kind::kUniformWindow:
      // Midpoint of [mu - w, mu + w].
      return ((mu - halfwidth_) + (mu + halfwidth_)) / 2.0;
  }
  return 0.0;
}

double SampleModel::Draw(double mu, double u) const {
  switch (kind_) {
    case Kind::kBinaryPm1:
      return u < (1.0 + mu) / 2.0 ? 1.0 : -1.0;
    case Kind::kBernoulli01:
      return u < mu ? 1.0 : 0.0;
    case Kind::kUniformWindow:
      return mu + halfwidth_ * (2.0 * u - 1.0);
  }
  return 0.0;
}

std::vector<SampleModel::Outcome> SampleModel::Outcomes(double mu) const {
  switch (kind_) {
    case Kind::kBinaryPm1:
      return {{1.0, (1.0 + mu) / 2.0}, {-1.0, (1.0 - mu) / 2.0}};
    case Kind::kBernoulli01:
      return {{1.0, mu}, {0.0, 1.0 - mu}};
    case Kind::kUniformWindow:
      break;
  }
  throw PreconditionError("uniform_window has no finite support");
}

double SampleStream::Draw() {
  const double x = model_->Draw(mu_, stream_.Unit(drawn_.size()));
  drawn_.push_back(x);
  return x;
}

void SampleStream::DrawUntil(std::size_t count) {
  drawn_.reserve(count);
  while (drawn_.size() < count) Draw();
}

Environment::Environment(ValueDistribution values, SampleModel samples,
                         std::uint64_t seed)
    : values_(std::move(values)), samples_(samples), seed_(seed) {
  for (const auto& atom : values_.support()) {
    if (atom.prob > 0.0 && !samples_.Admits(atom.value)) {
      std::ostringstream msg;
      msg << samples_.Name() << " cannot have mean " << atom.value;
      throw ConfigError("env.samples", msg.str());
    }
  }
}

Task Environment::NewTask(std::int64_t task_index) const {
  const auto index = static_cast<std::uint64_t>(task_index);
  const CounterStream value_stream(DeriveKey(seed_, {index, kValueLane}));
  const double mu = values_.Quantile(value_stream.Unit(0));
  return Task(task_index, mu, DeriveKey(seed_, {index, kSampleLane}),
              &samples_);
}

Environment Environment::WithSeed(std::uint64_t seed) const {
  return Environment(values_, samples_, seed);
}

}  // namespace perpolicy
