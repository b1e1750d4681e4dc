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

#ifndef PERPOLICY_ENVIRONMENT_H_
#define PERPOLICY_ENVIRONMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perpolicy/random.h"

namespace perpolicy {

// Distribution of the hidden task values mu, supported on [-1, 1].
class ValueDistribution {
 public:
  enum class Kind { kDiscrete, kUniformFinite };

  struct Atom {
    double value;
    double prob;
  };

  // Throws ConfigError unless every value lies in [-1, 1], probabilities are
  // nonnegative and they sum to 1 within 1e-12.
  static ValueDistribution Discrete(std::vector<Atom> support);
  static ValueDistribution UniformFinite(std::vector<double> values);
  static ValueDistribution PointMass(double value);

  Kind kind() const { return kind_; }
  const std::vector<Atom>& support() const { return support_; }
  double Mean() const;
  // Inverse-CDF draw from a uniform variate u in [0, 1).
  double Quantile(double u) const;

 private:
  ValueDistribution(Kind kind, std::vector<Atom> support);

  Kind kind_;
  std::vector<Atom> support_;
  std::vector<double> cdf_;
};

// Conditional law of a sample X given mu, with E[X | mu] = mu.
class SampleModel {
 public:
  enum class Kind { kBinaryPm1, kBernoulli01, kUniformWindow };

  struct Outcome {
    double value;
    double prob;
  };

  static SampleModel BinaryPm1() { return SampleModel(Kind::kBinaryPm1, 0.0); }
  static SampleModel Bernoulli01() {
    return SampleModel(Kind::kBernoulli01, 0.0);
  }
  static SampleModel UniformWindow(double halfwidth);

  Kind kind() const { return kind_; }
  double halfwidth() const { return halfwidth_; }
  std::string Name() const;

  bool Admits(double mu) const;
  // Closed-form E[X | mu].
  double AnalyticMean(double mu) const;
  double Draw(double mu, double u) const;
  bool HasFiniteSupport() const { return kind_ != Kind::kUniformWindow; }
  // The two support points of a finite model with their probabilities under
  // mu. Zero-probability outcomes are kept so callers can prune them.
  std::vector<Outcome> Outcomes(double mu) const;

 private:
  SampleModel(Kind kind, double halfwidth)
      : kind_(kind), halfwidth_(halfwidth) {}

  Kind kind_;
  double halfwidth_;
};

// Learner-facing view of a task: sequential samples, no access to mu.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t key, double mu, const SampleModel* model)
      : stream_(key), mu_(mu), model_(model) {}

  double Draw();
  // Draws until at least `count` samples have been observed.
  void DrawUntil(std::size_t count);
  std::span<const double> drawn() const { return drawn_; }
  std::size_t cursor() const { return drawn_.size(); }

 private:
  CounterStream stream_;
  double mu_;
  const SampleModel* model_;
  std::vector<double> drawn_;
};

class Task {
 public:
  Task(std::int64_t index, double mu, std::uint64_t sample_key,
       const SampleModel* model)
      : index_(index), mu_(mu), stream_(sample_key, mu, model) {}

  std::int64_t index() const { return index_; }
  // Evaluation-only: policies receive `stream()`, never the task itself.
  double mu() const { return mu_; }
  SampleStream& stream() { return stream_; }
  const SampleStream& stream() const { return stream_; }
  double Draw() { return stream_.Draw(); }
  std::size_t sample_cursor() const { return stream_.cursor(); }

 private:
  std::int64_t index_;
  double mu_;
  SampleStream stream_;
};

class Environment {
 public:
  // Throws ConfigError when the sample model cannot produce mean mu for some
  // support value (bernoulli01 outside [0, 1], window too wide).
  Environment(ValueDistribution values, SampleModel samples,
              std::uint64_t seed);

  const ValueDistribution& values() const { return values_; }
  const SampleModel& samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

  // Task randomness is a pure function of (seed, task_index): tasks are
  // independent of how many samples earlier tasks consumed.
  Task NewTask(std::int64_t task_index) const;

  // Same distribution, different seed.
  Environment WithSeed(std::uint64_t seed) const;

 private:
  ValueDistribution values_;
  SampleModel samples_;
  std::uint64_t seed_;
};

}  // namespace perpolicy

#endif  // PERPOLICY_ENVIRONMENT_H_
