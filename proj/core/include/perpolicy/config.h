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

#ifndef PERPOLICY_CONFIG_H_
#define PERPOLICY_CONFIG_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perpolicy/environment.h"
#include "perpolicy/oracle.h"
#include "perpolicy/policy.h"

namespace perpolicy {

// The policy class named by a config. Finite classes have `size` members;
// countable ones (capped_hoeffding used with ESC) extend past `size`, which
// then only bounds the indices the oracle evaluates.
struct PolicySource {
  std::string family;
  PolicyGenerator generator{[](long long) -> PolicyPtr { return nullptr; }};
  long long size = 0;
  bool countable = false;

  PolicyClass Class() const { return generator.Prefix(size); }
};

struct AlgorithmSpec {
  enum class Name { kCape, kEsc, kEscCape, kFixed, kAlwaysReject };

  Name name = Name::kCape;
  int fixed_k = 0;
  double delta = 0.1;
  // Overrides delta inside ESC only; unset means ESC and CAPE share delta.
  std::optional<double> esc_delta;
  std::string n_ex_expr = "ceil(N^(2/3))";
  long long n_ex = 0;  // resolved
  std::vector<double> epsilons;  // resolved
  long long task_budget = 0;     // resolved, defaults to N
  long long sample_budget = 100'000'000;

  bool uses_esc() const { return name == Name::kEsc || name == Name::kEscCape; }
};

std::string AlgorithmName(const AlgorithmSpec& spec);

struct OutputSpec {
  std::string dir = "out";
  bool write_runs = true;
};

struct ExperimentConfig {
  std::shared_ptr<const Environment> env;
  PolicySource policies;
  AlgorithmSpec algorithm;
  long long N = 0;
  long long trials = 1;
  std::uint64_t seed = 0;
  OutputSpec output;
  OracleOptions oracle;
  nlohmann::json raw;
};

// Validates and resolves a config document. Every problem found is reported
// in one ConfigError, each tagged with a dotted field name.
ExperimentConfig ParseConfig(const nlohmann::json& doc);
// Reads a file; parse failures surface as ConfigError on field "<file>".
nlohmann::json ReadJsonFile(const std::string& path);
ExperimentConfig LoadConfig(const std::string& path);

// Applies PERPOLICY_SEED_OVERRIDE when set.
std::uint64_t EffectiveSeed(std::uint64_t configured);

// Builders shared with the sweep runner and tests.
Environment ParseEnvironment(const nlohmann::json& env);
PolicySource ParsePolicies(const nlohmann::json& policies);

// Sets `value` at a dotted path ("algorithm.delta", "env.values.support.0.0"),
// creating objects along the way.
void SetByPath(nlohmann::json& doc, const std::string& path,
               const nlohmann::json& value);

}  // namespace perpolicy

#endif  // PERPOLICY_CONFIG_H_
