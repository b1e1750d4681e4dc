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

#include "perpolicy/config.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "perpolicy/cape.h"
#include "perpolicy/errors.h"

namespace perpolicy {

using nlohmann::json;

ConfigError::ConfigError(std::vector<Issue> issues)
    : std::invalid_argument(Format(issues)), issues_(std::move(issues)) {}

ConfigError::ConfigError(std::string field, std::string message)
    : ConfigError(std::vector<Issue>{{std::move(field), std::move(message)}}) {}

std::string ConfigError::Format(const std::vector<Issue>& issues) {
  std::ostringstream out;
  out << "invalid config";
  for (const auto& issue : issues) {
    out << "\n  " << issue.field << ": " << issue.message;
  }
  return out.str();
}

namespace {

constexpr char kNexDefault[] = "ceil(N^(2/3))";
constexpr char kEpsDefault[] = "N^(-1/3)";

class Checker {
 public:
  void Add(std::string field, std::string message) {
    issues_.push_back({std::move(field), std::move(message)});
  }

  void Merge(const ConfigError& err, const std::string& prefix) {
    for (const auto& issue : err.issues()) {
      if (issue.field.rfind(prefix, 0) == 0) {
        issues_.push_back(issue);
      } else {
        issues_.push_back({prefix + issue.field, issue.message});
      }
    }
  }

  bool ok() const { return issues_.empty(); }
  void ThrowIfAny() const {
    if (!issues_.empty()) throw ConfigError(issues_);
  }

  const json* Object(const json& parent, const std::string& key,
                     const std::string& field, bool required = true) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) Add(field, "missing");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      Add(field, "must be an object");
      return nullptr;
    }
    return &v;
  }

  std::optional<double> Number(const json& parent, const std::string& key,
                               const std::string& field,
                               bool required = true) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) Add(field, "missing");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_number()) {
      Add(field, "must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> Integer(const json& parent, const std::string& key,
                                   const std::string& field,
                                   bool required = true) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) Add(field, "missing");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9.0e15) {
        return static_cast<long long>(d);
      }
    }
    Add(field, "must be an integer");
    return std::nullopt;
  }

  std::optional<std::string> String(const json& parent, const std::string& key,
                                    const std::string& field,
                                    bool required = true) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) Add(field, "missing");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_string()) {
      Add(field, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<double> Probability(const json& parent, const std::string& key,
                                    const std::string& field,
                                    bool required = true) {
    auto v = Number(parent, key, field, required);
    if (v && !(*v > 0.0 && *v < 1.0)) {
      Add(field, "must lie in (0, 1)");
      return std::nullopt;
    }
    return v;
  }

 private:
  std::vector<ConfigError::Issue> issues_;
};

std::optional<ValueDistribution> ParseValues(const json& values, Checker& ck) {
  const auto kind = ck.String(values, "kind", "env.values.kind");
  if (!kind) return std::nullopt;
  try {
    if (*kind == "discrete") {
      if (!values.contains("support") || !values.at("support").is_array()) {
        ck.Add("env.values.support", "must be a list of [value, prob] pairs");
        return std::nullopt;
      }
      std::vector<ValueDistribution::Atom> atoms;
      const json& support = values.at("support");
      for (std::size_t i = 0; i < support.size(); ++i) {
        const json& pair = support[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
            !pair[1].is_number()) {
          ck.Add("env.values.support." + std::to_string(i),
                 "must be a [value, prob] pair of numbers");
          return std::nullopt;
        }
        atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      return ValueDistribution::Discrete(std::move(atoms));
    }
    if (*kind == "uniform_finite") {
      if (!values.contains("values") || !values.at("values").is_array()) {
        ck.Add("env.values.values", "must be a list of numbers");
        return std::nullopt;
      }
      std::vector<double> vs;
      for (const auto& v : values.at("values")) {
        if (!v.is_number()) {
          ck.Add("env.values.values", "must be a list of numbers");
          return std::nullopt;
        }
        vs.push_back(v.get<double>());
      }
      return ValueDistribution::UniformFinite(std::move(vs));
    }
    ck.Add("env.values.kind", "unknown kind '" + *kind +
                                  "' (expected discrete or uniform_finite)");
  } catch (const ConfigError& err) {
    ck.Merge(err, "env.");
  }
  return std::nullopt;
}

std::optional<SampleModel> ParseSamples(const json& samples, Checker& ck) {
  const auto kind = ck.String(samples, "kind", "env.samples.kind");
  if (!kind) return std::nullopt;
  if (*kind == "binary_pm1") return SampleModel::BinaryPm1();
  if (*kind == "bernoulli01") return SampleModel::Bernoulli01();
  if (*kind == "uniform_window") {
    const auto w = ck.Number(samples, "halfwidth", "env.samples.halfwidth");
    if (!w) return std::nullopt;
    try {
      return SampleModel::UniformWindow(*w);
    } catch (const ConfigError& err) {
      ck.Merge(err, "env.");
      return std::nullopt;
    }
  }
  ck.Add("env.samples.kind",
         "unknown kind '" + *kind +
             "' (expected binary_pm1, bernoulli01 or uniform_window)");
  return std::nullopt;
}

std::shared_ptr<const Environment> ParseEnvironmentInto(const json& env,
                                                        Checker& ck) {
  const json* values = ck.Object(env, "values", "env.values");
  const json* samples = ck.Object(env, "samples", "env.samples");
  std::optional<ValueDistribution> vd;
  std::optional<SampleModel> sm;
  if (values) vd = ParseValues(*values, ck);
  if (samples) sm = ParseSamples(*samples, ck);
  long long seed = 0;
  if (env.contains("seed")) {
    if (env.at("seed").is_number_unsigned() ||
        env.at("seed").is_number_integer()) {
      seed = env.at("seed").get<long long>();
    } else {
      ck.Add("env.seed", "must be an integer");
    }
  }
  if (!vd || !sm) return nullptr;
  try {
    return std::make_shared<const Environment>(*vd, *sm,
                                               static_cast<std::uint64_t>(seed));
  } catch (const ConfigError& err) {
    ck.Merge(err, "env.");
  }
  return nullptr;
}

std::optional<StopRule> ParseStop(const json& j, const std::string& field,
                                  Checker& ck) {
  if (!j.is_object()) {
    ck.Add(field, "must be an object");
    return std::nullopt;
  }
  const auto rule = ck.String(j, "rule", field + ".rule");
  if (!rule) return std::nullopt;
  StopRule out;
  if (*rule == "never") return out;
  if (*rule == "abs_mean_at_least") {
    out.kind = StopRule::Kind::kAbsMeanAtLeast;
  } else if (*rule == "hoeffding") {
    out.kind = StopRule::Kind::kHoeffding;
  } else {
    ck.Add(field + ".rule", "unknown stop rule '" + *rule + "'");
    return std::nullopt;
  }
  const auto level = ck.Number(j, "level", field + ".level");
  if (!level) return std::nullopt;
  out.level = *level;
  return out;
}

std::optional<AcceptRule> ParseAccept(const json& j, const std::string& field,
                                      Checker& ck) {
  if (!j.is_object()) {
    ck.Add(field, "must be an object");
    return std::nullopt;
  }
  const auto rule = ck.String(j, "rule", field + ".rule");
  if (!rule) return std::nullopt;
  AcceptRule out;
  if (*rule == "never") return out;
  if (*rule == "always") {
    out.kind = AcceptRule::Kind::kAlways;
    return out;
  }
  if (*rule == "mean_at_least") {
    out.kind = AcceptRule::Kind::kMeanAtLeast;
  } else if (*rule == "hoeffding") {
    out.kind = AcceptRule::Kind::kHoeffding;
  } else {
    ck.Add(field + ".rule", "unknown accept rule '" + *rule + "'");
    return std::nullopt;
  }
  const auto level = ck.Number(j, "level", field + ".level");
  if (!level) return std::nullopt;
  out.level = *level;
  return out;
}

std::optional<PolicySource> ParsePoliciesInto(const json& p, Checker& ck) {
  const auto family = ck.String(p, "family", "policies.family");
  if (!family) return std::nullopt;
  if (*family == "capped_hoeffding") {
    const auto c = ck.Number(p, "c", "policies.c");
    const auto K = ck.Integer(p, "K", "policies.K");
    const auto N = ck.Integer(p, "N", "policies.N");
    const auto delta = ck.Probability(p, "delta", "policies.delta");
    std::vector<int> caps;
    if (p.contains("caps")) {
      if (!p.at("caps").is_array()) {
        ck.Add("policies.caps", "must be a list of integers");
      } else {
        for (const auto& v : p.at("caps")) {
          if (!v.is_number_integer() || v.get<long long>() < 1) {
            ck.Add("policies.caps", "must be a list of positive integers");
            break;
          }
          caps.push_back(v.get<int>());
        }
      }
    }
    if (c && !(*c > 0.0)) ck.Add("policies.c", "must be positive");
    if (K && *K < 1) ck.Add("policies.K", "must be >= 1");
    if (N && *N < 1) ck.Add("policies.N", "must be >= 1");
    for (std::size_t i = 1; i < caps.size(); ++i) {
      if (caps[i] < caps[i - 1]) {
        ck.Add("policies.caps", "must be nondecreasing");
        break;
      }
    }
    if (!ck.ok() || !c || !K || !N || !delta) return std::nullopt;
    if (!caps.empty() && static_cast<long long>(caps.size()) != *K) {
      ck.Add("policies.caps", "must list exactly K caps");
      return std::nullopt;
    }
    const CappedHoeffdingFamily fam(*c, *K, *N, *delta, caps);
    PolicySource out;
    out.family = *family;
    out.generator = fam.Generator();
    out.size = *K;
    out.countable = caps.empty();
    return out;
  }
  if (*family == "custom") {
    if (!p.contains("policies") || !p.at("policies").is_array() ||
        p.at("policies").empty()) {
      ck.Add("policies.policies", "must be a nonempty list");
      return std::nullopt;
    }
    std::vector<PolicyPtr> list;
    const json& arr = p.at("policies");
    int last_cap = 0;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string field = "policies.policies." + std::to_string(i);
      const json& item = arr[i];
      const auto cap = ck.Integer(item, "cap", field + ".cap");
      std::optional<StopRule> stop = StopRule{};
      std::optional<AcceptRule> accept;
      if (item.is_object() && item.contains("stop")) {
        stop = ParseStop(item.at("stop"), field + ".stop", ck);
      }
      if (item.is_object() && item.contains("accept")) {
        accept = ParseAccept(item.at("accept"), field + ".accept", ck);
      } else {
        ck.Add(field + ".accept", "missing");
      }
      if (cap && *cap < 1) {
        ck.Add(field + ".cap", "must be >= 1");
        continue;
      }
      if (cap && *cap < last_cap) {
        ck.Add(field + ".cap", "caps must be nondecreasing in index");
      }
      if (cap) last_cap = static_cast<int>(*cap);
      if (cap && stop && accept) {
        list.push_back(std::make_shared<SumRulePolicy>(static_cast<int>(*cap),
                                                       *stop, *accept));
      }
    }
    if (!ck.ok()) return std::nullopt;
    const PolicyClass cls(list);
    PolicySource out;
    out.family = *family;
    out.size = cls.size();
    out.countable = false;
    out.generator = PolicyGenerator(
        [cls](long long k) -> PolicyPtr {
          if (k > cls.size()) {
            throw GuardError("policy index " + std::to_string(k) +
                             " beyond the configured class of size " +
                             std::to_string(cls.size()));
          }
          return cls.ptr(static_cast<int>(k));
        },
        cls.size());
    return out;
  }
  ck.Add("policies.family", "unknown family '" + *family +
                                "' (expected capped_hoeffding or custom)");
  return std::nullopt;
}

void ParseAlgorithm(const json& a, long long N, ExperimentConfig& cfg,
                    Checker& ck) {
  AlgorithmSpec& spec = cfg.algorithm;
  const auto name = ck.String(a, "name", "algorithm.name");
  if (name) {
    if (*name == "cape") {
      spec.name = AlgorithmSpec::Name::kCape;
    } else if (*name == "esc") {
      spec.name = AlgorithmSpec::Name::kEsc;
    } else if (*name == "esc-cape") {
      spec.name = AlgorithmSpec::Name::kEscCape;
    } else if (*name == "always-reject") {
      spec.name = AlgorithmSpec::Name::kAlwaysReject;
    } else if (*name == "fixed" || name->rfind("fixed(", 0) == 0) {
      spec.name = AlgorithmSpec::Name::kFixed;
      if (*name == "fixed") {
        if (auto k = ck.Integer(a, "k", "algorithm.k")) {
          spec.fixed_k = static_cast<int>(*k);
        }
      } else {
        const std::string inner = name->substr(6, name->size() - 7);
        char* end = nullptr;
        const long v = std::strtol(inner.c_str(), &end, 10);
        if (name->back() != ')' || end == inner.c_str() || *end != '\0') {
          ck.Add("algorithm.name", "expected fixed(k) with an integer k");
        } else {
          spec.fixed_k = static_cast<int>(v);
        }
      }
      if (spec.fixed_k < 1 && ck.ok()) ck.Add("algorithm.k", "must be >= 1");
    } else {
      ck.Add("algorithm.name",
             "unknown algorithm '" + *name +
                 "' (expected cape, esc, esc-cape, fixed(k), always-reject)");
    }
  }

  if (auto d = ck.Probability(a, "delta", "algorithm.delta", false)) {
    spec.delta = *d;
  }
  if (auto d = ck.Probability(a, "esc_delta", "algorithm.esc_delta", false)) {
    spec.esc_delta = *d;
  }

  // n_ex: the default expression or an integer literal.
  spec.n_ex_expr = kNexDefault;
  if (a.contains("n_ex")) {
    const json& v = a.at("n_ex");
    if (v.is_string()) {
      if (v.get<std::string>() != kNexDefault) {
        ck.Add("algorithm.n_ex",
               std::string("expression must be \"") + kNexDefault +
                   "\" or an integer");
      }
    } else if (auto n = ck.Integer(a, "n_ex", "algorithm.n_ex")) {
      spec.n_ex_expr = std::to_string(*n);
      spec.n_ex = *n;
    }
  }
  if (N >= 1 && spec.n_ex_expr == kNexDefault) {
    spec.n_ex = DefaultExplorationCap(N);
  }
  const bool needs_cape = spec.name == AlgorithmSpec::Name::kCape ||
                          spec.name == AlgorithmSpec::Name::kEscCape;
  if (needs_cape && N >= 2 && (spec.n_ex < 1 || spec.n_ex > N - 1)) {
    ck.Add("algorithm.n_ex", "resolved value " + std::to_string(spec.n_ex) +
                                 " outside [1, N - 1]");
  }
  if (needs_cape && N == 1) ck.Add("N", "CAPE needs N >= 2");

  // epsilon: the default expression, a number or a list.
  spec.epsilons.clear();
  if (a.contains("epsilon")) {
    const json& v = a.at("epsilon");
    if (v.is_string()) {
      if (v.get<std::string>() != kEpsDefault) {
        ck.Add("algorithm.epsilon",
               std::string("expression must be \"") + kEpsDefault +
                   "\", a number or a list");
      }
    } else if (v.is_number()) {
      spec.epsilons.push_back(v.get<double>());
    } else if (v.is_array() && !v.empty()) {
      for (const auto& e : v) {
        if (!e.is_number()) {
          ck.Add("algorithm.epsilon", "list entries must be numbers");
          break;
        }
        spec.epsilons.push_back(e.get<double>());
      }
    } else {
      ck.Add("algorithm.epsilon", "must be a string, a number or a list");
    }
  }
  if (spec.epsilons.empty() && N >= 1) {
    spec.epsilons.push_back(std::pow(static_cast<double>(N), -1.0 / 3.0));
  }
  for (double e : spec.epsilons) {
    if (!(e > 0.0)) {
      ck.Add("algorithm.epsilon", "accuracy levels must be positive");
      break;
    }
  }

  spec.task_budget = N;
  if (auto b = ck.Integer(a, "task_budget", "algorithm.task_budget", false)) {
    if (*b < 1) ck.Add("algorithm.task_budget", "must be >= 1");
    spec.task_budget = *b;
  }
  if (auto b =
          ck.Integer(a, "sample_budget", "algorithm.sample_budget", false)) {
    if (*b < 1) ck.Add("algorithm.sample_budget", "must be >= 1");
    spec.sample_budget = *b;
  }
}

void ParseOracle(const json& o, OracleOptions& options, Checker& ck) {
  if (auto mode = ck.String(o, "mode", "oracle.mode", false)) {
    if (*mode == "auto") {
      options.mode = OracleOptions::Mode::kAuto;
    } else if (*mode == "exact") {
      options.mode = OracleOptions::Mode::kExact;
    } else if (*mode == "monte_carlo") {
      options.mode = OracleOptions::Mode::kMonteCarlo;
    } else {
      ck.Add("oracle.mode", "expected auto, exact or monte_carlo");
    }
  }
  if (auto t = ck.Integer(o, "mc_trials", "oracle.mc_trials", false)) {
    if (*t < 2) ck.Add("oracle.mc_trials", "must be >= 2");
    options.mc_trials = *t;
  }
  if (auto s = ck.Integer(o, "mc_seed", "oracle.mc_seed", false)) {
    options.mc_seed = static_cast<std::uint64_t>(*s);
  }
  if (auto m = ck.Integer(o, "max_paths", "oracle.max_paths", false)) {
    options.max_paths = *m;
  }
}

}  // namespace

std::string AlgorithmName(const AlgorithmSpec& spec) {
  switch (spec.name) {
    case AlgorithmSpec::Name::kCape:
      return "cape";
    case AlgorithmSpec::Name::kEsc:
      return "esc";
    case AlgorithmSpec::Name::kEscCape:
      return "esc-cape";
    case AlgorithmSpec::Name::kFixed:
      return "fixed(" + std::to_string(spec.fixed_k) + ")";
    case AlgorithmSpec::Name::kAlwaysReject:
      return "always-reject";
  }
  return "unknown";
}

Environment ParseEnvironment(const json& env) {
  Checker ck;
  auto out = ParseEnvironmentInto(env, ck);
  ck.ThrowIfAny();
  return *out;
}

PolicySource ParsePolicies(const json& policies) {
  Checker ck;
  auto out = ParsePoliciesInto(policies, ck);
  ck.ThrowIfAny();
  return *out;
}

ExperimentConfig ParseConfig(const json& doc) {
  Checker ck;
  ExperimentConfig cfg;
  cfg.raw = doc;
  if (!doc.is_object()) {
    ck.Add("<root>", "config must be a JSON object");
    ck.ThrowIfAny();
  }

  const auto N = ck.Integer(doc, "N", "N");
  if (N && *N < 1) ck.Add("N", "must be >= 1");
  cfg.N = N.value_or(0);
  if (auto t = ck.Integer(doc, "trials", "trials", false)) {
    if (*t < 1) ck.Add("trials", "must be >= 1");
    cfg.trials = *t;
  }

  if (const json* env = ck.Object(doc, "env", "env")) {
    cfg.env = ParseEnvironmentInto(*env, ck);
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer()) {
      cfg.seed = static_cast<std::uint64_t>(s.get<long long>());
    } else {
      ck.Add("seed", "must be an integer");
    }
  } else if (cfg.env) {
    cfg.seed = cfg.env->seed();
  }

  std::optional<PolicySource> policies;
  if (const json* p = ck.Object(doc, "policies", "policies")) {
    policies = ParsePoliciesInto(*p, ck);
  }
  if (const json* a = ck.Object(doc, "algorithm", "algorithm")) {
    ParseAlgorithm(*a, cfg.N, cfg, ck);
  }
  if (policies) {
    cfg.policies = *policies;
    const auto& alg = cfg.algorithm;
    if (alg.name == AlgorithmSpec::Name::kFixed &&
        alg.fixed_k > cfg.policies.size) {
      ck.Add("algorithm.k", "index " + std::to_string(alg.fixed_k) +
                                " beyond the class size " +
                                std::to_string(cfg.policies.size));
    }
  }
  if (doc.contains("output")) {
    if (const json* o = ck.Object(doc, "output", "output")) {
      if (auto dir = ck.String(*o, "dir", "output.dir", false)) {
        cfg.output.dir = *dir;
      }
      if (o->contains("runs_csv")) {
        if (o->at("runs_csv").is_boolean()) {
          cfg.output.write_runs = o->at("runs_csv").get<bool>();
        } else {
          ck.Add("output.runs_csv", "must be a boolean");
        }
      }
    }
  }
  if (doc.contains("oracle")) {
    if (const json* o = ck.Object(doc, "oracle", "oracle")) {
      ParseOracle(*o, cfg.oracle, ck);
    }
  }
  ck.ThrowIfAny();
  return cfg;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path, std::string("malformed JSON: ") + err.what());
  }
}

ExperimentConfig LoadConfig(const std::string& path) {
  return ParseConfig(ReadJsonFile(path));
}

std::uint64_t EffectiveSeed(std::uint64_t configured) {
  const char* env = std::getenv("PERPOLICY_SEED_OVERRIDE");
  if (env == nullptr || *env == '\0') return configured;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') {
    throw ConfigError("PERPOLICY_SEED_OVERRIDE", "must be an integer");
  }
  return static_cast<std::uint64_t>(v);
}

void SetByPath(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError(path, "empty path segment");
    const bool index = key.find_first_not_of("0123456789") == std::string::npos;
    json* child = nullptr;
    if (node->is_array() && index) {
      const std::size_t i = std::stoul(key);
      if (i >= node->size()) throw ConfigError(path, "index out of range");
      child = &(*node)[i];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ConfigError(path, "segment '" + key + "' is not an object key");
      }
      child = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *child = value;
      return;
    }
    node = child;
    start = dot + 1;
  }
}

}  // namespace perpolicy
