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

#include "perpolicy/experiment.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "perpolicy/errors.h"
#include "perpolicy/random.h"

namespace perpolicy {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json NumberOrInf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

template <typename T>
json Optional(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

bool UsesCape(const AlgorithmSpec& alg) {
  return alg.name == AlgorithmSpec::Name::kCape ||
         alg.name == AlgorithmSpec::Name::kEscCape;
}

CapeObserver CoverageObserver(const OracleValues* oracle, bool* covered) {
  if (oracle == nullptr) return {};
  return [oracle, covered](long long, const CandidateSet& live,
                           const EstimatorState& state) {
    if (!*covered) return;
    const int upto = std::min(live.max(), oracle->size());
    for (int k = 1; k <= upto; ++k) {
      const PolicyValue& v = oracle->values[static_cast<std::size_t>(k - 1)];
      if (!state.RewardBounds(k).Contains(v.reward) ||
          !state.CostBounds(k).Contains(v.cost)) {
        *covered = false;
        return;
      }
    }
  };
}

}  // namespace

std::uint64_t TrialSeed(std::uint64_t base_seed, long long trial) {
  return DeriveKey(base_seed, {static_cast<std::uint64_t>(trial)});
}

TrialResult RunTrial(const ExperimentConfig& config, long long trial,
                     const OracleValues* oracle, bool keep_records) {
  if (!config.env) throw PreconditionError("config has no environment");
  TrialResult result;
  result.trial = trial;
  result.seed = TrialSeed(EffectiveSeed(config.seed), trial);
  result.log = RunLog(keep_records);
  const Environment env = config.env->WithSeed(result.seed);
  const AlgorithmSpec& alg = config.algorithm;
  RunLog& log = result.log;

  EscConfig esc;
  esc.delta = alg.esc_delta.value_or(alg.delta);
  esc.epsilons = alg.epsilons;
  esc.task_budget = std::min(alg.task_budget, config.N);
  esc.sample_budget = alg.sample_budget;
  const CapeConfig cape{config.N, alg.delta, alg.n_ex};
  bool covered = true;

  switch (alg.name) {
    case AlgorithmSpec::Name::kCape: {
      result.cape = RunCape(config.policies.Class(), env, cape, log, 1,
                            CoverageObserver(oracle, &covered));
      if (oracle) result.covered = covered;
      break;
    }
    case AlgorithmSpec::Name::kEsc: {
      result.esc = RunEsc(config.policies.generator, env, esc, log, 1);
      break;
    }
    case AlgorithmSpec::Name::kEscCape: {
      EscCapeResult r = RunEscCape(config.policies.generator, env, esc, cape,
                                   log, CoverageObserver(oracle, &covered));
      result.esc = r.esc;
      result.cape = r.cape;
      if (oracle && r.cape) result.covered = covered;
      break;
    }
    case AlgorithmSpec::Name::kFixed: {
      const PolicyPtr policy = config.policies.generator.At(alg.fixed_k);
      for (long long n = 1; n <= config.N; ++n) {
        Task task = env.NewTask(n);
        const TaskOutcome out = RunPolicy(*policy, task);
        log.Append(Phase::kFixed, alg.fixed_k, out.duration, out.decision,
                   task.mu());
      }
      log.selected_k = alg.fixed_k;
      break;
    }
    case AlgorithmSpec::Name::kAlwaysReject: {
      const PolicyPtr policy = MakeAllReject(1);
      for (long long n = 1; n <= config.N; ++n) {
        Task task = env.NewTask(n);
        const TaskOutcome out = RunPolicy(*policy, task);
        log.Append(Phase::kFixed, 0, out.duration, false, task.mu());
      }
      break;
    }
  }
  return result;
}

void WriteCsvRows(std::ostream& out, const TrialResult& trial) {
  std::string line;
  for (const TaskRecord& r : trial.log.records()) {
    line.clear();
    line += std::to_string(trial.trial);
    line += ',';
    line += std::to_string(r.task);
    line += ',';
    line += PhaseName(r.phase);
    line += ',';
    line += std::to_string(r.policy);
    line += ',';
    line += std::to_string(r.samples);
    line += ',';
    line += r.decision ? '1' : '0';
    line += ',';
    line += FormatDouble(r.mu);
    line += ',';
    line += FormatDouble(r.reward);
    line += ',';
    line += FormatDouble(r.cum_reward);
    line += ',';
    line += FormatDouble(r.cum_cost);
    line += ',';
    if (r.candidates >= 0) line += std::to_string(r.candidates);
    line += '\n';
    out << line;
  }
}

double EliminationBound(int K, int D_K, long long n_ex, double delta,
                        double gap) {
  if (!(gap > 0.0) || std::isinf(gap)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::ceil(288.0 * D_K * D_K *
                   std::log(4.0 * K * static_cast<double>(n_ex) / delta) /
                   (gap * gap)) +
         1.0;
}

json OracleJson(const OracleValues& oracle) {
  json arr = json::array();
  for (int k = 1; k <= oracle.size(); ++k) {
    const PolicyValue& v = oracle.values[static_cast<std::size_t>(k - 1)];
    arr.push_back({{"policy_index", k},
                   {"reward", v.reward},
                   {"cost", v.cost},
                   {"ratio", v.ratio()},
                   {"g3", v.g3},
                   {"method", MethodName(v.method)},
                   {"std_error", v.reward_se},
                   {"cost_std_error", v.cost_se}});
  }
  return arr;
}

namespace {

json BuildSummary(const ExperimentConfig& config, const ExperimentResult& r) {
  const AlgorithmSpec& alg = config.algorithm;
  json s;
  s["algorithm"] = AlgorithmName(alg);
  s["N"] = config.N;
  s["trials"] = config.trials;
  s["seed"] = EffectiveSeed(config.seed);

  std::vector<RunTotals> totals;
  for (const auto& t : r.trials) {
    totals.push_back({t.log.total_reward(), t.log.total_cost()});
  }
  const double benchmark = r.oracle ? r.oracle->benchmark : 0.0;
  const RegretReport report = Regret(totals, benchmark);
  s["benchmark"] = r.oracle ? json(benchmark) : json(nullptr);
  s["realized_ratio"] = report.realized_ratio;
  s["realized_ratio_se"] = report.realized_se;
  s["regret"] = r.oracle ? json(report.regret) : json(nullptr);
  s["mean_total_reward"] = report.mean_reward;
  s["mean_total_cost"] = report.mean_cost;
  s["gap"] = r.oracle ? NumberOrInf(r.oracle->gap) : json(nullptr);
  s["n_ex_resolved"] = UsesCape(alg) ? json(alg.n_ex) : json(nullptr);

  // ESC statistics.
  if (alg.uses_esc()) {
    long long halted = 0;
    std::optional<long long> max_k;
    for (const auto& t : r.trials) {
      if (t.esc && t.esc->halted) {
        ++halted;
        max_k = std::max(max_k.value_or(0), t.esc->K);
      }
    }
    s["esc_halted"] = halted == static_cast<long long>(r.trials.size());
    s["esc_halt_fraction"] =
        static_cast<double>(halted) / static_cast<double>(r.trials.size());
    s["esc_K"] = Optional(max_k);
  } else {
    s["esc_halted"] = nullptr;
    s["esc_halt_fraction"] = nullptr;
    s["esc_K"] = nullptr;
  }

  // Elimination statistics: the latest singleton time over trials, or null
  // if some trial never narrowed to one candidate.
  std::optional<long long> elimination;
  bool all_eliminated = UsesCape(alg) && !r.trials.empty();
  for (const auto& t : r.trials) {
    if (!t.log.singleton_task) {
      all_eliminated = false;
      break;
    }
    elimination = std::max(elimination.value_or(0), *t.log.singleton_task);
  }
  s["elimination_task"] = all_eliminated ? Optional(elimination) : json(nullptr);
  if (UsesCape(alg) && r.oracle && alg.name == AlgorithmSpec::Name::kCape) {
    const PolicyClass cls = config.policies.Class();
    s["elimination_bound"] = NumberOrInf(EliminationBound(
        cls.size(), cls.max_cap(), alg.n_ex, alg.delta, r.oracle->gap));
  } else {
    s["elimination_bound"] = nullptr;
  }

  std::map<int, long long> votes;
  for (const auto& t : r.trials) {
    if (t.log.selected_k) ++votes[*t.log.selected_k];
  }
  std::optional<int> selected;
  long long best_votes = 0;
  for (const auto& [k, n] : votes) {
    if (n > best_votes) {
      selected = k;
      best_votes = n;
    }
  }
  s["selected_k"] = Optional(selected);
  if (r.oracle && selected) {
    s["selected_is_optimal"] = r.oracle->IsOptimal(*selected);
  }

  long long covered = 0, checked = 0;
  for (const auto& t : r.trials) {
    if (t.covered) {
      ++checked;
      if (*t.covered) ++covered;
    }
  }
  s["coverage_fraction"] =
      checked > 0 ? json(static_cast<double>(covered) / checked) : json(nullptr);

  s["oracle"] = r.oracle ? OracleJson(*r.oracle) : json(nullptr);
  if (r.oracle) {
    s["oracle_argmax"] = r.oracle->argmax;
  }

  json per_trial = json::array();
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const TrialResult& t = r.trials[i];
    json row;
    row["trial"] = t.trial;
    row["seed"] = t.seed;
    row["total_reward"] = t.log.total_reward();
    row["total_cost"] = t.log.total_cost();
    row["ratio"] = report.per_trial_ratios[i];
    row["selected_k"] = Optional(t.log.selected_k);
    row["elimination_task"] = Optional(t.log.singleton_task);
    if (t.esc) {
      row["esc_halted"] = t.esc->halted;
      row["esc_K"] = t.esc->halted ? json(t.esc->K) : json(nullptr);
      row["esc_j0"] = t.esc->j0;
      row["esc_tasks"] = t.esc->tasks_used;
      row["esc_samples"] = t.esc->samples_used;
      row["esc_M"] = t.esc->M;
    }
    row["covered"] = Optional(t.covered);
    per_trial.push_back(row);
  }
  s["per_trial"] = per_trial;
  return s;
}

}  // namespace

ExperimentResult RunTrials(
    const ExperimentConfig& config, const RunOptions& options,
    const std::function<void(const TrialResult&)>& on_trial) {
  ExperimentResult result;
  if (!options.skip_oracle) {
    result.oracle =
        ComputeOracle(config.policies.Class(), *config.env, config.oracle);
  }
  const OracleValues* oracle = result.oracle ? &*result.oracle : nullptr;
  const long long n = config.trials;
  result.trials.resize(static_cast<std::size_t>(n));

  const int workers =
      static_cast<int>(std::clamp<long long>(options.parallel, 1, n));
  if (workers == 1) {
    for (long long t = 0; t < n; ++t) {
      auto& slot = result.trials[static_cast<std::size_t>(t)];
      slot = RunTrial(config, t, oracle, options.keep_records);
      if (on_trial) on_trial(slot);
      slot.log.DropRecords();
    }
  } else {
    std::atomic<long long> next{0};
    std::mutex mu;
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    long long flushed = 0;
    std::exception_ptr failure;
    auto flush = [&] {
      while (flushed < n && done[static_cast<std::size_t>(flushed)]) {
        auto& slot = result.trials[static_cast<std::size_t>(flushed)];
        if (on_trial) on_trial(slot);
        slot.log.DropRecords();
        ++flushed;
      }
    };
    auto work = [&] {
      for (long long t = next++; t < n; t = next++) {
        try {
          TrialResult tr = RunTrial(config, t, oracle, options.keep_records);
          std::lock_guard<std::mutex> lock(mu);
          result.trials[static_cast<std::size_t>(t)] = std::move(tr);
          done[static_cast<std::size_t>(t)] = true;
          if (!failure) flush();
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<RunTotals> totals;
  for (const auto& t : result.trials) {
    totals.push_back({t.log.total_reward(), t.log.total_cost()});
  }
  if (oracle) result.regret = Regret(totals, oracle->benchmark);
  result.summary = BuildSummary(config, result);
  return result;
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const std::string& out_dir,
                               const RunOptions& options) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path summary_path = dir / "summary.json";
  const fs::path runs_path = dir / "runs.csv";
  fs::remove(summary_path);

  RunOptions opts = options;
  opts.keep_records = config.output.write_runs;
  std::ofstream runs;
  if (opts.keep_records) {
    runs.open(runs_path, std::ios::binary | std::ios::trunc);
    if (!runs) throw GuardError("cannot write " + runs_path.string());
    runs << kRunsCsvHeader << '\n';
  }
  ExperimentResult result = RunTrials(config, opts, [&](const TrialResult& t) {
    if (opts.keep_records) WriteCsvRows(runs, t);
  });
  if (opts.keep_records) {
    runs.close();
    if (!runs) throw GuardError("failed writing " + runs_path.string());
  }

  const fs::path tmp = dir / "summary.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << result.summary.dump(2) << '\n';
    if (!out) throw GuardError("failed writing " + tmp.string());
  }
  fs::rename(tmp, summary_path);
  return result;
}

SweepSpec ParseSweep(const json& doc, const std::string& base_dir) {
  std::vector<ConfigError::Issue> issues;
  SweepSpec spec;
  if (!doc.is_object()) throw ConfigError("<root>", "sweep must be an object");
  if (!doc.contains("base")) {
    issues.push_back({"base", "missing"});
  } else if (doc.at("base").is_string()) {
    fs::path p(doc.at("base").get<std::string>());
    if (p.is_relative()) p = fs::path(base_dir) / p;
    spec.base = ReadJsonFile(p.string());
  } else if (doc.at("base").is_object()) {
    spec.base = doc.at("base");
  } else {
    issues.push_back({"base", "must be an object or a file path"});
  }
  if (!doc.contains("parameters") || !doc.at("parameters").is_array() ||
      doc.at("parameters").empty() || doc.at("parameters").size() > 2) {
    issues.push_back({"parameters", "must list one or two swept parameters"});
  } else {
    const json& params = doc.at("parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string field = "parameters." + std::to_string(i);
      const json& p = params[i];
      if (!p.is_object() || !p.contains("path") || !p.at("path").is_string()) {
        issues.push_back({field + ".path", "missing"});
        continue;
      }
      if (!p.contains("values") || !p.at("values").is_array() ||
          p.at("values").empty()) {
        issues.push_back({field + ".values", "must be a nonempty list"});
        continue;
      }
      SweepSpec::Parameter param;
      param.path = p.at("path").get<std::string>();
      for (const auto& v : p.at("values")) param.values.push_back(v);
      spec.parameters.push_back(std::move(param));
    }
  }
  if (doc.contains("output") && doc.at("output").is_object() &&
      doc.at("output").contains("dir")) {
    spec.out_dir = doc.at("output").at("dir").get<std::string>();
  } else if (spec.base.is_object() && spec.base.contains("output") &&
             spec.base.at("output").contains("dir")) {
    spec.out_dir = spec.base.at("output").at("dir").get<std::string>();
  }
  if (!issues.empty()) throw ConfigError(issues);
  return spec;
}

namespace {

std::string CsvCell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return FormatDouble(v.get<double>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  const std::string dumped = v.dump();
  if (dumped.find_first_of(",\"") == std::string::npos) return dumped;
  return CsvCell(json(dumped));
}

}  // namespace

void RunSweep(const SweepSpec& spec, const std::string& out_dir,
              const RunOptions& options, std::ostream* progress) {
  long long points = 1;
  for (const auto& p : spec.parameters) {
    points *= static_cast<long long>(p.values.size());
    if (points > kSweepGuard) {
      throw GuardError("sweep grid exceeds " + std::to_string(kSweepGuard) +
                       " points");
    }
  }
  // Validate every grid point before running any of them.
  std::vector<ExperimentConfig> configs;
  std::vector<std::vector<json>> coords;
  for (long long i = 0; i < points; ++i) {
    json doc = spec.base;
    std::vector<json> at;
    long long rest = i;
    std::vector<std::size_t> idx(spec.parameters.size());
    for (std::size_t d = spec.parameters.size(); d-- > 0;) {
      const auto size = static_cast<long long>(spec.parameters[d].values.size());
      idx[d] = static_cast<std::size_t>(rest % size);
      rest /= size;
    }
    for (std::size_t d = 0; d < spec.parameters.size(); ++d) {
      const json& v = spec.parameters[d].values[idx[d]];
      SetByPath(doc, spec.parameters[d].path, v);
      at.push_back(v);
    }
    configs.push_back(ParseConfig(doc));
    coords.push_back(std::move(at));
  }

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path path = dir / "sweep.csv";
  const fs::path tmp = dir / "sweep.csv.tmp";
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw GuardError("cannot write " + tmp.string());

  std::vector<std::string> columns = {
      "algorithm",        "N",
      "trials",           "n_ex_resolved",
      "benchmark",        "realized_ratio",
      "realized_ratio_se", "regret",
      "gap",              "esc_halted",
      "esc_halt_fraction", "esc_K",
      "selected_k",       "selected_is_optimal",
      "elimination_task", "elimination_mean",
      "elimination_bound", "within_bound_fraction",
      "coverage_fraction"};
  // A swept parameter that is also a summary column ("N") appears once.
  for (const auto& p : spec.parameters) {
    std::erase(columns, p.path);
    out << CsvCell(json(p.path)) << ',';
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
  }

  RunOptions opts = options;
  opts.keep_records = false;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig& cfg = configs[i];
    const ExperimentResult r = RunTrials(cfg, opts);
    json s = r.summary;

    // Elimination times against the bound, over trials whose intervals
    // covered the oracle values throughout.
    double sum = 0.0;
    long long count = 0, eligible = 0, within = 0;
    const bool finite_bound = s["elimination_bound"].is_number();
    for (const auto& t : r.trials) {
      if (t.log.singleton_task) {
        sum += static_cast<double>(*t.log.singleton_task);
        ++count;
      }
      if (finite_bound && t.covered.value_or(false)) {
        ++eligible;
        const double bound = std::min<double>(
            s["elimination_bound"].get<double>(),
            static_cast<double>(cfg.algorithm.n_ex));
        if (t.log.singleton_task &&
            static_cast<double>(*t.log.singleton_task) <= bound) {
          ++within;
        }
      }
    }
    s["elimination_mean"] = count > 0 ? json(sum / count) : json(nullptr);
    s["within_bound_fraction"] =
        eligible > 0 ? json(static_cast<double>(within) / eligible)
                     : json(nullptr);
    if (!s.contains("selected_is_optimal")) s["selected_is_optimal"] = nullptr;

    for (const auto& v : coords[i]) out << CsvCell(v) << ',';
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << CsvCell(s[columns[c]]) << (c + 1 < columns.size() ? ',' : '\n');
    }
    if (progress) {
      *progress << "sweep point " << (i + 1) << "/" << configs.size() << "\n";
    }
  }
  out.close();
  if (!out) throw GuardError("failed writing " + tmp.string());
  fs::rename(tmp, path);
}

}  // namespace perpolicy
