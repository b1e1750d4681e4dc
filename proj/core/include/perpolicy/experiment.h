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

#ifndef PERPOLICY_EXPERIMENT_H_
#define PERPOLICY_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perpolicy/cape.h"
#include "perpolicy/config.h"
#include "perpolicy/esc.h"
#include "perpolicy/oracle.h"
#include "perpolicy/run_log.h"

namespace perpolicy {

inline constexpr char kRunsCsvHeader[] =
    "trial,task,phase,policy,samples,decision,mu,reward,cum_reward,cum_cost,"
    "candidates";

struct TrialResult {
  long long trial = 0;
  std::uint64_t seed = 0;
  RunLog log{false};
  std::optional<EscResult> esc;
  std::optional<CapeResult> cape;
  // Whether every reward and cost interval covered the oracle value at every
  // exploration step (CAPE algorithms with an oracle only).
  std::optional<bool> covered;
};

struct RunOptions {
  int parallel = 1;
  bool keep_records = true;
  // Skips the oracle; summaries then carry nulls for oracle-derived fields.
  bool skip_oracle = false;
};

// Seed of trial `t`: a hash of the (possibly overridden) config seed and t.
std::uint64_t TrialSeed(std::uint64_t base_seed, long long trial);

TrialResult RunTrial(const ExperimentConfig& config, long long trial,
                     const OracleValues* oracle, bool keep_records);

struct ExperimentResult {
  std::optional<OracleValues> oracle;
  std::optional<RegretReport> regret;
  std::vector<TrialResult> trials;
  nlohmann::json summary;
};

// Runs every trial and builds the summary. With parallel > 1 trials execute
// on worker threads; results are merged by trial index. `on_trial` is called
// in trial order.
ExperimentResult RunTrials(
    const ExperimentConfig& config, const RunOptions& options,
    const std::function<void(const TrialResult&)>& on_trial = {});

void WriteCsvRows(std::ostream& out, const TrialResult& trial);

// Writes <dir>/runs.csv and then <dir>/summary.json. A stale summary is
// removed first so a failed run never leaves one behind.
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const std::string& out_dir,
                               const RunOptions& options);

nlohmann::json OracleJson(const OracleValues& oracle);

// ceil(288 D_K^2 ln(4 K N_ex / delta) / gap^2) + 1.
double EliminationBound(int K, int D_K, long long n_ex, double delta,
                        double gap);

struct SweepSpec {
  struct Parameter {
    std::string path;
    std::vector<nlohmann::json> values;
  };
  nlohmann::json base;
  std::vector<Parameter> parameters;
  std::string out_dir = "out";
};

inline constexpr long long kSweepGuard = 10000;

// Reads {"base": {...} | "path", "parameters": [{"path", "values"}], ...}.
// A relative base path resolves against `base_dir`.
SweepSpec ParseSweep(const nlohmann::json& doc, const std::string& base_dir);

// One summary row per grid point, first parameter varying slowest. Throws
// GuardError when the grid exceeds kSweepGuard points.
void RunSweep(const SweepSpec& spec, const std::string& out_dir,
              const RunOptions& options, std::ostream* progress = nullptr);

}  // namespace perpolicy

#endif  // PERPOLICY_EXPERIMENT_H_
