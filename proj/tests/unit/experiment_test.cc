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

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "perpolicy/config.h"
#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Fixture(const std::string& name) {
  return std::string(PERPOLICY_FIXTURE_DIR) + "/" + name;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("perpolicy_experiment_test_" + std::to_string(::getpid())) /
                       name;
  fs::remove_all(dir);
  return dir;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ExperimentTest, FixedSinglePolicyHasNoRegret) {
  json doc = ReadJsonFile(Fixture("fdr_eps0.2.json"));
  doc["trials"] = 40;
  const ExperimentConfig cfg = ParseConfig(doc);
  RunOptions options;
  options.keep_records = false;
  const ExperimentResult result = RunTrials(cfg, options);
  ASSERT_TRUE(result.regret.has_value());
  EXPECT_NEAR(result.oracle->benchmark, 0.02, 1e-15);
  EXPECT_LE(std::abs(result.regret->regret), 4.0 * result.regret->realized_se);
  EXPECT_EQ(result.summary["trials"], 40);
}

TEST(ExperimentTest, AllNegativeEscCapeFallsBack) {
  json doc = ReadJsonFile(Fixture("esc_all_negative.json"));
  doc["algorithm"]["task_budget"] = 1000;
  const ExperimentConfig cfg = ParseConfig(doc);
  const ExperimentResult result = RunTrials(cfg, {});
  EXPECT_EQ(result.summary["esc_halted"], false);
  EXPECT_LE(result.summary["realized_ratio"].get<double>(), 0.0);
  for (const TrialResult& trial : result.trials) {
    EXPECT_EQ(trial.log.tasks(), cfg.N);
    EXPECT_EQ(trial.log.tasks_in(Phase::kFixed), cfg.N - trial.esc->tasks_used);
    EXPECT_LE(trial.esc->tasks_used, 1000);
  }
}

TEST(ExperimentTest, TrialsAreReproducibleAndIndependentOfThreads) {
  const ExperimentConfig cfg = LoadConfig(Fixture("cape_hoeffding.json"));
  RunOptions serial;
  RunOptions parallel;
  parallel.parallel = 3;
  std::ostringstream a, b;
  RunTrials(cfg, serial, [&a](const TrialResult& t) { WriteCsvRows(a, t); });
  RunTrials(cfg, parallel, [&b](const TrialResult& t) { WriteCsvRows(b, t); });
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(ExperimentTest, TrialSeedsDiffer) {
  EXPECT_NE(TrialSeed(1, 0), TrialSeed(1, 1));
  EXPECT_EQ(TrialSeed(1, 5), TrialSeed(1, 5));
}

TEST(ExperimentTest, WritesCsvAndSummary) {
  const fs::path dir = TempDir("run");
  const ExperimentConfig cfg = LoadConfig(Fixture("cape_gap.json"));
  RunExperiment(cfg, dir.string(), {});
  const std::string csv = ReadAll(dir / "runs.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kRunsCsvHeader);
  // One row per task per trial plus the header.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), cfg.N * cfg.trials + 1);
  const json summary = json::parse(ReadAll(dir / "summary.json"));
  for (const char* key :
       {"algorithm", "N", "trials", "seed", "benchmark", "realized_ratio",
        "regret", "gap", "n_ex_resolved", "selected_k", "selected_is_optimal",
        "elimination_task", "elimination_bound", "coverage_fraction", "oracle",
        "per_trial"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
  EXPECT_NEAR(summary["gap"].get<double>(), 0.2025, 1e-12);
  EXPECT_EQ(summary["oracle"].size(), 3u);
}

TEST(ExperimentTest, FailedRunLeavesNoSummary) {
  const fs::path dir = TempDir("failed");
  fs::create_directories(dir / "runs.csv");
  std::ofstream(dir / "summary.json") << "{}";
  // runs.csv is a directory, so writing the trace fails.
  const ExperimentConfig cfg = LoadConfig(Fixture("cape_gap.json"));
  EXPECT_THROW(RunExperiment(cfg, dir.string(), {}), GuardError);
  EXPECT_FALSE(fs::exists(dir / "summary.json"));
}

TEST(ExperimentTest, EliminationBoundFormula) {
  EXPECT_DOUBLE_EQ(EliminationBound(3, 3, 4000, 0.1, 0.2025),
                   std::ceil(288.0 * 9.0 * std::log(4.0 * 3 * 4000 / 0.1) /
                             (0.2025 * 0.2025)) +
                       1.0);
  EXPECT_TRUE(std::isinf(EliminationBound(3, 3, 4000, 0.1,
                                          std::numeric_limits<double>::infinity())));
}

TEST(SweepTest, SinglePointMatchesRun) {
  const fs::path dir = TempDir("sweep");
  const json doc = {{"base", "cape_gap.json"},
                    {"parameters", {{{"path", "N"}, {"values", {2000}}}}}};
  const SweepSpec spec = ParseSweep(doc, PERPOLICY_FIXTURE_DIR);
  RunSweep(spec, (dir / "sweep").string(), {});
  const std::string csv = ReadAll(dir / "sweep" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  json base = ReadJsonFile(Fixture("cape_gap.json"));
  base["N"] = 2000;
  const ExperimentResult run = RunTrials(ParseConfig(base), {});
  const std::string row = csv.substr(csv.find('\n') + 1);
  std::ostringstream regret;
  regret.precision(17);
  regret << run.summary["regret"].get<double>();
  EXPECT_NE(row.find(regret.str()), std::string::npos) << row;
}

TEST(SweepTest, Guards) {
  json doc = {{"base", "cape_gap.json"}, {"parameters", json::array()}};
  EXPECT_THROW(ParseSweep(doc, PERPOLICY_FIXTURE_DIR), ConfigError);
  std::vector<int> many(200);
  doc["parameters"] = {{{"path", "N"}, {"values", many}},
                       {{"path", "seed"}, {"values", many}}};
  const SweepSpec spec = ParseSweep(doc, PERPOLICY_FIXTURE_DIR);
  EXPECT_THROW(RunSweep(spec, TempDir("guard").string(), {}), GuardError);
}

}  // namespace
}  // namespace perpolicy
