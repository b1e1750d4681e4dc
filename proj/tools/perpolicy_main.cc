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

// Command line front end: run, sweep, oracle, impossibility, validate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "perpolicy/config.h"
#include "perpolicy/errors.h"
#include "perpolicy/experiment.h"
#include "perpolicy/impossibility.h"
#include "perpolicy/oracle.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitGuard = 2;

struct Common {
  std::string config;
  std::string out;
  int parallel = 1;
  bool quiet = false;
};

void AddCommon(CLI::App* cmd, Common& common, const std::string& what) {
  cmd->add_option("config_path", common.config, what)->type_name("PATH");
  cmd->add_option("--config", common.config, what)->type_name("PATH");
  cmd->add_option("--out", common.out, "Output directory")->type_name("DIR");
  cmd->add_option("--parallel", common.parallel, "Worker threads for trials")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", common.quiet, "Suppress progress output");
}

std::string RequirePath(const Common& common) {
  if (common.config.empty()) {
    throw perpolicy::ConfigError("--config", "a config path is required");
  }
  return common.config;
}

void PrintSummaryLine(const json& s) {
  auto show = [](const json& v) { return v.is_null() ? std::string("null") : v.dump(); };
  std::cout << "algorithm=" << s["algorithm"].get<std::string>()
            << " benchmark=" << show(s["benchmark"])
            << " realized_ratio=" << show(s["realized_ratio"])
            << " regret=" << show(s["regret"]) << " gap=" << show(s["gap"])
            << " selected_k=" << show(s["selected_k"]) << "\n";
}

int Run(const Common& common) {
  const auto cfg = perpolicy::LoadConfig(RequirePath(common));
  const std::string out = common.out.empty() ? cfg.output.dir : common.out;
  perpolicy::RunOptions options;
  options.parallel = common.parallel;
  const auto result = perpolicy::RunExperiment(cfg, out, options);
  if (!common.quiet) {
    PrintSummaryLine(result.summary);
    std::cout << "wrote " << (std::filesystem::path(out) / "summary.json").string()
              << "\n";
  }
  return kExitOk;
}

int Sweep(const Common& common) {
  const std::string path = RequirePath(common);
  const json doc = perpolicy::ReadJsonFile(path);
  const auto spec = perpolicy::ParseSweep(
      doc, std::filesystem::path(path).parent_path().string());
  const std::string out = common.out.empty() ? spec.out_dir : common.out;
  perpolicy::RunOptions options;
  options.parallel = common.parallel;
  perpolicy::RunSweep(spec, out, options, common.quiet ? nullptr : &std::cerr);
  if (!common.quiet) {
    std::cout << "wrote " << (std::filesystem::path(out) / "sweep.csv").string()
              << "\n";
  }
  return kExitOk;
}

int Oracle(const Common& common) {
  const auto cfg = perpolicy::LoadConfig(RequirePath(common));
  const auto oracle = perpolicy::ComputeOracle(cfg.policies.Class(), *cfg.env,
                                               cfg.oracle);
  json doc;
  doc["policies"] = perpolicy::OracleJson(oracle);
  doc["benchmark"] = oracle.benchmark;
  doc["argmax"] = oracle.argmax;
  if (oracle.gap_is_infinite()) {
    doc["gap"] = "inf";
  } else {
    doc["gap"] = oracle.gap;
  }
  const std::string text = doc.dump(2);
  if (common.out.empty()) {
    std::cout << text << "\n";
  } else {
    std::filesystem::create_directories(common.out);
    std::ofstream(std::filesystem::path(common.out) / "oracle.json") << text
                                                                      << "\n";
  }
  return kExitOk;
}

int Impossibility(const std::string& mu_list) {
  std::vector<double> mus;
  std::stringstream in(mu_list);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      mus.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw perpolicy::ConfigError("--mu", "'" + item + "' is not a number");
    }
  }
  if (mus.size() < 2) {
    throw perpolicy::ConfigError("--mu", "at least two distinct values needed");
  }
  const auto report = perpolicy::ImpossibilityCheck(mus);
  json doc;
  json lines = json::array();
  for (const auto& line : report.lines) {
    json l = {{"mu", line.mu},
              {"equation", "f(1)*" + std::to_string(line.coef_f1) + " + f(0)*" +
                               std::to_string(line.coef_f0) + " = " +
                               std::to_string(line.rhs)},
              {"forces_f0_zero", line.forces_f0_zero}};
    if (line.mu != 0.0) {
      l["f1_given_f0"] = {{"intercept", line.f1_intercept},
                          {"slope", line.f1_slope}};
    }
    lines.push_back(l);
  }
  doc["lines"] = lines;
  doc["least_squares"] = {{"f0", report.f0}, {"f1", report.f1}};
  doc["residual"] = report.residual;
  doc["residual_without_mu0"] = report.residual_unanchored;
  doc["consistent"] = report.consistent;
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int Validate(const Common& common) {
  const auto cfg = perpolicy::LoadConfig(RequirePath(common));
  if (!common.quiet) {
    std::cout << "ok: " << perpolicy::AlgorithmName(cfg.algorithm)
              << " N=" << cfg.N << " trials=" << cfg.trials
              << " policies=" << cfg.policies.size << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-task policy learning experiments"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, oracle_opts, validate_opts;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  AddCommon(run, run_opts, "Experiment config (JSON)");
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  AddCommon(sweep, sweep_opts, "Sweep spec (JSON)");
  auto* oracle = app.add_subcommand("oracle", "Print oracle policy values");
  AddCommon(oracle, oracle_opts, "Experiment config (JSON)");
  auto* validate = app.add_subcommand("validate", "Check a config");
  AddCommon(validate, validate_opts, "Experiment config (JSON)");
  std::string mu_list;
  auto* impossibility = app.add_subcommand(
      "impossibility", "Show that no f gives E[f(X)] = mu^2 for Bernoulli X");
  impossibility->add_option("--mu", mu_list, "Comma-separated values in [0, 1]")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return Run(run_opts);
    if (*sweep) return Sweep(sweep_opts);
    if (*oracle) return Oracle(oracle_opts);
    if (*validate) return Validate(validate_opts);
    if (*impossibility) return Impossibility(mu_list);
  } catch (const perpolicy::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  }
  return kExitOk;
}
