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

// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.h"
#include "perpolicy/cape.h"
#include "perpolicy/config.h"
#include "perpolicy/esc.h"
#include "perpolicy/estimators.h"
#include "perpolicy/experiment.h"
#include "perpolicy/impossibility.h"
#include "perpolicy/oracle.h"
#include "perpolicy/random.h"

namespace perpolicy {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fixture(const std::string& name) {
  return std::string(PERPOLICY_FIXTURE_DIR) + "/" + name;
}

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path WorkDir(const std::string& name) {
  const fs::path dir = fs::current_path() / "acceptance_out" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1. The oversampled reward term is unbiased for the oracle reward.
Outcome EstimatorUnbiased() {
  const Environment env = testing::BinaryEnv({-0.3, 0.5}, 101);
  // One +1 sample; a nonnegative mean of two; the capped Hoeffding rule.
  const PolicyClass policies({testing::ConstantMeanPolicy(1, 1.0),
                              testing::ConstantMeanPolicy(2, 0.0),
                              CappedHoeffdingFamily(0.45, 4, 1000, 0.1).Make(4)});
  constexpr int kTasks = 10000;
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (int t = 0; t < kTasks; ++t) {
    Task task = env.NewTask(t);
    const OversampledOutcome out =
        RunPolicyOversampled(policies.at(3), policies.cap(3), task);
    EstimatorState state({1, 2, 4}, kTasks, 0.1);
    state.Update(out, CandidateSet::All(3), policies);
    for (int k = 1; k <= 3; ++k) {
      sum[k - 1] += state.reward_sum(k);
      sum_sq[k - 1] += state.reward_sum(k) * state.reward_sum(k);
    }
  }
  Outcome o{true, ""};
  for (int k = 1; k <= 3; ++k) {
    const double truth = ExactPolicyValue(policies.at(k), env).reward;
    const double mean = sum[k - 1] / kTasks;
    const double se =
        std::sqrt((sum_sq[k - 1] / kTasks - mean * mean) / (kTasks - 1));
    const double err = std::abs(mean - truth);
    const double z = se > 0.0 ? err / se : (err == 0.0 ? 0.0 : HUGE_VAL);
    o.pass = o.pass && z <= 3.0;
    o.detail += Format("k=%d reward=%.4f |err|/se=%.2f ", k, truth, z);
  }
  return o;
}

// 2. Joint coverage of the reward and cost intervals over exploration.
Outcome Coverage() {
  json doc = ReadJsonFile(Fixture("cape_hoeffding.json"));
  doc["trials"] = 200;
  doc["N"] = 401;
  const ExperimentConfig cfg = ParseConfig(doc);
  RunOptions options;
  options.keep_records = false;
  const ExperimentResult result = RunTrials(cfg, options);
  const double fraction = result.summary["coverage_fraction"].get<double>();
  return {fraction >= 0.73,
          Format("coverage %.3f over %lld runs (K=4, N_ex=%lld, delta=%.2f)",
                 fraction, cfg.trials, cfg.algorithm.n_ex, cfg.algorithm.delta)};
}

// 3. Suboptimal policies are gone by the elimination-time bound.
Outcome EliminationTime() {
  json doc = ReadJsonFile(Fixture("cape_gap.json"));
  doc["trials"] = 100;
  doc["N"] = 5000;
  doc["algorithm"]["n_ex"] = 4000;
  doc["algorithm"]["delta"] = 0.1;
  const ExperimentConfig cfg = ParseConfig(doc);
  const PolicyClass policies = cfg.policies.Class();
  const OracleValues oracle = ComputeOracle(policies, *cfg.env, cfg.oracle);
  const int K = policies.size();
  const double bound = std::min(
      static_cast<double>(cfg.algorithm.n_ex),
      EliminationBound(K, policies.max_cap(), cfg.algorithm.n_ex,
                       cfg.algorithm.delta, oracle.gap));
  if (oracle.argmax.size() != 1 || oracle.gap < 0.15 || policies.max_cap() > 6) {
    return {false, "fixture does not have a unique optimum with gap >= 0.15"};
  }
  const int best = oracle.argmax.front();
  long long good = 0, latest = 0;
  RunOptions options;
  options.keep_records = false;
  RunTrials(cfg, options, [&](const TrialResult& t) {
    bool ok = !t.log.eliminated_at.contains(best);
    for (int k = 1; k <= K; ++k) {
      if (k == best) continue;
      const auto it = t.log.eliminated_at.find(k);
      ok = ok && it != t.log.eliminated_at.end() && it->second <= bound;
      if (it != t.log.eliminated_at.end()) latest = std::max(latest, it->second);
    }
    good += ok;
  });
  const double fraction = static_cast<double>(good) / cfg.trials;
  return {fraction >= 1.0 - cfg.algorithm.delta,
          Format("%.2f of runs within bound %.0f (gap %.4f, latest elimination "
                 "task %lld)",
                 fraction, bound, oracle.gap, latest)};
}

// 4. Regret decays with N.
Outcome RegretDecay() {
  const std::string path = Fixture("sweep_regret.json");
  SweepSpec spec = ParseSweep(ReadJsonFile(path), PERPOLICY_FIXTURE_DIR);
  spec.base["trials"] = 50;
  const fs::path out = WorkDir("regret_sweep");
  RunOptions options;
  options.keep_records = false;
  RunSweep(spec, out.string(), options);

  std::ifstream in(out / "sweep.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  const auto column = [&header](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(header.begin(), header.end(), name) - header.begin());
  };
  const std::size_t n_col = column("N"), r_col = column("regret");
  std::vector<double> xs, ys;
  std::string detail;
  bool positive = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    const double n = std::stod(cells.at(n_col));
    const double regret = std::stod(cells.at(r_col));
    detail += Format("R(%.0f)=%.4g ", n, regret);
    positive = positive && regret > 0.0;
    xs.push_back(std::log(n));
    ys.push_back(regret > 0.0 ? std::log(regret) : 0.0);
  }
  if (xs.size() != 3 || !positive) {
    return {false, detail + "(needs 3 positive regrets for a log-log fit)"};
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / xs.size();
    my += ys[i] / ys.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const bool pass = slope >= -1.1 && slope <= -0.15 && ys.back() < ys.front();
  return {pass, detail + Format("slope %.3f", slope)};
}

struct EscRuns {
  long long k_star = 0;
  int runs = 0;
  int halted = 0;
  int covered = 0;
  int within_cost = 0;
  double worst_cost_ratio = 0.0;
  std::vector<long long> K_values;
};

const EscRuns& EscCampaign() {
  static const EscRuns runs = [] {
    EscRuns r;
    const ExperimentConfig cfg = LoadConfig(Fixture("esc_cape.json"));
    const PolicyGenerator& gen = cfg.policies.generator;
    const OracleValues oracle =
        ComputeOracle(gen.Prefix(cfg.policies.size), *cfg.env, cfg.oracle);
    r.k_star = oracle.argmax.size() == 1 ? oracle.argmax.front() : -1;
    EscConfig esc;
    esc.delta = 0.1;
    esc.epsilons = {0.1};
    esc.task_budget = cfg.N;
    for (int t = 0; t < 200; ++t) {
      RunLog log(false);
      const Environment env = cfg.env->WithSeed(TrialSeed(cfg.seed, t));
      const EscResult result = RunEsc(gen, env, esc, log);
      ++r.runs;
      if (!result.halted) continue;
      ++r.halted;
      r.covered += r.k_star > 0 && r.k_star <= result.K;
      const double bound = EscSampleBound(result.K, gen.Cap(result.K),
                                          result.min_epsilon, esc.delta);
      r.within_cost += result.samples_used <= bound;
      r.worst_cost_ratio =
          std::max(r.worst_cost_ratio, result.samples_used / bound);
      r.K_values.push_back(result.K);
    }
    return r;
  }();
  return runs;
}

// 5. ESC halts and its index bounds the optimal index.
Outcome EscIndexBound() {
  const EscRuns& r = EscCampaign();
  if (r.k_star < 1 || r.k_star > 8) {
    return {false, Format("oracle optimum k*=%lld is not a unique index <= 8",
                          r.k_star)};
  }
  const double halt = static_cast<double>(r.halted) / r.runs;
  const double cover = r.halted ? static_cast<double>(r.covered) / r.halted : 0.0;
  long long k_min = 0, k_max = 0;
  if (!r.K_values.empty()) {
    k_min = *std::min_element(r.K_values.begin(), r.K_values.end());
    k_max = *std::max_element(r.K_values.begin(), r.K_values.end());
  }
  return {halt >= 0.95 && cover >= 0.85,
          Format("k*=%lld, halted %.3f, k* <= K in %.3f of halting runs, K in "
                 "[%lld, %lld]",
                 r.k_star, halt, cover, k_min, k_max)};
}

// 6. Samples drawn by halting ESC runs stay under the sample-cost bound.
Outcome EscSampleCost() {
  const EscRuns& r = EscCampaign();
  return {r.halted > 0 && r.within_cost == r.halted,
          Format("%d of %d halting runs within bound, max samples/bound %.4f",
                 r.within_cost, r.halted, r.worst_cost_ratio)};
}

// 7. The one-sample policy on the eps-fixture earns eps^2 / 2 per sample.
Outcome FdrExample() {
  Outcome o{true, ""};
  for (double eps : {0.05, 0.1, 0.2}) {
    const Environment env = testing::BinaryEnv({-eps, eps}, 1);
    const double ratio = ExactPolicyValue(*testing::OneSamplePolicy(), env).ratio();
    const double err = std::abs(ratio - eps * eps / 2.0);
    o.pass = o.pass && err <= 1e-12 && ratio > eps * eps * eps;
    o.detail += Format("eps=%.2f ratio=%.6g (err %.1e, eps^3=%.6g) ", eps,
                       ratio, err, eps * eps * eps);
  }
  return o;
}

// 8. g3 / ratio grows with the cap.
Outcome G3Divergence() {
  const ExperimentConfig cfg = LoadConfig(Fixture("g3_fixture.json"));
  std::vector<double> q;
  std::string detail;
  for (int k : {16, 32, 64}) {
    const PolicyValue v = ExactPolicyValue(*cfg.policies.generator.At(k), *cfg.env);
    q.push_back(v.g3 / v.ratio());
    detail += Format("K=%d g3/ratio=%.4f ", k, q.back());
  }
  const bool pass = q[0] < q[1] && q[1] < q[2] && q[2] >= 2.0 * q[0];
  return {pass, detail};
}

// 9. g2 approaches the ratio as the sample budget grows.
Outcome G2Convergence() {
  const Environment env = testing::BinaryEnv({-0.2, 0.2}, 1);
  const PolicyPtr policy = testing::OneSamplePolicy();
  const double ratio = ExactPolicyValue(*policy, env).ratio();
  const double small =
      std::abs(ObjectiveG2(*policy, env, 1000, 100, 91).value - ratio);
  const double large =
      std::abs(ObjectiveG2(*policy, env, 100000, 100, 92).value - ratio);
  return {large <= 5.0 * small,
          Format("|g2 - ratio| = %.3g at T=1e3, %.3g at T=1e5", small, large)};
}

// 10. No unbiased estimator of mu^2 from one Bernoulli sample.
Outcome Impossibility() {
  const std::vector<double> mus{0.5, 1.0 / 3.0};
  const ImpossibilityReport report = ImpossibilityCheck(mus);
  const std::vector<double> zero{0.0};
  const ImpossibilityReport at_zero = ImpossibilityCheck(zero);
  const bool pass = !report.consistent && report.residual > 1e-6 &&
                    at_zero.lines.front().forces_f0_zero &&
                    std::abs(at_zero.f0) < 1e-15;
  return {pass, Format("residual %.4g on {1/2, 1/3}; mu=0 gives f(0)=%g",
                       report.residual, at_zero.f0)};
}

// 11. Two runs of a shipped config write identical runs.csv files.
Outcome Determinism() {
  Outcome o{true, ""};
  for (const char* name : {"cape_hoeffding.json", "esc_cape.json"}) {
    const ExperimentConfig cfg = LoadConfig(Fixture(name));
    const fs::path a = WorkDir(std::string("determinism_a_") + name);
    const fs::path b = WorkDir(std::string("determinism_b_") + name);
    RunExperiment(cfg, a.string(), {});
    RunOptions parallel;
    parallel.parallel = 2;
    RunExperiment(cfg, b.string(), parallel);
    const std::string ra = ReadAll(a / "runs.csv");
    const bool same = !ra.empty() && ra == ReadAll(b / "runs.csv");
    o.pass = o.pass && same;
    o.detail += Format("%s %s (%zu bytes) ", name, same ? "identical" : "DIFFER",
                       ra.size());
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace
}  // namespace perpolicy

int main() {
  using perpolicy::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "estimator unbiasedness", 10, perpolicy::EstimatorUnbiased},
      {2, "confidence coverage", 120, perpolicy::Coverage},
      {3, "elimination-time bound", 120, perpolicy::EliminationTime},
      {4, "regret decay", 600, perpolicy::RegretDecay},
      {5, "ESC index bound", 300, perpolicy::EscIndexBound},
      {6, "ESC sample cost", 300, perpolicy::EscSampleCost},
      {7, "FDR example exactness", 1, perpolicy::FdrExample},
      {8, "g3 divergence", 30, perpolicy::G3Divergence},
      {9, "g2 convergence", 60, perpolicy::G2Convergence},
      {10, "impossibility demonstration", 10, perpolicy::Impossibility},
      {11, "determinism", 60, perpolicy::Determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    perpolicy::Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (seconds > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += perpolicy::Format(" over the %.0f s budget", c.budget_seconds);
    }
    failures += !outcome.pass;
    std::printf("[%s] %d: %s: %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL",
                c.id, c.name, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
