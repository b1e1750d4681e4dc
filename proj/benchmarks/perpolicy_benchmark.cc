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

#include <vector>

#include <benchmark/benchmark.h>

#include "perpolicy/cape.h"
#include "perpolicy/environment.h"
#include "perpolicy/oracle.h"
#include "perpolicy/policy.h"
#include "perpolicy/run_log.h"

namespace perpolicy {
namespace {

Environment ThreePointEnv() {
  return Environment(ValueDistribution::UniformFinite({-1.0, 0.0, 1.0}),
                     SampleModel::BinaryPm1(), 1);
}

void BM_ExactOracleSumDp(benchmark::State& state) {
  const Environment env = ThreePointEnv();
  const PolicyPtr policy =
      CappedHoeffdingFamily(0.54, 64, 1000, 0.1).Make(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExactPolicyValue(*policy, env));
  }
}
BENCHMARK(BM_ExactOracleSumDp)->Arg(16)->Arg(64)->Arg(256);

void BM_ExactOracleEnumeration(benchmark::State& state) {
  const Environment env = ThreePointEnv();
  const PolicyPtr policy =
      CappedHoeffdingFamily(0.54, 64, 1000, 0.1).Make(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(EnumeratePolicyValue(*policy, env));
  }
}
BENCHMARK(BM_ExactOracleEnumeration)->Arg(8)->Arg(16);

void BM_HoeffdingDuration(benchmark::State& state) {
  const Environment env(ValueDistribution::UniformFinite({-0.3, 0.5}),
                        SampleModel::BinaryPm1(), 3);
  const CappedHoeffdingFamily family(0.45, 64, 1000, 0.1);
  long long index = 0;
  for (auto _ : state) {
    Task task = env.NewTask(index++);
    benchmark::DoNotOptimize(HoeffdingDuration(
        static_cast<int>(state.range(0)), 0.45, 64, 1000, 0.1, task.stream()));
  }
}
BENCHMARK(BM_HoeffdingDuration)->Arg(8)->Arg(64);

void BM_CapeRun(benchmark::State& state) {
  const Environment env(ValueDistribution::UniformFinite({-0.9, 0.9}),
                        SampleModel::BinaryPm1(), 5);
  const PolicyClass policies = CappedHoeffdingFamily(0.45, 8, 1000, 0.1).Class();
  const CapeConfig config{state.range(0), 0.1, 0};
  for (auto _ : state) {
    RunLog log(false);
    benchmark::DoNotOptimize(RunCape(policies, env, config, log));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CapeRun)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace perpolicy

BENCHMARK_MAIN();
