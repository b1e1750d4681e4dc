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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout and stderr together.
Result Cli(const std::string& args) {
  const std::string cmd = std::string(PERPOLICY_CLI_PATH) + " " + args + " 2>&1";
  Result result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string Fixture(const std::string& name) {
  return std::string(PERPOLICY_FIXTURE_DIR) + "/" + name;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("perpolicy_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(CliTest, ValidateAcceptsFixture) {
  const Result r = Cli("validate " + Fixture("cape_gap.json"));
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(CliTest, ValidateNamesBadField) {
  const fs::path dir = TempDir("validate");
  nlohmann::json doc = nlohmann::json::parse(ReadAll(Fixture("cape_gap.json")));
  doc["algorithm"]["delta"] = 1.5;
  std::ofstream(dir / "bad.json") << doc.dump();
  const Result r = Cli("validate --config " + (dir / "bad.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("algorithm.delta"), std::string::npos) << r.out;
}

TEST(CliTest, OraclePrintsValues) {
  const Result r = Cli("oracle " + Fixture("fdr_eps0.2.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["policies"][0]["reward"].get<double>(), 0.02, 1e-15);
  EXPECT_EQ(doc["policies"][0]["method"], "exact");
  EXPECT_EQ(doc["gap"], "inf");
}

TEST(CliTest, RunIsByteReproducible) {
  const fs::path a = TempDir("run_a"), b = TempDir("run_b");
  ASSERT_EQ(Cli("run " + Fixture("cape_hoeffding.json") + " --quiet --out " +
                a.string()).code, 0);
  ASSERT_EQ(Cli("run " + Fixture("cape_hoeffding.json") + " --quiet --parallel 2 --out " +
                b.string()).code, 0);
  const std::string runs = ReadAll(a / "runs.csv");
  EXPECT_FALSE(runs.empty());
  EXPECT_EQ(runs, ReadAll(b / "runs.csv"));
  EXPECT_EQ(ReadAll(a / "summary.json"), ReadAll(b / "summary.json"));
}

TEST(CliTest, Impossibility) {
  const Result ok = Cli("impossibility --mu 0.5,0.3333333333333333");
  ASSERT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(nlohmann::json::parse(ok.out)["consistent"], false);
  EXPECT_EQ(Cli("impossibility --mu 0.5").code, 1);
  EXPECT_EQ(Cli("impossibility --mu 0.5,abc").code, 1);
  EXPECT_EQ(Cli("impossibility --mu 0.5,2").code, 1);
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli("").code, 1);
  EXPECT_EQ(Cli("run").code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
  EXPECT_EQ(Cli("run " + Fixture("missing.json")).code, 1);
}

}  // namespace
