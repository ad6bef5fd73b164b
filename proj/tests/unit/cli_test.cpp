// Copyright 2026 The edgescale Authors
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

#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgescale/commands.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace edgescale {
namespace {

namespace fs = std::filesystem;
using testing::config_path;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("edgescale_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::size_t policy_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t rows = 0;
  bool body = false;
  while (std::getline(in, line)) {
    if (body) ++rows;
    if (line.rfind("states ", 0) == 0) body = true;
  }
  return rows;
}

TEST_F(CliTest, SolveTinyWritesFifteenEntries) {
  const auto r = invoke({"solve", "--config", config_path("tiny.json"), "--out", path("p.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(policy_rows(slurp(path("p.txt"))), 15u);
  EXPECT_NE(r.out.find("states 15"), std::string::npos);
  EXPECT_NE(r.out.find("rho 4"), std::string::npos);
  EXPECT_NE(r.out.find("iterations "), std::string::npos);
}

TEST_F(CliTest, SolveTwiceIsIdentical) {
  ASSERT_EQ(invoke({"solve", "-c", config_path("tiny.json"), "-o", path("a.txt")}).code, 0);
  ASSERT_EQ(invoke({"solve", "-c", config_path("tiny.json"), "-o", path("b.txt")}).code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
}

TEST_F(CliTest, HalvedEpsilonStillMeetsStoppingRule) {
  const auto r = invoke({"solve", "-c", config_path("tiny.json"), "-o", path("p.txt"), "--set",
                         "scaling.epsilon=5e-7"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(path("p.txt")));
  std::string key;
  double residual = 1.0;
  while (in >> key) {
    if (key == "final_residual") {
      in >> residual;
      break;
    }
  }
  EXPECT_LE(residual, 5e-7);
}

TEST_F(CliTest, SolveRefusesLargeNetwork) {
  const auto r = invoke({"solve", "-c", config_path("large_network.json"), "-o", path("p.txt")});
  EXPECT_EQ(r.code, cli::kCapacityRefusal);
  EXPECT_NE(r.err.find("state space"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("p.txt")));
}

TEST_F(CliTest, SimulateEchoesOverrides) {
  const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--horizon", "2000", "--threshold", "0.07",
                         "-o", path("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_EQ(doc["metadata"]["threshold"], 0.07);
  EXPECT_EQ(doc["metadata"]["horizon_events"], 2000);
  EXPECT_EQ(doc["metrics"]["events"], 2000);
}

TEST_F(CliTest, SimulateSetOverrideIsReported) {
  const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--set", "simulation.horizon_events=1500",
                         "-o", path("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_EQ(doc["metadata"]["set.simulation.horizon_events"], "1500");
  EXPECT_EQ(doc["metrics"]["events"], 1500);
}

TEST_F(CliTest, SimulateSeedControlsResults) {
  auto metrics = [&](const std::string& seed, const std::string& name) {
    const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--horizon", "3000", "--seed", seed, "-o",
                           path(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    return nlohmann::json::parse(slurp(path(name)))["metrics"];
  };
  EXPECT_EQ(metrics("3", "a.json"), metrics("3", "b.json"));
  EXPECT_NE(metrics("3", "a.json"), metrics("4", "c.json"));
}

TEST_F(CliTest, SimulateSmdpNeedsPolicy) {
  const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--scaler", "smdp"});
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_NE(r.err.find("edgescale solve"), std::string::npos);
}

TEST_F(CliTest, SimulateSmdpWithPolicy) {
  ASSERT_EQ(invoke({"solve", "-c", config_path("tiny.json"), "-o", path("p.txt")}).code, 0);
  const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--scaler", "smdp", "--policy",
                         path("p.txt"), "--horizon", "2000", "-o", path("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("m.json")))["metadata"]["scaler"], "smdp");
}

TEST_F(CliTest, PolicyForAnotherConfigIsRejected) {
  ASSERT_EQ(invoke({"solve", "-c", config_path("tiny.json"), "-o", path("p.txt")}).code, 0);
  const auto r = invoke({"simulate", "-c", config_path("tiny.json"), "--set", "scaling.income.0=2", "--scaler",
                         "smdp", "--policy", path("p.txt"), "--horizon", "100"});
  EXPECT_EQ(r.code, cli::kUsageError);
}

TEST_F(CliTest, StatespaceTiny) {
  const auto r = invoke({"statespace", "-c", config_path("tiny.json"), "--gamma", "0.9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("product_formula 8\n"), std::string::npos);
  EXPECT_NE(r.out.find("exact_enumeration 15\n"), std::string::npos);
  EXPECT_NE(r.out.find("space_bound 8\n"), std::string::npos);
  EXPECT_NE(r.out.find("time_bound 184.2"), std::string::npos);
  EXPECT_NE(r.out.find("note:"), std::string::npos);
}

TEST_F(CliTest, StatespaceProductFormulaWithOverrides) {
  const auto r = invoke({"statespace", "-c", config_path("small_k2.json"), "--set", "scaling.max_replicas=3",
                         "--set", "scaling.max_queue=3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("product_formula 486\n"), std::string::npos);
}

TEST_F(CliTest, StatespaceLargeNetworkReportsOverflow) {
  const auto r = invoke({"statespace", "-c", config_path("large_network.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("more than 2^64"), std::string::npos);
}

TEST_F(CliTest, CompareLargeNetworkSkipsSmdp) {
  const auto r = invoke({"compare", "-c", config_path("large_network.json"), "--horizon", "1000", "--set",
                         "sweep.seeds=[1]", "--set", "sweep.lambda_scales=[0.5,1.0]", "-o", path("cmp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("state space too large"), std::string::npos);
  const std::string skipped = slurp(path("cmp_skipped.csv"));
  EXPECT_NE(skipped.find("smdp"), std::string::npos);
  const std::string rows = slurp(path("cmp.csv"));
  EXPECT_EQ(rows.find(",smdp,"), std::string::npos);
  // rf under both allocators at both points
  std::size_t rf = 0;
  for (std::size_t pos = rows.find(",rf,"); pos != std::string::npos; pos = rows.find(",rf,", pos + 1)) ++rf;
  EXPECT_EQ(rf, 4u);
}

TEST_F(CliTest, CompareReducedSmallNetworkIncludesSmdp) {
  const auto r = invoke({"compare", "-c", config_path("tiny.json"), "--horizon", "1000", "--set",
                         "sweep.seeds=[1]", "-o", path("cmp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(path("cmp.csv")).find(",smdp,"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("cmp_skipped.csv")));
}

TEST_F(CliTest, SweepIsByteIdenticalOnRerun) {
  for (const char* stem : {"a", "b"}) {
    ASSERT_EQ(invoke({"sweep", "-c", config_path("tiny.json"), "--horizon", "1000", "-o", path(stem)}).code, 0);
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a_agg.csv")), slurp(path("b_agg.csv")));
}

TEST_F(CliTest, VerifyPasses) {
  const auto r = invoke({"verify", "--paths", "2000"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"bogus"}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"solve", "-c", config_path("tiny.json")}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"solve", "-c", "/nonexistent.json", "-o", path("p")}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"simulate", "-c", config_path("tiny.json"), "--set", "nonsense"}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"simulate", "-c", config_path("tiny.json"), "--allocator", "best"}).code, cli::kUsageError);
}

TEST_F(CliTest, HelpSucceeds) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

}  // namespace
}  // namespace edgescale
