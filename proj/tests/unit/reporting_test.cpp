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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgescale/errors.hpp"
#include "edgescale/reporting.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace edgescale {
namespace {

namespace fs = std::filesystem;

SweepSpec small_grid() {
  SweepSpec spec;
  spec.scenario = "tiny";
  spec.base.scaling = presets::tiny();
  spec.base.horizon_events = 2'000;
  spec.lambda_scales = {0.5, 0.75, 1.0};
  spec.scalers = {ScalerSpec{ScalerKind::Monitoring, 0.1, {}}, ScalerSpec{ScalerKind::Random, {}, {}}};
  spec.seeds = {1, 2};
  return spec;
}

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("edgescale_reporting_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string stem(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

TEST(RunSweep, RowCountIsGridProduct) {
  const auto result = run_sweep(small_grid());
  EXPECT_EQ(result.rows.size(), 12u);
  EXPECT_TRUE(result.skipped.empty());
}

TEST(RunSweep, RowOrderIsPointScalerAllocatorSeed) {
  const auto rows = run_sweep(small_grid()).rows;
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].scaler, "mnt");
  EXPECT_EQ(rows[0].threshold, std::optional<double>(0.1));
  EXPECT_EQ(rows[0].seed, 1u);
  EXPECT_EQ(rows[1].seed, 2u);
  EXPECT_EQ(rows[2].scaler, "rf");
  EXPECT_FALSE(rows[2].threshold.has_value());
  EXPECT_DOUBLE_EQ(rows[0].lambda, 1.0);
  EXPECT_DOUBLE_EQ(rows[4].lambda, 1.5);
  EXPECT_DOUBLE_EQ(rows[8].lambda, 2.0);
}

TEST(RunSweep, RepeatsExactly) {
  EXPECT_EQ(run_sweep(small_grid()).rows, run_sweep(small_grid()).rows);
}

TEST(RunSweep, ThreadCountDoesNotChangeRows) {
  auto spec = small_grid();
  const auto serial = run_sweep(spec).rows;
  spec.threads = 3;
  EXPECT_EQ(run_sweep(spec).rows, serial);
}

TEST(RunSweep, OversizedSmdpCellsAreSkippedWithReason) {
  auto spec = small_grid();
  spec.scalers.push_back(ScalerSpec{ScalerKind::Smdp, {}, {}});
  spec.state_limit = 5;
  const auto result = run_sweep(spec);
  EXPECT_EQ(result.rows.size(), 12u);
  ASSERT_EQ(result.skipped.size(), 6u);
  for (const auto& cell : result.skipped) {
    EXPECT_EQ(cell.scaler, "smdp");
    EXPECT_NE(cell.reason.find("state space too large"), std::string::npos);
  }
}

TEST(RunSweep, SmdpCellsRunWhenTractable) {
  auto spec = small_grid();
  spec.scalers = {ScalerSpec{ScalerKind::Smdp, {}, {}}};
  const auto result = run_sweep(spec);
  EXPECT_EQ(result.rows.size(), 6u);
  EXPECT_TRUE(result.skipped.empty());
}

TEST(RunSweep, InvalidSpecIsRejected) {
  auto spec = small_grid();
  spec.seeds.clear();
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec = small_grid();
  spec.scalers.clear();
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec = small_grid();
  spec.scenario = "a,b";
  EXPECT_THROW(run_sweep(spec), ConfigError);
}

TEST(Estimate, MeanOfThree) {
  const auto e = estimate({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.0);
  ASSERT_TRUE(e.ci95.has_value());
  // t(0.975, 2) = 4.302653, sd = 1
  EXPECT_NEAR(*e.ci95, 4.302652729749464 / std::sqrt(3.0), 1e-9);
}

TEST(Estimate, SingleSampleHasNoHalfWidth) {
  const auto e = estimate({4.5});
  EXPECT_DOUBLE_EQ(e.mean, 4.5);
  EXPECT_FALSE(e.ci95.has_value());
}

TEST(Estimate, IdenticalSamplesHaveZeroHalfWidth) {
  EXPECT_EQ(estimate({0.7, 0.7}).ci95, std::optional<double>(0.0));
}

TEST(Aggregate, GroupsBySeedlessKey) {
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : {1, 2, 3}) {
    rows.push_back({"s", "mnt", "ffa", 0.1, 2.0, seed, static_cast<double>(seed), 1.0, 2.0, -1.0});
  }
  rows.push_back({"s", "rf", "ffa", std::nullopt, 2.0, 1, std::nullopt, 1.0, 0.0, 0.0});
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].seeds, 3u);
  ASSERT_TRUE(agg[0].avg_delay.has_value());
  EXPECT_DOUBLE_EQ(agg[0].avg_delay->mean, 2.0);
  EXPECT_EQ(agg[0].avg_replicas.ci95, std::optional<double>(0.0));
  EXPECT_FALSE(agg[1].avg_delay.has_value());
  EXPECT_FALSE(agg[1].throughput.ci95.has_value());
}

TEST(WriteRows, EmptyIsHeaderOnly) {
  std::ostringstream os;
  write_rows(os, {});
  EXPECT_EQ(os.str(), std::string(kRowHeader) + "\n");
}

TEST(WriteRows, RoundTripsExactly) {
  const auto rows = run_sweep(small_grid()).rows;
  std::ostringstream os;
  write_rows(os, rows);
  std::istringstream in(os.str());
  EXPECT_EQ(parse_rows(in), rows);
}

TEST(WriteRows, AbsentFieldsStayAbsent) {
  const std::vector<SweepRow> rows{{"s", "rf", "rfa", std::nullopt, 0.25, 9, std::nullopt, 0.5, 0.0, -3.0}};
  std::ostringstream os;
  write_rows(os, rows);
  std::istringstream in(os.str());
  EXPECT_EQ(parse_rows(in), rows);
}

TEST(ParseRows, RejectsForeignHeader) {
  std::istringstream in("a,b,c\n");
  EXPECT_THROW(parse_rows(in), ConfigError);
}

TEST(Emit, WritesRowsAggregateAndMetadata) {
  TempDir dir;
  const auto result = run_sweep(small_grid());
  const auto files = emit(result, dir.stem("grid"), {{"note", "x"}});
  EXPECT_EQ(line_count(files.rows), 13u);
  EXPECT_EQ(line_count(files.aggregate), 1u + 6u);
  EXPECT_FALSE(files.skipped.has_value());
  const auto header = slurp(files.aggregate).substr(0, slurp(files.aggregate).find('\n'));
  EXPECT_NE(header.find("avg_delay_mean,avg_delay_ci95"), std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(files.metadata));
  EXPECT_EQ(meta["lambda_axis"], kLambdaConvention);
  EXPECT_EQ(meta["rows"], 12);
  EXPECT_EQ(meta["note"], "x");
}

TEST(Emit, EmptyResultWritesHeaders) {
  TempDir dir;
  const auto files = emit(SweepResult{}, dir.stem("empty"));
  EXPECT_EQ(line_count(files.rows), 1u);
  EXPECT_EQ(line_count(files.aggregate), 1u);
}

TEST(Emit, SkippedCellsGetTheirOwnFile) {
  TempDir dir;
  auto spec = small_grid();
  spec.scalers = {ScalerSpec{ScalerKind::Smdp, {}, {}}};
  spec.state_limit = 5;
  const auto files = emit(run_sweep(spec), dir.stem("skips"));
  ASSERT_TRUE(files.skipped.has_value());
  EXPECT_EQ(line_count(*files.skipped), 1u + 6u);
  EXPECT_EQ(line_count(files.rows), 1u);
}

TEST(Emit, IsByteIdenticalAcrossRuns) {
  TempDir dir;
  const auto a = emit(run_sweep(small_grid()), dir.stem("a"));
  const auto b = emit(run_sweep(small_grid()), dir.stem("b"));
  EXPECT_EQ(slurp(a.rows), slurp(b.rows));
  EXPECT_EQ(slurp(a.aggregate), slurp(b.aggregate));
  EXPECT_EQ(slurp(a.metadata), slurp(b.metadata));
}

TEST(Emit, UnwritablePathNamesThePath) {
  try {
    emit(SweepResult{}, "/nonexistent/dir/out");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out"), std::string::npos);
  }
}

}  // namespace
}  // namespace edgescale
