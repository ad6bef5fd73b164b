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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/scalers.hpp"
#include "edgescale/simulator.hpp"
#include "edgescale/state_space.hpp"

namespace edgescale {

/// Experiment grid: scalers x allocators x arrival-rate points x seeds.
/// Each arrival-rate point multiplies every class rate of the base
/// scenario by a scale factor; rows report the mean per-class rate.
struct SweepSpec {
  std::string scenario = "custom";
  SimConfig base;  // scaling instance, horizon, warmup, delays
  std::vector<double> lambda_scales{1.0};
  std::vector<ScalerSpec> scalers;
  std::vector<Allocator> allocators{Allocator::FirstFit};
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t state_limit = kDefaultStateLimit;
  unsigned threads = 1;
};

void validate(const SweepSpec& spec);

struct SweepRow {
  std::string scenario;
  std::string scaler;
  std::string allocator;
  std::optional<double> threshold;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> avg_delay;
  double avg_replicas = 0.0;
  double throughput = 0.0;
  double total_reward = 0.0;

  bool operator==(const SweepRow&) const = default;
};

struct SkippedCell {
  std::string scenario;
  std::string scaler;
  std::string allocator;
  std::optional<double> threshold;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SkippedCell> skipped;
};

/// Runs the full grid. SMDP policies are solved once per arrival-rate point
/// before any simulation; cells whose instance exceeds the state limit, or
/// whose run throws, are reported in `skipped` instead of aborting.
/// Row order is (lambda point, scaler, allocator, seed) regardless of
/// thread count.
SweepResult run_sweep(const SweepSpec& spec);

/// Mean and 95% half-width of one metric over the seeds of a cell.
struct Estimate {
  double mean = 0.0;
  std::optional<double> ci95;  // absent for a single sample
};

/// Student-t based: t(0.975, n-1) * s / sqrt(n).
Estimate estimate(const std::vector<double>& samples);

struct AggregateRow {
  std::string scenario;
  std::string scaler;
  std::string allocator;
  std::optional<double> threshold;
  double lambda = 0.0;
  std::size_t seeds = 0;
  std::optional<Estimate> avg_delay;  // absent when no seed had completions
  Estimate avg_replicas;
  Estimate throughput;
  Estimate total_reward;
};

/// Groups rows by (scenario, scaler, allocator, threshold, lambda) in
/// first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows);

inline constexpr const char* kRowHeader =
    "scenario,scaler,allocator,threshold,lambda,seed,avg_delay,avg_replicas,throughput,total_reward";

void write_rows(std::ostream& out, const std::vector<SweepRow>& rows);
void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows);
std::vector<SweepRow> parse_rows(std::istream& in);

void write_skipped(std::ostream& out, const std::vector<SkippedCell>& cells);

/// Extra key/value pairs recorded in the metadata sidecar.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Text stating how the `lambda` column is derived.
inline constexpr const char* kLambdaConvention =
    "lambda = mean per-class arrival rate (sum_k lambda_k / K) at the sweep point";

struct EmittedFiles {
  std::string rows;
  std::string aggregate;
  std::string metadata;
  std::optional<std::string> skipped;
};

/// Writes `<stem>.csv`, `<stem>_agg.csv`, `<stem>.meta.json` (lambda
/// convention plus `metadata`) and, when cells were skipped,
/// `<stem>_skipped.csv`. Throws IoError naming the path on failure.
EmittedFiles emit(const SweepResult& result, const std::string& stem, const Metadata& metadata = {});

}  // namespace edgescale
