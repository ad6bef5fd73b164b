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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/reporting.hpp"
#include "edgescale/scalers.hpp"
#include "edgescale/simulator.hpp"
#include "edgescale/solver.hpp"

namespace edgescale {

/// Everything one configuration file describes. JSON document:
///
///   {
///     "name": "...",
///     "scaling":    { ScalingConfig fields by name },
///     "simulation": { horizon_events, warmup_events, seed, allocator,
///                     transmission_delay, load_window, replica_averaging,
///                     scaler, threshold, pinned },
///     "sweep":      { lambda_scales, scalers, allocators, seeds,
///                     thresholds, threads },
///     "solver":     { state_limit, max_iterations }
///   }
///
/// Only "scaling" is required.
struct ProjectConfig {
  std::string name = "custom";
  SimConfig simulation;     // simulation.scaling is the instance
  ScalerSpec scaler;        // scaler used by single runs
  SweepSpec sweep;          // base mirrors `simulation`
  std::vector<double> thresholds;  // monitoring thresholds for comparisons
  std::uint64_t state_limit = kDefaultStateLimit;
  std::size_t max_iterations = 100'000;

  const ScalingConfig& scaling() const { return simulation.scaling; }
};

/// `key=value` with a dotted key path; the value is parsed as JSON when it
/// is valid JSON and taken as a string otherwise.
using Override = std::pair<std::string, std::string>;

Override parse_override(std::string_view text);

/// Throws ConfigError on unknown keys, type errors or invariant violations.
ProjectConfig parse_project_config(std::string_view json_text, const std::vector<Override>& overrides = {});
ProjectConfig load_project_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Value at a dotted key path after overrides, as compact JSON text.
std::string config_value(std::string_view json_text, const std::vector<Override>& overrides,
                         const std::string& dotted_key);

std::string to_json(const ScalingConfig& cfg);
ScalingConfig scaling_config_from_json(std::string_view json_text);

/// "smdp", "mnt@<threshold>", "rf", "pin@<n1>,<n2>,...".
ScalerSpec parse_scaler_spec(std::string_view text);

}  // namespace edgescale
