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
#include <string>
#include <string_view>
#include <vector>

namespace edgescale {

/// Whether departure events carry the index of the node they left.
enum class EventMode { Aggregated, NodeIndexed };

std::string_view to_string(EventMode mode);
EventMode event_mode_from_string(std::string_view text);

/// One scaling problem instance: the edge cluster, the function classes
/// with their traffic and costs, and the truncation bounds used to make the
/// state space finite.
///
/// Classes and nodes are 0-based in code and 1-based in every printed form.
struct ScalingConfig {
  std::size_t n_nodes = 0;
  std::size_t n_classes = 0;

  std::vector<int> cpu_demand;        // CPU units per replica, per class
  std::vector<int> capacity;          // CPU units, per node
  std::vector<double> arrival_rate;   // requests per unit time, per class
  std::vector<double> service_rate;   // completions per unit time per replica
  std::vector<double> income;         // lump sum per accepted request

  double unit_cost = 1.0;   // cost per CPU unit per unit time
  double discount = 0.1;    // continuous-time discount rate
  double epsilon = 1e-6;    // value-iteration stopping tolerance

  int max_replicas = 1;     // per-class replica cap for enumeration
  int max_queue = 0;        // per-class queue cap for enumeration

  EventMode event_mode = EventMode::Aggregated;

  int total_capacity() const;
  int max_node_capacity() const;
  double total_arrival_rate() const;

  /// Departure events per class: 1 in aggregated mode, N when node-indexed.
  std::size_t departures_per_class() const {
    return event_mode == EventMode::NodeIndexed ? n_nodes : 1;
  }

  bool operator==(const ScalingConfig&) const = default;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const ScalingConfig& cfg);

/// Copy of `cfg` with every arrival rate multiplied by `factor`.
ScalingConfig scale_arrivals(const ScalingConfig& cfg, double factor);

/// Stable 64-bit fingerprint of every field, printed as 16 hex digits in
/// policy files so a policy can be matched to the instance it solves.
std::uint64_t config_hash(const ScalingConfig& cfg);
std::string config_hash_hex(const ScalingConfig& cfg);

/// `count` values evenly spaced over [lo, hi] (a single value gives lo).
std::vector<double> evenly_spaced(double lo, double hi, std::size_t count);

namespace presets {

/// Small reference network: 3 nodes of 16 CPU units, 5 classes with b_k = k,
/// arrival rates spread over [2, 11] and service rates over [1, 11].
ScalingConfig small_network();

/// Large reference network: 10 nodes of 100 CPU units, 10 classes with
/// b_k = k, arrival rates over [4, 12] and service rates over [10, 100].
ScalingConfig large_network();

/// The small network cut down to `classes` classes on `nodes` nodes with the
/// same spreading rule, small enough for the exact solver.
ScalingConfig small_network_reduced(std::size_t classes, std::size_t nodes);

/// One node of 2 CPU units, one class: 15 enumerated states.
ScalingConfig tiny();

}  // namespace presets

}  // namespace edgescale
