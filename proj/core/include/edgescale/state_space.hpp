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
#include <optional>
#include <unordered_map>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"

namespace edgescale {

inline constexpr std::uint64_t kDefaultStateLimit = 2'000'000;

/// Which count `state_space_size` reports.
enum class CountFormula {
  ProductFormula,    // M^K * Qm^K * K * (N + 1), ignores capacity
  ExactEnumeration,  // number of states `enumerate_states` yields
};

/// Enumerated, indexed set of valid states.
///
/// States are packed into mixed-radix codes whose digit order (replicas,
/// then queues, then event) makes ascending code order the lexicographic
/// order over (replicas, queue, event). Arrival events sort before
/// departures, departures by class then node.
class StateSpace {
 public:
  StateSpace() = default;

  const ScalingConfig& config() const { return cfg_; }
  std::size_t size() const { return codes_.size(); }

  SystemState state(std::size_t index) const;

  /// Index of `s`, or nullopt when `s` is not an enumerated state.
  std::optional<std::size_t> find(const SystemState& s) const;

  /// Index of `s`; throws ContractViolation when absent.
  std::size_t index_of(const SystemState& s) const;

  /// Index of the empty system with an arrival of class 1.
  std::size_t initial_index() const;

  std::uint64_t code(std::size_t index) const { return codes_[index]; }

  /// Event id used in codes: arrivals 0..K-1, then departures.
  std::size_t event_id(const Event& e) const;
  Event event_from_id(std::size_t id) const;
  std::size_t event_count() const { return n_events_; }

  bool operator==(const StateSpace& other) const { return codes_ == other.codes_ && cfg_ == other.cfg_; }

 private:
  friend StateSpace enumerate_states(const ScalingConfig& cfg, std::uint64_t limit);

  std::uint64_t encode(const SystemState& s) const;

  ScalingConfig cfg_;
  std::size_t n_events_ = 0;
  std::vector<std::uint64_t> codes_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

/// Deterministic, duplicate-free enumeration of all valid states. Throws
/// StateSpaceTooLarge when the exact count exceeds `limit`.
StateSpace enumerate_states(const ScalingConfig& cfg, std::uint64_t limit = kDefaultStateLimit);

/// Throws OverflowError when the count does not fit in 64 bits.
std::uint64_t state_space_size(const ScalingConfig& cfg, CountFormula formula);

}  // namespace edgescale
