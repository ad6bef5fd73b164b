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
#include <optional>
#include <string>
#include <vector>

#include "edgescale/config.hpp"

namespace edgescale {

/// The event that opened a decision epoch.
struct Event {
  enum class Kind : unsigned char { Arrival, Departure };

  Kind kind = Kind::Arrival;
  std::size_t cls = 0;
  std::optional<std::size_t> node;  // only for node-indexed departures

  static Event arrival(std::size_t cls) { return {Kind::Arrival, cls, std::nullopt}; }
  static Event departure(std::size_t cls, std::optional<std::size_t> node = std::nullopt) {
    return {Kind::Departure, cls, node};
  }

  bool is_arrival() const { return kind == Kind::Arrival; }
  bool is_departure() const { return kind == Kind::Departure; }

  bool operator==(const Event&) const = default;
};

/// Printed as A<k> or D<k>[@<n>] with 1-based indices.
std::string to_string(const Event& e);
Event event_from_string(const std::string& text);

enum class Action : signed char { ScaleDown = -1, Hold = 0, ScaleUp = 1 };

std::string to_string(Action a);
Action action_from_string(const std::string& text);

/// Preference on exact value ties: Hold, then ScaleUp, then ScaleDown.
constexpr int tie_break_rank(Action a) {
  switch (a) {
    case Action::Hold: return 0;
    case Action::ScaleUp: return 1;
    case Action::ScaleDown: return 2;
  }
  return 3;
}

/// (replicas per class, waiting requests per class, triggering event).
struct SystemState {
  std::vector<int> replicas;
  std::vector<int> queue;
  Event event;

  bool operator==(const SystemState&) const = default;
};

std::string to_string(const SystemState& s);

/// Replica and queue vectors after an action, before the next event.
struct Configuration {
  std::vector<int> replicas;
  std::vector<int> queue;

  bool operator==(const Configuration&) const = default;
};

struct Transition {
  SystemState next;
  double prob = 0.0;
};

/// Compact list of at most two actions, in tie-break order.
class ActionSet {
 public:
  void insert(Action a);
  bool contains(Action a) const;
  std::size_t size() const { return size_; }
  Action operator[](std::size_t i) const { return items_[i]; }
  const Action* begin() const { return items_; }
  const Action* end() const { return items_ + size_; }

 private:
  Action items_[3] = {};
  std::size_t size_ = 0;
};

/// Throws ContractViolation unless `s` satisfies every state invariant
/// under `cfg` (bounds, aggregate capacity, departures need a replica).
void check_state(const SystemState& s, const ScalingConfig& cfg);
bool is_valid_state(const SystemState& s, const ScalingConfig& cfg);

/// Hold is always present. ScaleUp on arrivals when the class is below its
/// replica cap and one more replica fits the aggregate capacity; ScaleDown
/// on departures when the class has a replica.
ActionSet feasible_actions(const SystemState& s, const ScalingConfig& cfg);

Configuration apply_action(const SystemState& s, Action a, const ScalingConfig& cfg);

/// Total rate of the next event after taking `a` in `s`.
double event_rate(const SystemState& s, Action a, const ScalingConfig& cfg);

/// Successor distribution. Node-indexed departures split their mass evenly
/// over the nodes.
std::vector<Transition> transitions(const SystemState& s, Action a, const ScalingConfig& cfg);

/// Cost rate held until the next epoch: CPU cost of replicas plus the
/// Little's-law waiting time of queued requests.
double holding_cost(const std::vector<int>& replicas, const std::vector<int>& queue,
                    const ScalingConfig& cfg);

/// Lump income on arrivals minus the discounted holding cost over the
/// exponential sojourn: w - c / (alpha + gamma).
double reward(const SystemState& s, Action a, const ScalingConfig& cfg);

/// Lump income component alone.
double lump_income(const SystemState& s, Action a, const ScalingConfig& cfg);

}  // namespace edgescale
