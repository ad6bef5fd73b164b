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
#include <iosfwd>
#include <string>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"
#include "edgescale/solver.hpp"
#include "edgescale/state_space.hpp"

namespace edgescale {

struct PolicyHeader {
  std::string config_hash;
  double rho = 0.0;
  double lambda_bar = 0.0;
  double epsilon = 0.0;
  std::size_t iterations = 0;
  double final_residual = 0.0;
};

/// A solved policy bound to its enumerated state space, ready for O(1)
/// online lookup.
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(StateSpace states, std::vector<Action> actions, std::vector<double> values,
              PolicyHeader header);

  static PolicyTable from_solution(const Solution& solution);

  const StateSpace& states() const { return states_; }
  const ScalingConfig& config() const { return states_.config(); }
  const PolicyHeader& header() const { return header_; }
  const std::vector<Action>& actions() const { return actions_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return actions_.size(); }

  /// Throws ContractViolation when `s` is not an enumerated state.
  Action lookup(const SystemState& s) const;

 private:
  StateSpace states_;
  std::vector<Action> actions_;
  std::vector<double> values_;
  PolicyHeader header_;
};

/// Text format:
///
///   # edgescale policy v1
///   config_hash <16 hex>
///   rho <g>
///   lambda_bar <g>
///   epsilon <g>
///   iterations <n>
///   final_residual <g>
///   states <count>
///   <replicas csv> <queue csv> <event> <action> <value>
///   ...
///
/// Rows follow enumeration order; reals use 17 significant digits.
void write_policy(std::ostream& out, const PolicyTable& table);
void write_policy_file(const std::string& path, const PolicyTable& table);

/// Reads a policy for `cfg`. Throws ConfigError when the hash, the state
/// count or any row disagrees with the enumeration of `cfg`.
PolicyTable read_policy(std::istream& in, const ScalingConfig& cfg);
PolicyTable read_policy_file(const std::string& path, const ScalingConfig& cfg);

}  // namespace edgescale
