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
#include <utility>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"
#include "edgescale/state_space.hpp"

/// Reference computations that share only the model layer with the solver:
/// exhaustive policy search, Erlang-C formulas and Monte-Carlo evaluation
/// of the continuous-time discounted reward.
namespace edgescale::oracle {

inline constexpr std::size_t kMaxTinyStates = 200;
inline constexpr std::uint64_t kMaxPolicies = 1'000'000;

/// Number of deterministic stationary policies (product of feasible action
/// counts), saturating at UINT64_MAX.
std::uint64_t policy_count(const StateSpace& states);

/// Discounted value of a fixed policy in continuous time, solved directly:
/// v = r + diag(gamma / (gamma + alpha)) P v.
std::vector<double> evaluate_policy(const StateSpace& states, const std::vector<Action>& actions);

struct BruteForceResult {
  std::vector<Action> policy;
  std::vector<double> value;
  std::uint64_t policies_evaluated = 0;
};

/// Evaluates every deterministic policy and returns the pointwise-maximal
/// value table with a policy achieving it. Throws ContractViolation when
/// the instance exceeds the tiny-instance bounds, and std::logic_error if
/// no single policy attains the pointwise maximum.
BruteForceResult brute_force_optimal(const StateSpace& states);

struct ErlangC {
  double wait_prob = 0.0;
  double mean_wait = 0.0;
  double mean_sojourn = 0.0;
};

/// M/M/m waiting probability and delays. Throws std::domain_error when
/// lambda >= m * mu.
ErlangC erlang_c_delay(double lambda, double mu, int servers);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

/// Simulates the SMDP under `actions` from `start`: exponential sojourns at
/// the event rate, lump incomes at epochs, holding cost accrued
/// continuously, everything discounted at e^{-alpha t}.
MonteCarloEstimate monte_carlo_value(const StateSpace& states, const std::vector<Action>& actions,
                                     std::size_t start, double horizon, std::size_t paths,
                                     std::uint64_t seed);

/// Named instances small enough for brute force (at most 2^18 policies):
/// the one-node tiny preset, two classes sharing one CPU unit, and one
/// class on two nodes with node-indexed departures.
std::vector<std::pair<std::string, ScalingConfig>> tiny_instances();

}  // namespace edgescale::oracle
