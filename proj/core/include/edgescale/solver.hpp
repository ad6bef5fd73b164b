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
#include <span>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"
#include "edgescale/state_space.hpp"

namespace edgescale {

/// The discrete-time equivalent of the SMDP at the common event rate rho.
///
/// Rows are stored in CSR form: state s owns choices
/// [choice_offsets[s], choice_offsets[s+1]), each choice owns successor
/// entries [first, last) of `successor` / `prob`. Choices of a state are
/// ordered by tie-break preference.
struct UniformizedModel {
  struct Choice {
    Action action = Action::Hold;
    double reward = 0.0;       // uniformized reward
    double event_rate = 0.0;   // rate of the underlying SMDP sojourn
    std::uint32_t first = 0;
    std::uint32_t last = 0;
  };

  double rho = 0.0;
  double discount = 0.0;
  double lambda_bar = 0.0;

  std::vector<std::uint32_t> choice_offsets;
  std::vector<Choice> choices;
  std::vector<std::uint32_t> successor;
  std::vector<double> prob;

  std::size_t state_count() const { return choice_offsets.empty() ? 0 : choice_offsets.size() - 1; }

  std::span<const Choice> choices_of(std::size_t s) const {
    return {choices.data() + choice_offsets[s], choices.data() + choice_offsets[s + 1]};
  }

  /// Index into `choices` for (s, a), or nullopt when `a` is infeasible.
  std::optional<std::size_t> choice_index(std::size_t s, Action a) const;

  /// Q-value r + lambda_bar * sum p v of one choice.
  double q_value(const Choice& c, std::span<const double> value) const;
};

/// rho = sum_k lambda_k + sum_n sum_k C_n mu_k.
double uniformization_rate(const ScalingConfig& cfg);

/// Throws std::logic_error if any event rate exceeds rho.
UniformizedModel uniformize(const StateSpace& states);

struct Policy {
  std::vector<Action> action;
  std::vector<double> value;
  std::vector<double> residual_history;
  std::size_t iterations = 0;

  /// Constant-time lookup by state index.
  Action operator[](std::size_t s) const { return action[s]; }
};

struct ValueIterationOptions {
  std::size_t max_iterations = 100'000;
  /// Worker threads per sweep. States are split in contiguous blocks, each
  /// state's update reads only the previous table, so results do not
  /// depend on the thread count.
  unsigned threads = 1;
  /// Evaluate actions in reverse storage order (results must not change).
  bool reverse_action_order = false;
};

/// Jacobi value iteration from v = 0 until the sup-norm step is at most
/// `epsilon`; the policy is the greedy argmax on the final table with
/// Hold > ScaleUp > ScaleDown on exact ties. Throws NonConvergence when
/// the iteration cap is reached.
Policy value_iteration(const UniformizedModel& model, double epsilon,
                       const ValueIterationOptions& options = {});

/// Greedy policy with respect to `value` under the tie-break order.
std::vector<Action> greedy_policy(const UniformizedModel& model, std::span<const double> value,
                                  bool reverse_action_order = false);

/// Sparse row-stochastic matrix.
struct MarkovChain {
  std::vector<std::uint32_t> row_offsets;
  std::vector<std::uint32_t> col;
  std::vector<double> prob;

  std::size_t size() const { return row_offsets.empty() ? 0 : row_offsets.size() - 1; }

  static MarkovChain from_dense(const std::vector<std::vector<double>>& p);
};

/// Transition matrix of the uniformized chain under `actions`.
MarkovChain induced_chain(const UniformizedModel& model, std::span<const Action> actions);

struct StationaryDistribution {
  std::vector<double> pi;
};

enum class StationaryMethod { Auto, Power, Direct };

struct StationaryOptions {
  std::size_t initial_state = 0;
  /// Starting vector for power iteration; defaults to the indicator of
  /// `initial_state`.
  std::optional<std::vector<double>> initial_vector;
  StationaryMethod method = StationaryMethod::Auto;
  double tolerance = 1e-10;
  std::size_t max_iterations = 2'000'000;
  std::size_t direct_limit = 5'000;
};

/// Long-run distribution of the chain started from `initial_state`.
///
/// Direct: the unique closed class reachable from the initial state is
/// solved as a dense linear system. Power: iterates the lazy chain
/// (I + P) / 2, which has the same stationary vectors but no periodicity.
/// Auto uses Direct below `direct_limit` states when exactly one closed
/// class is reachable, Power otherwise.
StationaryDistribution stationary_distribution(const MarkovChain& chain,
                                               const StationaryOptions& options = {});

StationaryDistribution stationary_distribution(const Policy& policy, const UniformizedModel& model,
                                               const StationaryOptions& options);

/// Long-run expectations under a stationary distribution. Queue and replica
/// averages use the configuration held during each sojourn, i.e. after the
/// policy's action.
struct ExpectedMetrics {
  std::vector<double> avg_queue;
  std::vector<double> avg_replicas;
  double avg_reward_rate = 0.0;  // E[r(s, d(s)) * gamma(s, d(s))]

  double total_replicas() const;
  double total_queue() const;
};

ExpectedMetrics expected_metrics(const StationaryDistribution& pi, const Policy& policy,
                                 const StateSpace& states);

/// Closed-form time and space bounds for value iteration, built on the
/// product state count M^K * Qm^K * K * (N + 1).
struct ComplexityBounds {
  double time_bound = 0.0;
  double space_bound = 0.0;
};

/// Requires 0 < gamma_discount < 1 (0 is accepted as the limit case).
ComplexityBounds complexity_bounds(const ScalingConfig& cfg, double gamma_discount);

/// Everything a solve produces, bundled for callers that need all of it.
struct Solution {
  StateSpace states;
  UniformizedModel model;
  Policy policy;
};

Solution solve(const ScalingConfig& cfg, std::uint64_t state_limit = kDefaultStateLimit,
               const ValueIterationOptions& options = {});

}  // namespace edgescale
