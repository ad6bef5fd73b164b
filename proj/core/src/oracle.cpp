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

#include "edgescale/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "edgescale/errors.hpp"
#include "edgescale/simulator.hpp"

namespace edgescale::oracle {

namespace {

struct Arc {
  std::size_t to;
  double prob;
};

// Everything needed to evaluate one (state, action) pair in continuous time.
struct Choice {
  Action action;
  double reward;
  double rate;
  double income;
  double cost_rate;
  std::vector<Arc> arcs;
};

std::vector<std::vector<Choice>> tabulate(const StateSpace& states) {
  const ScalingConfig& cfg = states.config();
  std::vector<std::vector<Choice>> table(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const SystemState s = states.state(i);
    for (Action a : feasible_actions(s, cfg)) {
      Choice c;
      c.action = a;
      c.reward = reward(s, a, cfg);
      c.rate = event_rate(s, a, cfg);
      c.income = lump_income(s, a, cfg);
      const Configuration next = apply_action(s, a, cfg);
      c.cost_rate = holding_cost(next.replicas, next.queue, cfg);
      for (const Transition& t : transitions(s, a, cfg)) {
        const auto j = states.find(t.next);
        if (!j) throw std::logic_error("successor outside the enumeration: " + to_string(t.next));
        c.arcs.push_back({*j, t.prob});
      }
      table[i].push_back(std::move(c));
    }
  }
  return table;
}

std::vector<double> solve_fixed(const std::vector<const Choice*>& picked, double alpha) {
  const auto n = static_cast<Eigen::Index>(picked.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Choice& c = *picked[static_cast<std::size_t>(i)];
    const double beta = c.rate / (c.rate + alpha);
    r(i) = c.reward;
    for (const Arc& arc : c.arcs) a(i, static_cast<Eigen::Index>(arc.to)) -= beta * arc.prob;
  }
  const Eigen::VectorXd v = a.partialPivLu().solve(r);
  return {v.data(), v.data() + n};
}

const Choice& find_choice(const std::vector<Choice>& options, Action a, std::size_t state) {
  for (const Choice& c : options) {
    if (c.action == a) return c;
  }
  throw ContractViolation("action " + to_string(a) + " infeasible at state index " + std::to_string(state));
}

}  // namespace

std::uint64_t policy_count(const StateSpace& states) {
  const ScalingConfig& cfg = states.config();
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::uint64_t k = feasible_actions(states.state(i), cfg).size();
    if (count > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
    count *= k;
  }
  return count;
}

std::vector<double> evaluate_policy(const StateSpace& states, const std::vector<Action>& actions) {
  if (actions.size() != states.size()) throw ContractViolation("policy length differs from state count");
  const auto table = tabulate(states);
  std::vector<const Choice*> picked(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) picked[i] = &find_choice(table[i], actions[i], i);
  return solve_fixed(picked, states.config().discount);
}

BruteForceResult brute_force_optimal(const StateSpace& states) {
  if (states.size() > kMaxTinyStates) {
    throw ContractViolation("brute force refused: " + std::to_string(states.size()) + " states exceeds " +
                            std::to_string(kMaxTinyStates));
  }
  const std::uint64_t total = policy_count(states);
  if (total > kMaxPolicies) {
    throw ContractViolation("brute force refused: " + std::to_string(total) + " policies exceeds " +
                            std::to_string(kMaxPolicies));
  }
  const auto table = tabulate(states);
  const double alpha = states.config().discount;
  const std::size_t n = states.size();

  std::vector<std::size_t> digit(n, 0);
  std::vector<const Choice*> picked(n);
  for (std::size_t i = 0; i < n; ++i) picked[i] = &table[i][0];

  BruteForceResult out;
  std::vector<double> pointwise(n, -std::numeric_limits<double>::infinity());
  double best_sum = -std::numeric_limits<double>::infinity();
  std::vector<double> best_value;
  std::vector<Action> best_policy(n);

  for (;;) {
    const auto v = solve_fixed(picked, alpha);
    ++out.policies_evaluated;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pointwise[i] = std::max(pointwise[i], v[i]);
      sum += v[i];
    }
    // An optimal policy dominates pointwise, so it also maximises the sum.
    if (sum > best_sum) {
      best_sum = sum;
      best_value = v;
      for (std::size_t i = 0; i < n; ++i) best_policy[i] = picked[i]->action;
    }
    std::size_t pos = 0;
    while (pos < n && ++digit[pos] == table[pos].size()) {
      digit[pos] = 0;
      picked[pos] = &table[pos][0];
      ++pos;
    }
    if (pos == n) break;
    picked[pos] = &table[pos][digit[pos]];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(pointwise[i]));
    if (best_value[i] < pointwise[i] - tol) {
      throw std::logic_error("no single policy attains the pointwise maximum at state " +
                             to_string(states.state(i)));
    }
  }
  out.policy = std::move(best_policy);
  out.value = std::move(pointwise);
  return out;
}

ErlangC erlang_c_delay(double lambda, double mu, int servers) {
  if (!(lambda >= 0.0) || !(mu > 0.0) || servers < 1) {
    throw std::domain_error("erlang_c_delay needs lambda >= 0, mu > 0, servers >= 1");
  }
  const double m = servers;
  if (lambda >= m * mu) {
    throw std::domain_error("unstable queue: lambda " + std::to_string(lambda) + " >= m*mu " +
                            std::to_string(m * mu));
  }
  const double a = lambda / mu;
  // Erlang-B by recursion, then converted to Erlang-C.
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) b = a * b / (k + a * b);
  const double rho = a / m;
  ErlangC out;
  out.wait_prob = b / (1.0 - rho + rho * b);
  out.mean_wait = out.wait_prob / (m * mu - lambda);
  out.mean_sojourn = out.mean_wait + 1.0 / mu;
  return out;
}

MonteCarloEstimate monte_carlo_value(const StateSpace& states, const std::vector<Action>& actions,
                                     std::size_t start, double horizon, std::size_t paths,
                                     std::uint64_t seed) {
  if (actions.size() != states.size()) throw ContractViolation("policy length differs from state count");
  if (start >= states.size()) throw ContractViolation("start state out of range");
  if (paths == 0) throw ContractViolation("monte_carlo_value needs at least one path");
  const double alpha = states.config().discount;
  if (!(std::exp(-alpha * horizon) < 1e-6)) {
    throw ContractViolation("horizon too short: exp(-alpha * horizon) must be below 1e-6");
  }

  const auto table = tabulate(states);
  std::vector<const Choice*> picked(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) picked[i] = &find_choice(table[i], actions[i], i);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    std::mt19937_64 rng(derive_seed(seed, p));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double t = 0.0;
    double total = 0.0;
    std::size_t s = start;
    while (t < horizon) {
      const Choice& c = *picked[s];
      const double disc = std::exp(-alpha * t);
      const double sojourn = std::exponential_distribution<double>(c.rate)(rng);
      total += disc * c.income;
      total -= disc * c.cost_rate * (1.0 - std::exp(-alpha * sojourn)) / alpha;
      t += sojourn;
      double u = unit(rng);
      std::size_t next = c.arcs.back().to;
      for (const Arc& arc : c.arcs) {
        if (u < arc.prob) {
          next = arc.to;
          break;
        }
        u -= arc.prob;
      }
      s = next;
    }
    sum += total;
    sum_sq += total * total;
  }

  MonteCarloEstimate out;
  const double n = static_cast<double>(paths);
  out.paths = paths;
  out.mean = sum / n;
  if (paths > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

std::vector<std::pair<std::string, ScalingConfig>> tiny_instances() {
  std::vector<std::pair<std::string, ScalingConfig>> out;
  out.emplace_back("tiny", presets::tiny());

  ScalingConfig shared;
  shared.n_nodes = 1;
  shared.n_classes = 2;
  shared.cpu_demand = {1, 1};
  shared.capacity = {1};
  shared.arrival_rate = {1.0, 2.0};
  shared.service_rate = {1.5, 1.0};
  shared.income = {1.0, 2.0};
  shared.unit_cost = 1.0;
  shared.discount = 0.1;
  shared.epsilon = 1e-6;
  shared.max_replicas = 1;
  shared.max_queue = 1;
  out.emplace_back("two_class_shared_cpu", shared);

  ScalingConfig indexed;
  indexed.n_nodes = 2;
  indexed.n_classes = 1;
  indexed.cpu_demand = {1};
  indexed.capacity = {1, 2};
  indexed.arrival_rate = {1.5};
  indexed.service_rate = {1.0};
  indexed.income = {1.0};
  indexed.unit_cost = 0.5;
  indexed.discount = 0.2;
  indexed.epsilon = 1e-6;
  indexed.max_replicas = 3;
  indexed.max_queue = 1;
  indexed.event_mode = EventMode::NodeIndexed;
  out.emplace_back("node_indexed_two_nodes", indexed);
  return out;
}

}  // namespace edgescale::oracle
