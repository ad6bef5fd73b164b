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

#include "edgescale/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "edgescale/errors.hpp"

namespace edgescale {

std::optional<std::size_t> UniformizedModel::choice_index(std::size_t s, Action a) const {
  for (std::size_t c = choice_offsets[s]; c < choice_offsets[s + 1]; ++c) {
    if (choices[c].action == a) return c;
  }
  return std::nullopt;
}

double UniformizedModel::q_value(const Choice& c, std::span<const double> value) const {
  double acc = 0.0;
  for (std::uint32_t e = c.first; e < c.last; ++e) acc += prob[e] * value[successor[e]];
  return c.reward + lambda_bar * acc;
}

double uniformization_rate(const ScalingConfig& cfg) {
  double rho = cfg.total_arrival_rate();
  for (std::size_t n = 0; n < cfg.n_nodes; ++n) {
    for (std::size_t k = 0; k < cfg.n_classes; ++k) rho += cfg.capacity[n] * cfg.service_rate[k];
  }
  return rho;
}

UniformizedModel uniformize(const StateSpace& states) {
  const ScalingConfig& cfg = states.config();
  const double alpha = cfg.discount;

  UniformizedModel m;
  m.rho = uniformization_rate(cfg);
  m.discount = alpha;
  m.lambda_bar = m.rho / (m.rho + alpha);

  const std::size_t n = states.size();
  m.choice_offsets.reserve(n + 1);
  m.choice_offsets.push_back(0);
  m.choices.reserve(n * 2);
  m.successor.reserve(n * 2 * (cfg.n_classes * 2 + 1));
  m.prob.reserve(m.successor.capacity());

  std::map<std::uint32_t, double> row;  // ordered: fixed summation order
  for (std::size_t i = 0; i < n; ++i) {
    const SystemState s = states.state(i);
    for (Action a : feasible_actions(s, cfg)) {
      const double gamma = event_rate(s, a, cfg);
      if (gamma > m.rho * (1.0 + 1e-12)) {
        throw std::logic_error("event rate " + std::to_string(gamma) + " exceeds rho " +
                               std::to_string(m.rho) + " in " + to_string(s));
      }
      row.clear();
      for (const Transition& t : transitions(s, a, cfg)) {
        row[static_cast<std::uint32_t>(states.index_of(t.next))] += t.prob;
      }
      const double scale = gamma / m.rho;
      const auto self = static_cast<std::uint32_t>(i);
      const double p_self = row.count(self) ? row[self] : 0.0;
      row[self] = 1.0 - (1.0 - p_self) * scale;
      for (auto& [j, p] : row) {
        if (j != self) p *= scale;
      }

      UniformizedModel::Choice c;
      c.action = a;
      c.event_rate = gamma;
      c.reward = reward(s, a, cfg) * (gamma + alpha) / (m.rho + alpha);
      c.first = static_cast<std::uint32_t>(m.successor.size());
      for (const auto& [j, p] : row) {
        if (p <= 0.0) continue;
        m.successor.push_back(j);
        m.prob.push_back(p);
      }
      c.last = static_cast<std::uint32_t>(m.successor.size());
      m.choices.push_back(c);
    }
    m.choice_offsets.push_back(static_cast<std::uint32_t>(m.choices.size()));
  }
  return m;
}

namespace {

// Values are carried in extended precision during iteration so that rounding
// stays well below the contraction slack near the stopping residual.
using Wide = long double;

Wide wide_q_value(const UniformizedModel& m, const UniformizedModel::Choice& c, std::span<const Wide> v) {
  Wide acc = 0.0L;
  for (std::uint32_t e = c.first; e < c.last; ++e) acc += static_cast<Wide>(m.prob[e]) * v[m.successor[e]];
  return static_cast<Wide>(c.reward) + static_cast<Wide>(m.lambda_bar) * acc;
}

double wide_q_value(const UniformizedModel& m, const UniformizedModel::Choice& c, std::span<const double> v) {
  return m.q_value(c, v);
}

template <typename T>
struct Best {
  T value = -std::numeric_limits<T>::infinity();
  Action action = Action::Hold;
  bool set = false;

  void offer(T q, Action a) {
    if (!set || q > value || (q == value && tie_break_rank(a) < tie_break_rank(action))) {
      value = q;
      action = a;
      set = true;
    }
  }
};

template <typename T>
Best<T> best_choice(const UniformizedModel& m, std::size_t s, std::span<const T> v, bool reverse) {
  Best<T> best;
  const auto cs = m.choices_of(s);
  if (reverse) {
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) best.offer(wide_q_value(m, *it, v), it->action);
  } else {
    for (const auto& c : cs) best.offer(wide_q_value(m, c, v), c.action);
  }
  return best;
}

}  // namespace

std::vector<Action> greedy_policy(const UniformizedModel& model, std::span<const double> value,
                                  bool reverse_action_order) {
  std::vector<Action> out(model.state_count());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = best_choice<double>(model, s, value, reverse_action_order).action;
  }
  return out;
}

Policy value_iteration(const UniformizedModel& model, double epsilon, const ValueIterationOptions& options) {
  if (!(epsilon > 0.0)) throw ContractViolation("epsilon must be positive");
  const std::size_t n = model.state_count();
  std::vector<Wide> v(n, 0.0L);
  std::vector<Wide> next(n, 0.0L);
  Policy policy;

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n / 4096 + 1)));
  std::vector<double> block_residual(workers, 0.0);

  auto sweep_block = [&](unsigned w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    Wide r = 0.0L;
    for (std::size_t s = lo; s < hi; ++s) {
      next[s] = best_choice<Wide>(model, s, v, options.reverse_action_order).value;
      r = std::max(r, std::abs(next[s] - v[s]));
    }
    block_residual[w] = static_cast<double>(r);
  };

  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < options.max_iterations; ++t) {
    if (workers == 1) {
      sweep_block(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers - 1);
      for (unsigned w = 1; w < workers; ++w) pool.emplace_back(sweep_block, w);
      sweep_block(0);
    }
    residual = *std::max_element(block_residual.begin(), block_residual.end());
    policy.residual_history.push_back(residual);
    v.swap(next);
    if (residual <= epsilon) {
      converged = true;
      break;
    }
  }
  policy.iterations = policy.residual_history.size();
  if (!converged) {
    throw NonConvergence("value iteration hit " + std::to_string(options.max_iterations) + " sweeps", residual);
  }
  policy.action.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    policy.action[s] = best_choice<Wide>(model, s, v, options.reverse_action_order).action;
  }
  policy.value.assign(v.begin(), v.end());
  return policy;
}

MarkovChain MarkovChain::from_dense(const std::vector<std::vector<double>>& p) {
  MarkovChain chain;
  chain.row_offsets.push_back(0);
  for (const auto& row : p) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0.0) {
        chain.col.push_back(static_cast<std::uint32_t>(j));
        chain.prob.push_back(row[j]);
      }
    }
    chain.row_offsets.push_back(static_cast<std::uint32_t>(chain.col.size()));
  }
  return chain;
}

MarkovChain induced_chain(const UniformizedModel& model, std::span<const Action> actions) {
  if (actions.size() != model.state_count()) throw ContractViolation("policy size differs from state count");
  MarkovChain chain;
  chain.row_offsets.reserve(actions.size() + 1);
  chain.row_offsets.push_back(0);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    const auto c = model.choice_index(s, actions[s]);
    if (!c) throw ContractViolation("policy action infeasible at state " + std::to_string(s));
    const auto& choice = model.choices[*c];
    for (std::uint32_t e = choice.first; e < choice.last; ++e) {
      chain.col.push_back(model.successor[e]);
      chain.prob.push_back(model.prob[e]);
    }
    chain.row_offsets.push_back(static_cast<std::uint32_t>(chain.col.size()));
  }
  return chain;
}

StationaryDistribution stationary_distribution(const Policy& policy, const UniformizedModel& model,
                                               const StationaryOptions& options) {
  return stationary_distribution(induced_chain(model, policy.action), options);
}

double ExpectedMetrics::total_replicas() const {
  double t = 0.0;
  for (double x : avg_replicas) t += x;
  return t;
}

double ExpectedMetrics::total_queue() const {
  double t = 0.0;
  for (double x : avg_queue) t += x;
  return t;
}

ExpectedMetrics expected_metrics(const StationaryDistribution& pi, const Policy& policy,
                                 const StateSpace& states) {
  const ScalingConfig& cfg = states.config();
  if (pi.pi.size() != states.size() || policy.action.size() != states.size()) {
    throw ContractViolation("distribution, policy and state space sizes differ");
  }
  ExpectedMetrics out;
  out.avg_queue.assign(cfg.n_classes, 0.0);
  out.avg_replicas.assign(cfg.n_classes, 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double w = pi.pi[i];
    if (w == 0.0) continue;
    const SystemState s = states.state(i);
    const Action a = policy.action[i];
    const Configuration c = apply_action(s, a, cfg);
    for (std::size_t k = 0; k < cfg.n_classes; ++k) {
      out.avg_queue[k] += w * c.queue[k];
      out.avg_replicas[k] += w * c.replicas[k];
    }
    out.avg_reward_rate += w * reward(s, a, cfg) * event_rate(s, a, cfg);
  }
  return out;
}

ComplexityBounds complexity_bounds(const ScalingConfig& cfg, double gamma_discount) {
  if (!(gamma_discount >= 0.0 && gamma_discount < 1.0)) {
    throw ContractViolation("discount for complexity bounds must lie in [0, 1)");
  }
  const double K = static_cast<double>(cfg.n_classes);
  const double states = std::pow(static_cast<double>(cfg.max_replicas), K) *
                        std::pow(static_cast<double>(cfg.max_queue), K) * K *
                        (static_cast<double>(cfg.n_nodes) + 1.0);
  ComplexityBounds b;
  b.space_bound = states;
  const double horizon = 1.0 / (1.0 - gamma_discount);
  b.time_bound = states * horizon * std::log(horizon);
  if (!std::isfinite(b.space_bound) || !std::isfinite(b.time_bound)) {
    throw OverflowError("complexity bound overflows double precision");
  }
  return b;
}

Solution solve(const ScalingConfig& cfg, std::uint64_t state_limit, const ValueIterationOptions& options) {
  Solution out;
  out.states = enumerate_states(cfg, state_limit);
  out.model = uniformize(out.states);
  out.policy = value_iteration(out.model, cfg.epsilon, options);
  return out;
}

}  // namespace edgescale
