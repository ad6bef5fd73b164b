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

#include "edgescale/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "edgescale/errors.hpp"

namespace edgescale {

std::string to_string(const Event& e) {
  std::string out = e.is_arrival() ? "A" : "D";
  out += std::to_string(e.cls + 1);
  if (e.node) out += "@" + std::to_string(*e.node + 1);
  return out;
}

Event event_from_string(const std::string& text) {
  auto bad = [&] { return ContractViolation("malformed event '" + text + "'"); };
  if (text.size() < 2 || (text[0] != 'A' && text[0] != 'D')) throw bad();
  const auto at = text.find('@');
  char* end = nullptr;
  const std::string cls_part = text.substr(1, at == std::string::npos ? std::string::npos : at - 1);
  const long cls = std::strtol(cls_part.c_str(), &end, 10);
  if (cls_part.empty() || *end != '\0' || cls < 1) throw bad();
  Event e{text[0] == 'A' ? Event::Kind::Arrival : Event::Kind::Departure,
          static_cast<std::size_t>(cls - 1), std::nullopt};
  if (at != std::string::npos) {
    if (e.is_arrival()) throw bad();
    const std::string node_part = text.substr(at + 1);
    const long node = std::strtol(node_part.c_str(), &end, 10);
    if (node_part.empty() || *end != '\0' || node < 1) throw bad();
    e.node = static_cast<std::size_t>(node - 1);
  }
  return e;
}

std::string to_string(Action a) {
  switch (a) {
    case Action::ScaleUp: return "+1";
    case Action::Hold: return "0";
    case Action::ScaleDown: return "-1";
  }
  return "?";
}

Action action_from_string(const std::string& text) {
  if (text == "+1" || text == "1") return Action::ScaleUp;
  if (text == "0") return Action::Hold;
  if (text == "-1") return Action::ScaleDown;
  throw ContractViolation("malformed action '" + text + "'");
}

std::string to_string(const SystemState& s) {
  std::ostringstream os;
  os << "(d=";
  for (std::size_t k = 0; k < s.replicas.size(); ++k) os << (k ? "," : "") << s.replicas[k];
  os << " q=";
  for (std::size_t k = 0; k < s.queue.size(); ++k) os << (k ? "," : "") << s.queue[k];
  os << ' ' << to_string(s.event) << ')';
  return os.str();
}

void ActionSet::insert(Action a) {
  if (contains(a)) return;
  // keep tie-break order
  std::size_t pos = size_;
  while (pos > 0 && tie_break_rank(items_[pos - 1]) > tie_break_rank(a)) {
    items_[pos] = items_[pos - 1];
    --pos;
  }
  items_[pos] = a;
  ++size_;
}

bool ActionSet::contains(Action a) const {
  for (std::size_t i = 0; i < size_; ++i) {
    if (items_[i] == a) return true;
  }
  return false;
}

namespace {

const char* state_problem(const SystemState& s, const ScalingConfig& cfg) {
  const std::size_t K = cfg.n_classes;
  if (s.replicas.size() != K || s.queue.size() != K) return "vector sizes differ from n_classes";
  long used = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (s.replicas[k] < 0 || s.replicas[k] > cfg.max_replicas) return "replica count out of bounds";
    if (s.queue[k] < 0 || s.queue[k] > cfg.max_queue) return "queue length out of bounds";
    used += static_cast<long>(cfg.cpu_demand[k]) * s.replicas[k];
  }
  if (used > cfg.total_capacity()) return "replicas exceed aggregate capacity";
  if (s.event.cls >= K) return "event class out of range";
  if (s.event.is_arrival() && s.event.node) return "arrival carries a node index";
  if (s.event.is_departure()) {
    if (s.replicas[s.event.cls] < 1) return "departure without a replica";
    if (cfg.event_mode == EventMode::NodeIndexed) {
      if (!s.event.node || *s.event.node >= cfg.n_nodes) return "departure node missing or out of range";
    } else if (s.event.node) {
      return "aggregated departure carries a node index";
    }
  }
  return nullptr;
}

double departure_rate(const std::vector<int>& replicas, const ScalingConfig& cfg) {
  double theta = 0.0;
  for (std::size_t k = 0; k < cfg.n_classes; ++k) theta += replicas[k] * cfg.service_rate[k];
  return theta;
}

void require_feasible(const SystemState& s, Action a, const ScalingConfig& cfg) {
  if (!feasible_actions(s, cfg).contains(a)) {
    throw ContractViolation("action " + to_string(a) + " infeasible in " + to_string(s));
  }
}

}  // namespace

bool is_valid_state(const SystemState& s, const ScalingConfig& cfg) {
  return state_problem(s, cfg) == nullptr;
}

void check_state(const SystemState& s, const ScalingConfig& cfg) {
  if (const char* problem = state_problem(s, cfg)) {
    throw ContractViolation(std::string("invalid state ") + to_string(s) + ": " + problem);
  }
}

ActionSet feasible_actions(const SystemState& s, const ScalingConfig& cfg) {
  check_state(s, cfg);
  ActionSet out;
  out.insert(Action::Hold);
  const std::size_t k = s.event.cls;
  if (s.event.is_arrival()) {
    long used = 0;
    for (std::size_t j = 0; j < cfg.n_classes; ++j) {
      used += static_cast<long>(cfg.cpu_demand[j]) * s.replicas[j];
    }
    if (s.replicas[k] < cfg.max_replicas && used + cfg.cpu_demand[k] <= cfg.total_capacity()) {
      out.insert(Action::ScaleUp);
    }
  } else if (s.replicas[k] >= 1) {
    out.insert(Action::ScaleDown);
  }
  return out;
}

Configuration apply_action(const SystemState& s, Action a, const ScalingConfig& cfg) {
  require_feasible(s, a, cfg);
  Configuration c{s.replicas, s.queue};
  const std::size_t k = s.event.cls;
  if (s.event.is_arrival()) {
    if (a == Action::ScaleUp) {
      ++c.replicas[k];
    } else {
      c.queue[k] = std::min(c.queue[k] + 1, cfg.max_queue);
    }
  } else {
    if (a == Action::ScaleDown) {
      --c.replicas[k];
    } else {
      c.queue[k] = std::max(c.queue[k] - 1, 0);
    }
  }
  return c;
}

double event_rate(const SystemState& s, Action a, const ScalingConfig& cfg) {
  require_feasible(s, a, cfg);
  const double base = cfg.total_arrival_rate() + departure_rate(s.replicas, cfg);
  const double mu = cfg.service_rate[s.event.cls];
  switch (a) {
    case Action::ScaleUp: return base + mu;
    case Action::ScaleDown: return base - mu;
    case Action::Hold: return base;
  }
  return base;
}

std::vector<Transition> transitions(const SystemState& s, Action a, const ScalingConfig& cfg) {
  const Configuration next = apply_action(s, a, cfg);
  const double gamma = event_rate(s, a, cfg);
  const std::size_t K = cfg.n_classes;

  std::vector<Transition> out;
  out.reserve(K * (1 + cfg.departures_per_class()));
  for (std::size_t k = 0; k < K; ++k) {
    out.push_back({SystemState{next.replicas, next.queue, Event::arrival(k)}, cfg.arrival_rate[k] / gamma});
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (next.replicas[k] < 1) continue;
    const double mass = next.replicas[k] * cfg.service_rate[k] / gamma;
    if (cfg.event_mode == EventMode::NodeIndexed) {
      const double share = mass / static_cast<double>(cfg.n_nodes);
      for (std::size_t n = 0; n < cfg.n_nodes; ++n) {
        out.push_back({SystemState{next.replicas, next.queue, Event::departure(k, n)}, share});
      }
    } else {
      out.push_back({SystemState{next.replicas, next.queue, Event::departure(k)}, mass});
    }
  }
  return out;
}

double holding_cost(const std::vector<int>& replicas, const std::vector<int>& queue,
                    const ScalingConfig& cfg) {
  double cost = 0.0;
  for (std::size_t k = 0; k < cfg.n_classes; ++k) {
    cost += cfg.unit_cost * cfg.cpu_demand[k] * replicas[k];
    cost += queue[k] / cfg.arrival_rate[k];
  }
  return cost;
}

double lump_income(const SystemState& s, Action a, const ScalingConfig& cfg) {
  require_feasible(s, a, cfg);
  return s.event.is_arrival() ? cfg.income[s.event.cls] : 0.0;
}

double reward(const SystemState& s, Action a, const ScalingConfig& cfg) {
  const Configuration next = apply_action(s, a, cfg);
  const double gamma = event_rate(s, a, cfg);
  return lump_income(s, a, cfg) - holding_cost(next.replicas, next.queue, cfg) / (cfg.discount + gamma);
}

}  // namespace edgescale
