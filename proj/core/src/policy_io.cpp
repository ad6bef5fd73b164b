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

#include "edgescale/policy_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "edgescale/errors.hpp"

namespace edgescale {

PolicyTable::PolicyTable(StateSpace states, std::vector<Action> actions, std::vector<double> values,
                         PolicyHeader header)
    : states_(std::move(states)), actions_(std::move(actions)), values_(std::move(values)), header_(std::move(header)) {
  if (actions_.size() != states_.size() || values_.size() != states_.size()) {
    throw ContractViolation("policy table sizes differ from the state space");
  }
}

PolicyTable PolicyTable::from_solution(const Solution& solution) {
  PolicyHeader h;
  h.config_hash = config_hash_hex(solution.states.config());
  h.rho = solution.model.rho;
  h.lambda_bar = solution.model.lambda_bar;
  h.epsilon = solution.states.config().epsilon;
  h.iterations = solution.policy.iterations;
  h.final_residual = solution.policy.residual_history.empty() ? 0.0 : solution.policy.residual_history.back();
  return PolicyTable(solution.states, solution.policy.action, solution.policy.value, std::move(h));
}

Action PolicyTable::lookup(const SystemState& s) const {
  return actions_[states_.index_of(s)];
}

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> parse_csv_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0') throw ConfigError("malformed integer list '" + text + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

double parse_real(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') throw ConfigError("malformed number '" + text + "'");
  return v;
}

template <typename T>
T header_field(std::istream& in, const std::string& key) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, value;
    ls >> name >> value;
    if (name != key) throw ConfigError("policy header: expected '" + key + "', found '" + name + "'");
    if constexpr (std::is_same_v<T, std::string>) {
      return value;
    } else if constexpr (std::is_same_v<T, std::size_t>) {
      return static_cast<std::size_t>(parse_real(value));
    } else {
      return parse_real(value);
    }
  }
  throw ConfigError("policy header: missing '" + key + "'");
}

}  // namespace

void write_policy(std::ostream& out, const PolicyTable& table) {
  const PolicyHeader& h = table.header();
  out << "# edgescale policy v1\n";
  out << "config_hash " << h.config_hash << '\n';
  out << "rho " << real(h.rho) << '\n';
  out << "lambda_bar " << real(h.lambda_bar) << '\n';
  out << "epsilon " << real(h.epsilon) << '\n';
  out << "iterations " << h.iterations << '\n';
  out << "final_residual " << real(h.final_residual) << '\n';
  out << "states " << table.size() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    const SystemState s = table.states().state(i);
    out << csv(s.replicas) << ' ' << csv(s.queue) << ' ' << to_string(s.event) << ' '
        << to_string(table.actions()[i]) << ' ' << real(table.values()[i]) << '\n';
  }
}

void write_policy_file(const std::string& path, const PolicyTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_policy(out, table);
  if (!out) throw IoError("failed writing '" + path + "'");
}

PolicyTable read_policy(std::istream& in, const ScalingConfig& cfg) {
  PolicyHeader h;
  h.config_hash = header_field<std::string>(in, "config_hash");
  if (h.config_hash != config_hash_hex(cfg)) {
    throw ConfigError("policy was solved for config " + h.config_hash + ", not " + config_hash_hex(cfg));
  }
  h.rho = header_field<double>(in, "rho");
  h.lambda_bar = header_field<double>(in, "lambda_bar");
  h.epsilon = header_field<double>(in, "epsilon");
  h.iterations = header_field<std::size_t>(in, "iterations");
  h.final_residual = header_field<double>(in, "final_residual");
  const std::size_t count = header_field<std::size_t>(in, "states");

  StateSpace states = enumerate_states(cfg, std::max<std::uint64_t>(count, 1));
  if (states.size() != count) {
    throw ConfigError("policy lists " + std::to_string(count) + " states, config enumerates " +
                      std::to_string(states.size()));
  }
  std::vector<Action> actions(count);
  std::vector<double> values(count);
  std::string line;
  std::size_t row = 0;
  while (row < count && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string replicas, queue, event, action, value;
    if (!(ls >> replicas >> queue >> event >> action >> value)) {
      throw ConfigError("malformed policy row " + std::to_string(row + 1));
    }
    const SystemState s{parse_csv_ints(replicas), parse_csv_ints(queue), event_from_string(event)};
    if (!(states.state(row) == s)) {
      throw ConfigError("policy row " + std::to_string(row + 1) + " is " + to_string(s) + ", expected " +
                        to_string(states.state(row)));
    }
    actions[row] = action_from_string(action);
    if (!feasible_actions(s, cfg).contains(actions[row])) {
      throw ConfigError("policy row " + std::to_string(row + 1) + " holds an infeasible action");
    }
    values[row] = parse_real(value);
    ++row;
  }
  if (row != count) throw ConfigError("policy file truncated after " + std::to_string(row) + " rows");
  return PolicyTable(std::move(states), std::move(actions), std::move(values), std::move(h));
}

PolicyTable read_policy_file(const std::string& path, const ScalingConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file '" + path + "'");
  return read_policy(in, cfg);
}

}  // namespace edgescale
