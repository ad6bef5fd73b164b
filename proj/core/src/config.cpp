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

#include "edgescale/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "edgescale/errors.hpp"

namespace edgescale {

std::string_view to_string(EventMode mode) {
  return mode == EventMode::NodeIndexed ? "node_indexed" : "aggregated";
}

EventMode event_mode_from_string(std::string_view text) {
  if (text == "aggregated" || text == "Aggregated") return EventMode::Aggregated;
  if (text == "node_indexed" || text == "NodeIndexed") return EventMode::NodeIndexed;
  throw ConfigError("unknown event_mode '" + std::string(text) + "'");
}

int ScalingConfig::total_capacity() const {
  return std::accumulate(capacity.begin(), capacity.end(), 0);
}

int ScalingConfig::max_node_capacity() const {
  return capacity.empty() ? 0 : *std::max_element(capacity.begin(), capacity.end());
}

double ScalingConfig::total_arrival_rate() const {
  return std::accumulate(arrival_rate.begin(), arrival_rate.end(), 0.0);
}

namespace {

template <typename T>
void require_size(const std::vector<T>& v, std::size_t n, const char* field) {
  if (v.size() != n) {
    throw ConfigError(std::string(field) + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(n));
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void validate(const ScalingConfig& cfg) {
  require(cfg.n_nodes >= 1, "n_nodes must be at least 1");
  require(cfg.n_classes >= 1, "n_classes must be at least 1");
  require_size(cfg.cpu_demand, cfg.n_classes, "cpu_demand");
  require_size(cfg.capacity, cfg.n_nodes, "capacity");
  require_size(cfg.arrival_rate, cfg.n_classes, "arrival_rate");
  require_size(cfg.service_rate, cfg.n_classes, "service_rate");
  require_size(cfg.income, cfg.n_classes, "income");

  for (std::size_t n = 0; n < cfg.n_nodes; ++n) {
    require(cfg.capacity[n] >= 1, "capacity[" + std::to_string(n + 1) + "] must be positive");
  }
  const int largest = cfg.max_node_capacity();
  for (std::size_t k = 0; k < cfg.n_classes; ++k) {
    const std::string idx = "[" + std::to_string(k + 1) + "]";
    require(cfg.cpu_demand[k] >= 1, "cpu_demand" + idx + " must be positive");
    require(cfg.cpu_demand[k] <= largest,
            "cpu_demand" + idx + " exceeds the capacity of every node");
    require(std::isfinite(cfg.arrival_rate[k]) && cfg.arrival_rate[k] > 0.0,
            "arrival_rate" + idx + " must be positive");
    require(std::isfinite(cfg.service_rate[k]) && cfg.service_rate[k] > 0.0,
            "service_rate" + idx + " must be positive");
    require(std::isfinite(cfg.income[k]) && cfg.income[k] >= 0.0,
            "income" + idx + " must be non-negative");
  }
  require(std::isfinite(cfg.unit_cost) && cfg.unit_cost >= 0.0, "unit_cost must be non-negative");
  require(std::isfinite(cfg.discount) && cfg.discount > 0.0, "discount must be positive");
  require(std::isfinite(cfg.epsilon) && cfg.epsilon > 0.0, "epsilon must be positive");
  require(cfg.max_replicas >= 1, "max_replicas must be at least 1");
  require(cfg.max_queue >= 0, "max_queue must be non-negative");
}

ScalingConfig scale_arrivals(const ScalingConfig& cfg, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ConfigError("arrival scale factor must be positive");
  }
  ScalingConfig out = cfg;
  for (double& rate : out.arrival_rate) rate *= factor;
  return out;
}

namespace {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put(std::ostringstream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf << ';';
}

}  // namespace

std::uint64_t config_hash(const ScalingConfig& cfg) {
  std::ostringstream os;
  os << "N=" << cfg.n_nodes << ";K=" << cfg.n_classes << ';';
  for (int b : cfg.cpu_demand) os << b << ',';
  os << ';';
  for (int c : cfg.capacity) os << c << ',';
  os << ';';
  for (double v : cfg.arrival_rate) put(os, v);
  for (double v : cfg.service_rate) put(os, v);
  for (double v : cfg.income) put(os, v);
  put(os, cfg.unit_cost);
  put(os, cfg.discount);
  put(os, cfg.epsilon);
  os << cfg.max_replicas << ';' << cfg.max_queue << ';' << to_string(cfg.event_mode);
  return fnv1a(os.str());
}

std::string config_hash_hex(const ScalingConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

std::vector<double> evenly_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

namespace presets {

namespace {

ScalingConfig spread_network(std::size_t nodes, std::size_t classes, int node_capacity,
                            double lambda_lo, double lambda_hi, double mu_lo, double mu_hi) {
  ScalingConfig cfg;
  cfg.n_nodes = nodes;
  cfg.n_classes = classes;
  cfg.cpu_demand.resize(classes);
  std::iota(cfg.cpu_demand.begin(), cfg.cpu_demand.end(), 1);
  cfg.capacity.assign(nodes, node_capacity);
  cfg.arrival_rate = evenly_spaced(lambda_lo, lambda_hi, classes);
  cfg.service_rate = evenly_spaced(mu_lo, mu_hi, classes);
  cfg.income.assign(classes, 1.0);
  cfg.unit_cost = 1.0;
  cfg.discount = 0.1;
  cfg.epsilon = 1e-4;
  return cfg;
}

}  // namespace

ScalingConfig small_network() {
  ScalingConfig cfg = spread_network(3, 5, 16, 2.0, 11.0, 1.0, 11.0);
  cfg.max_replicas = 16;
  cfg.max_queue = 10;
  return cfg;
}

ScalingConfig large_network() {
  ScalingConfig cfg = spread_network(10, 10, 100, 4.0, 12.0, 10.0, 100.0);
  cfg.max_replicas = 100;
  cfg.max_queue = 20;
  return cfg;
}

ScalingConfig small_network_reduced(std::size_t classes, std::size_t nodes) {
  ScalingConfig cfg = spread_network(nodes, classes, 16, 2.0, 11.0, 1.0, 11.0);
  cfg.max_replicas = 12;
  cfg.max_queue = 6;
  return cfg;
}

ScalingConfig tiny() {
  ScalingConfig cfg;
  cfg.n_nodes = 1;
  cfg.n_classes = 1;
  cfg.cpu_demand = {1};
  cfg.capacity = {2};
  cfg.arrival_rate = {2.0};
  cfg.service_rate = {1.0};
  cfg.income = {1.0};
  cfg.unit_cost = 1.0;
  cfg.discount = 0.1;
  cfg.epsilon = 1e-6;
  cfg.max_replicas = 2;
  cfg.max_queue = 2;
  return cfg;
}

}  // namespace presets

}  // namespace edgescale
