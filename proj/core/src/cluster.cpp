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

#include <numeric>
#include <stdexcept>
#include <string>

#include "edgescale/errors.hpp"
#include "edgescale/simulator.hpp"

namespace edgescale {

Cluster::Cluster(const ScalingConfig& cfg)
    : demand_(cfg.cpu_demand),
      capacity_(cfg.capacity),
      used_(cfg.n_nodes, 0),
      placement_(cfg.n_nodes * cfg.n_classes, 0),
      class_replicas_(cfg.n_classes, 0),
      class_busy_(cfg.n_classes, 0),
      idle_(cfg.n_nodes * cfg.n_classes),
      queues_(cfg.n_classes) {}

int Cluster::replicas_on(std::size_t node, std::size_t cls) const {
  return placement_[node * class_count() + cls];
}

int Cluster::idle_on(std::size_t node, std::size_t cls) const {
  return static_cast<int>(idle_[node * class_count() + cls].size());
}

int Cluster::total_replicas() const {
  return std::accumulate(class_replicas_.begin(), class_replicas_.end(), 0);
}

bool Cluster::can_host(std::size_t cls) const {
  for (std::size_t n = 0; n < node_count(); ++n) {
    if (free(n) >= demand_[cls]) return true;
  }
  return false;
}

ReplicaId Cluster::add_replica(std::size_t cls, std::size_t node) {
  if (node >= node_count() || cls >= class_count()) throw ContractViolation("replica placement out of range");
  if (free(node) < demand_[cls]) {
    throw ContractViolation("node " + std::to_string(node + 1) + " cannot host class " + std::to_string(cls + 1));
  }
  ReplicaId id;
  if (!free_slots_.empty()) {
    id = free_slots_.back();
    free_slots_.pop_back();
  } else {
    id = static_cast<ReplicaId>(replicas_.size());
    replicas_.emplace_back();
  }
  replicas_[id] = Replica{cls, node, true, false, 0.0};
  used_[node] += demand_[cls];
  ++placement_[node * class_count() + cls];
  ++class_replicas_[cls];
  idle_[node * class_count() + cls].push_back(id);
  return id;
}

void Cluster::remove_replica(std::size_t cls, std::size_t node) {
  if (node >= node_count() || cls >= class_count()) throw ContractViolation("replica removal out of range");
  auto& stack = idle_[node * class_count() + cls];
  if (stack.empty()) {
    throw ContractViolation("no idle replica of class " + std::to_string(cls + 1) + " on node " +
                            std::to_string(node + 1));
  }
  const ReplicaId id = stack.back();
  stack.pop_back();
  replicas_[id].alive = false;
  free_slots_.push_back(id);
  used_[node] -= demand_[cls];
  --placement_[node * class_count() + cls];
  --class_replicas_[cls];
}

std::optional<ReplicaId> Cluster::find_idle(std::size_t cls) const {
  for (std::size_t n = 0; n < node_count(); ++n) {
    const auto& stack = idle_[n * class_count() + cls];
    if (!stack.empty()) return stack.back();
  }
  return std::nullopt;
}

void Cluster::start_service(ReplicaId id, double arrival_time) {
  Replica& r = replicas_.at(id);
  if (!r.alive || r.busy) throw ContractViolation("replica is not idle");
  auto& stack = idle_[r.node * class_count() + r.cls];
  for (auto it = stack.end(); it != stack.begin();) {
    --it;
    if (*it == id) {
      stack.erase(it);
      break;
    }
  }
  r.busy = true;
  r.request_arrival = arrival_time;
  ++class_busy_[r.cls];
}

double Cluster::finish_service(ReplicaId id) {
  Replica& r = replicas_.at(id);
  if (!r.alive || !r.busy) throw ContractViolation("replica is not busy");
  r.busy = false;
  --class_busy_[r.cls];
  idle_[r.node * class_count() + r.cls].push_back(id);
  return r.request_arrival;
}

double Cluster::dequeue(std::size_t cls) {
  auto& q = queues_.at(cls);
  if (q.empty()) throw ContractViolation("dequeue from an empty queue");
  const double t = q.front();
  q.pop_front();
  return t;
}

bool Cluster::all_queues_empty() const {
  for (const auto& q : queues_) {
    if (!q.empty()) return false;
  }
  return true;
}

int Cluster::total_in_service() const { return std::accumulate(class_busy_.begin(), class_busy_.end(), 0); }

int Cluster::total_queued() const {
  int total = 0;
  for (const auto& q : queues_) total += static_cast<int>(q.size());
  return total;
}

void Cluster::check_invariants() const {
  const std::size_t K = class_count();
  std::vector<int> used(node_count(), 0), per_class(K, 0), busy(K, 0), idle(K, 0);
  for (const Replica& r : replicas_) {
    if (!r.alive) continue;
    used[r.node] += demand_[r.cls];
    ++per_class[r.cls];
    if (r.busy) ++busy[r.cls];
  }
  for (std::size_t n = 0; n < node_count(); ++n) {
    if (used[n] != used_[n]) throw std::logic_error("node usage counter drifted");
    if (used_[n] > capacity_[n]) throw std::logic_error("node " + std::to_string(n + 1) + " over capacity");
    for (std::size_t k = 0; k < K; ++k) idle[k] += idle_on(n, k);
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (per_class[k] != class_replicas_[k] || busy[k] != class_busy_[k]) {
      throw std::logic_error("replica counters drifted");
    }
    if (idle[k] + busy[k] != per_class[k]) throw std::logic_error("idle stacks disagree with replicas");
    if (idle[k] > 0 && !queues_[k].empty()) {
      throw std::logic_error("idle replica of class " + std::to_string(k + 1) + " beside a waiting request");
    }
  }
}

std::optional<std::size_t> allocate_first_fit(const Cluster& cluster, std::size_t cls) {
  for (std::size_t n = 0; n < cluster.node_count(); ++n) {
    if (cluster.free(n) >= cluster.demand(cls)) return n;
  }
  return std::nullopt;
}

std::optional<std::size_t> allocate_random_fit(const Cluster& cluster, std::size_t cls, std::mt19937_64& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t n = 0; n < cluster.node_count(); ++n) {
    if (cluster.free(n) >= cluster.demand(cls)) candidates.push_back(n);
  }
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() == 1) return candidates.front();
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

void remove_replica(Cluster& cluster, std::size_t cls, std::size_t node) { cluster.remove_replica(cls, node); }

SystemState snapshot_state(const Cluster& cluster, const Event& event) {
  const std::size_t K = cluster.class_count();
  SystemState s;
  s.replicas.resize(K);
  s.queue.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    s.replicas[k] = cluster.replicas(k);
    s.queue[k] = cluster.queue_length(k);
  }
  s.event = event;
  return s;
}

}  // namespace edgescale
