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
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"
#include "edgescale/scalers.hpp"

namespace edgescale {

enum class Allocator { FirstFit, RandomFit };

std::string_view to_string(Allocator a);
Allocator allocator_from_string(std::string_view name);

/// Independent, reproducible stream derived from a run seed and a stream id.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

using ReplicaId = std::uint32_t;

/// Simulator-side ground truth for the edge nodes: per-node CPU usage,
/// replica placement with busy/idle status, and per-class FIFO queues of
/// waiting requests (arrival times). Capacity is enforced per node.
class Cluster {
 public:
  explicit Cluster(const ScalingConfig& cfg);

  std::size_t node_count() const { return capacity_.size(); }
  std::size_t class_count() const { return demand_.size(); }
  int demand(std::size_t cls) const { return demand_[cls]; }
  int capacity(std::size_t node) const { return capacity_[node]; }
  int used(std::size_t node) const { return used_[node]; }
  int free(std::size_t node) const { return capacity_[node] - used_[node]; }

  int replicas(std::size_t cls) const { return class_replicas_[cls]; }
  int replicas_on(std::size_t node, std::size_t cls) const;
  int busy(std::size_t cls) const { return class_busy_[cls]; }
  int idle_on(std::size_t node, std::size_t cls) const;
  int total_replicas() const;

  /// True when some node has room for one more replica of `cls`.
  bool can_host(std::size_t cls) const;

  /// Places an idle replica of `cls` on `node`. Throws ContractViolation
  /// when it does not fit.
  ReplicaId add_replica(std::size_t cls, std::size_t node);

  /// Removes the most recently idled replica of `cls` on `node`. Throws
  /// ContractViolation when that node has no idle replica of the class.
  void remove_replica(std::size_t cls, std::size_t node);

  /// Idle replica of `cls` on the lowest-indexed node, if any.
  std::optional<ReplicaId> find_idle(std::size_t cls) const;

  /// Marks `id` busy serving a request that arrived at `arrival_time`.
  void start_service(ReplicaId id, double arrival_time);

  /// Marks `id` idle and returns the arrival time of the request it held.
  double finish_service(ReplicaId id);

  std::size_t replica_class(ReplicaId id) const { return replicas_[id].cls; }
  std::size_t replica_node(ReplicaId id) const { return replicas_[id].node; }
  bool replica_busy(ReplicaId id) const { return replicas_[id].busy; }

  void enqueue(std::size_t cls, double arrival_time) { queues_[cls].push_back(arrival_time); }
  double dequeue(std::size_t cls);
  int queue_length(std::size_t cls) const { return static_cast<int>(queues_[cls].size()); }
  bool all_queues_empty() const;
  int total_in_service() const;
  int total_queued() const;

  /// Throws std::logic_error on any violated cluster invariant (per-node
  /// capacity, counter consistency, idle replica next to a waiting request).
  void check_invariants() const;

 private:
  struct Replica {
    std::size_t cls = 0;
    std::size_t node = 0;
    bool alive = false;
    bool busy = false;
    double request_arrival = 0.0;
  };

  std::vector<int> demand_;
  std::vector<int> capacity_;
  std::vector<int> used_;
  std::vector<int> placement_;        // node * K + cls -> replicas
  std::vector<int> class_replicas_;
  std::vector<int> class_busy_;
  std::vector<std::vector<ReplicaId>> idle_;  // node * K + cls -> idle stack
  std::vector<Replica> replicas_;
  std::vector<ReplicaId> free_slots_;
  std::vector<std::deque<double>> queues_;
};

/// Lowest node index with enough free CPU, or nullopt.
std::optional<std::size_t> allocate_first_fit(const Cluster& cluster, std::size_t cls);

/// Uniform choice among nodes with enough free CPU, or nullopt.
std::optional<std::size_t> allocate_random_fit(const Cluster& cluster, std::size_t cls,
                                               std::mt19937_64& rng);

void remove_replica(Cluster& cluster, std::size_t cls, std::size_t node);

/// Aggregates per-class replicas and waiting requests into the model state.
SystemState snapshot_state(const Cluster& cluster, const Event& event);

enum class ReplicaAveraging { TimeWeighted, EventSampled };

struct SimConfig {
  ScalingConfig scaling;
  std::uint64_t horizon_events = 1'000'000;
  /// Events excluded from metrics; defaults to 10% of the horizon.
  std::optional<std::uint64_t> warmup_events;
  std::uint64_t seed = 1;
  Allocator allocator = Allocator::FirstFit;
  /// Per-node additive delay; empty means 0.001 * n for 1-based node n.
  std::vector<double> transmission_delay;
  /// Load-monitor window; 0 means 50 mean inter-arrival times per class.
  double load_window = 0.0;
  ReplicaAveraging replica_averaging = ReplicaAveraging::TimeWeighted;
  /// Verify cluster invariants after every event (slow).
  bool check_invariants = false;

  std::uint64_t effective_warmup() const;
  std::vector<double> effective_transmission_delay() const;
};

void validate(const SimConfig& cfg);

struct RunMetrics {
  /// Absent when no request completed after warmup.
  std::optional<double> avg_service_delay;
  std::vector<std::optional<double>> class_service_delay;

  double avg_replicas = 0.0;  // summed over classes
  std::vector<double> class_replicas;
  double avg_replicas_time_weighted = 0.0;
  double avg_replicas_event_sampled = 0.0;

  std::uint64_t arrivals = 0;     // after warmup
  std::uint64_t completed = 0;    // after warmup
  double throughput = 0.0;        // completions per unit time after warmup
  double total_reward = 0.0;      // income minus integrated holding cost
  int max_queue = 0;
  double measured_time = 0.0;

  std::uint64_t scale_ups = 0;
  std::uint64_t scale_downs = 0;
  std::uint64_t downgraded_scale_ups = 0;

  // Whole-run conservation counters, including warmup.
  std::uint64_t total_arrivals = 0;
  std::uint64_t total_completions = 0;
  std::uint64_t final_queued = 0;
  std::uint64_t final_in_service = 0;
  std::uint64_t events = 0;

  bool operator==(const RunMetrics&) const = default;
};

/// One discrete-event run. Arrival and service times come from per-class
/// streams derived from `cfg.seed`, so runs that differ only in scaler or
/// allocator see the same traffic. When `trace` is set, one line per event
/// is written: time, event, class, node, action, queue lengths.
RunMetrics run(const SimConfig& cfg, Scaler& scaler, std::ostream* trace = nullptr);

}  // namespace edgescale
