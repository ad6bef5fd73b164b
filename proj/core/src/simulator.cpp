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

#include "edgescale/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "edgescale/errors.hpp"

namespace edgescale {

std::string_view to_string(Allocator a) { return a == Allocator::FirstFit ? "ffa" : "rfa"; }

Allocator allocator_from_string(std::string_view name) {
  if (name == "ffa" || name == "first_fit" || name == "FirstFit") return Allocator::FirstFit;
  if (name == "rfa" || name == "random_fit" || name == "RandomFit") return Allocator::RandomFit;
  throw ConfigError("unknown allocator '" + std::string(name) + "' (expected ffa or rfa)");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SimConfig::effective_warmup() const { return warmup_events.value_or(horizon_events / 10); }

std::vector<double> SimConfig::effective_transmission_delay() const {
  if (!transmission_delay.empty()) return transmission_delay;
  std::vector<double> d(scaling.n_nodes);
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = 0.001 * static_cast<double>(n + 1);
  return d;
}

void validate(const SimConfig& cfg) {
  validate(cfg.scaling);
  if (cfg.horizon_events == 0) throw ConfigError("horizon_events must be positive");
  if (cfg.effective_warmup() >= cfg.horizon_events) throw ConfigError("warmup_events must be below horizon_events");
  if (!cfg.transmission_delay.empty()) {
    if (cfg.transmission_delay.size() != cfg.scaling.n_nodes) {
      throw ConfigError("transmission_delay needs one entry per node");
    }
    for (double d : cfg.transmission_delay) {
      if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("transmission delays must be non-negative");
    }
  }
  if (cfg.load_window < 0.0) throw ConfigError("load_window must be non-negative");
}

namespace {

constexpr std::uint64_t kArrivalStream = 100;
constexpr std::uint64_t kServiceStream = 200;
constexpr std::uint64_t kAllocatorStream = 1;

struct Pending {
  double time;
  std::uint64_t seq;
  bool arrival;
  std::size_t cls;
  ReplicaId replica;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

class Run {
 public:
  Run(const SimConfig& cfg, Scaler& scaler, std::ostream* trace)
      : cfg_(cfg),
        sc_(cfg.scaling),
        scaler_(scaler),
        trace_(trace),
        cluster_(sc_),
        estimator_(cfg.load_window > 0.0 ? std::vector<double>(sc_.n_classes, cfg.load_window)
                                         : LoadEstimator::default_windows(sc_),
                   sc_.service_rate),
        delay_(cfg.effective_transmission_delay()),
        allocator_rng_(derive_seed(cfg.seed, kAllocatorStream)),
        warmup_(cfg.effective_warmup()) {
    const std::size_t K = sc_.n_classes;
    for (std::size_t k = 0; k < K; ++k) {
      arrival_rng_.emplace_back(derive_seed(cfg.seed, kArrivalStream + k));
      service_rng_.emplace_back(derive_seed(cfg.seed, kServiceStream + k));
    }
    delay_sum_.assign(K, 0.0);
    delay_count_.assign(K, 0);
    replica_area_.assign(K, 0.0);
    last_start_arrival_.assign(K, -1.0);
  }

  RunMetrics execute() {
    for (std::size_t k = 0; k < sc_.n_classes; ++k) schedule_arrival(k, 0.0);
    measuring_ = warmup_ == 0;

    while (m_.events < cfg_.horizon_events) {
      if (pending_.empty()) throw std::logic_error("event queue exhausted before the horizon");
      const Pending e = pending_.top();
      pending_.pop();
      accumulate_until(e.time);
      now_ = e.time;
      ++m_.events;
      if (e.arrival) {
        on_arrival(e.cls);
      } else {
        on_departure(e.replica);
      }
      if (measuring_) {
        replica_samples_ += cluster_.total_replicas();
        ++sample_count_;
        for (std::size_t k = 0; k < sc_.n_classes; ++k) m_.max_queue = std::max(m_.max_queue, cluster_.queue_length(k));
      }
      if (cfg_.check_invariants) cluster_.check_invariants();
      if (!measuring_ && m_.events >= warmup_) {
        measuring_ = true;
        start_time_ = now_;
      }
    }
    return finish();
  }

 private:
  bool counting() const { return m_.events > warmup_; }

  void schedule_arrival(std::size_t k, double now) {
    std::exponential_distribution<double> gap(sc_.arrival_rate[k]);
    pending_.push({now + gap(arrival_rng_[k]), seq_++, true, k, 0});
  }

  void begin_service(ReplicaId id, std::size_t k, double arrival_time) {
    if (cfg_.check_invariants) {
      if (arrival_time < last_start_arrival_[k]) throw std::logic_error("FIFO order violated");
      last_start_arrival_[k] = arrival_time;
    }
    cluster_.start_service(id, arrival_time);
    std::exponential_distribution<double> service(sc_.service_rate[k]);
    pending_.push({now_ + service(service_rng_[k]), seq_++, false, k, id});
  }

  // Pair idle replicas of class k with waiting requests.
  void dispatch(std::size_t k) {
    while (cluster_.queue_length(k) > 0) {
      const auto idle = cluster_.find_idle(k);
      if (!idle) break;
      begin_service(*idle, k, cluster_.dequeue(k));
    }
  }

  DecisionContext context(const Event& event) {
    DecisionContext ctx;
    ctx.event = event;
    ctx.queue_len = cluster_.queue_length(event.cls);
    ctx.total_queue_empty = cluster_.all_queues_empty();
    ctx.capacity_available = cluster_.can_host(event.cls);
    ctx.load = estimate_load(estimator_, event.cls, now_);
    ctx.clock = now_;
    return ctx;
  }

  std::optional<std::size_t> allocate(std::size_t k) {
    return cfg_.allocator == Allocator::FirstFit ? allocate_first_fit(cluster_, k)
                                                 : allocate_random_fit(cluster_, k, allocator_rng_);
  }

  void on_arrival(std::size_t k) {
    schedule_arrival(k, now_);
    estimator_.record_arrival(k, now_);
    ++m_.total_arrivals;
    if (counting()) {
      ++m_.arrivals;
      m_.total_reward += sc_.income[k];
    }

    const Event event = Event::arrival(k);
    const DecisionContext ctx = context(event);
    Action a = scaler_.decide(ctx, snapshot_state(cluster_, event));
    if (a == Action::ScaleDown) throw std::logic_error("scaler returned ScaleDown on an arrival");

    std::optional<std::size_t> node;
    if (a == Action::ScaleUp) {
      node = allocate(k);
      if (!node) {
        ++m_.downgraded_scale_ups;
        a = Action::Hold;
      }
    }
    if (a == Action::ScaleUp) {
      // the new replica takes the oldest waiting request, which keeps FIFO
      // and leaves the queue length unchanged
      const ReplicaId id = cluster_.add_replica(k, *node);
      double served = now_;
      if (cluster_.queue_length(k) > 0) {
        served = cluster_.dequeue(k);
        cluster_.enqueue(k, now_);
      }
      begin_service(id, k, served);
      estimator_.set_replicas(k, cluster_.replicas(k));
      ++m_.scale_ups;
    } else {
      cluster_.enqueue(k, now_);
      dispatch(k);
    }
    if (trace_) write_trace('A', k, node, a);
  }

  void on_departure(ReplicaId id) {
    const std::size_t k = cluster_.replica_class(id);
    const std::size_t n = cluster_.replica_node(id);
    const double arrived = cluster_.finish_service(id);
    ++m_.total_completions;
    if (counting()) {
      delay_sum_[k] += now_ - arrived + delay_[n];
      ++delay_count_[k];
      ++m_.completed;
    }

    const Event event = Event::departure(k, n);
    const DecisionContext ctx = context(event);
    const Action a = scaler_.decide(ctx, snapshot_state(cluster_, event));
    if (a == Action::ScaleUp) throw std::logic_error("scaler returned ScaleUp on a departure");
    if (a == Action::ScaleDown) {
      cluster_.remove_replica(k, n);
      estimator_.set_replicas(k, cluster_.replicas(k));
      ++m_.scale_downs;
    }
    dispatch(k);
    if (trace_) write_trace('D', k, n, a);
  }

  void accumulate_until(double t) {
    if (!measuring_) return;
    const double dt = t - now_;
    if (dt <= 0.0) return;
    double cost = 0.0;
    for (std::size_t k = 0; k < sc_.n_classes; ++k) {
      const int d = cluster_.replicas(k);
      const int q = cluster_.queue_length(k);
      replica_area_[k] += d * dt;
      cost += sc_.unit_cost * sc_.cpu_demand[k] * d + q / sc_.arrival_rate[k];
    }
    m_.total_reward -= cost * dt;
  }

  void write_trace(char kind, std::size_t k, std::optional<std::size_t> node, Action a) {
    char head[96];
    std::snprintf(head, sizeof head, "%.9g %c %zu ", now_, kind, k + 1);
    *trace_ << head;
    if (node) {
      *trace_ << (*node + 1);
    } else {
      *trace_ << '-';
    }
    *trace_ << ' ' << to_string(a) << ' ';
    for (std::size_t j = 0; j < sc_.n_classes; ++j) *trace_ << (j ? "," : "") << cluster_.queue_length(j);
    *trace_ << '\n';
  }

  RunMetrics finish() {
    const std::size_t K = sc_.n_classes;
    m_.measured_time = now_ - start_time_;
    std::uint64_t count = 0;
    double sum = 0.0;
    m_.class_service_delay.assign(K, std::nullopt);
    m_.class_replicas.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      if (delay_count_[k] > 0) m_.class_service_delay[k] = delay_sum_[k] / static_cast<double>(delay_count_[k]);
      sum += delay_sum_[k];
      count += delay_count_[k];
      if (m_.measured_time > 0.0) m_.class_replicas[k] = replica_area_[k] / m_.measured_time;
      m_.avg_replicas_time_weighted += m_.class_replicas[k];
    }
    if (count > 0) m_.avg_service_delay = sum / static_cast<double>(count);
    if (sample_count_ > 0) m_.avg_replicas_event_sampled = replica_samples_ / static_cast<double>(sample_count_);
    m_.avg_replicas = cfg_.replica_averaging == ReplicaAveraging::TimeWeighted ? m_.avg_replicas_time_weighted
                                                                               : m_.avg_replicas_event_sampled;
    m_.throughput = m_.measured_time > 0.0 ? static_cast<double>(m_.completed) / m_.measured_time : 0.0;
    m_.final_queued = static_cast<std::uint64_t>(cluster_.total_queued());
    m_.final_in_service = static_cast<std::uint64_t>(cluster_.total_in_service());
    return m_;
  }

  const SimConfig& cfg_;
  const ScalingConfig& sc_;
  Scaler& scaler_;
  std::ostream* trace_;

  Cluster cluster_;
  LoadEstimator estimator_;
  std::vector<double> delay_;
  std::mt19937_64 allocator_rng_;
  std::vector<std::mt19937_64> arrival_rng_;
  std::vector<std::mt19937_64> service_rng_;
  std::priority_queue<Pending, std::vector<Pending>, Later> pending_;
  std::uint64_t seq_ = 0;

  std::uint64_t warmup_;
  bool measuring_ = false;
  double now_ = 0.0;
  double start_time_ = 0.0;

  std::vector<double> delay_sum_;
  std::vector<std::uint64_t> delay_count_;
  std::vector<double> replica_area_;
  std::vector<double> last_start_arrival_;
  double replica_samples_ = 0.0;
  std::uint64_t sample_count_ = 0;

  RunMetrics m_;
};

}  // namespace

RunMetrics run(const SimConfig& cfg, Scaler& scaler, std::ostream* trace) {
  validate(cfg);
  Run r(cfg, scaler, trace);
  return r.execute();
}

}  // namespace edgescale
