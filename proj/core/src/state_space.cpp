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

#include "edgescale/state_space.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "edgescale/errors.hpp"

namespace edgescale {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr u128 kU64Max = std::numeric_limits<std::uint64_t>::max();

// Saturates far above anything a 64-bit count can hold.
constexpr u128 kSaturated = static_cast<u128>(1) << 120;

u128 sat_add(u128 a, u128 b) { return (a >= kSaturated || b >= kSaturated || a + b >= kSaturated) ? kSaturated : a + b; }

u128 sat_mul(u128 a, u128 b) {
  if (a == 0 || b == 0) return 0;
  if (a >= kSaturated || b >= kSaturated) return kSaturated;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

u128 sat_pow(u128 base, std::size_t exp) {
  u128 out = 1;
  for (std::size_t i = 0; i < exp; ++i) out = sat_mul(out, base);
  return out;
}

std::uint64_t narrow(u128 v, const char* what) {
  if (v > kU64Max) throw OverflowError(std::string(what) + " does not fit in 64 bits");
  return static_cast<std::uint64_t>(v);
}

// Number of valid states without materialising them. Counts replica vectors
// under the aggregate capacity by dynamic programming over classes, tracking
// how many classes have at least one replica (each such class contributes
// departure events).
u128 exact_count(const ScalingConfig& cfg) {
  const std::size_t K = cfg.n_classes;
  const int cap = cfg.total_capacity();
  struct Cell {
    u128 count = 0;
    u128 nonzero = 0;  // sum over vectors of classes with a replica
  };
  std::vector<Cell> table(static_cast<std::size_t>(cap) + 1);
  table[0].count = 1;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<Cell> next(table.size());
    for (int used = 0; used <= cap; ++used) {
      const Cell& cell = table[static_cast<std::size_t>(used)];
      if (cell.count == 0) continue;
      for (int d = 0; d <= cfg.max_replicas; ++d) {
        const long after = used + static_cast<long>(d) * cfg.cpu_demand[k];
        if (after > cap) break;
        Cell& dst = next[static_cast<std::size_t>(after)];
        dst.count = sat_add(dst.count, cell.count);
        dst.nonzero = sat_add(dst.nonzero, cell.nonzero);
        if (d > 0) dst.nonzero = sat_add(dst.nonzero, cell.count);
      }
    }
    table = std::move(next);
  }
  u128 vectors = 0;
  u128 nonzero = 0;
  for (const Cell& c : table) {
    vectors = sat_add(vectors, c.count);
    nonzero = sat_add(nonzero, c.nonzero);
  }
  const u128 queues = sat_pow(static_cast<u128>(cfg.max_queue) + 1, K);
  const u128 events = sat_add(sat_mul(vectors, K), sat_mul(nonzero, cfg.departures_per_class()));
  return sat_mul(queues, events);
}

}  // namespace

std::uint64_t state_space_size(const ScalingConfig& cfg, CountFormula formula) {
  if (formula == CountFormula::ProductFormula) {
    const std::size_t K = cfg.n_classes;
    if (K == 0) return 0;
    u128 v = sat_pow(static_cast<u128>(cfg.max_replicas), K);
    v = sat_mul(v, sat_pow(static_cast<u128>(cfg.max_queue), K));
    v = sat_mul(v, K);
    v = sat_mul(v, static_cast<u128>(cfg.n_nodes) + 1);
    return narrow(v, "published state count");
  }
  validate(cfg);
  return narrow(exact_count(cfg), "exact state count");
}

std::size_t StateSpace::event_id(const Event& e) const {
  const std::size_t K = cfg_.n_classes;
  if (e.is_arrival()) return e.cls;
  if (cfg_.event_mode == EventMode::NodeIndexed) return K + e.cls * cfg_.n_nodes + e.node.value_or(0);
  return K + e.cls;
}

Event StateSpace::event_from_id(std::size_t id) const {
  const std::size_t K = cfg_.n_classes;
  if (id < K) return Event::arrival(id);
  id -= K;
  if (cfg_.event_mode == EventMode::NodeIndexed) {
    return Event::departure(id / cfg_.n_nodes, id % cfg_.n_nodes);
  }
  return Event::departure(id);
}

std::uint64_t StateSpace::encode(const SystemState& s) const {
  const std::uint64_t rr = static_cast<std::uint64_t>(cfg_.max_replicas) + 1;
  const std::uint64_t qr = static_cast<std::uint64_t>(cfg_.max_queue) + 1;
  std::uint64_t code = 0;
  for (int d : s.replicas) code = code * rr + static_cast<std::uint64_t>(d);
  for (int q : s.queue) code = code * qr + static_cast<std::uint64_t>(q);
  return code * n_events_ + event_id(s.event);
}

SystemState StateSpace::state(std::size_t index) const {
  const std::size_t K = cfg_.n_classes;
  const std::uint64_t rr = static_cast<std::uint64_t>(cfg_.max_replicas) + 1;
  const std::uint64_t qr = static_cast<std::uint64_t>(cfg_.max_queue) + 1;
  std::uint64_t code = codes_.at(index);
  SystemState s;
  s.event = event_from_id(static_cast<std::size_t>(code % n_events_));
  code /= n_events_;
  s.queue.resize(K);
  s.replicas.resize(K);
  for (std::size_t i = K; i-- > 0;) {
    s.queue[i] = static_cast<int>(code % qr);
    code /= qr;
  }
  for (std::size_t i = K; i-- > 0;) {
    s.replicas[i] = static_cast<int>(code % rr);
    code /= rr;
  }
  return s;
}

std::optional<std::size_t> StateSpace::find(const SystemState& s) const {
  if (!is_valid_state(s, cfg_)) return std::nullopt;
  const auto it = index_.find(encode(s));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t StateSpace::index_of(const SystemState& s) const {
  if (auto idx = find(s)) return *idx;
  throw ContractViolation("state " + to_string(s) + " is not enumerated");
}

std::size_t StateSpace::initial_index() const {
  const std::size_t K = cfg_.n_classes;
  return index_of(SystemState{std::vector<int>(K, 0), std::vector<int>(K, 0), Event::arrival(0)});
}

StateSpace enumerate_states(const ScalingConfig& cfg, std::uint64_t limit) {
  validate(cfg);
  std::uint64_t count = 0;
  try {
    count = state_space_size(cfg, CountFormula::ExactEnumeration);
  } catch (const OverflowError&) {
    throw StateSpaceTooLarge(UINT64_MAX, limit);
  }
  if (count > limit) throw StateSpaceTooLarge(count, limit);

  const std::size_t K = cfg.n_classes;
  StateSpace space;
  space.cfg_ = cfg;
  space.n_events_ = K + K * cfg.departures_per_class();

  const u128 radix_product =
      sat_mul(sat_mul(sat_pow(static_cast<u128>(cfg.max_replicas) + 1, K),
                      sat_pow(static_cast<u128>(cfg.max_queue) + 1, K)),
              space.n_events_);
  narrow(radix_product, "state code space");

  space.codes_.reserve(count);
  space.index_.reserve(count);

  // queue odometer, last class fastest
  auto advance = [](std::vector<int>& digits, int max) {
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (digits[i] < max) {
        ++digits[i];
        return true;
      }
      digits[i] = 0;
    }
    return false;
  };

  auto emit_replica_vector = [&](const std::vector<int>& replicas) {
    std::vector<int> queue(K, 0);
    do {
      SystemState s{replicas, queue, Event::arrival(0)};
      for (std::size_t id = 0; id < space.n_events_; ++id) {
        s.event = space.event_from_id(id);
        if (s.event.is_departure() && replicas[s.event.cls] < 1) continue;
        const std::uint64_t code = space.encode(s);
        space.index_.emplace(code, static_cast<std::uint32_t>(space.codes_.size()));
        space.codes_.push_back(code);
      }
    } while (advance(queue, cfg.max_queue));
  };

  // Replica vectors in lexicographic order, pruned by remaining capacity.
  std::vector<int> replicas(K, 0);
  auto recurse = [&](auto&& self, std::size_t k, int remaining) -> void {
    if (k == K) {
      emit_replica_vector(replicas);
      return;
    }
    const int top = std::min(cfg.max_replicas, remaining / cfg.cpu_demand[k]);
    for (int d = 0; d <= top; ++d) {
      replicas[k] = d;
      self(self, k + 1, remaining - d * cfg.cpu_demand[k]);
    }
    replicas[k] = 0;
  };
  recurse(recurse, 0, cfg.total_capacity());

  if (space.codes_.size() != count) {
    throw std::logic_error("state enumeration disagrees with its exact count");
  }
  return space;
}

}  // namespace edgescale
