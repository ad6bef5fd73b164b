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

#include "edgescale/scalers.hpp"

#include <algorithm>
#include <cstdio>

#include "edgescale/errors.hpp"

namespace edgescale {

LoadEstimator::LoadEstimator(std::vector<double> windows, std::vector<double> service_rate)
    : windows_(std::move(windows)),
      service_rate_(std::move(service_rate)),
      replicas_(windows_.size(), 0),
      stamps_(windows_.size()) {
  if (service_rate_.size() != windows_.size()) throw ContractViolation("window and service-rate sizes differ");
  for (double w : windows_) {
    if (!(w > 0.0)) throw ContractViolation("load window must be positive");
  }
}

std::vector<double> LoadEstimator::default_windows(const ScalingConfig& cfg) {
  std::vector<double> out(cfg.n_classes);
  for (std::size_t k = 0; k < cfg.n_classes; ++k) out[k] = 50.0 / cfg.arrival_rate[k];
  return out;
}

void LoadEstimator::record_arrival(std::size_t cls, double now) { stamps_.at(cls).push_back(now); }

void LoadEstimator::set_replicas(std::size_t cls, int replicas) { replicas_.at(cls) = replicas; }

std::size_t LoadEstimator::arrivals_in_window(std::size_t cls, double now) {
  auto& q = stamps_.at(cls);
  const double horizon = now - windows_[cls];
  while (!q.empty() && q.front() <= horizon) q.pop_front();
  return q.size();
}

double estimate_load(LoadEstimator& estimator, std::size_t cls, double now) {
  const std::size_t count = estimator.arrivals_in_window(cls, now);
  if (count == 0) return 0.0;
  const double rate = static_cast<double>(count) / estimator.windows_[cls];
  return rate / (estimator.service_rate_[cls] * std::max(estimator.replicas_[cls], 1));
}

Action smdp_decide(const DecisionContext& ctx, const SystemState& snapshot, const PolicyTable& policy) {
  const ScalingConfig& cfg = policy.config();
  SystemState s = snapshot;
  for (int& d : s.replicas) d = std::min(d, cfg.max_replicas);
  for (int& q : s.queue) q = std::min(q, cfg.max_queue);
  if (cfg.event_mode == EventMode::Aggregated) s.event.node.reset();

  const Action a = policy.lookup(s);
  if (a == Action::ScaleUp && !ctx.capacity_available) return Action::Hold;
  return a;
}

Action monitoring_decide(const DecisionContext& ctx, double threshold) {
  if (ctx.event.is_arrival()) {
    return ctx.capacity_available && ctx.load > threshold ? Action::ScaleUp : Action::Hold;
  }
  return ctx.queue_len == 0 ? Action::ScaleDown : Action::Hold;
}

Action random_decide(const DecisionContext& ctx, std::mt19937_64& rng) {
  if (ctx.event.is_arrival()) {
    if (!ctx.capacity_available) return Action::Hold;
    return (rng() >> 63) != 0 ? Action::ScaleUp : Action::Hold;
  }
  return ctx.queue_len == 0 ? Action::ScaleDown : Action::Hold;
}

std::string_view to_string(ScalerKind kind) {
  switch (kind) {
    case ScalerKind::Smdp: return "smdp";
    case ScalerKind::Monitoring: return "mnt";
    case ScalerKind::Random: return "rf";
    case ScalerKind::Pinned: return "pin";
  }
  return "?";
}

ScalerKind scaler_kind_from_string(std::string_view name) {
  if (name == "smdp") return ScalerKind::Smdp;
  if (name == "mnt") return ScalerKind::Monitoring;
  if (name == "rf") return ScalerKind::Random;
  if (name == "pin") return ScalerKind::Pinned;
  throw ConfigError("unknown scaler '" + std::string(name) + "' (expected smdp, mnt, rf or pin)");
}

SmdpScaler::SmdpScaler(std::shared_ptr<const PolicyTable> policy) : policy_(std::move(policy)) {
  if (!policy_) throw ContractViolation("smdp scaler needs a solved policy");
}

Action SmdpScaler::decide(const DecisionContext& ctx, const SystemState& snapshot) {
  return smdp_decide(ctx, snapshot, *policy_);
}

Action MonitoringScaler::decide(const DecisionContext& ctx, const SystemState&) {
  return monitoring_decide(ctx, threshold_);
}

Action RandomScaler::decide(const DecisionContext& ctx, const SystemState&) { return random_decide(ctx, rng_); }

Action PinnedScaler::decide(const DecisionContext& ctx, const SystemState& snapshot) {
  if (!ctx.event.is_arrival()) return Action::Hold;
  const std::size_t k = ctx.event.cls;
  const int target = k < targets_.size() ? targets_[k] : 0;
  return ctx.capacity_available && snapshot.replicas[k] < target ? Action::ScaleUp : Action::Hold;
}

std::string ScalerSpec::label() const {
  std::string out(to_string(kind));
  if (kind == ScalerKind::Monitoring && threshold) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "@%g", *threshold);
    out += buf;
  }
  if (kind == ScalerKind::Pinned) {
    out += '@';
    for (std::size_t i = 0; i < pinned.size(); ++i) out += (i ? "," : "") + std::to_string(pinned[i]);
  }
  return out;
}

std::unique_ptr<Scaler> make_scaler(const ScalerSpec& spec, std::uint64_t seed,
                                    std::shared_ptr<const PolicyTable> policy) {
  switch (spec.kind) {
    case ScalerKind::Smdp: return std::make_unique<SmdpScaler>(std::move(policy));
    case ScalerKind::Monitoring:
      if (!spec.threshold) throw ConfigError("mnt scaler needs a threshold");
      return std::make_unique<MonitoringScaler>(*spec.threshold);
    case ScalerKind::Random: return std::make_unique<RandomScaler>(seed);
    case ScalerKind::Pinned: return std::make_unique<PinnedScaler>(spec.pinned);
  }
  throw ContractViolation("unknown scaler kind");
}

}  // namespace edgescale
