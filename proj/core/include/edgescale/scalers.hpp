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
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "edgescale/config.hpp"
#include "edgescale/model.hpp"
#include "edgescale/policy_io.hpp"

namespace edgescale {

/// What a scaler sees at a decision epoch.
struct DecisionContext {
  Event event;
  int queue_len = 0;               // waiting requests of the event's class
  bool total_queue_empty = true;
  bool capacity_available = false; // some node can host one more replica of the class
  double load = 0.0;
  double clock = 0.0;
};

/// Windowed per-class arrival-rate monitor normalised by live service
/// capacity: (arrivals in window / window) / (mu_k * max(replicas_k, 1)).
class LoadEstimator {
 public:
  LoadEstimator(std::vector<double> windows, std::vector<double> service_rate);

  /// Default window per class: 50 mean inter-arrival times.
  static std::vector<double> default_windows(const ScalingConfig& cfg);

  void record_arrival(std::size_t cls, double now);
  void set_replicas(std::size_t cls, int replicas);

  double window(std::size_t cls) const { return windows_[cls]; }
  int replicas(std::size_t cls) const { return replicas_[cls]; }

  /// Arrivals of `cls` in (now - window, now].
  std::size_t arrivals_in_window(std::size_t cls, double now);

 private:
  friend double estimate_load(LoadEstimator& estimator, std::size_t cls, double now);

  std::vector<double> windows_;
  std::vector<double> service_rate_;
  std::vector<int> replicas_;
  std::vector<std::deque<double>> stamps_;
};

double estimate_load(LoadEstimator& estimator, std::size_t cls, double now);

/// Clamps the live state into the policy's bounds, looks it up, and falls
/// back to Hold when a ScaleUp cannot be placed.
Action smdp_decide(const DecisionContext& ctx, const SystemState& snapshot, const PolicyTable& policy);

/// Scale up on arrivals above the load threshold when capacity exists;
/// scale down on departures that leave the class queue empty.
Action monitoring_decide(const DecisionContext& ctx, double threshold);

/// Coin-flip scale-up on arrivals when capacity exists; departures as in
/// monitoring_decide.
Action random_decide(const DecisionContext& ctx, std::mt19937_64& rng);

enum class ScalerKind { Smdp, Monitoring, Random, Pinned };

std::string_view to_string(ScalerKind kind);
ScalerKind scaler_kind_from_string(std::string_view name);

class Scaler {
 public:
  virtual ~Scaler() = default;
  virtual ScalerKind kind() const = 0;
  virtual Action decide(const DecisionContext& ctx, const SystemState& snapshot) = 0;
};

class SmdpScaler final : public Scaler {
 public:
  explicit SmdpScaler(std::shared_ptr<const PolicyTable> policy);
  ScalerKind kind() const override { return ScalerKind::Smdp; }
  Action decide(const DecisionContext& ctx, const SystemState& snapshot) override;

 private:
  std::shared_ptr<const PolicyTable> policy_;
};

class MonitoringScaler final : public Scaler {
 public:
  explicit MonitoringScaler(double threshold) : threshold_(threshold) {}
  ScalerKind kind() const override { return ScalerKind::Monitoring; }
  Action decide(const DecisionContext& ctx, const SystemState& snapshot) override;
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

class RandomScaler final : public Scaler {
 public:
  explicit RandomScaler(std::uint64_t seed) : rng_(seed) {}
  ScalerKind kind() const override { return ScalerKind::Random; }
  Action decide(const DecisionContext& ctx, const SystemState& snapshot) override;

 private:
  std::mt19937_64 rng_;
};

/// Grows each class to a fixed replica count and never shrinks it; used to
/// check the simulator against closed-form M/M/m results.
class PinnedScaler final : public Scaler {
 public:
  explicit PinnedScaler(std::vector<int> targets) : targets_(std::move(targets)) {}
  ScalerKind kind() const override { return ScalerKind::Pinned; }
  Action decide(const DecisionContext& ctx, const SystemState& snapshot) override;

 private:
  std::vector<int> targets_;
};

/// Name plus parameters of a scaler, as selected on the command line.
struct ScalerSpec {
  ScalerKind kind = ScalerKind::Monitoring;
  std::optional<double> threshold;  // Monitoring only
  std::vector<int> pinned;          // Pinned only

  std::string label() const;
  bool operator==(const ScalerSpec&) const = default;
};

/// Builds a fresh scaler for one run. `policy` is required for Smdp.
std::unique_ptr<Scaler> make_scaler(const ScalerSpec& spec, std::uint64_t seed,
                                    std::shared_ptr<const PolicyTable> policy = nullptr);

}  // namespace edgescale
