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

#include <gtest/gtest.h>

#include "edgescale/errors.hpp"
#include "edgescale/simulator.hpp"

namespace edgescale {
namespace {

ScalingConfig three_nodes(std::vector<int> capacity, int demand) {
  ScalingConfig cfg;
  cfg.n_nodes = capacity.size();
  cfg.n_classes = 1;
  cfg.cpu_demand = {demand};
  cfg.capacity = std::move(capacity);
  cfg.arrival_rate = {1.0};
  cfg.service_rate = {1.0};
  cfg.income = {1.0};
  cfg.max_replicas = 10;
  cfg.max_queue = 1;
  return cfg;
}

TEST(FirstFit, PicksLowestNodeWithRoom) {
  Cluster c(three_nodes({2, 3, 5}, 2));
  c.add_replica(0, 0);
  ASSERT_EQ(c.free(0), 0);
  ASSERT_EQ(c.free(1), 3);
  ASSERT_EQ(c.free(2), 5);
  EXPECT_EQ(allocate_first_fit(c, 0), std::optional<std::size_t>(1));
}

TEST(FirstFit, FullClusterHasNoRoom) {
  Cluster c(three_nodes({1, 1, 1}, 1));
  for (std::size_t n = 0; n < 3; ++n) c.add_replica(0, n);
  EXPECT_FALSE(allocate_first_fit(c, 0).has_value());
  EXPECT_FALSE(c.can_host(0));
}

TEST(FirstFit, OversizedDemandNeverFits) {
  Cluster c(three_nodes({2, 3, 5}, 6));
  EXPECT_FALSE(allocate_first_fit(c, 0).has_value());
  EXPECT_THROW(c.add_replica(0, 2), ContractViolation);
}

TEST(RandomFit, SingleCandidateIsCertain) {
  Cluster c(three_nodes({2, 3, 5}, 4));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(allocate_random_fit(c, 0, rng), std::optional<std::size_t>(2));
}

TEST(RandomFit, TwoCandidatesSplitEvenly) {
  Cluster c(three_nodes({4, 4}, 1));
  std::mt19937_64 rng(2024);
  int first = 0;
  for (int i = 0; i < 10'000; ++i) first += *allocate_random_fit(c, 0, rng) == 0;
  EXPECT_NEAR(first / 10'000.0, 0.5, 0.02);
}

TEST(RandomFit, NoCandidateFails) {
  Cluster c(three_nodes({1}, 2));
  std::mt19937_64 rng(1);
  EXPECT_FALSE(allocate_random_fit(c, 0, rng).has_value());
}

TEST(RandomFit, SeedReproduces) {
  Cluster c(three_nodes({4, 4, 4}, 1));
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(allocate_random_fit(c, 0, a), allocate_random_fit(c, 0, b));
}

TEST(RemoveReplica, DropsOneIdleReplica) {
  Cluster c(three_nodes({4}, 2));
  c.add_replica(0, 0);
  c.add_replica(0, 0);
  remove_replica(c, 0, 0);
  EXPECT_EQ(c.replicas(0), 1);
  EXPECT_EQ(c.used(0), 2);
  EXPECT_NO_THROW(c.check_invariants());
}

TEST(RemoveReplica, BusyReplicaIsNotRemovable) {
  Cluster c(three_nodes({4}, 2));
  const ReplicaId id = c.add_replica(0, 0);
  c.start_service(id, 0.0);
  EXPECT_THROW(remove_replica(c, 0, 0), ContractViolation);
  EXPECT_EQ(c.replicas(0), 1);
}

TEST(RemoveReplica, WrongNodeIsRejected) {
  Cluster c(three_nodes({4, 4}, 2));
  c.add_replica(0, 0);
  EXPECT_THROW(remove_replica(c, 0, 1), ContractViolation);
}

TEST(Snapshot, EmptyCluster) {
  Cluster c(three_nodes({4, 4}, 1));
  EXPECT_EQ(snapshot_state(c, Event::arrival(0)), (SystemState{{0}, {0}, Event::arrival(0)}));
}

TEST(Snapshot, AggregatesAcrossNodes) {
  Cluster c(three_nodes({4, 4}, 1));
  c.add_replica(0, 0);
  c.add_replica(0, 1);
  EXPECT_EQ(snapshot_state(c, Event::arrival(0)).replicas, (std::vector<int>{2}));
}

TEST(Snapshot, QueueCountsWaitingOnly) {
  Cluster c(three_nodes({4}, 1));
  const ReplicaId id = c.add_replica(0, 0);
  c.start_service(id, 0.0);
  for (double t : {0.1, 0.2, 0.3}) c.enqueue(0, t);
  const SystemState s = snapshot_state(c, Event::departure(0));
  EXPECT_EQ(s.queue, (std::vector<int>{3}));
  EXPECT_EQ(s.replicas, (std::vector<int>{1}));
  EXPECT_EQ(c.total_in_service(), 1);
  EXPECT_EQ(c.total_queued(), 3);
}

TEST(Cluster, ServiceLifecycleKeepsCounters) {
  Cluster c(three_nodes({4}, 1));
  const ReplicaId id = c.add_replica(0, 0);
  EXPECT_EQ(c.find_idle(0), std::optional<ReplicaId>(id));
  c.start_service(id, 1.5);
  EXPECT_FALSE(c.find_idle(0).has_value());
  EXPECT_EQ(c.busy(0), 1);
  EXPECT_DOUBLE_EQ(c.finish_service(id), 1.5);
  EXPECT_EQ(c.busy(0), 0);
  EXPECT_EQ(c.idle_on(0, 0), 1);
  EXPECT_NO_THROW(c.check_invariants());
}

TEST(Cluster, IdleReplicaBesideQueueBreaksInvariant) {
  Cluster c(three_nodes({4}, 1));
  c.add_replica(0, 0);
  c.enqueue(0, 0.0);
  EXPECT_THROW(c.check_invariants(), std::logic_error);
}

TEST(Cluster, DequeueIsFifo) {
  Cluster c(three_nodes({4}, 1));
  c.enqueue(0, 1.0);
  c.enqueue(0, 2.0);
  EXPECT_EQ(c.dequeue(0), 1.0);
  EXPECT_EQ(c.dequeue(0), 2.0);
  EXPECT_THROW(c.dequeue(0), ContractViolation);
}

}  // namespace
}  // namespace edgescale
