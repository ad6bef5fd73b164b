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

#include <numeric>

#include "edgescale/errors.hpp"
#include "edgescale/solver.hpp"
#include "test_support.hpp"

namespace edgescale {
namespace {

std::vector<double> left_multiply(const MarkovChain& chain, const std::vector<double>& pi) {
  std::vector<double> out(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::uint32_t e = chain.row_offsets[i]; e < chain.row_offsets[i + 1]; ++e) {
      out[chain.col[e]] += pi[i] * chain.prob[e];
    }
  }
  return out;
}

TEST(Stationary, SwapChainIsUniform) {
  const auto chain = MarkovChain::from_dense({{0.0, 1.0}, {1.0, 0.0}});
  for (auto method : {StationaryMethod::Auto, StationaryMethod::Direct}) {
    StationaryOptions opt;
    opt.method = method;
    const auto pi = stationary_distribution(chain, opt).pi;
    EXPECT_NEAR(pi[0], 0.5, 1e-12);
    EXPECT_NEAR(pi[1], 0.5, 1e-12);
  }
}

TEST(Stationary, IdentityChainStaysAtInitialState) {
  const auto chain = MarkovChain::from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  StationaryOptions opt;
  opt.initial_state = 1;
  const auto pi = stationary_distribution(chain, opt).pi;
  EXPECT_EQ(pi, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(Stationary, TransientStatesGetNoMass) {
  const auto chain = MarkovChain::from_dense({{0.5, 0.5, 0.0}, {0.0, 0.2, 0.8}, {0.0, 0.6, 0.4}});
  const auto pi = stationary_distribution(chain).pi;
  EXPECT_NEAR(pi[0], 0.0, 1e-12);
  EXPECT_NEAR(pi[1], 0.6 / 1.4, 1e-10);
  EXPECT_NEAR(pi[2], 0.8 / 1.4, 1e-10);
}

TEST(Stationary, InitialStateOutOfRangeIsRejected) {
  StationaryOptions opt;
  opt.initial_state = 2;
  EXPECT_THROW(stationary_distribution(MarkovChain::from_dense({{1.0}}), opt), ContractViolation);
}

TEST(Stationary, TinyOptimalPolicyIsStationary) {
  const Solution sol = solve(presets::tiny());
  StationaryOptions opt;
  opt.initial_state = sol.states.initial_index();
  const auto chain = induced_chain(sol.model, sol.policy.action);
  for (auto method : {StationaryMethod::Power, StationaryMethod::Direct}) {
    opt.method = method;
    const auto pi = stationary_distribution(chain, opt).pi;
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-9);
    const auto next = left_multiply(chain, pi);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      EXPECT_GE(pi[i], 0.0);
      EXPECT_NEAR(next[i], pi[i], 1e-8);
    }
  }
}

TEST(Stationary, PowerAndDirectAgree) {
  const Solution sol = solve(testing::two_by_two());
  const auto chain = induced_chain(sol.model, sol.policy.action);
  StationaryOptions opt;
  opt.initial_state = sol.states.initial_index();
  opt.method = StationaryMethod::Power;
  const auto power = stationary_distribution(chain, opt).pi;
  opt.method = StationaryMethod::Direct;
  const auto direct = stationary_distribution(chain, opt).pi;
  for (std::size_t i = 0; i < power.size(); ++i) EXPECT_NEAR(power[i], direct[i], 1e-8);
}

TEST(Stationary, InitialVectorDoesNotMatter) {
  const Solution sol = solve(presets::tiny());
  const auto chain = induced_chain(sol.model, sol.policy.action);
  StationaryOptions opt;
  opt.initial_state = sol.states.initial_index();
  opt.method = StationaryMethod::Power;
  const auto from_indicator = stationary_distribution(chain, opt).pi;
  opt.initial_vector = std::vector<double>(chain.size(), 1.0 / static_cast<double>(chain.size()));
  const auto from_uniform = stationary_distribution(chain, opt).pi;
  for (std::size_t i = 0; i < chain.size(); ++i) EXPECT_NEAR(from_indicator[i], from_uniform[i], 1e-8);
}

TEST(ExpectedMetrics, PointMassReturnsThatState) {
  auto cfg = testing::two_by_two();
  const auto states = enumerate_states(cfg);
  const SystemState s = testing::departure({2, 1}, {0, 3});
  StationaryDistribution pi{std::vector<double>(states.size(), 0.0)};
  pi.pi[states.index_of(s)] = 1.0;
  Policy policy;
  policy.action.assign(states.size(), Action::Hold);
  const auto m = expected_metrics(pi, policy, states);
  EXPECT_EQ(m.avg_replicas, (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(m.avg_queue, (std::vector<double>{0.0, 3.0}));
  EXPECT_DOUBLE_EQ(m.total_replicas(), 3.0);
  EXPECT_DOUBLE_EQ(m.total_queue(), 3.0);
}

TEST(ExpectedMetrics, ZeroRewardModelHasZeroRate) {
  const Solution sol = solve(testing::zero_reward(presets::tiny()));
  StationaryOptions opt;
  opt.initial_state = sol.states.initial_index();
  const auto pi = stationary_distribution(sol.policy, sol.model, opt);
  EXPECT_EQ(expected_metrics(pi, sol.policy, sol.states).avg_reward_rate, 0.0);
}

TEST(ExpectedMetrics, SizeMismatchIsRejected) {
  const auto states = enumerate_states(presets::tiny());
  Policy policy;
  policy.action.assign(states.size(), Action::Hold);
  EXPECT_THROW(expected_metrics(StationaryDistribution{{1.0}}, policy, states), ContractViolation);
}

}  // namespace
}  // namespace edgescale
