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

#include <cmath>

#include "edgescale/errors.hpp"
#include "edgescale/solver.hpp"
#include "test_support.hpp"

namespace edgescale {
namespace {

// Distance of a value-iteration result from the true fixed point.
double value_error_bound(const UniformizedModel& m, double epsilon) {
  return epsilon * m.lambda_bar / (1.0 - m.lambda_bar);
}

TEST(Uniformize, TinyRates) {
  const auto m = uniformize(enumerate_states(presets::tiny()));
  EXPECT_DOUBLE_EQ(m.rho, 4.0);
  EXPECT_NEAR(m.lambda_bar, 4.0 / 4.1, 1e-15);
  EXPECT_NEAR(m.lambda_bar, 0.97561, 5e-6);
}

TEST(Uniformize, RowsAreStochastic) {
  for (const auto& cfg : {presets::tiny(), testing::two_by_two()}) {
    const auto states = enumerate_states(cfg);
    const auto m = uniformize(states);
    ASSERT_EQ(m.state_count(), states.size());
    for (std::size_t s = 0; s < m.state_count(); ++s) {
      for (const auto& c : m.choices_of(s)) {
        double sum = 0.0;
        for (std::uint32_t e = c.first; e < c.last; ++e) {
          EXPECT_GE(m.prob[e], 0.0);
          sum += m.prob[e];
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_LE(c.event_rate, m.rho);
      }
    }
  }
}

TEST(Uniformize, ScaledRewardAndSelfLoop) {
  const auto states = enumerate_states(presets::tiny());
  const auto m = uniformize(states);
  const auto& cfg = states.config();
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    const SystemState st = states.state(s);
    for (const auto& c : m.choices_of(s)) {
      const double gamma = event_rate(st, c.action, cfg);
      EXPECT_NEAR(c.reward, reward(st, c.action, cfg) * (gamma + cfg.discount) / (m.rho + cfg.discount), 1e-12);
      double self = 0.0;
      for (std::uint32_t e = c.first; e < c.last; ++e) {
        if (m.successor[e] == s) self += m.prob[e];
      }
      double raw_self = 0.0;
      for (const auto& t : transitions(st, c.action, cfg)) {
        if (t.next == st) raw_self += t.prob;
      }
      EXPECT_NEAR(self, 1.0 - (1.0 - raw_self) * gamma / m.rho, 1e-12);
    }
  }
}

TEST(Uniformize, FullRateWithoutSelfLoopHasNoSelfMass) {
  // arrival at two replicas under Hold runs at rho and moves the queue
  const auto states = enumerate_states(presets::tiny());
  const auto m = uniformize(states);
  const std::size_t s = states.index_of(testing::arrival({2}, {0}));
  const auto c = m.choice_index(s, Action::Hold);
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(m.choices[*c].event_rate, m.rho);
  for (std::uint32_t e = m.choices[*c].first; e < m.choices[*c].last; ++e) EXPECT_NE(m.successor[e], s);
}

TEST(ValueIteration, ZeroRewardStopsAfterOneSweepWithHold) {
  const auto m = uniformize(enumerate_states(testing::zero_reward(testing::two_by_two())));
  const Policy p = value_iteration(m, 1e-6);
  EXPECT_EQ(p.iterations, 1u);
  for (double v : p.value) EXPECT_EQ(v, 0.0);
  for (Action a : p.action) EXPECT_EQ(a, Action::Hold);
}

TEST(ValueIteration, ResidualsContract) {
  const auto m = uniformize(enumerate_states(presets::tiny()));
  const Policy p = value_iteration(m, 1e-6);
  ASSERT_GE(p.residual_history.size(), 2u);
  for (std::size_t t = 1; t < p.residual_history.size(); ++t) {
    EXPECT_LE(p.residual_history[t], p.residual_history[t - 1] * m.lambda_bar * (1.0 + 1e-9));
  }
  EXPECT_LE(p.residual_history.back(), 1e-6);
  EXPECT_GT(p.residual_history.back(), 0.0);
  EXPECT_EQ(p.iterations, p.residual_history.size());
}

TEST(ValueIteration, PolicyIsFeasible) {
  const auto states = enumerate_states(testing::two_by_two());
  const auto p = value_iteration(uniformize(states), 1e-6);
  for (std::size_t s = 0; s < states.size(); ++s) {
    EXPECT_TRUE(feasible_actions(states.state(s), states.config()).contains(p[s]));
  }
}

TEST(ValueIteration, ActionOrderDoesNotMatter) {
  const auto m = uniformize(enumerate_states(testing::two_by_two()));
  const Policy fwd = value_iteration(m, 1e-8);
  ValueIterationOptions rev;
  rev.reverse_action_order = true;
  const Policy bwd = value_iteration(m, 1e-8, rev);
  ASSERT_EQ(fwd.value.size(), bwd.value.size());
  for (std::size_t s = 0; s < fwd.value.size(); ++s) EXPECT_NEAR(fwd.value[s], bwd.value[s], 1e-10);
  EXPECT_EQ(fwd.action, bwd.action);
}

TEST(ValueIteration, ThreadCountDoesNotChangeResult) {
  const auto m = uniformize(enumerate_states(testing::two_by_two()));
  const Policy one = value_iteration(m, 1e-6);
  for (unsigned threads : {2u, 3u, 7u}) {
    ValueIterationOptions opt;
    opt.threads = threads;
    const Policy many = value_iteration(m, 1e-6, opt);
    EXPECT_EQ(one.value, many.value);
    EXPECT_EQ(one.action, many.action);
    EXPECT_EQ(one.residual_history, many.residual_history);
  }
}

TEST(ValueIteration, IterationCapRaisesWithResidual) {
  const auto m = uniformize(enumerate_states(presets::tiny()));
  ValueIterationOptions opt;
  opt.max_iterations = 3;
  try {
    value_iteration(m, 1e-12, opt);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.last_residual(), 1e-12);
  }
}

TEST(ValueIteration, RejectsNonPositiveEpsilon) {
  const auto m = uniformize(enumerate_states(presets::tiny()));
  EXPECT_THROW(value_iteration(m, 0.0), ContractViolation);
}

TEST(ValueIteration, MoreIncomeNeverLowersValue) {
  auto base = testing::two_by_two();
  base.epsilon = 1e-9;
  auto richer = base;
  richer.income[1] += 0.5;
  const auto mb = uniformize(enumerate_states(base));
  const auto mr = uniformize(enumerate_states(richer));
  const auto vb = value_iteration(mb, base.epsilon).value;
  const auto vr = value_iteration(mr, richer.epsilon).value;
  const double slack = 2.0 * value_error_bound(mb, base.epsilon);
  for (std::size_t s = 0; s < vb.size(); ++s) EXPECT_GE(vr[s], vb[s] - slack);
}

TEST(GreedyPolicy, TieBreakPrefersHold) {
  const auto m = uniformize(enumerate_states(testing::zero_reward(presets::tiny())));
  const std::vector<double> zero(m.state_count(), 0.0);
  for (Action a : greedy_policy(m, zero)) EXPECT_EQ(a, Action::Hold);
  for (Action a : greedy_policy(m, zero, true)) EXPECT_EQ(a, Action::Hold);
}

TEST(Solve, RefusesOversizedSpace) {
  EXPECT_THROW(solve(presets::tiny(), 5), StateSpaceTooLarge);
}

TEST(Solve, TinyPolicyCoversEveryState) {
  const Solution sol = solve(presets::tiny());
  EXPECT_EQ(sol.policy.action.size(), 15u);
  EXPECT_EQ(sol.policy.value.size(), 15u);
}

TEST(ComplexityBounds, HandValues) {
  const auto b = complexity_bounds(presets::tiny(), 0.9);
  EXPECT_DOUBLE_EQ(b.space_bound, 8.0);
  EXPECT_NEAR(b.time_bound, 80.0 * std::log(10.0), 1e-9);
  EXPECT_NEAR(b.time_bound, 184.2, 0.05);
}

TEST(ComplexityBounds, ZeroDiscountGivesZeroTime) {
  EXPECT_EQ(complexity_bounds(presets::tiny(), 0.0).time_bound, 0.0);
}

TEST(ComplexityBounds, DoublingNodeTermDoublesSpace) {
  auto one = presets::tiny();
  auto three = one;
  three.n_nodes = 3;
  three.capacity = {1, 1, 1};
  EXPECT_DOUBLE_EQ(complexity_bounds(three, 0.9).space_bound / complexity_bounds(one, 0.9).space_bound, 2.0);
}

TEST(ComplexityBounds, RejectsDiscountOutsideUnitInterval) {
  EXPECT_THROW(complexity_bounds(presets::tiny(), 1.0), ContractViolation);
  EXPECT_THROW(complexity_bounds(presets::tiny(), -0.1), ContractViolation);
}

}  // namespace
}  // namespace edgescale
