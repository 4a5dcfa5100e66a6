#include "agency/solver_mixed.hpp"

#include <gtest/gtest.h>

#include "agency/solver_pure.hpp"
#include "oracles.hpp"

namespace agency {
namespace {

using testing::or_table;

Technology example_or() { return Technology({1, 1}, or_table({0.09, 0.09}, {0.91, 0.91})); }
Technology second_or() { return Technology({1, 1}, or_table({0.0001, 0.0001}, {0.9, 0.9})); }

const MixedProfile kEqual({0.92, 0.92});

TEST(IndifferencePaymentTest, Examples) {
  EXPECT_NEAR(indifference_payment(example_or(), 0, kEqual), 7.837, 0.005);
  EXPECT_NEAR(indifference_payment(second_or(), 0, kEqual), 6.461, 0.005);
  const auto t = example_or();
  EXPECT_DOUBLE_EQ(indifference_payment(t, 1, MixedProfile({0.0, 0.3})), payment_pure(t, 0b10, 1));
}

TEST(AgentUtilityTest, Examples) {
  const auto t = example_or();
  EXPECT_NEAR(agent_utility(t, 0, kEqual, 7.8375), 6.728, 0.01);
  EXPECT_EQ(agent_utility(t, 0, MixedProfile({0.0, 0.4}), 0.0), 0.0);
  const double p = indifference_payment(t, 0, kEqual);
  EXPECT_NEAR(agent_utility(t, 0, kEqual, p), t.cost(0) * (eval_mixed(t, kEqual) / marginal(t, 0, kEqual) - 0.92),
              1e-12);
}

TEST(AgentUtilityTest, IndifferenceAcrossOwnProbability) {
  testing::Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const auto t = testing::random_technology(rng, n);
    MixedProfile q(testing::random_profile(rng, n));
    const int i = trial % n;
    const double p = indifference_payment(t, i, q);
    auto at = [&](double x) {
      MixedProfile r = q;
      r.q[i] = x;
      return agent_utility(t, i, r, p);
    };
    const double x = testing::uniform(rng, 0.01, 0.99);
    EXPECT_NEAR(at(0.0), at(x), 1e-10);
    EXPECT_NEAR(at(0.0), at(1.0), 1e-10);
  }
}

TEST(PrincipalUtilityTest, Examples) {
  EXPECT_NEAR(principal_utility_mixed(example_or(), kEqual, 348), 324.279, 0.05);
  EXPECT_NEAR(principal_utility_mixed(second_or(), kEqual, 233), 213.569, 0.05);
}

TEST(PrincipalUtilityTest, DegenerateMatchesPure) {
  testing::Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const auto t = testing::random_technology(rng, n);
    const double v = testing::uniform(rng, 0.1, 100);
    for (AgentSet s = 0; s < t.profiles(); ++s)
      EXPECT_NEAR(principal_utility_mixed(t, MixedProfile::from_set(n, s), v), utility_pure(t, s, v), 1e-10);
  }
}

TEST(VerifyMixedNashTest, Examples) {
  const auto t = example_or();
  const std::vector<double> pay{7.8375, 7.8375};
  EXPECT_TRUE(verify_mixed_nash(t, kEqual, pay, 1e-3));
  EXPECT_FALSE(verify_mixed_nash(t, MixedProfile({0.92, 0.5}), pay, 1e-3));
  EXPECT_TRUE(verify_mixed_nash(t, MixedProfile({0, 0}), std::vector<double>{0, 0}));
  const auto c = make_mixed_contract(t, kEqual, 348);
  EXPECT_TRUE(verify_mixed_nash(t, kEqual, c.payments));
}

TEST(SolveMixedTest, ExampleFirstCase) {
  const auto c = solve_mixed(example_or(), 348);
  EXPECT_FALSE(c.degenerate);
  EXPECT_GE(c.utility, 324.279 - 0.05);
  EXPECT_NEAR(c.utility, 324.285508, 1e-5);
  ASSERT_EQ(c.profile.mixers(), 0b11U);
  EXPECT_LE(std::abs(c.profile[0] - c.profile[1]), 1e-3);
  EXPECT_NEAR(c.profile[0], 0.923086, 1e-5);
  EXPECT_TRUE(verify_mixed_nash(example_or(), c.profile, c.payments));
}

TEST(SolveMixedTest, ExampleSecondCase) {
  const auto c = solve_mixed(second_or(), 233);
  EXPECT_FALSE(c.degenerate);
  EXPECT_GE(c.utility, 213.5);
  EXPECT_NEAR(c.utility, 213.570775, 1e-5);
}

TEST(SolveMixedTest, GeneralPathAgreesWithSymmetricPath) {
  MixedSearchOptions general;
  general.symmetric_search = false;
  const auto a = solve_mixed(example_or(), 348, general);
  const auto b = solve_mixed(example_or(), 348);
  EXPECT_NEAR(a.utility, b.utility, 1e-7);
  EXPECT_NEAR(a.profile[0], a.profile[1], 1e-3);
  EXPECT_NEAR(a.profile[0], b.profile[0], 1e-3);
}

TEST(SolveMixedTest, IrsOptimaAreDegenerate) {
  testing::Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = testing::random_irs_technology(rng, 2 + trial % 3);
    const double scale = testing::interesting_value_scale(t);
    for (int k = 1; k <= 5; ++k) EXPECT_TRUE(solve_mixed(t, scale * k / 5).degenerate);
  }
}

TEST(SolveMixedTest, LowValueHiresNobody) {
  const auto c = solve_mixed(example_or(), 0.5);
  EXPECT_EQ(c.profile.support(), 0U);
  EXPECT_DOUBLE_EQ(c.utility, example_or()[0] * 0.5);
}

TEST(SolveMixedTest, NeverBelowPure) {
  testing::Rng rng(73);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = testing::random_technology(rng, 1 + trial % 4);
    const double v = testing::uniform(rng, 0.1, testing::interesting_value_scale(t));
    const auto c = solve_mixed(t, v);
    EXPECT_GE(c.utility, solve_pure(t, v).utility - 1e-9);
    EXPECT_NEAR(c.utility, principal_utility_mixed(t, c.profile, v), 1e-9 * (1 + v));
    EXPECT_TRUE(verify_mixed_nash(t, c.profile, c.payments));
  }
}

TEST(SolveMixedTest, Deterministic) {
  testing::Rng rng(79);
  const auto t = testing::random_technology(rng, 3);
  const auto a = solve_mixed(t, 20), b = solve_mixed(t, 20);
  EXPECT_EQ(a.profile.q, b.profile.q);
  EXPECT_EQ(a.utility, b.utility);
}

TEST(SolveMixedTest, CapEnforced) {
  const Technology t(std::vector<double>(11, 1.0), or_table(std::vector<double>(11, 0.1), std::vector<double>(11, 0.5)));
  EXPECT_THROW(solve_mixed(t, 10), CapacityError);
}

TEST(SolveMixedTest, MonotoneInValue) {
  testing::Rng rng(83);
  for (int trial = 0; trial < 6; ++trial) {
    const auto t = trial % 2 ? testing::random_technology(rng, 2) : testing::random_or_technology(rng, 2);
    const double scale = testing::interesting_value_scale(t);
    MixedContract prev = solve_mixed(t, scale / 30);
    for (int k = 2; k <= 30; ++k) {
      const auto cur = solve_mixed(t, scale * k / 30);
      EXPECT_GE(cur.utility, prev.utility - 1e-6);
      EXPECT_GE(cur.success, prev.success - 1e-6);
      EXPECT_GE(cur.total_payment, prev.total_payment - 1e-6);
      prev = cur;
    }
  }
}

TEST(GridOracleTest, Examples) {
  const auto g = grid_oracle_mixed(example_or(), 348, 1e-3);
  EXPECT_NEAR(g.utility, 324.279, 0.05);
  testing::Rng rng(89);
  const auto irs = testing::random_irs_technology(rng, 2);
  for (int k = 1; k <= 4; ++k)
    EXPECT_TRUE(grid_oracle_mixed(irs, testing::interesting_value_scale(irs) * k / 4, 1e-2).degenerate);
}

TEST(GridOracleTest, MatchesSolverOnRandomPairs) {
  testing::Rng rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = testing::random_technology(rng, 2);
    const double v = testing::uniform(rng, 0.1, testing::interesting_value_scale(t));
    const auto g = grid_oracle_mixed(t, v, 1e-3);
    const auto s = solve_mixed(t, v);
    EXPECT_GE(s.utility, g.utility - 1e-9);
    EXPECT_NEAR(s.utility, g.utility, 1e-3 * (1 + v) * 1e-1);
  }
}

TEST(GridOracleTest, RefusesInfeasibleGrids) {
  const Technology t({1, 1, 1}, or_table({0.1, 0.1, 0.1}, {0.5, 0.5, 0.5}));
  EXPECT_THROW(grid_oracle_mixed(t, 10, 1e-4), CapacityError);
  EXPECT_THROW(grid_oracle_mixed(t, 10, 0.3), InvalidInput);
  EXPECT_NO_THROW(grid_oracle_mixed(t, 10, 0.05));
}

TEST(PaymentBoundsTest, Examples) {
  const auto b = payment_bounds_check(example_or(), kEqual, 0);
  EXPECT_NEAR(b.lower, 1.340, 1e-3);
  EXPECT_NEAR(b.upper, 13.55, 1e-2);
  EXPECT_NEAR(b.actual, 7.837, 5e-3);
  EXPECT_TRUE(b.brackets());
  const auto d = payment_bounds_check(example_or(), MixedProfile({1, 1}), 0);
  EXPECT_DOUBLE_EQ(d.actual, payment_pure(example_or(), 0b11, 0));
  EXPECT_TRUE(d.brackets());
  EXPECT_THROW(payment_bounds_check(example_or(), MixedProfile({0, 1}), 0), InvalidInput);
}

TEST(PaymentBoundsTest, DrsAgentPaidAtLeastSolo) {
  testing::Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = testing::random_or_technology(rng, 2);
    const int i = t[0b01] >= t[0b10] ? 0 : 1;
    MixedProfile q({testing::uniform(rng, 0.05, 1), testing::uniform(rng, 0.05, 1)});
    EXPECT_GE(payment_bounds_check(t, q, i).actual, t.cost(i) / marginal(t, i, AgentSet{0}) - 1e-9);
  }
}

TEST(PaymentBoundsTest, RandomBracketsHold) {
  testing::Rng rng(103);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const auto t = testing::random_technology(rng, n);
    auto q = testing::random_profile(rng, n);
    q[trial % n] = testing::uniform(rng, 0.01, 1.0);
    const auto b = payment_bounds_check(t, MixedProfile(q), trial % n);
    EXPECT_GE(b.actual - b.lower, -1e-9);
    EXPECT_GE(b.upper - b.actual, -1e-9);
  }
}

TEST(StrongEqTest, ExampleCanonicalDeviation) {
  const auto t = example_or();
  const auto c = make_mixed_contract(t, kEqual, 348);
  const auto verdict = strong_eq_check(t, kEqual, c.payments);
  EXPECT_FALSE(verdict.is_strong);
  EXPECT_TRUE(verdict.canonical_applicable);
  ASSERT_TRUE(verdict.witness);
  EXPECT_EQ(verdict.witness->coalition, 0b11U);
  EXPECT_EQ(verdict.witness->profile.q, (std::vector<double>{1, 1}));
  for (double g : verdict.witness->gains) {
    EXPECT_NEAR(g, 0.046, 2e-3);
    EXPECT_GT(g, 0.01);
  }
  EXPECT_NEAR(agent_utility(t, 0, MixedProfile({1, 1}), c.payments[0]), 6.774, 0.01);
}

TEST(StrongEqTest, OptimalPureContractIsStrong) {
  testing::Rng rng(107);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const auto t = testing::random_technology(rng, n);
    const auto c = solve_pure(t, testing::uniform(rng, 0.1, testing::interesting_value_scale(t)));
    const auto verdict = strong_eq_check(t, MixedProfile::from_set(n, c.agents), c.payments);
    EXPECT_TRUE(verdict.is_strong) << "trial " << trial;
    EXPECT_FALSE(verdict.canonical_applicable);
  }
}

TEST(StrongEqTest, SingleMixerSkipsCanonical) {
  const auto t = example_or();
  const MixedProfile q({0.5, 1.0});
  const auto c = make_mixed_contract(t, q, 100);
  const auto verdict = strong_eq_check(t, q, c.payments);
  EXPECT_FALSE(verdict.canonical_applicable);
  EXPECT_GT(verdict.deviations_tested, 0);
  if (verdict.witness)
    for (double g : verdict.witness->gains) EXPECT_GT(g, 0.0);
}

TEST(StrongEqTest, MixedOptimaAreNeverStrong) {
  for (double g : {0.05, 0.09, 0.15, 0.25}) {
    const Technology t({1, 1}, or_table({g, g}, {1 - g, 1 - g}));
    for (double v : transition_points(t)) {
      const auto c = solve_mixed(t, v);
      if (set_size(c.profile.mixers()) < 2) continue;
      const auto verdict = strong_eq_check(t, c.profile, c.payments);
      EXPECT_FALSE(verdict.is_strong);
      ASSERT_TRUE(verdict.witness);
      for (double gain : verdict.witness->gains) EXPECT_GT(gain, 0.0);
    }
  }
}

}  // namespace
}  // namespace agency
