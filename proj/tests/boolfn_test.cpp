#include "agency/boolfn.hpp"

#include <gtest/gtest.h>

#include <functional>

#include "agency/solver_mixed.hpp"
#include "agency/solver_pure.hpp"
#include "oracles.hpp"

namespace agency {
namespace {

// Every monotone function on n inputs, by extending monotone functions on
// n - 1 inputs: f = h | (x_n & g) with h <= g pointwise.
std::vector<BoolFunction> all_monotone(int n) {
  if (n == 1) return {BoolFunction(1, {false, false}), BoolFunction(1, {false, true}), BoolFunction(1, {true, true})};
  const auto smaller = all_monotone(n - 1);
  std::vector<BoolFunction> out;
  const std::size_t half = std::size_t{1} << (n - 1);
  for (const auto& h : smaller)
    for (const auto& g : smaller) {
      bool below = true;
      for (AgentSet x = 0; x < half && below; ++x) below = !h(x) || g(x);
      if (!below) continue;
      std::vector<bool> truth(2 * half);
      for (AgentSet x = 0; x < half; ++x) truth[x] = h(x), truth[x + half] = g(x);
      out.emplace_back(n, std::move(truth));
    }
  return out;
}

TEST(BoolFunctionTest, MonotoneCountsMatchDedekind) {
  // Dedekind numbers 3, 6, 20, 168
  EXPECT_EQ(all_monotone(1).size(), 3U);
  EXPECT_EQ(all_monotone(2).size(), 6U);
  EXPECT_EQ(all_monotone(3).size(), 20U);
  EXPECT_EQ(all_monotone(4).size(), 168U);
  for (const auto& f : all_monotone(3)) EXPECT_TRUE(is_monotone(f));
}

TEST(FormulaTest, ParsesPrecedence) {
  const auto f = parse_formula("x1 & x2 | x3", 3);
  EXPECT_EQ(f, BoolFunction::from_predicate(3, [](AgentSet x) { return (x & 0b11) == 0b11 || (x & 0b100); }));
  EXPECT_EQ(parse_formula("(x1 | x2) & x3", 3),
            BoolFunction::from_predicate(3, [](AgentSet x) { return (x & 0b11) && (x & 0b100); }));
  EXPECT_EQ(parse_formula("x1", 2), BoolFunction::from_predicate(2, [](AgentSet x) { return x & 1; }));
}

TEST(FormulaTest, Errors) {
  try {
    parse_formula("x1 & (x2 | x3", 3, 7);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7);
  }
  EXPECT_THROW(parse_formula("x4", 3), ParseError);
  EXPECT_THROW(parse_formula("x1 &", 2), ParseError);
  EXPECT_THROW(parse_formula("y1", 2), ParseError);
  EXPECT_THROW(parse_formula("", 2), ParseError);
}

TEST(PredicateTest, Examples) {
  const auto c13 = parse_formula("x1 & x3", 3);
  const auto b = is_conjunction(c13);
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, 0b101U);
  EXPECT_FALSE(is_conjunction(parse_formula("x1 | x2", 2)));
  const BoolFunction bad = BoolFunction::from_predicate(3, [](AgentSet x) { return x == 0b110; });
  EXPECT_FALSE(is_monotone(bad));
  const BoolFunction one = BoolFunction::from_predicate(2, [](AgentSet) { return true; });
  EXPECT_TRUE(is_constant(one));
  ASSERT_TRUE(is_conjunction(one));
  EXPECT_EQ(*is_conjunction(one), 0U);
  EXPECT_FALSE(is_conjunction(BoolFunction::from_predicate(2, [](AgentSet) { return false; })));
}

TEST(OrRestrictionTest, Examples) {
  const auto r = find_or_restriction(BoolFunction::disjunction(2));
  EXPECT_EQ(r.assignment, (std::vector<int>{-1, -1}));
  EXPECT_EQ(r.first, 0);
  EXPECT_EQ(r.second, 1);

  const auto f = parse_formula("x1 & x2 | x3", 3);
  const auto s = find_or_restriction(f);
  EXPECT_TRUE(restriction_is_or(f, s));
}

TEST(OrRestrictionTest, PreconditionErrors) {
  EXPECT_THROW(find_or_restriction(BoolFunction::conjunction(3)), InvalidInput);
  EXPECT_THROW(find_or_restriction(BoolFunction::from_predicate(2, [](AgentSet) { return true; })), InvalidInput);
  EXPECT_THROW(find_or_restriction(BoolFunction::from_predicate(2, [](AgentSet x) { return x == 1; })), InvalidInput);
  EXPECT_THROW(find_or_restriction(BoolFunction::disjunction(1)), InvalidInput);
}

TEST(OrRestrictionTest, ExhaustiveUpToFourInputs) {
  int checked = 0;
  for (int n = 2; n <= 4; ++n)
    for (const auto& f : all_monotone(n)) {
      if (is_constant(f) || is_conjunction(f)) continue;
      const auto r = find_or_restriction(f);
      EXPECT_TRUE(restriction_is_or(f, r));
      ++checked;
    }
  // 168 - 2 constants - 15 nonempty conjunctions at n = 4, and so on
  EXPECT_EQ(checked, (6 - 2 - 3) + (20 - 2 - 7) + (168 - 2 - 15));
}

TEST(StructuredTest, ClosedForms) {
  testing::Rng rng(131);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 5;
    std::vector<double> g(n), d(n), c(n, 1.0);
    for (int i = 0; i < n; ++i) {
      g[i] = testing::uniform(rng, 0.01, 0.6);
      d[i] = testing::uniform(rng, g[i] + 0.01, 1.0);
    }
    const auto and_t = build_structured({BoolFunction::conjunction(n), g, d, c});
    const auto or_t = build_structured({BoolFunction::disjunction(n), g, d, c});
    const auto and_ref = testing::and_table(g, d), or_ref = testing::or_table(g, d);
    for (AgentSet a = 0; a < and_t.profiles(); ++a) {
      EXPECT_NEAR(and_t[a], and_ref[a], 1e-12);
      EXPECT_NEAR(or_t[a], or_ref[a], 1e-12);
    }
  }
}

TEST(StructuredTest, MatchesOutcomeEnumeration) {
  testing::Rng rng(137);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<double> g(n), d(n);
    for (int i = 0; i < n; ++i) {
      g[i] = testing::uniform(rng, 0.05, 0.5);
      d[i] = testing::uniform(rng, g[i] + 0.05, 1.0);
    }
    const auto f = BoolFunction::majority(n);
    const auto t = build_structured({f, g, d, std::vector<double>(n, 1.0)});
    for (AgentSet a = 0; a < t.profiles(); ++a)
      EXPECT_NEAR(t[a], testing::oracle_structured([&](std::size_t x) { return f(x); }, a, g, d), 1e-12);
  }
}

TEST(StructuredTest, Examples) {
  const auto a = build_structured({BoolFunction::conjunction(2), {0.1, 0.1}, {0.9, 0.9}, {1, 1}});
  EXPECT_NEAR(a[0b11], 0.81, 1e-12);
  EXPECT_NEAR(a[0b00], 0.01, 1e-12);
  const auto o = build_structured({BoolFunction::disjunction(2), {0.09, 0.09}, {0.91, 0.91}, {1, 1}});
  EXPECT_NEAR(o[0b00], 0.1719, 1e-12);
  EXPECT_NEAR(o[0b11], 0.9919, 1e-12);
  const auto m = build_structured({BoolFunction::majority(3), {0.2, 0.2, 0.2}, {0.8, 0.8, 0.8}, {1, 1, 1}});
  // 0.8*0.8 (both effort tasks succeed) + 2 * 0.8*0.2*0.2 (one of them plus the shirker)
  EXPECT_NEAR(m[0b011], 0.704, 1e-12);
}

TEST(StructuredTest, Errors) {
  EXPECT_THROW(build_structured({BoolFunction::conjunction(2), {0.0, 0.1}, {0.9, 0.9}, {1, 1}}), InvalidInput);
  EXPECT_THROW(build_structured({BoolFunction::disjunction(2), {0.5, 0.1}, {0.4, 0.9}, {1, 1}}), InvalidInput);
  EXPECT_THROW(build_structured({BoolFunction::disjunction(2), {0.1}, {0.9}, {1}}), InvalidInput);
  const BoolFunction bad = BoolFunction::from_predicate(2, [](AgentSet x) { return x == 1; });
  EXPECT_THROW(build_structured({bad, {0.1, 0.1}, {0.9, 0.9}, {1, 1}}), InvalidInput);
  EXPECT_THROW(build_structured({BoolFunction::disjunction(17), std::vector<double>(17, 0.1),
                                 std::vector<double>(17, 0.9), std::vector<double>(17, 1.0)}),
               CapacityError);
}

TEST(StructuredTest, AndIsIrsOrIsDrs) {
  testing::Rng rng(139);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<double> g(n), d(n), c(n, 1.0);
    for (int i = 0; i < n; ++i) {
      g[i] = testing::uniform(rng, 0.01, 0.6);
      d[i] = testing::uniform(rng, g[i] + 0.01, 1.0);
    }
    EXPECT_TRUE(exhibits_irs(classify_returns(build_structured({BoolFunction::conjunction(n), g, d, c}))));
    EXPECT_TRUE(exhibits_drs(classify_returns(build_structured({BoolFunction::disjunction(n), g, d, c}))));
  }
}

double ratio_at(const StructuredParams& p, double v) {
  const Technology t = build_structured(p);
  return solve_mixed(t, v).utility / solve_pure(t, v).utility;
}

TEST(EmbeddingTest, OrGivesSecondExampleParameters) {
  const auto p = build_nontrivial_pop_instance(BoolFunction::disjunction(2));
  EXPECT_EQ(p.gamma, (std::vector<double>{0.0001, 0.0001}));
  EXPECT_EQ(p.delta, (std::vector<double>{0.9, 0.9}));
  EXPECT_EQ(p.costs, (std::vector<double>{1, 1}));
}

TEST(EmbeddingTest, RatiosAboveOne) {
  EXPECT_GE(ratio_at(build_nontrivial_pop_instance(parse_formula("x1 & x2 | x3", 3), 1e-3), 233), 1.02);
  EXPECT_GT(ratio_at(build_nontrivial_pop_instance(BoolFunction::majority(3), 1e-3), 233), 1.01);
  EXPECT_THROW(build_nontrivial_pop_instance(BoolFunction::conjunction(3)), InvalidInput);
  EXPECT_THROW(build_nontrivial_pop_instance(BoolFunction::disjunction(2), 0.5), InvalidInput);
}

}  // namespace
}  // namespace agency
