#pragma once

// Structured technologies. Each agent's task succeeds independently, with
// probability delta_i under effort and gamma_i without; a monotone Boolean
// function of the task outcomes decides project success.

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agency/error.hpp"
#include "agency/technology.hpp"

namespace agency {

/// Truth table over n inputs, bitmask-indexed (input x_1 is bit 0).
class BoolFunction {
 public:
  BoolFunction(int n, std::vector<bool> truth) : n_(n), truth_(std::move(truth)) {
    if (n < 1) throw InvalidInput("boolean function needs at least one input");
    if (n > kMaxAgents) throw CapacityError("boolean functions support at most 20 inputs");
    if (truth_.size() != (std::size_t{1} << n)) throw InvalidInput("truth table size must be 2^n");
  }

  template <typename Pred>
  static BoolFunction from_predicate(int n, Pred pred) {
    if (n < 1 || n > kMaxAgents) throw CapacityError("boolean functions support 1 to 20 inputs");
    std::vector<bool> truth(std::size_t{1} << n);
    for (AgentSet x = 0; x < truth.size(); ++x) truth[x] = pred(x);
    return BoolFunction(n, std::move(truth));
  }

  static BoolFunction conjunction(int n) {
    return from_predicate(n, [all = full_set(n)](AgentSet x) { return x == all; });
  }
  static BoolFunction disjunction(int n) {
    return from_predicate(n, [](AgentSet x) { return x != 0; });
  }
  static BoolFunction majority(int n) {
    return from_predicate(n, [n](AgentSet x) { return 2 * set_size(x) > n; });
  }

  int arity() const { return n_; }
  std::size_t size() const { return truth_.size(); }
  bool operator()(AgentSet x) const { return truth_[x]; }
  const std::vector<bool>& truth() const { return truth_; }

  friend bool operator==(const BoolFunction&, const BoolFunction&) = default;

 private:
  int n_;
  std::vector<bool> truth_;
};

// ---------------------------------------------------------------------------
// Formula syntax: x<i> (1-based), '&', '|', parentheses; '&' binds tighter.

namespace detail {

struct FormulaNode {
  enum class Kind { Var, And, Or } kind;
  int var = -1;
  std::unique_ptr<FormulaNode> lhs, rhs;

  bool eval(AgentSet x) const {
    switch (kind) {
      case Kind::Var: return contains(x, var);
      case Kind::And: return lhs->eval(x) && rhs->eval(x);
      case Kind::Or: return lhs->eval(x) || rhs->eval(x);
    }
    return false;
  }
};

class FormulaParser {
 public:
  FormulaParser(std::string_view text, int arity, int line) : text_(text), arity_(arity), line_(line) {}

  std::unique_ptr<FormulaNode> parse() {
    auto node = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "' in formula");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<FormulaNode> parse_or() {
    auto node = parse_and();
    while (accept('|')) {
      auto parent = std::make_unique<FormulaNode>(FormulaNode{FormulaNode::Kind::Or});
      parent->lhs = std::move(node);
      parent->rhs = parse_and();
      node = std::move(parent);
    }
    return node;
  }

  std::unique_ptr<FormulaNode> parse_and() {
    auto node = parse_atom();
    while (accept('&')) {
      auto parent = std::make_unique<FormulaNode>(FormulaNode{FormulaNode::Kind::And});
      parent->lhs = std::move(node);
      parent->rhs = parse_atom();
      node = std::move(parent);
    }
    return node;
  }

  std::unique_ptr<FormulaNode> parse_atom() {
    if (accept('(')) {
      auto node = parse_or();
      if (!accept(')')) fail("missing ')' in formula");
      return node;
    }
    if (!accept('x')) fail("expected x<i> or '(' in formula");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("variable without index in formula");
    const int index = std::stoi(std::string(text_.substr(start, pos_ - start)));
    if (index < 1 || index > arity_)
      fail("variable x" + std::to_string(index) + " outside 1.." + std::to_string(arity_));
    auto node = std::make_unique<FormulaNode>(FormulaNode{FormulaNode::Kind::Var});
    node->var = index - 1;
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int arity_;
  int line_;
};

}  // namespace detail

inline BoolFunction parse_formula(std::string_view text, int arity, int line = 1) {
  if (arity < 1 || arity > kMaxAgents) throw CapacityError("formula arity must be 1..20");
  const auto root = detail::FormulaParser(text, arity, line).parse();
  return BoolFunction::from_predicate(arity, [&](AgentSet x) { return root->eval(x); });
}

// ---------------------------------------------------------------------------
// Properties

inline bool is_monotone(const BoolFunction& f) {
  for (AgentSet x = 0; x < f.size(); ++x)
    for (int i = 0; i < f.arity(); ++i)
      if (!contains(x, i) && f(x) && !f(x | agent_bit(i))) return false;
  return true;
}

inline bool is_constant(const BoolFunction& f) {
  for (AgentSet x = 1; x < f.size(); ++x)
    if (f(x) != f(0)) return false;
  return true;
}

/// The set B with f(x) = AND_{i in B} x_i, if any (B empty for constant 1).
inline std::optional<AgentSet> is_conjunction(const BoolFunction& f) {
  AgentSet meet = full_set(f.arity());
  bool any = false;
  for (AgentSet x = 0; x < f.size(); ++x)
    if (f(x)) meet &= x, any = true;
  if (!any) return std::nullopt;
  for (AgentSet x = 0; x < f.size(); ++x)
    if (f(x) != ((x & meet) == meet)) return std::nullopt;
  return meet;
}

/// An assignment to all but two inputs under which f reduces to x_i | x_j.
struct OrRestriction {
  std::vector<int> assignment;  // -1 free, otherwise the fixed bit
  int first = -1;
  int second = -1;
};

/// f with the fixed inputs substituted, as a function of the free inputs
/// (in increasing order).
inline BoolFunction restrict_function(const BoolFunction& f, const std::vector<int>& assignment) {
  std::vector<int> free;
  AgentSet fixed_ones = 0;
  for (int i = 0; i < f.arity(); ++i) {
    if (assignment[i] < 0) free.push_back(i);
    else if (assignment[i] == 1) fixed_ones |= agent_bit(i);
  }
  if (free.empty()) throw InvalidInput("restriction leaves no free inputs");
  return BoolFunction::from_predicate(static_cast<int>(free.size()), [&](AgentSet y) {
    AgentSet x = fixed_ones;
    for (std::size_t k = 0; k < free.size(); ++k)
      if (contains(y, static_cast<int>(k))) x |= agent_bit(free[k]);
    return f(x);
  });
}

inline bool restriction_is_or(const BoolFunction& f, const OrRestriction& r) {
  int free = 0;
  for (int i = 0; i < f.arity(); ++i) free += r.assignment[i] < 0;
  if (free != 2 || r.first == r.second || r.assignment[r.first] >= 0 || r.assignment[r.second] >= 0) return false;
  return restrict_function(f, r.assignment) == BoolFunction::disjunction(2);
}

namespace detail {

inline bool constant_or_conjunction(const BoolFunction& g) { return is_constant(g) || is_conjunction(g); }

// Induction on the number of inputs: split on an input the function depends
// on; recurse into whichever cofactor is neither constant nor a conjunction.
// When both cofactors are conjunctions, some x_j is in the 0-cofactor's
// conjunction but not the 1-cofactor's, and pinning everything else to 1
// leaves x_i | x_j.
inline OrRestriction find_or_restriction(const BoolFunction& f, std::vector<int> assignment) {
  std::vector<int> free;
  for (int i = 0; i < f.arity(); ++i)
    if (assignment[i] < 0) free.push_back(i);
  const BoolFunction r = restrict_function(f, assignment);

  int split = -1;
  for (std::size_t k = 0; k < free.size() && split < 0; ++k) {
    for (AgentSet y = 0; y < r.size(); ++y) {
      if (!contains(y, static_cast<int>(k)) && r(y) != r(y | agent_bit(static_cast<int>(k)))) {
        split = static_cast<int>(k);
        break;
      }
    }
  }

  auto low = assignment, high = assignment;
  low[free[split]] = 0;
  high[free[split]] = 1;
  const BoolFunction h = restrict_function(f, low), g = restrict_function(f, high);
  if (!constant_or_conjunction(h)) return find_or_restriction(f, std::move(low));
  if (!constant_or_conjunction(g)) return find_or_restriction(f, std::move(high));

  // cofactors are over free \ {split}, in order
  std::vector<int> rest;
  for (int i : free)
    if (i != free[split]) rest.push_back(i);
  const AgentSet bh = *is_conjunction(h), bg = *is_conjunction(g);
  int partner = -1;
  for (std::size_t k = 0; k < rest.size(); ++k)
    if (contains(bh, static_cast<int>(k)) && !contains(bg, static_cast<int>(k))) {
      partner = rest[k];
      break;
    }
  OrRestriction out{assignment, free[split], partner};
  for (int i : rest)
    if (i != partner) out.assignment[i] = 1;
  if (out.first > out.second) std::swap(out.first, out.second);
  return out;
}

}  // namespace detail

inline OrRestriction find_or_restriction(const BoolFunction& f) {
  if (f.arity() < 2) throw InvalidInput("need at least two inputs");
  if (!is_monotone(f)) throw InvalidInput("function is not monotone");
  if (is_constant(f)) throw InvalidInput("function is constant");
  if (is_conjunction(f)) throw InvalidInput("function is a conjunction");
  return detail::find_or_restriction(f, std::vector<int>(f.arity(), -1));
}

// ---------------------------------------------------------------------------
// Structured technologies

inline constexpr int kMaxStructuredAgents = 16;

struct StructuredParams {
  BoolFunction f;
  std::vector<double> gamma;
  std::vector<double> delta;
  std::vector<double> costs;
};

inline void check_structured(const StructuredParams& p) {
  const int n = p.f.arity();
  if (n > kMaxStructuredAgents) throw CapacityError("structured technologies support at most 16 agents");
  if (p.gamma.size() != static_cast<std::size_t>(n) || p.delta.size() != static_cast<std::size_t>(n) ||
      p.costs.size() != static_cast<std::size_t>(n))
    throw InvalidInput("gamma, delta and costs need one entry per agent");
  for (int i = 0; i < n; ++i) {
    if (!(p.gamma[i] >= 0.0 && p.gamma[i] < 1.0))
      throw InvalidInput("gamma outside [0, 1) for agent " + std::to_string(i + 1));
    if (!(p.delta[i] > p.gamma[i] && p.delta[i] <= 1.0))
      throw InvalidInput("need gamma < delta <= 1 for agent " + std::to_string(i + 1));
  }
  if (!is_monotone(p.f)) throw InvalidInput("success function is not monotone");
}

/// t(a) = P[f(x) = 1] with x_i ~ Bernoulli(a_i ? delta_i : gamma_i). The map
/// from f's truth table to t is a tensor product of 2x2 kernels, applied one
/// input at a time.
inline Technology build_structured(const StructuredParams& p) {
  check_structured(p);
  const int n = p.f.arity();
  std::vector<double> table(p.f.size());
  for (AgentSet x = 0; x < table.size(); ++x) table[x] = p.f(x) ? 1.0 : 0.0;
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t a = 0; a < table.size(); ++a) {
      if (a & bit) continue;
      const double fail = table[a], succeed = table[a | bit];
      table[a] = (1.0 - p.gamma[i]) * fail + p.gamma[i] * succeed;
      table[a | bit] = (1.0 - p.delta[i]) * fail + p.delta[i] * succeed;
    }
  }
  Technology tech(p.costs, std::move(table));
  require_valid(tech);
  return tech;
}

/// Embeds the two-agent OR instance with gamma = 0.0001, delta = 0.9 into f:
/// the two free inputs of an OR restriction get those parameters, inputs
/// pinned to 1 get (gamma, delta) = (1 - 2 eps, 1 - eps), inputs pinned to 0
/// get (eps, 2 eps); all costs are 1.
inline StructuredParams build_nontrivial_pop_instance(const BoolFunction& f, double eps = 1e-3) {
  if (!(eps > 0.0 && eps <= 0.01)) throw InvalidInput("epsilon must be in (0, 0.01]");
  const OrRestriction r = find_or_restriction(f);
  const int n = f.arity();
  StructuredParams p{f, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n, 1.0)};
  for (int i = 0; i < n; ++i) {
    if (r.assignment[i] < 0) {
      p.gamma[i] = 0.0001;
      p.delta[i] = 0.9;
    } else if (r.assignment[i] == 1) {
      p.gamma[i] = 1.0 - 2.0 * eps;
      p.delta[i] = 1.0 - eps;
    } else {
      p.gamma[i] = eps;
      p.delta[i] = 2.0 * eps;
    }
  }
  return p;
}

}  // namespace agency
