#pragma once

// Technologies: a success probability for every pure effort profile plus a
// per-agent effort cost. Profiles are bitmasks with agent 0 at the least
// significant bit; text output and the file formats number agents from 1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "agency/error.hpp"

namespace agency {

inline constexpr int kMaxAgents = 20;

/// Equality tolerance for returns-to-scale and anonymity tests, and the
/// margin required for strict monotonicity.
inline constexpr double kTableTolerance = 1e-12;

using AgentSet = std::uint32_t;

inline constexpr AgentSet agent_bit(int i) { return AgentSet{1} << i; }
inline constexpr bool contains(AgentSet s, int i) { return (s >> i) & 1U; }
inline int set_size(AgentSet s) { return std::popcount(s); }
inline constexpr AgentSet full_set(int n) { return n >= 32 ? ~AgentSet{0} : agent_bit(n) - 1; }

/// "{1,3}" style rendering with 1-based agent numbers.
inline std::string format_set(AgentSet s) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; s >> i; ++i) {
    if (!contains(s, i)) continue;
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

class Technology {
 public:
  Technology(std::vector<double> costs, std::vector<double> table)
      : costs_(std::move(costs)), table_(std::move(table)) {
    const auto n = costs_.size();
    if (n == 0) throw InvalidInput("technology needs at least one agent");
    if (n > static_cast<std::size_t>(kMaxAgents))
      throw CapacityError("technology has " + std::to_string(n) + " agents; at most " +
                          std::to_string(kMaxAgents) + " are supported");
    if (table_.size() != (std::size_t{1} << n))
      throw InvalidInput("success table has " + std::to_string(table_.size()) +
                         " entries; expected 2^" + std::to_string(n));
    for (double x : costs_)
      if (!std::isfinite(x)) throw InvalidInput("non-finite cost");
    for (double x : table_)
      if (!std::isfinite(x)) throw InvalidInput("non-finite success probability");
  }

  int agents() const { return static_cast<int>(costs_.size()); }
  std::size_t profiles() const { return table_.size(); }
  AgentSet everyone() const { return full_set(agents()); }

  std::span<const double> costs() const { return costs_; }
  std::span<const double> table() const { return table_; }
  double cost(int i) const { return costs_.at(static_cast<std::size_t>(i)); }

  /// t(a) for a pure profile; unchecked.
  double operator[](AgentSet a) const { return table_[a]; }

  bool identical_costs() const {
    return std::all_of(costs_.begin(), costs_.end(), [&](double c) {
      return std::abs(c - costs_.front()) <= kTableTolerance * std::max(1.0, std::abs(c));
    });
  }

 private:
  std::vector<double> costs_;
  std::vector<double> table_;
};

/// Effort probability per agent.
struct MixedProfile {
  std::vector<double> q;

  MixedProfile() = default;
  explicit MixedProfile(std::vector<double> probs) : q(std::move(probs)) {}

  static MixedProfile zeros(int n) { return MixedProfile(std::vector<double>(n, 0.0)); }

  static MixedProfile from_set(int n, AgentSet s) {
    MixedProfile p = zeros(n);
    for (int i = 0; i < n; ++i) p.q[i] = contains(s, i) ? 1.0 : 0.0;
    return p;
  }

  int agents() const { return static_cast<int>(q.size()); }
  double operator[](int i) const { return q[static_cast<std::size_t>(i)]; }

  AgentSet support() const {
    AgentSet s = 0;
    for (int i = 0; i < agents(); ++i)
      if (q[i] > 0.0) s |= agent_bit(i);
    return s;
  }

  /// Agents with q_i strictly inside (0, 1).
  AgentSet mixers() const {
    AgentSet s = 0;
    for (int i = 0; i < agents(); ++i)
      if (q[i] > 0.0 && q[i] < 1.0) s |= agent_bit(i);
    return s;
  }

  bool degenerate() const { return mixers() == 0; }

  /// The pure profile when degenerate.
  std::optional<AgentSet> as_set() const {
    if (!degenerate()) return std::nullopt;
    return support();
  }
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { NonPositiveCost, ZeroProbability, ProbabilityAboveOne, NonStrictMonotonicity };
  Kind kind;
  int agent = -1;        // offending agent, when applicable
  AgentSet profile = 0;  // witnessing profile (a_{-i} for monotonicity)
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (std::size_t k = 0; k < violations.size(); ++k) {
      if (k) os << "; ";
      os << violations[k].message;
    }
    return os.str();
  }
};

inline ValidationReport validate(const Technology& tech) {
  ValidationReport report;
  const int n = tech.agents();
  for (int i = 0; i < n; ++i) {
    if (!(tech.cost(i) > 0.0)) {
      report.violations.push_back({Violation::Kind::NonPositiveCost, i, 0,
                                   "non-positive cost for agent " + std::to_string(i + 1)});
    }
  }
  for (AgentSet a = 0; a < tech.profiles(); ++a) {
    if (!(tech[a] > 0.0)) {
      report.violations.push_back({Violation::Kind::ZeroProbability, -1, a,
                                   "zero success probability at profile " + format_set(a)});
    } else if (tech[a] > 1.0) {
      report.violations.push_back({Violation::Kind::ProbabilityAboveOne, -1, a,
                                   "success probability above 1 at profile " + format_set(a)});
    }
  }
  for (int i = 0; i < n; ++i) {
    for (AgentSet a = 0; a < tech.profiles(); ++a) {
      if (contains(a, i)) continue;
      if (!(tech[a | agent_bit(i)] - tech[a] > kTableTolerance)) {
        report.violations.push_back(
            {Violation::Kind::NonStrictMonotonicity, i, a,
             "non-strict monotonicity for agent " + std::to_string(i + 1) + " at others " +
                 format_set(a)});
      }
    }
  }
  return report;
}

/// Throws InvalidInput carrying the first violation.
inline void require_valid(const Technology& tech) {
  const auto report = validate(tech);
  if (!report.ok()) throw InvalidInput(report.violations.front().message);
}

// ---------------------------------------------------------------------------
// Evaluation

inline double eval_pure(const Technology& tech, AgentSet a) {
  if (a >= tech.profiles())
    throw InvalidInput("profile " + std::to_string(a) + " out of range for " +
                       std::to_string(tech.agents()) + " agents");
  return tech[a];
}

namespace detail {

inline void check_profile(const Technology& tech, const MixedProfile& q) {
  if (q.agents() != tech.agents())
    throw InvalidInput("mixed profile has " + std::to_string(q.agents()) + " entries; expected " +
                       std::to_string(tech.agents()));
  for (double x : q.q)
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("effort probability outside [0, 1]");
}

// Expectation of `table` under independent effort probabilities. Weights are
// built by doubling, so degenerate profiles produce exact 0/1 weights.
inline double expectation(std::span<const double> table, std::span<const double> q) {
  std::vector<double> w(table.size());
  w[0] = 1.0;
  std::size_t width = 1;
  for (double qi : q) {
    for (std::size_t a = 0; a < width; ++a) {
      w[a + width] = w[a] * qi;
      w[a] *= 1.0 - qi;
    }
    width <<= 1;
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < table.size(); ++a) sum += w[a] * table[a];
  return sum;
}

}  // namespace detail

inline double eval_mixed(const Technology& tech, const MixedProfile& q) {
  detail::check_profile(tech, q);
  return detail::expectation(tech.table(), q.q);
}

/// (t(0, q_{-i}), t(1, q_{-i})).
inline std::pair<double, double> conditional_success(const Technology& tech, int i,
                                                     const MixedProfile& q) {
  detail::check_profile(tech, q);
  if (i < 0 || i >= tech.agents()) throw InvalidInput("agent index out of range");
  std::vector<double> probs = q.q;
  probs[i] = 0.0;
  const double low = detail::expectation(tech.table(), probs);
  probs[i] = 1.0;
  const double high = detail::expectation(tech.table(), probs);
  return {low, high};
}

/// Delta_i(q_{-i}) = t(1, q_{-i}) - t(0, q_{-i}); q_i is ignored.
inline double marginal(const Technology& tech, int i, const MixedProfile& q) {
  const auto [low, high] = conditional_success(tech, i, q);
  return high - low;
}

/// Pure marginal contribution Delta_i(a_{-i}); bit i of `others` is ignored.
inline double marginal(const Technology& tech, int i, AgentSet others) {
  const AgentSet without = others & ~agent_bit(i);
  return tech[without | agent_bit(i)] - tech[without];
}

// ---------------------------------------------------------------------------
// Structure

enum class Returns { IRS, DRS, Both, Neither };

inline const char* to_string(Returns r) {
  switch (r) {
    case Returns::IRS: return "IRS";
    case Returns::DRS: return "DRS";
    case Returns::Both: return "BOTH";
    case Returns::Neither: return "NEITHER";
  }
  return "?";
}

/// Delta_i(upper) vs Delta_i(lower) for lower <= upper componentwise.
struct ReturnsWitness {
  int agent;
  AgentSet lower;
  AgentSet upper;
  double marginal_lower;
  double marginal_upper;
};

struct ReturnsClass {
  Returns kind;
  std::optional<ReturnsWitness> irs_violation;  // Delta decreased somewhere
  std::optional<ReturnsWitness> drs_violation;  // Delta increased somewhere
};

inline ReturnsClass classify_returns(const Technology& tech) {
  ReturnsClass out{Returns::Both, std::nullopt, std::nullopt};
  const int n = tech.agents();
  for (int i = 0; i < n && !(out.irs_violation && out.drs_violation); ++i) {
    const AgentSet others = tech.everyone() & ~agent_bit(i);
    // every upper profile, then every subprofile of it
    for (AgentSet upper = others;; upper = (upper - 1) & others) {
      const double du = marginal(tech, i, upper);
      for (AgentSet lower = upper;; lower = (lower - 1) & upper) {
        const double dl = marginal(tech, i, lower);
        if (!out.irs_violation && du < dl - kTableTolerance) out.irs_violation = {i, lower, upper, dl, du};
        if (!out.drs_violation && du > dl + kTableTolerance) out.drs_violation = {i, lower, upper, dl, du};
        if (lower == 0) break;
      }
      if (upper == 0) break;
    }
  }
  if (out.irs_violation && out.drs_violation) out.kind = Returns::Neither;
  else if (out.irs_violation) out.kind = Returns::DRS;
  else if (out.drs_violation) out.kind = Returns::IRS;
  return out;
}

inline bool exhibits_irs(const ReturnsClass& r) { return r.kind == Returns::IRS || r.kind == Returns::Both; }
inline bool exhibits_drs(const ReturnsClass& r) { return r.kind == Returns::DRS || r.kind == Returns::Both; }

/// Count-indexed success list t_0..t_n when the technology is anonymous
/// (identical costs, success depends only on the number of exerting agents).
inline std::optional<std::vector<double>> is_anonymous(const Technology& tech) {
  if (!tech.identical_costs()) return std::nullopt;
  const int n = tech.agents();
  std::vector<double> by_count(n + 1);
  std::vector<bool> seen(n + 1, false);
  for (AgentSet a = 0; a < tech.profiles(); ++a) {
    const int k = set_size(a);
    if (!seen[k]) {
      by_count[k] = tech[a];
      seen[k] = true;
    } else if (std::abs(by_count[k] - tech[a]) > kTableTolerance) {
      return std::nullopt;
    }
  }
  return by_count;
}

/// Technology over the agents of `s` (in increasing order) with everyone
/// else pinned to shirking.
inline Technology restrict_support(const Technology& tech, AgentSet s) {
  s &= tech.everyone();
  if (s == 0) throw InvalidInput("restriction needs a nonempty agent set");
  std::vector<int> members;
  for (int i = 0; i < tech.agents(); ++i)
    if (contains(s, i)) members.push_back(i);
  const int k = static_cast<int>(members.size());
  std::vector<double> costs(k);
  for (int j = 0; j < k; ++j) costs[j] = tech.cost(members[j]);
  std::vector<double> table(std::size_t{1} << k);
  for (AgentSet b = 0; b < table.size(); ++b) {
    AgentSet full = 0;
    for (int j = 0; j < k; ++j)
      if (contains(b, j)) full |= agent_bit(members[j]);
    table[b] = tech[full];
  }
  Technology out(std::move(costs), std::move(table));
  require_valid(out);
  return out;
}

}  // namespace agency
