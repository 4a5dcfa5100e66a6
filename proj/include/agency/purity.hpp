#pragma once

// Price of purity: the worst ratio over v between the optimal mixed and the
// optimal pure utility. The worst ratio sits at a transition point of the
// pure envelope, so only those values are evaluated. Known upper bounds are
// collected as named checks against the computed value.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agency/solver_mixed.hpp"
#include "agency/solver_pure.hpp"
#include "agency/technology.hpp"

namespace agency {

/// Slack allowed when comparing the computed price of purity with a bound.
inline constexpr double kBoundSlack = 1e-6;

/// 2(3 - 2 sqrt 3) / (3 (sqrt 3 - 2)), about 1.1547: the peak over delta of
/// the two-agent OR ratio t(1,1)/t(0,1) when gamma = 1 - delta.
inline const double kSymmetricOrBound =
    2.0 * (3.0 - 2.0 * std::sqrt(3.0)) / (3.0 * (std::sqrt(3.0) - 2.0));

struct BoundCheck {
  std::string name;
  double value = std::numeric_limits<double>::quiet_NaN();
  bool applicable = false;
  bool satisfied = true;
};

struct TransitionRatio {
  double v;
  double mixed;
  double pure;
  double ratio;
};

struct PurityReport {
  double pop = 1.0;
  double witness_v = 0.0;
  MixedContract mixed_at_witness;
  PureContract pure_at_witness;
  std::vector<TransitionRatio> ratios;
  std::vector<BoundCheck> bounds;
  std::optional<double> grid_oracle_pop;  // n <= 2 only
  std::optional<double> pou;

  bool bounds_hold() const {
    for (const auto& b : bounds)
      if (b.applicable && !b.satisfied) return false;
    return true;
  }
};

struct PurityOptions {
  MixedSearchOptions search;
  double oracle_resolution = 1e-3;  // 0 disables the grid cross-check
};

inline PurityReport pop(const Technology& tech, const PurityOptions& opts = {}) {
  const Envelope env = pure_envelope(tech);
  PurityReport report;
  bool first = true;
  for (double v : env.breakpoints) {
    const MixedContract mixed = solve_mixed(tech, v, opts.search);
    // both adjacent contracts share this value at the breakpoint
    const double pure = env.value(v);
    const double ratio = mixed.utility / pure;
    report.ratios.push_back({v, mixed.utility, pure, ratio});
    if (first || ratio > report.pop) {
      report.pop = ratio;
      report.witness_v = v;
      report.mixed_at_witness = mixed;
      report.pure_at_witness = solve_pure(tech, v);
      first = false;
    }
  }
  if (tech.agents() <= 2 && opts.oracle_resolution > 0.0) {
    double worst = 1.0;
    for (double v : env.breakpoints)
      worst = std::max(worst, grid_oracle_mixed(tech, v, opts.oracle_resolution).utility / env.value(v));
    report.grid_oracle_pop = worst;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Bounds

/// Holds for every technology.
inline double pop_bound_general(const Technology& tech) { return tech[tech.everyone()] / tech[0]; }

/// n, for anonymous technologies or DRS technologies with identical costs.
inline std::optional<double> pop_bound_n(const Technology& tech) {
  if (!tech.identical_costs()) return std::nullopt;
  if (is_anonymous(tech) || exhibits_drs(classify_returns(tech))) return static_cast<double>(tech.agents());
  return std::nullopt;
}

/// Two agents with identical costs: 2, or 3/2 when anonymous.
inline std::optional<double> pop_bound_two(const Technology& tech) {
  if (tech.agents() != 2 || !tech.identical_costs()) return std::nullopt;
  return is_anonymous(tech) ? 1.5 : 2.0;
}

/// t(N) / t({i*}) for the agent with the largest solo success; DRS with
/// identical costs.
inline std::optional<double> pop_bound_drs_single(const Technology& tech) {
  if (!tech.identical_costs() || !exhibits_drs(classify_returns(tech))) return std::nullopt;
  double best_single = 0.0;
  for (int i = 0; i < tech.agents(); ++i) best_single = std::max(best_single, tech[agent_bit(i)]);
  return tech[tech.everyone()] / best_single;
}

struct OrParams {
  std::vector<double> gamma;
  std::vector<double> delta;

  int agents() const { return static_cast<int>(gamma.size()); }

  bool anonymous() const {
    for (std::size_t i = 1; i < gamma.size(); ++i)
      if (std::abs(gamma[i] - gamma[0]) > kTableTolerance || std::abs(delta[i] - delta[0]) > kTableTolerance)
        return false;
    return true;
  }
};

/// t(1^n) / t(1, 0^{n-1}) for the anonymous OR technology.
inline double or_full_to_single_ratio(int n, double gamma, double delta) {
  return (1.0 - std::pow(1.0 - delta, n)) / (1.0 - (1.0 - delta) * std::pow(1.0 - gamma, n - 1));
}

struct NamedBound {
  std::string name;
  double value;
};

inline std::vector<NamedBound> pop_bound_or(const OrParams& params) {
  const int n = params.agents();
  if (n < 1 || params.delta.size() != params.gamma.size())
    throw InvalidInput("OR parameters need one gamma and one delta per agent");
  for (int i = 0; i < n; ++i) {
    const double g = params.gamma[i], d = params.delta[i];
    if (!(g >= 0.0 && g < 1.0 && d > g && d <= 1.0))
      throw InvalidInput("OR parameters need 0 <= gamma < delta <= 1 for agent " + std::to_string(i + 1));
  }

  std::vector<NamedBound> out;
  if (params.anonymous()) {
    const double g = params.gamma[0], d = params.delta[0];
    out.push_back({"(1-(1-delta)^n)/delta", (1.0 - std::pow(1.0 - d, n)) / d});
    out.push_back({"n-(n-1)delta", n - (n - 1) * d});
    out.push_back({"t_n/t_1", or_full_to_single_ratio(n, g, d)});
    if (std::abs(g - (1.0 - d)) <= kTableTolerance && g < 0.5)
      out.push_back({"symmetric OR constant", kSymmetricOrBound});
  } else {
    double all = 1.0, none = 1.0;
    for (int i = 0; i < n; ++i) all *= 1.0 - params.delta[i], none *= 1.0 - params.gamma[i];
    double best_single = 0.0;
    for (int i = 0; i < n; ++i)
      best_single = std::max(best_single, 1.0 - none / (1.0 - params.gamma[i]) * (1.0 - params.delta[i]));
    out.push_back({"t(N)/t({i*})", (1.0 - all) / best_single});
  }
  return out;
}

/// Recovers (gamma, delta) when the table is an anonymous OR technology.
inline std::optional<OrParams> detect_anonymous_or(const Technology& tech) {
  const auto counts = is_anonymous(tech);
  if (!counts) return std::nullopt;
  const int n = tech.agents();
  const double g = 1.0 - std::pow(1.0 - counts->front(), 1.0 / n);
  const double d = 1.0 - std::pow(1.0 - counts->back(), 1.0 / n);
  if (!(d > g)) return std::nullopt;
  for (int m = 0; m <= n; ++m) {
    const double expected = 1.0 - std::pow(1.0 - d, m) * std::pow(1.0 - g, n - m);
    if (std::abs(expected - (*counts)[m]) > 1e-9) return std::nullopt;
  }
  return OrParams{std::vector<double>(n, g), std::vector<double>(n, d)};
}

/// Fills report.bounds with every bound from the literature that applies,
/// plus the price of unaccountability, which dominates the price of purity.
inline PurityReport& check_bounds(const Technology& tech, PurityReport& report,
                                  const std::optional<OrParams>& or_params = std::nullopt) {
  auto add = [&](std::string name, std::optional<double> value) {
    BoundCheck b;
    b.name = std::move(name);
    if (value) {
      b.applicable = true;
      b.value = *value;
      b.satisfied = report.pop <= *value + kBoundSlack;
    }
    report.bounds.push_back(std::move(b));
  };

  report.bounds.clear();
  add("t(N)/t(empty)", pop_bound_general(tech));
  add("n (anonymous or DRS)", pop_bound_n(tech));
  add(tech.agents() == 2 && is_anonymous(tech) ? "3/2 (two anonymous agents)" : "2 (two agents)",
      pop_bound_two(tech));
  add("t(N)/t({i*}) (DRS)", pop_bound_drs_single(tech));
  if (or_params && tech.identical_costs()) {
    for (auto& b : pop_bound_or(*or_params)) add("OR " + b.name, b.value);
  }
  const PouResult u = pou(tech);
  report.pou = u.value;
  add("price of unaccountability", u.value);
  return report;
}

}  // namespace agency
