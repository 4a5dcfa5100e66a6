#pragma once

// Pure contracts: the principal picks the set S of agents that exert effort
// and pays each i in S exactly c_i / (t(S) - t(S \ {i})) on success.
// Every contract's utility is a line in v, so the optimum over v is the
// upper envelope of 2^n lines.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "agency/technology.hpp"

namespace agency {

/// Relative tolerance under which two utilities count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline bool utility_tied(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Tie rule shared by every contract search: fewer agents first, then the
/// smaller bitmask.
inline bool prefer_set(AgentSet a, AgentSet b) {
  const int sa = set_size(a), sb = set_size(b);
  return sa != sb ? sa < sb : a < b;
}

struct PureContract {
  AgentSet agents = 0;
  std::vector<double> payments;  // 0 outside `agents`
  double success = 0.0;
  double total_payment = 0.0;
  double utility = 0.0;
};

inline double payment_pure(const Technology& tech, AgentSet s, int i) {
  if (i < 0 || i >= tech.agents() || !contains(s, i))
    throw InvalidInput("agent " + std::to_string(i + 1) + " is not in " + format_set(s));
  return tech.cost(i) / (tech[s] - tech[s & ~agent_bit(i)]);
}

inline double total_payment_pure(const Technology& tech, AgentSet s) {
  double total = 0.0;
  for (int i = 0; i < tech.agents(); ++i)
    if (contains(s, i)) total += payment_pure(tech, s, i);
  return total;
}

inline double utility_pure(const Technology& tech, AgentSet s, double v) {
  return tech[s] * (v - total_payment_pure(tech, s));
}

inline PureContract make_pure_contract(const Technology& tech, AgentSet s, double v) {
  PureContract c;
  c.agents = s;
  c.payments.assign(tech.agents(), 0.0);
  for (int i = 0; i < tech.agents(); ++i)
    if (contains(s, i)) c.payments[i] = payment_pure(tech, s, i);
  c.success = tech[s];
  c.total_payment = total_payment_pure(tech, s);
  c.utility = c.success * (v - c.total_payment);
  return c;
}

/// Exhaustive argmax over all 2^n sets.
inline PureContract solve_pure(const Technology& tech, double v) {
  AgentSet best = 0;
  double best_u = utility_pure(tech, 0, v);
  for (AgentSet s = 1; s < tech.profiles(); ++s) {
    const double u = utility_pure(tech, s, v);
    if (utility_tied(u, best_u)) {
      if (prefer_set(s, best)) best = s, best_u = std::max(u, best_u);
    } else if (u > best_u) {
      best = s, best_u = u;
    }
  }
  return make_pure_contract(tech, best, v);
}

// ---------------------------------------------------------------------------
// Envelope

struct EnvelopePiece {
  AgentSet agents;
  double slope;      // t(S)
  double intercept;  // utility at v = 0

  double value(double v) const { return slope * v + intercept; }
};

/// pieces[k] is optimal on [breakpoints[k-1], breakpoints[k]), with
/// breakpoints[-1] = 0 and the last piece unbounded.
struct Envelope {
  std::vector<double> breakpoints;
  std::vector<EnvelopePiece> pieces;

  const EnvelopePiece& piece_at(double v) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), v);
    return pieces[static_cast<std::size_t>(it - breakpoints.begin())];
  }

  double value(double v) const { return piece_at(v).value(v); }
};

namespace detail {

// Upper envelope on v >= 0 of lines that include one with the largest
// intercept (the empty contract, intercept 0).
inline Envelope upper_envelope(std::vector<EnvelopePiece> lines) {
  std::sort(lines.begin(), lines.end(), [](const EnvelopePiece& a, const EnvelopePiece& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.agents < b.agents;
  });
  // collapse equal slopes: keep the best intercept, ties by the set rule
  std::vector<EnvelopePiece> unique;
  for (const auto& line : lines) {
    if (!unique.empty() &&
        std::abs(unique.back().slope - line.slope) <=
            kTableTolerance * std::max(1.0, std::abs(line.slope))) {
      auto& kept = unique.back();
      if (utility_tied(line.intercept, kept.intercept)) {
        if (prefer_set(line.agents, kept.agents)) kept = line;
      } else if (line.intercept > kept.intercept) {
        kept = line;
      }
      continue;
    }
    unique.push_back(line);
  }

  // start from the best line at v = 0
  std::size_t start = 0;
  for (std::size_t k = 1; k < unique.size(); ++k) {
    const auto& a = unique[k];
    const auto& b = unique[start];
    if (a.intercept > b.intercept && !utility_tied(a.intercept, b.intercept)) start = k;
  }

  Envelope env;
  env.pieces.push_back(unique[start]);
  for (std::size_t k = start + 1; k < unique.size(); ++k) {
    const auto& line = unique[k];
    while (true) {
      const auto& top = env.pieces.back();
      const double cross = (top.intercept - line.intercept) / (line.slope - top.slope);
      const double from = env.breakpoints.empty() ? 0.0 : env.breakpoints.back();
      if (cross <= from && env.pieces.size() > 1) {
        // `top` never strictly wins
        env.pieces.pop_back();
        env.breakpoints.pop_back();
        continue;
      }
      if (cross <= from) {
        // only possible for the first piece when lines meet at v <= 0
        env.pieces.back() = line;
        break;
      }
      env.pieces.push_back(line);
      env.breakpoints.push_back(cross);
      break;
    }
  }
  return env;
}

}  // namespace detail

inline Envelope pure_envelope(const Technology& tech) {
  std::vector<EnvelopePiece> lines;
  lines.reserve(tech.profiles());
  for (AgentSet s = 0; s < tech.profiles(); ++s) {
    const double slope = tech[s];
    lines.push_back({s, slope, -slope * total_payment_pure(tech, s)});
  }
  return detail::upper_envelope(std::move(lines));
}

/// Values where the optimal pure contract changes.
inline std::vector<double> transition_points(const Technology& tech) {
  return pure_envelope(tech).breakpoints;
}

// ---------------------------------------------------------------------------
// Observable actions: the principal pays exactly the costs.

struct ObservableContract {
  AgentSet agents = 0;
  double success = 0.0;
  double utility = 0.0;
};

inline double total_cost(const Technology& tech, AgentSet s) {
  double total = 0.0;
  for (int i = 0; i < tech.agents(); ++i)
    if (contains(s, i)) total += tech.cost(i);
  return total;
}

inline ObservableContract solve_observable(const Technology& tech, double v) {
  ObservableContract best{0, tech[0], tech[0] * v};
  for (AgentSet s = 1; s < tech.profiles(); ++s) {
    const double u = tech[s] * v - total_cost(tech, s);
    if (utility_tied(u, best.utility)) {
      if (prefer_set(s, best.agents)) best = {s, tech[s], std::max(u, best.utility)};
    } else if (u > best.utility) {
      best = {s, tech[s], u};
    }
  }
  return best;
}

inline Envelope observable_envelope(const Technology& tech) {
  std::vector<EnvelopePiece> lines;
  lines.reserve(tech.profiles());
  for (AgentSet s = 0; s < tech.profiles(); ++s) lines.push_back({s, tech[s], -total_cost(tech, s)});
  return detail::upper_envelope(std::move(lines));
}

// ---------------------------------------------------------------------------
// Price of unaccountability

struct PouResult {
  double value = 1.0;
  double witness_v = 0.0;  // +inf when only approached asymptotically
};

/// sup over v of observable-optimal / hidden-action pure-optimal utility.
/// Both optima are piecewise linear, so the ratio is monotone between the
/// merged breakpoints and the supremum sits at one of them (or at v -> inf).
inline PouResult pou(const Technology& tech) {
  const Envelope hidden = pure_envelope(tech);
  const Envelope observable = observable_envelope(tech);
  std::vector<double> points = hidden.breakpoints;
  points.insert(points.end(), observable.breakpoints.begin(), observable.breakpoints.end());
  std::sort(points.begin(), points.end());

  PouResult best;  // v -> 0 gives ratio 1
  for (double v : points) {
    const double ratio = observable.value(v) / hidden.value(v);
    if (ratio > best.value) best = {ratio, v};
  }
  const double tail = observable.pieces.back().slope / hidden.pieces.back().slope;
  if (tail > best.value * (1.0 + kTieTolerance))
    best = {tail, std::numeric_limits<double>::infinity()};
  return best;
}

/// Pure Nash check: members weakly prefer effort, outsiders weakly prefer
/// shirking, both at the given success payments.
inline bool verify_pure_nash(const Technology& tech, AgentSet s, std::span<const double> payments,
                             double tol = 1e-9) {
  if (payments.size() != static_cast<std::size_t>(tech.agents()))
    throw InvalidInput("payment vector has the wrong length");
  for (int i = 0; i < tech.agents(); ++i) {
    if (payments[i] < 0.0) throw InvalidInput("negative payment");
    const double gain = payments[i] * marginal(tech, i, s);
    if (contains(s, i) ? gain < tech.cost(i) - tol : gain > tech.cost(i) + tol) return false;
  }
  return true;
}

}  // namespace agency
