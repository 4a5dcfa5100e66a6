#pragma once

// Mixed contracts. Any profile q can be induced: an agent with q_i > 0 is
// paid c_i / Delta_i(q_{-i}) on success (indifference for mixers, the
// minimal incentive-compatible payment for q_i = 1), everyone else is paid
// nothing. The principal's utility is t(q) * (v - total payment).
//
// The objective is smooth inside each support cell but jumps when an agent
// enters or leaves the support, so the search runs per support.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "agency/solver_pure.hpp"
#include "agency/technology.hpp"

namespace agency {

inline constexpr std::uint64_t kDefaultSeed = 424242;
inline constexpr int kMaxMixedAgents = 10;

struct MixedContract {
  MixedProfile profile;
  std::vector<double> payments;  // 0 outside the support
  double success = 0.0;
  double total_payment = 0.0;
  double utility = 0.0;
  bool degenerate = true;
};

inline double indifference_payment(const Technology& tech, int i, const MixedProfile& q) {
  return tech.cost(i) / marginal(tech, i, q);
}

/// u_i(q) = t(q) * payment - q_i * c_i.
inline double agent_utility(const Technology& tech, int i, const MixedProfile& q, double payment) {
  if (payment < 0.0) throw InvalidInput("negative payment");
  return eval_mixed(tech, q) * payment - q[i] * tech.cost(i);
}

inline MixedContract make_mixed_contract(const Technology& tech, const MixedProfile& q, double v) {
  detail::check_profile(tech, q);
  MixedContract c;
  c.profile = q;
  c.payments.assign(tech.agents(), 0.0);
  for (int i = 0; i < tech.agents(); ++i) {
    if (q[i] > 0.0) {
      c.payments[i] = indifference_payment(tech, i, q);
      c.total_payment += c.payments[i];
    }
  }
  c.success = eval_mixed(tech, q);
  c.utility = c.success * (v - c.total_payment);
  c.degenerate = q.degenerate();
  return c;
}

inline double principal_utility_mixed(const Technology& tech, const MixedProfile& q, double v) {
  return make_mixed_contract(tech, q, v).utility;
}

/// Equilibrium conditions at the given success payments: mixers indifferent,
/// full-effort agents weakly prefer effort, shirkers weakly prefer shirking.
inline bool verify_mixed_nash(const Technology& tech, const MixedProfile& q,
                              std::span<const double> payments, double tol = 1e-9) {
  detail::check_profile(tech, q);
  if (payments.size() != static_cast<std::size_t>(tech.agents()))
    throw InvalidInput("payment vector has the wrong length");
  for (int i = 0; i < tech.agents(); ++i) {
    if (payments[i] < 0.0) throw InvalidInput("negative payment");
    const double gain = payments[i] * marginal(tech, i, q);
    const double c = tech.cost(i);
    if (q[i] > 0.0 && q[i] < 1.0 && std::abs(gain - c) > tol) return false;
    if (q[i] == 1.0 && gain < c - tol) return false;
    if (q[i] == 0.0 && gain > c + tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Search

struct MixedSearchOptions {
  int starts = 16;
  double tolerance = 1e-10;  // stop once a sweep gains less than this
  int max_sweeps = 200;
  bool symmetric_search = true;  // extra 1-D search on anonymous technologies
  double snap = 1e-6;
  std::uint64_t seed = kDefaultSeed;
  int max_agents = kMaxMixedAgents;
};

namespace detail {

// Principal utility on a fixed support, over q in [0,1]^k, with every member
// paid even as q_i -> 0. Continuous on the closed box.
class SupportObjective {
 public:
  SupportObjective(const Technology& tech, AgentSet support, double v) : v_(v) {
    for (int i = 0; i < tech.agents(); ++i)
      if (contains(support, i)) members_.push_back(i);
    const int k = dims();
    costs_.resize(k);
    for (int j = 0; j < k; ++j) costs_[j] = tech.cost(members_[j]);
    table_.resize(std::size_t{1} << k);
    for (AgentSet b = 0; b < table_.size(); ++b) {
      AgentSet full = 0;
      for (int j = 0; j < k; ++j)
        if (contains(b, j)) full |= agent_bit(members_[j]);
      table_[b] = tech[full];
    }
    weights_.resize(table_.size());
  }

  int dims() const { return static_cast<int>(members_.size()); }
  const std::vector<int>& members() const { return members_; }

  double operator()(std::span<const double> q) const {
    const std::size_t size = table_.size();
    fill_weights(q, -1);
    double t = 0.0;
    for (std::size_t a = 0; a < size; ++a) t += weights_[a] * table_[a];
    double pay = 0.0;
    for (int j = 0; j < dims(); ++j) {
      // weights over the others, with member j held at shirk
      fill_weights(q, j);
      const std::size_t bit = std::size_t{1} << j;
      double delta = 0.0;
      for (std::size_t a = 0; a < size; ++a)
        if (!(a & bit)) delta += weights_[a] * (table_[a | bit] - table_[a]);
      pay += costs_[j] / delta;
    }
    return t * (v_ - pay);
  }

 private:
  void fill_weights(std::span<const double> q, int pinned) const {
    weights_[0] = 1.0;
    std::size_t width = 1;
    for (int j = 0; j < dims(); ++j) {
      const double p = j == pinned ? 0.0 : q[j];
      for (std::size_t a = 0; a < width; ++a) {
        weights_[a + width] = weights_[a] * p;
        weights_[a] *= 1.0 - p;
      }
      width <<= 1;
    }
  }

  double v_;
  std::vector<int> members_;
  std::vector<double> costs_;
  std::vector<double> table_;
  mutable std::vector<double> weights_;
};

// Maximize g on [lo, hi]: coarse scan, then golden-section refinement in the
// bracket around the best scan point. Returns (argmax, max).
inline std::pair<double, double> maximize_1d(const std::function<double(double)>& g, double lo,
                                             double hi, int scan, double current_x,
                                             double current_value) {
  double best_x = current_x, best_v = current_value;
  const double step = (hi - lo) / scan;
  int best_l = -1;
  for (int l = 0; l <= scan; ++l) {
    const double x = l == scan ? hi : lo + step * l;
    const double val = g(x);
    if (val > best_v) best_x = x, best_v = val, best_l = l;
  }
  double a, b;
  if (best_l >= 0) {
    a = std::max(lo, best_x - step);
    b = std::min(hi, best_x + step);
  } else {
    a = std::max(lo, current_x - step);
    b = std::min(hi, current_x + step);
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  while (b - a > 1e-11) {
    if (f1 < f2) {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + kInvPhi * (b - a), f2 = g(x2);
    } else {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - kInvPhi * (b - a), f1 = g(x1);
    }
  }
  if (f1 > best_v) best_x = x1, best_v = f1;
  if (f2 > best_v) best_x = x2, best_v = f2;
  return {best_x, best_v};
}

inline constexpr std::array<int, kMaxMixedAgents> kHaltonBases = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

inline double radical_inverse(unsigned index, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<unsigned>(base));
    index /= static_cast<unsigned>(base);
    f *= inv;
  }
  return r;
}

// Starting points: a Halton sequence shifted by a seeded random rotation,
// mapped into (0, 1].
inline std::vector<std::vector<double>> start_points(int dims, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(dims));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dims);
  for (auto& s : shift) s = unit(rng);
  std::vector<std::vector<double>> points(count, std::vector<double>(dims));
  for (int p = 0; p < count; ++p) {
    for (int d = 0; d < dims; ++d) {
      double x = radical_inverse(static_cast<unsigned>(p + 1), kHaltonBases[d]) + shift[d];
      x -= std::floor(x);
      points[p][d] = 1.0 - x;
    }
  }
  return points;
}

struct LocalResult {
  std::vector<double> q;
  double value;
};

// Coordinate ascent with a pattern move along the sweep's displacement.
inline LocalResult coordinate_ascent(const SupportObjective& f, std::vector<double> q,
                                     const MixedSearchOptions& opts) {
  const int k = f.dims();
  double value = f(q);
  std::vector<double> trial = q;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double before = value;
    const std::vector<double> previous = q;
    for (int j = 0; j < k; ++j) {
      trial = q;
      auto g = [&](double x) {
        trial[j] = x;
        return f(trial);
      };
      const auto [x, val] = maximize_1d(g, 0.0, 1.0, 16, q[j], value);
      q[j] = x;
      value = val;
    }

    std::vector<double> dir(k);
    double max_step = std::numeric_limits<double>::infinity();
    bool moved = false;
    for (int j = 0; j < k; ++j) {
      dir[j] = q[j] - previous[j];
      if (dir[j] > 0.0) max_step = std::min(max_step, (1.0 - q[j]) / dir[j]);
      if (dir[j] < 0.0) max_step = std::min(max_step, -q[j] / dir[j]);
      moved |= dir[j] != 0.0;
    }
    if (moved && k > 1 && max_step > 0.0) {
      max_step = std::min(max_step, 16.0);
      const std::vector<double> base = q;
      auto g = [&](double alpha) {
        for (int j = 0; j < k; ++j) trial[j] = std::clamp(base[j] + alpha * dir[j], 0.0, 1.0);
        return f(trial);
      };
      const auto [alpha, val] = maximize_1d(g, 0.0, max_step, 8, 0.0, value);
      if (val > value) {
        for (int j = 0; j < k; ++j) q[j] = std::clamp(base[j] + alpha * dir[j], 0.0, 1.0);
        value = val;
      }
    }
    if (value - before < opts.tolerance) break;
  }
  return {std::move(q), value};
}

// Candidate ordering: strictly better utility wins; on a tie the earlier
// candidate is kept.
struct Incumbent {
  std::optional<MixedProfile> profile;
  double utility = -std::numeric_limits<double>::infinity();

  void offer(const MixedProfile& q, double u) {
    if (!profile || (u > utility && !utility_tied(u, utility))) {
      profile = q;
      utility = u;
    }
  }
};

}  // namespace detail

inline MixedContract solve_mixed(const Technology& tech, double v, const MixedSearchOptions& opts = {}) {
  const int n = tech.agents();
  if (n > opts.max_agents || n > kMaxMixedAgents)
    throw CapacityError("mixed search supports at most " +
                        std::to_string(std::min(opts.max_agents, kMaxMixedAgents)) + " agents, got " +
                        std::to_string(n));
  if (!(v > 0.0)) throw InvalidInput("value must be positive");

  detail::Incumbent best;
  const PureContract pure = solve_pure(tech, v);
  best.offer(MixedProfile::from_set(n, pure.agents), pure.utility);

  if (opts.symmetric_search && n > 1 && is_anonymous(tech)) {
    for (int k = 1; k <= n; ++k) {
      const AgentSet support = full_set(k);
      const detail::SupportObjective f(tech, support, v);
      std::vector<double> q(k, 1.0);
      auto g = [&](double p) {
        std::fill(q.begin(), q.end(), p);
        return f(q);
      };
      const auto [p, val] = detail::maximize_1d(g, 0.0, 1.0, 64, 1.0, g(1.0));
      MixedProfile profile = MixedProfile::zeros(n);
      for (int j = 0; j < k; ++j) profile.q[j] = p;
      best.offer(profile, val);
    }
  }

  for (AgentSet support = 1; support < tech.profiles(); ++support) {
    const detail::SupportObjective f(tech, support, v);
    const int k = f.dims();
    for (auto& start : detail::start_points(k, opts.starts, opts.seed)) {
      auto local = detail::coordinate_ascent(f, std::move(start), opts);
      MixedProfile profile = MixedProfile::zeros(n);
      for (int j = 0; j < k; ++j) profile.q[f.members()[j]] = local.q[j];
      best.offer(profile, local.value);
    }
  }

  MixedProfile q = *best.profile;
  for (double& x : q.q) {
    if (x < opts.snap) x = 0.0;
    if (x > 1.0 - opts.snap) x = 1.0;
  }
  MixedContract result = make_mixed_contract(tech, q, v);
  if (result.utility < pure.utility) result = make_mixed_contract(tech, MixedProfile::from_set(n, pure.agents), v);
  return result;
}

// ---------------------------------------------------------------------------
// Grid oracle

inline constexpr double kMaxGridCells = 1.01e9;

/// Exhaustive search over q in {0, h, 2h, ..., 1}^n. Tables for t and for
/// every pure marginal are folded one agent at a time, so each grid cell
/// costs O(n). Utilities and payments come from the folded tables, not from
/// the evaluation routines above.
inline MixedContract grid_oracle_mixed(const Technology& tech, double v, double resolution) {
  const int n = tech.agents();
  if (!(resolution > 0.0 && resolution <= 0.5)) throw InvalidInput("grid resolution must be in (0, 0.5]");
  const long steps = std::lround(1.0 / resolution);
  if (std::abs(steps * resolution - 1.0) > 1e-9) throw InvalidInput("grid resolution must divide 1");
  if (std::pow(static_cast<double>(steps + 1), n) > kMaxGridCells)
    throw CapacityError("grid of " + std::to_string(steps + 1) + "^" + std::to_string(n) +
                        " cells is too large");

  std::vector<double> grid(steps + 1);
  for (long k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) / static_cast<double>(steps);

  // level m holds n + 1 tables over the first m agents: t, then Delta_i
  const std::size_t full = tech.profiles();
  std::vector<std::vector<std::vector<double>>> levels(n + 1);
  for (int m = 0; m <= n; ++m)
    levels[m].assign(n + 1, std::vector<double>(std::size_t{1} << m));
  for (AgentSet a = 0; a < full; ++a) {
    levels[n][0][a] = tech[a];
    for (int i = 0; i < n; ++i) levels[n][i + 1][a] = tech[a | agent_bit(i)] - tech[a & ~agent_bit(i)];
  }

  std::vector<double> q(n, 0.0);
  std::vector<double> best_q(n, 0.0);
  double best_u = -std::numeric_limits<double>::infinity();

  std::function<void(int)> descend = [&](int m) {
    if (m == 1) {
      const auto& tables = levels[1];
      std::vector<int> active;
      for (int i = 1; i < n; ++i)
        if (q[i] > 0.0) active.push_back(i);
      const double t0 = tables[0][0], dt = tables[0][1] - tables[0][0];
      const double own_pay = tech.cost(0) / tables[1][0];
      for (long k = 0; k <= steps; ++k) {
        const double x = grid[k];
        double pay = x > 0.0 ? own_pay : 0.0;
        for (int i : active) pay += tech.cost(i) / (tables[i + 1][0] + (tables[i + 1][1] - tables[i + 1][0]) * x);
        const double u = (t0 + dt * x) * (v - pay);
        if (u > best_u) {
          best_u = u;
          q[0] = x;
          best_q = q;
        }
      }
      return;
    }
    const std::size_t half = std::size_t{1} << (m - 1);
    for (long k = 0; k <= steps; ++k) {
      const double x = grid[k];
      for (int tbl = 0; tbl <= n; ++tbl) {
        const auto& src = levels[m][tbl];
        auto& dst = levels[m - 1][tbl];
        for (std::size_t a = 0; a < half; ++a) dst[a] = (1.0 - x) * src[a] + x * src[a + half];
      }
      q[m - 1] = x;
      descend(m - 1);
    }
  };
  descend(n);

  // report from the oracle's own arithmetic at the winning cell
  MixedContract c;
  c.profile = MixedProfile(best_q);
  c.payments.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (best_q[i] <= 0.0) continue;
    std::vector<double> others = best_q;
    others[i] = 0.0;
    double delta = 0.0;
    for (AgentSet a = 0; a < full; ++a) {
      double w = 1.0;
      for (int j = 0; j < n; ++j) w *= contains(a, j) ? others[j] : 1.0 - others[j];
      delta += w * levels[n][i + 1][a];
    }
    c.payments[i] = tech.cost(i) / delta;
    c.total_payment += c.payments[i];
  }
  for (AgentSet a = 0; a < full; ++a) {
    double w = 1.0;
    for (int j = 0; j < n; ++j) w *= contains(a, j) ? best_q[j] : 1.0 - best_q[j];
    c.success += w * tech[a];
  }
  c.utility = best_u;
  c.degenerate = c.profile.degenerate();
  return c;
}

// ---------------------------------------------------------------------------
// Payment bracket and coalition robustness

struct PaymentBounds {
  double lower;
  double upper;
  double actual;

  bool brackets(double tol = 1e-9) const { return lower <= actual + tol && actual <= upper + tol; }
};

/// The indifference payment lies between the extreme pure payments
/// c_i / Delta_i(T) over T within the rest of the support.
inline PaymentBounds payment_bounds_check(const Technology& tech, const MixedProfile& q, int i) {
  detail::check_profile(tech, q);
  const AgentSet support = q.support();
  if (i < 0 || i >= tech.agents() || !contains(support, i))
    throw InvalidInput("agent " + std::to_string(i + 1) + " is outside the support");
  const AgentSet rest = support & ~agent_bit(i);
  PaymentBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  indifference_payment(tech, i, q)};
  for (AgentSet t = rest;; t = (t - 1) & rest) {
    const double p = tech.cost(i) / marginal(tech, i, t);
    b.lower = std::min(b.lower, p);
    b.upper = std::max(b.upper, p);
    if (t == 0) break;
  }
  return b;
}

inline constexpr double kStrictGain = 1e-12;

struct Deviation {
  AgentSet coalition = 0;
  MixedProfile profile;
  std::vector<double> gains;  // per coalition member, in agent order
};

struct StrongEqVerdict {
  bool is_strong = true;
  bool canonical_applicable = false;  // at least two strict mixers
  long deviations_tested = 0;
  std::optional<Deviation> witness;
};

/// Looks for a coalition deviation that strictly helps every member at the
/// given payments: first the joint move of all strict mixers to full effort,
/// then every pure joint deviation of every coalition.
inline StrongEqVerdict strong_eq_check(const Technology& tech, const MixedProfile& q,
                                       std::span<const double> payments) {
  detail::check_profile(tech, q);
  const int n = tech.agents();
  if (n > kMaxMixedAgents) throw CapacityError("coalition enumeration supports at most 10 agents");
  if (payments.size() != static_cast<std::size_t>(n)) throw InvalidInput("payment vector has the wrong length");

  std::vector<double> base(n);
  for (int i = 0; i < n; ++i) base[i] = agent_utility(tech, i, q, payments[i]);

  StrongEqVerdict verdict;
  auto try_deviation = [&](AgentSet coalition, const MixedProfile& moved) {
    ++verdict.deviations_tested;
    const double t = eval_mixed(tech, moved);
    Deviation d{coalition, moved, {}};
    for (int i = 0; i < n; ++i) {
      if (!contains(coalition, i)) continue;
      const double gain = t * payments[i] - moved[i] * tech.cost(i) - base[i];
      if (!(gain > kStrictGain)) return false;
      d.gains.push_back(gain);
    }
    verdict.is_strong = false;
    verdict.witness = std::move(d);
    return true;
  };

  const AgentSet mixers = q.mixers();
  verdict.canonical_applicable = set_size(mixers) >= 2;
  if (verdict.canonical_applicable) {
    MixedProfile moved = q;
    for (int i = 0; i < n; ++i)
      if (contains(mixers, i)) moved.q[i] = 1.0;
    if (try_deviation(mixers, moved)) return verdict;
  }

  for (AgentSet coalition = 1; coalition <= full_set(n); ++coalition) {
    for (AgentSet choice = coalition;; choice = (choice - 1) & coalition) {
      MixedProfile moved = q;
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        if (!contains(coalition, i)) continue;
        const double target = contains(choice, i) ? 1.0 : 0.0;
        changed |= moved.q[i] != target;
        moved.q[i] = target;
      }
      if (changed && try_deviation(coalition, moved)) return verdict;
      if (choice == 0) break;
    }
  }
  return verdict;
}

}  // namespace agency
