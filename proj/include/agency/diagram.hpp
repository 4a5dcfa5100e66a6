#pragma once

// Phase diagram of optimal contracts for anonymous OR technologies with
// delta = 1 - gamma and unit costs, over a (gamma, v) grid.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "agency/boolfn.hpp"
#include "agency/solver_mixed.hpp"
#include "agency/solver_pure.hpp"

namespace agency {

/// A mixed optimum counts as a separate region only beyond this margin.
inline constexpr double kMixedMargin = 1e-6;

struct DiagramGrid {
  double gamma_min = 0.01;
  double gamma_max = 0.49;
  int gamma_steps = 49;
  double v_min = 1.0;
  double v_max = 1000.0;
  int v_steps = 200;
  int agents = 2;

  void check() const {
    if (!(gamma_min > 0.0 && gamma_max < 0.5 && gamma_min <= gamma_max))
      throw InvalidInput("gamma range must lie inside (0, 0.5)");
    if (!(v_min > 0.0 && v_min <= v_max)) throw InvalidInput("value range must be positive and ordered");
    if (gamma_steps < 1 || v_steps < 1) throw InvalidInput("grid needs at least one step per axis");
    if ((gamma_steps == 1 && gamma_min != gamma_max) || (v_steps == 1 && v_min != v_max))
      throw InvalidInput("a single grid step needs min == max");
    if (agents < 1 || agents > kMaxMixedAgents) throw CapacityError("diagram supports 1..10 agents");
  }

  static double at(double lo, double hi, int steps, int k) {
    return steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1);
  }
  double gamma(int k) const { return at(gamma_min, gamma_max, gamma_steps, k); }
  double value(int k) const { return at(v_min, v_max, v_steps, k); }
};

struct PhaseCell {
  static constexpr int kMixed = -1;

  double gamma;
  double v;
  int region;                   // number of agents under the pure optimum, or kMixed
  std::optional<double> mix_q;  // common mixing probability, MIXED cells only
  double utility_mixed;
  double utility_pure;
};

inline Technology symmetric_or(int n, double gamma) {
  return build_structured({BoolFunction::disjunction(n), std::vector<double>(n, gamma),
                           std::vector<double>(n, 1.0 - gamma), std::vector<double>(n, 1.0)});
}

inline PhaseCell diagram_cell(double gamma, double v, int n = 2, const MixedSearchOptions& opts = {}) {
  const Technology tech = symmetric_or(n, gamma);
  const MixedContract mixed = solve_mixed(tech, v, opts);
  const PureContract pure = solve_pure(tech, v);
  PhaseCell cell{gamma, v, set_size(pure.agents), std::nullopt, mixed.utility, pure.utility};
  if (!mixed.degenerate && mixed.utility > pure.utility + kMixedMargin) {
    cell.region = PhaseCell::kMixed;
    double sum = 0.0;
    int count = 0;
    for (double q : mixed.profile.q)
      if (q > 0.0 && q < 1.0) sum += q, ++count;
    cell.mix_q = sum / count;
  }
  return cell;
}

/// Row-major: gamma outer, v inner.
inline std::vector<PhaseCell> phase_diagram(const DiagramGrid& grid, const MixedSearchOptions& opts = {}) {
  grid.check();
  const std::size_t rows = static_cast<std::size_t>(grid.gamma_steps);
  const std::size_t cols = static_cast<std::size_t>(grid.v_steps);
  std::vector<std::optional<PhaseCell>> slots(rows * cols);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t g = first; g < rows; g += stride)
      for (std::size_t k = 0; k < cols; ++k)
        slots[g * cols + k] = diagram_cell(grid.gamma(static_cast<int>(g)), grid.value(static_cast<int>(k)),
                                           grid.agents, opts);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(rows, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w, workers);
  work(0, workers);
  for (auto& t : pool) t.join();

  std::vector<PhaseCell> cells;
  cells.reserve(slots.size());
  for (auto& s : slots) cells.push_back(*s);
  return cells;
}

inline void write_diagram_csv(std::ostream& out, const std::vector<PhaseCell>& cells) {
  out << "gamma,v,region,mix_q,utility_mixed,utility_pure\n";
  char buf[256];
  for (const auto& c : cells) {
    const std::string region = c.region == PhaseCell::kMixed ? "MIXED" : std::to_string(c.region);
    std::string q;
    if (c.mix_q) {
      char qbuf[32];
      std::snprintf(qbuf, sizeof qbuf, "%.6f", *c.mix_q);
      q = qbuf;
    }
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%s,%s,%.9g,%.9g\n", c.gamma, c.v, region.c_str(), q.c_str(),
                  c.utility_mixed, c.utility_pure);
    out << buf;
  }
}

}  // namespace agency
