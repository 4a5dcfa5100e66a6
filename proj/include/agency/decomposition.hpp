#pragma once

// AND-composition of technologies on disjoint agents, t_f(a_g, a_h) =
// t_g(a_g) * t_h(a_h), and the check that an optimal mixed contract for the
// composition splits into optimal contracts for the parts at scaled values:
// the h-part is optimal for h at v * t_g(q_g) and vice versa.

#include <vector>

#include "agency/solver_mixed.hpp"
#include "agency/technology.hpp"

namespace agency {

/// Agents of g come first, then the agents of h.
inline Technology and_compose(const Technology& g, const Technology& h) {
  const int ng = g.agents(), nh = h.agents();
  if (ng + nh > kMaxAgents) throw CapacityError("composed technology exceeds 20 agents");
  std::vector<double> costs(g.costs().begin(), g.costs().end());
  costs.insert(costs.end(), h.costs().begin(), h.costs().end());
  std::vector<double> table(std::size_t{1} << (ng + nh));
  for (AgentSet a = 0; a < table.size(); ++a) table[a] = g[a & g.everyone()] * h[a >> ng];
  return Technology(std::move(costs), std::move(table));
}

struct PartCheck {
  MixedProfile part;        // restriction of the composed optimum
  double scaled_value;      // v times the other part's success probability
  double achieved;          // utility of `part` at the scaled value
  double optimum;           // best utility found for the part alone
  double gap() const { return optimum - achieved; }
};

struct DecompositionReport {
  MixedContract composed;
  PartCheck g;
  PartCheck h;
};

inline DecompositionReport and_decomposition_check(const Technology& g, const Technology& h, double v,
                                                   const MixedSearchOptions& opts = {}) {
  const Technology f = and_compose(g, h);
  DecompositionReport report;
  report.composed = solve_mixed(f, v, opts);

  const int ng = g.agents();
  const auto& q = report.composed.profile.q;
  const MixedProfile qg(std::vector<double>(q.begin(), q.begin() + ng));
  const MixedProfile qh(std::vector<double>(q.begin() + ng, q.end()));

  auto check = [&](const Technology& part, const MixedProfile& own, double scaled) {
    PartCheck c{own, scaled, principal_utility_mixed(part, own, scaled), 0.0};
    c.optimum = solve_mixed(part, scaled, opts).utility;
    return c;
  };
  report.h = check(h, qh, v * eval_mixed(g, qg));
  report.g = check(g, qg, v * eval_mixed(h, qh));
  return report;
}

}  // namespace agency
