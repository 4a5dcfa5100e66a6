// Optimal pure and mixed contracts for a two-agent OR technology.

#include <cstdio>

#include "agency/agency.hpp"

int main() {
  using namespace agency;
  const Technology tech = build_structured({BoolFunction::disjunction(2), {0.09, 0.09}, {0.91, 0.91}, {1, 1}});

  for (double v : {100.0, 348.0, 1000.0}) {
    const PureContract pure = solve_pure(tech, v);
    const MixedContract mixed = solve_mixed(tech, v);
    std::printf("v=%-6g pure %-6s u=%.3f   mixed q=(%.4f, %.4f) u=%.3f\n", v,
                format_set(pure.agents).c_str(), pure.utility, mixed.profile[0], mixed.profile[1],
                mixed.utility);
  }

  const PurityReport report = pop(tech);
  std::printf("price of purity %.6f at v=%.4f\n", report.pop, report.witness_v);
  std::printf("price of unaccountability %.6f\n", pou(tech).value);
}
