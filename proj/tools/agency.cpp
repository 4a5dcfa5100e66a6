// Command-line front end for the agency library.
//
// Exit codes: 0 ok, 2 invalid input, 3 parse error, 4 resource cap,
// 5 bound violation.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "agency/agency.hpp"

namespace {

using namespace agency;

enum Exit { kOk = 0, kInvalid = 2, kParse = 3, kCapacity = 4, kBoundViolated = 5 };

std::string fmt(double x, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string join(const std::vector<double>& xs, const char* sep, const char* spec = "%.6f") {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? sep : "") + fmt(xs[k], spec);
  return out;
}

std::string csv_set(AgentSet s, int n) {
  std::string out;
  for (int i = 0; i < n; ++i)
    if (contains(s, i)) out += (out.empty() ? "" : ";") + std::to_string(i + 1);
  return out;
}

MixedSearchOptions search_options() {
  MixedSearchOptions opts;
  if (const char* env = std::getenv("AGENCY_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw InvalidInput(std::string("AGENCY_SEED is not an integer: ") + env);
    opts.seed = seed;
  }
  return opts;
}

LoadedTechnology load_valid(const std::string& path) {
  LoadedTechnology loaded = load_technology(path);
  require_valid(loaded.tech);
  return loaded;
}

std::optional<OrParams> or_params_of(const LoadedTechnology& loaded) {
  return loaded.or_params ? loaded.or_params : detect_anonymous_or(loaded.tech);
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, bool csv) {
  const LoadedTechnology loaded = load_technology(path);
  const auto report = validate(loaded.tech);
  if (csv) {
    std::cout << "check,status,detail\n";
    std::cout << "format,ok," << to_string(loaded.kind) << '\n';
    if (report.ok()) std::cout << "table,ok,\n";
    for (const auto& v : report.violations) std::cout << "table,violation,\"" << v.message << "\"\n";
  } else {
    std::cout << "format: " << to_string(loaded.kind) << "\nagents: " << loaded.tech.agents() << '\n';
    if (report.ok()) {
      std::cout << "valid\n";
    } else {
      std::cout << "invalid\n";
      for (const auto& v : report.violations) std::cout << "  " << v.message << '\n';
    }
  }
  return report.ok() ? kOk : kInvalid;
}

std::string describe(const ReturnsWitness& w, int n) {
  return "agent " + std::to_string(w.agent + 1) + ": marginal " + fmt(w.marginal_lower, "%.9g") + " at " +
         format_set(w.lower) + ", " + fmt(w.marginal_upper, "%.9g") + " at " + format_set(w.upper);
}

int cmd_classify(const std::string& path, bool csv) {
  const LoadedTechnology loaded = load_valid(path);
  const Technology& tech = loaded.tech;
  const auto cls = classify_returns(tech);
  const auto counts = is_anonymous(tech);
  if (csv) {
    std::cout << "returns,anonymous,counts\n"
              << to_string(cls.kind) << ',' << (counts ? "yes" : "no") << ',' << (counts ? join(*counts, ";", "%.12g") : "")
              << '\n';
    return kOk;
  }
  std::cout << "returns: " << to_string(cls.kind) << '\n';
  if (cls.irs_violation) std::cout << "  not IRS, " << describe(*cls.irs_violation, tech.agents()) << '\n';
  if (cls.drs_violation) std::cout << "  not DRS, " << describe(*cls.drs_violation, tech.agents()) << '\n';
  std::cout << "anonymous: " << (counts ? "yes" : "no") << '\n';
  if (counts) std::cout << "  t by count: " << join(*counts, " ", "%.12g") << '\n';
  return kOk;
}

int cmd_solve(const std::string& path, double v, const std::string& mode, bool csv) {
  if (!(v > 0.0)) throw InvalidInput("--value must be positive");
  const LoadedTechnology loaded = load_valid(path);
  const Technology& tech = loaded.tech;
  const int n = tech.agents();

  std::string profile;
  std::vector<double> payments(n, 0.0);
  double success = 0.0, total = 0.0, utility = 0.0;
  bool degenerate = true;
  if (mode == "pure") {
    const auto c = solve_pure(tech, v);
    profile = csv ? csv_set(c.agents, n) : format_set(c.agents);
    payments = c.payments, success = c.success, total = c.total_payment, utility = c.utility;
  } else if (mode == "observable") {
    const auto c = solve_observable(tech, v);
    profile = csv ? csv_set(c.agents, n) : format_set(c.agents);
    for (int i = 0; i < n; ++i)
      if (contains(c.agents, i)) payments[i] = tech.cost(i);
    success = c.success, total = total_cost(tech, c.agents), utility = c.utility;
  } else {
    if (n > kMaxMixedAgents) throw CapacityError("mixed search supports at most 10 agents");
    const auto c = solve_mixed(tech, v, search_options());
    profile = join(c.profile.q, csv ? ";" : " ");
    payments = c.payments, success = c.success, total = c.total_payment, utility = c.utility;
    degenerate = c.degenerate;
  }

  if (csv) {
    std::cout << "mode,value,profile,payments,success,total_payment,utility,degenerate\n"
              << mode << ',' << fmt(v, "%.9g") << ',' << profile << ',' << join(payments, ";") << ','
              << fmt(success, "%.9f") << ',' << fmt(total) << ',' << fmt(utility) << ','
              << (degenerate ? "yes" : "no") << '\n';
    return kOk;
  }
  std::cout << "mode: " << mode << "\nvalue: " << fmt(v, "%.9g") << '\n'
            << (mode == "mixed" ? "profile: " : "agents: ") << profile << '\n'
            << "payments: " << join(payments, " ") << '\n'
            << "success: " << fmt(success, "%.9f") << '\n'
            << "total payment: " << fmt(total) << '\n'
            << "utility: " << fmt(utility) << '\n';
  if (mode == "mixed") std::cout << "degenerate: " << (degenerate ? "yes" : "no") << '\n';
  return kOk;
}

PurityReport audited_pop(const LoadedTechnology& loaded, double resolution) {
  if (loaded.tech.agents() > kMaxMixedAgents) throw CapacityError("mixed search supports at most 10 agents");
  PurityOptions opts{search_options(), resolution};
  PurityReport report = pop(loaded.tech, opts);
  check_bounds(loaded.tech, report, or_params_of(loaded));
  return report;
}

void print_violations(const PurityReport& report) {
  for (const auto& b : report.bounds)
    if (b.applicable && !b.satisfied)
      std::cerr << "bound violated: " << b.name << " = " << fmt(b.value, "%.9g") << " < pop "
                << fmt(report.pop, "%.9g") << " at v = " << fmt(report.witness_v, "%.9g") << '\n';
}

int cmd_pop(const std::string& path, double resolution, bool csv) {
  const LoadedTechnology loaded = load_valid(path);
  const int n = loaded.tech.agents();
  const PurityReport report = audited_pop(loaded, resolution);
  if (csv) {
    std::cout << "v,utility_mixed,utility_pure,ratio\n";
    for (const auto& r : report.ratios)
      std::cout << fmt(r.v, "%.9g") << ',' << fmt(r.mixed, "%.9g") << ',' << fmt(r.pure, "%.9g") << ','
                << fmt(r.ratio, "%.9f") << '\n';
  } else {
    std::cout << "pop: " << fmt(report.pop) << '\n';
    if (!report.ratios.empty()) {
      std::cout << "witness v: " << fmt(report.witness_v, "%.9g") << '\n'
                << "mixed profile: " << join(report.mixed_at_witness.profile.q, " ") << '\n'
                << "mixed utility: " << fmt(report.mixed_at_witness.utility) << '\n'
                << "pure agents: " << format_set(report.pure_at_witness.agents) << '\n'
                << "pure utility: " << fmt(report.pure_at_witness.utility)
                << '\n';
    }
    if (report.grid_oracle_pop) std::cout << "grid oracle pop: " << fmt(*report.grid_oracle_pop) << '\n';
    std::cout << "transition points: " << report.ratios.size() << '\n';
  }
  print_violations(report);
  return report.bounds_hold() ? kOk : kBoundViolated;
}

int cmd_pou(const std::string& path, bool csv) {
  const LoadedTechnology loaded = load_valid(path);
  const PouResult r = pou(loaded.tech);
  const std::string where = std::isinf(r.witness_v) ? "inf" : fmt(r.witness_v, "%.9g");
  if (csv)
    std::cout << "pou,witness_v\n" << fmt(r.value, "%.9f") << ',' << where << '\n';
  else
    std::cout << "pou: " << fmt(r.value) << "\nwitness v: " << where << '\n';
  return kOk;
}

int cmd_bounds(const std::string& path, double resolution, bool csv) {
  const LoadedTechnology loaded = load_valid(path);
  const PurityReport report = audited_pop(loaded, resolution);
  if (csv) {
    std::cout << "bound,value,applicable,satisfied\n";
    for (const auto& b : report.bounds)
      std::cout << '"' << b.name << "\"," << (b.applicable ? fmt(b.value, "%.9g") : "") << ','
                << (b.applicable ? "yes" : "no") << ',' << (b.applicable ? (b.satisfied ? "yes" : "no") : "") << '\n';
  } else {
    std::cout << "pop: " << fmt(report.pop) << '\n';
    for (const auto& b : report.bounds) {
      if (!b.applicable) {
        std::cout << "  n/a   " << b.name << '\n';
        continue;
      }
      std::cout << "  " << (b.satisfied ? "pass" : "FAIL") << "  " << b.name << " = " << fmt(b.value) << '\n';
    }
  }
  print_violations(report);
  return report.bounds_hold() ? kOk : kBoundViolated;
}

int cmd_diagram(const DiagramGrid& grid, const std::string& out_path) {
  grid.check();
  const auto cells = phase_diagram(grid, search_options());
  if (out_path.empty() || out_path == "-") {
    write_diagram_csv(std::cout, cells);
  } else {
    std::ofstream out(out_path);
    if (!out) throw InvalidInput("cannot write " + out_path);
    write_diagram_csv(out, cells);
  }
  return kOk;
}

// Price of purity over a (gamma, delta) grid of anonymous OR technologies
// with unit costs.
int cmd_sweep(int n, int gamma_steps, int delta_steps, bool csv) {
  if (n < 1 || n > kMaxMixedAgents) throw CapacityError("sweep supports 1..10 agents");
  if (gamma_steps < 1 || delta_steps < 1) throw InvalidInput("sweep needs at least one step per axis");
  const auto opts = search_options();
  double best = 1.0, best_g = 0.0, best_d = 0.0;
  if (csv) std::cout << "gamma,delta,pop\n";
  for (int a = 1; a <= gamma_steps; ++a) {
    const double g = 0.5 * a / (gamma_steps + 1);
    for (int b = 1; b <= delta_steps; ++b) {
      const double d = g + (1.0 - g) * b / (delta_steps + 1);
      const Technology tech = build_structured({BoolFunction::disjunction(n), std::vector<double>(n, g),
                                                std::vector<double>(n, d), std::vector<double>(n, 1.0)});
      const double p = pop(tech, {opts, 0.0}).pop;
      if (csv) std::cout << fmt(g, "%.9g") << ',' << fmt(d, "%.9g") << ',' << fmt(p, "%.9f") << '\n';
      if (p > best) best = p, best_g = g, best_d = d;
    }
  }
  if (!csv)
    std::cout << "agents: " << n << "\nbest pop: " << fmt(best) << "\nat gamma: " << fmt(best_g, "%.9g")
              << "\nat delta: " << fmt(best_d, "%.9g") << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal contracts and the price of purity for combinatorial agency"};
  app.require_subcommand(1);

  std::string path;
  bool csv = false;
  double value = 0.0;
  std::string mode = "mixed";
  double resolution = 1e-3;
  auto add_file = [&](CLI::App* sub) {
    sub->add_option("file", path, "technology file")->required();
    sub->add_flag("--csv", csv, "machine-readable output");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a technology file");
  add_file(validate_cmd);
  auto* classify_cmd = app.add_subcommand("classify", "returns to scale and anonymity");
  add_file(classify_cmd);
  auto* solve_cmd = app.add_subcommand("solve", "optimal contract at one value");
  add_file(solve_cmd);
  solve_cmd->add_option("--value,-v", value, "principal's value for success")->required();
  solve_cmd->add_option("--mode", mode, "pure, mixed or observable")
      ->check(CLI::IsMember({"pure", "mixed", "observable"}));
  auto* pop_cmd = app.add_subcommand("pop", "price of purity");
  add_file(pop_cmd);
  pop_cmd->add_option("--oracle-resolution", resolution, "grid cross-check step for n <= 2, 0 to skip");
  auto* pou_cmd = app.add_subcommand("pou", "price of unaccountability");
  add_file(pou_cmd);
  auto* bounds_cmd = app.add_subcommand("bounds", "audit every applicable price-of-purity bound");
  add_file(bounds_cmd);
  bounds_cmd->add_option("--oracle-resolution", resolution, "grid cross-check step for n <= 2, 0 to skip");

  DiagramGrid grid;
  std::string out_path;
  auto* diagram_cmd = app.add_subcommand("diagram", "phase diagram of OR contracts with delta = 1 - gamma, as CSV");
  diagram_cmd->add_option("--gamma-min", grid.gamma_min);
  diagram_cmd->add_option("--gamma-max", grid.gamma_max);
  diagram_cmd->add_option("--gamma-steps", grid.gamma_steps);
  diagram_cmd->add_option("--v-min", grid.v_min);
  diagram_cmd->add_option("--v-max", grid.v_max);
  diagram_cmd->add_option("--v-steps", grid.v_steps);
  diagram_cmd->add_option("--n", grid.agents, "number of agents");
  diagram_cmd->add_option("--out,-o", out_path, "output file (default stdout)");

  int sweep_n = 2, sweep_gamma = 24, sweep_delta = 24;
  auto* sweep_cmd = app.add_subcommand("sweep", "search anonymous OR technologies for large price of purity");
  sweep_cmd->add_option("--n", sweep_n, "number of agents");
  sweep_cmd->add_option("--gamma-steps", sweep_gamma);
  sweep_cmd->add_option("--delta-steps", sweep_delta);
  sweep_cmd->add_flag("--csv", csv, "one row per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*validate_cmd) return cmd_validate(path, csv);
    if (*classify_cmd) return cmd_classify(path, csv);
    if (*solve_cmd) return cmd_solve(path, value, mode, csv);
    if (*pop_cmd) return cmd_pop(path, resolution, csv);
    if (*pou_cmd) return cmd_pou(path, csv);
    if (*bounds_cmd) return cmd_bounds(path, resolution, csv);
    if (*diagram_cmd) return cmd_diagram(grid, out_path);
    if (*sweep_cmd) return cmd_sweep(sweep_n, sweep_gamma, sweep_delta, csv);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const std::exception& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
