#pragma once

// Line-oriented technology files. '#' starts a comment; blank lines are
// ignored. The first line names the format:
//
//   explicit n=<int>        costs <c_1..c_n>
//                           table <2^n reals, bitmask order, agent 1 = bit 0>
//
//   structured n=<int>      costs / gamma / delta <n reals, or one shared value>
//                           formula <expr over x1..xn with & | ( )>
//
//   network [n=<int>]       costs / gamma / delta as above, then either
//                           sp <expr over e1..em with S(..) P(..)>
//                           or: edges, one "u v agent" line per edge,
//                               source <u>, sink <v>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "agency/boolfn.hpp"
#include "agency/error.hpp"
#include "agency/network.hpp"
#include "agency/purity.hpp"
#include "agency/technology.hpp"

namespace agency {

enum class SourceKind { Explicit, Structured, Network };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Explicit: return "explicit";
    case SourceKind::Structured: return "structured";
    case SourceKind::Network: return "network";
  }
  return "?";
}

struct LoadedTechnology {
  SourceKind kind;
  Technology tech;
  std::optional<StructuredParams> structured;
  std::optional<ReadOnceNetwork> network;
  std::optional<OrParams> or_params;  // set when the success rule is a plain OR
};

namespace detail {

struct Line {
  int number;
  std::vector<std::string> words;
  std::string rest;  // text after the first word
};

inline std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> out;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    Line line{number, {}, {}};
    for (std::string w; words >> w;) line.words.push_back(w);
    if (line.words.empty()) continue;
    const auto start = raw.find(line.words.front()) + line.words.front().size();
    line.rest = raw.substr(start);
    out.push_back(std::move(line));
  }
  return out;
}

inline double parse_real(const std::string& word, int line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(word.c_str(), &end);
  if (end == word.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ParseError(line, "bad number '" + word + "'");
  return x;
}

inline int parse_int(const std::string& word, int line) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(word.c_str(), &end, 10);
  if (end == word.c_str() || *end != '\0' || errno == ERANGE) throw ParseError(line, "bad integer '" + word + "'");
  return static_cast<int>(x);
}

inline int parse_count(const Line& header) {
  for (std::size_t k = 1; k < header.words.size(); ++k) {
    const auto& w = header.words[k];
    if (w.rfind("n=", 0) == 0) {
      const int n = parse_int(w.substr(2), header.number);
      if (n < 1) throw ParseError(header.number, "agent count must be at least 1");
      if (n > kMaxAgents) throw CapacityError("at most 20 agents are supported, file declares " + std::to_string(n));
      return n;
    }
    throw ParseError(header.number, "unexpected '" + w + "' in header");
  }
  return -1;
}

// Numbers after the keyword; `n` values, or one value broadcast when allowed.
inline std::vector<double> parse_values(const Line& line, std::size_t n, bool broadcast) {
  std::vector<double> values;
  for (std::size_t k = 1; k < line.words.size(); ++k) values.push_back(parse_real(line.words[k], line.number));
  if (broadcast && values.size() == 1 && n > 1) values.assign(n, values.front());
  if (values.size() != n)
    throw ParseError(line.number, "'" + line.words.front() + "' needs " + std::to_string(n) + " values, got " +
                                      std::to_string(values.size()));
  return values;
}

inline const Line& require_key(const std::map<std::string, const Line*>& keys, const std::string& key,
                               int header_line) {
  const auto it = keys.find(key);
  if (it == keys.end()) throw ParseError(header_line, "missing '" + key + "' line");
  return *it->second;
}

inline LoadedTechnology parse_explicit(const std::vector<Line>& lines) {
  const Line& header = lines.front();
  const int n = parse_count(header);
  if (n < 0) throw ParseError(header.number, "explicit header needs n=<int>");
  if (lines.size() < 3) throw ParseError(lines.back().number, "explicit format needs 'costs' and 'table' lines");
  if (lines[1].words.front() != "costs") throw ParseError(lines[1].number, "expected 'costs'");
  if (lines[2].words.front() != "table") throw ParseError(lines[2].number, "expected 'table'");
  if (lines.size() > 3) throw ParseError(lines[3].number, "unexpected line after 'table'");
  auto costs = parse_values(lines[1], static_cast<std::size_t>(n), false);
  auto table = parse_values(lines[2], std::size_t{1} << n, false);
  return {SourceKind::Explicit, Technology(std::move(costs), std::move(table)), {}, {}, {}};
}

inline LoadedTechnology parse_structured(const std::vector<Line>& lines) {
  const Line& header = lines.front();
  const int n = parse_count(header);
  if (n < 0) throw ParseError(header.number, "structured header needs n=<int>");
  std::map<std::string, const Line*> keys;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& key = lines[k].words.front();
    if (key != "costs" && key != "gamma" && key != "delta" && key != "formula")
      throw ParseError(lines[k].number, "unknown keyword '" + key + "'");
    if (!keys.emplace(key, &lines[k]).second) throw ParseError(lines[k].number, "duplicate '" + key + "'");
  }
  const auto un = static_cast<std::size_t>(n);
  const Line& formula = require_key(keys, "formula", header.number);
  StructuredParams params{parse_formula(formula.rest, n, formula.number),
                          parse_values(require_key(keys, "gamma", header.number), un, true),
                          parse_values(require_key(keys, "delta", header.number), un, true),
                          parse_values(require_key(keys, "costs", header.number), un, true)};
  Technology tech = build_structured(params);
  std::optional<OrParams> or_params;
  if (params.f == BoolFunction::disjunction(n)) or_params = OrParams{params.gamma, params.delta};
  return {SourceKind::Structured, std::move(tech), std::move(params), {}, std::move(or_params)};
}

inline LoadedTechnology parse_network(const std::vector<Line>& lines) {
  const Line& header = lines.front();
  const int declared = parse_count(header);
  std::map<std::string, const Line*> keys;
  std::optional<ReadOnceNetwork> net;
  std::size_t k = 1;
  while (k < lines.size()) {
    const Line& line = lines[k];
    const auto& key = line.words.front();
    if (key == "costs" || key == "gamma" || key == "delta") {
      if (!keys.emplace(key, &line).second) throw ParseError(line.number, "duplicate '" + key + "'");
      ++k;
    } else if (key == "sp") {
      if (net) throw ParseError(line.number, "network given twice");
      net = parse_sp(line.rest, line.number);
      ++k;
    } else if (key == "edges") {
      if (net) throw ParseError(line.number, "network given twice");
      if (line.words.size() != 1) throw ParseError(line.number, "'edges' takes no arguments");
      EdgeGraph g;
      std::map<std::string, int> ids;
      auto vertex = [&](const std::string& name) {
        return ids.emplace(name, static_cast<int>(ids.size())).first->second;
      };
      std::optional<std::string> source, sink;
      for (++k; k < lines.size(); ++k) {
        const Line& e = lines[k];
        const auto& w = e.words.front();
        if (w == "source" || w == "sink") {
          if (e.words.size() != 2) throw ParseError(e.number, "'" + w + "' needs one vertex");
          (w == "source" ? source : sink) = e.words[1];
          continue;
        }
        if (w == "costs" || w == "gamma" || w == "delta" || w == "sp" || w == "edges") break;
        if (e.words.size() != 3) throw ParseError(e.number, "edge lines are 'u v agent'");
        const int agent = parse_int(e.words[2], e.number);
        if (agent < 1) throw ParseError(e.number, "agent numbers start at 1");
        g.edges.push_back({vertex(e.words[0]), vertex(e.words[1]), agent - 1});
      }
      if (!source || !sink) throw ParseError(line.number, "edge list needs 'source' and 'sink' lines");
      g.source = vertex(*source);
      g.sink = vertex(*sink);
      g.vertices = static_cast<int>(ids.size());
      net = std::move(g);
    } else {
      throw ParseError(line.number, "unknown keyword '" + key + "'");
    }
  }
  if (!net) throw ParseError(header.number, "network needs an 'sp' or 'edges' section");
  const int m = edge_count(*net);
  if (declared >= 0 && declared != m)
    throw InvalidInput("header declares " + std::to_string(declared) + " agents, network has " + std::to_string(m));
  const auto um = static_cast<std::size_t>(m);
  const auto gamma = parse_values(require_key(keys, "gamma", header.number), um, true);
  const auto delta = parse_values(require_key(keys, "delta", header.number), um, true);
  const auto costs = parse_values(require_key(keys, "costs", header.number), um, true);
  Technology tech = network_to_technology(*net, gamma, delta, costs);
  return {SourceKind::Network, std::move(tech), {}, std::move(net), {}};
}

}  // namespace detail

/// Throws ParseError on syntax, InvalidInput on semantic violations of
/// structured and network inputs, CapacityError beyond the size caps.
/// Explicit tables are returned unvalidated.
inline LoadedTechnology parse_technology(std::istream& in) {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) throw ParseError(1, "empty technology file");
  const auto& kind = lines.front().words.front();
  if (kind == "explicit") return detail::parse_explicit(lines);
  if (kind == "structured") return detail::parse_structured(lines);
  if (kind == "network") return detail::parse_network(lines);
  throw ParseError(lines.front().number, "unknown format '" + kind + "'");
}

inline LoadedTechnology parse_technology(const std::string& text) {
  std::istringstream in(text);
  return parse_technology(in);
}

inline LoadedTechnology load_technology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_technology(in);
}

/// Explicit-format rendering; reads back to the same doubles.
inline void write_explicit(std::ostream& out, const Technology& tech) {
  const auto old = out.precision(17);
  out << "explicit n=" << tech.agents() << "\ncosts";
  for (double c : tech.costs()) out << ' ' << c;
  out << "\ntable";
  for (double t : tech.table()) out << ' ' << t;
  out << '\n';
  out.precision(old);
}

}  // namespace agency
