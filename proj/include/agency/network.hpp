#pragma once

// Read-once two-terminal networks: every edge is one agent's task, and the
// project succeeds when some source-sink path consists of successful edges.
// Series-parallel networks reduce by composition; anything else (a bridge,
// say) goes through enumeration of all edge states.

#include <algorithm>
#include <cctype>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agency/error.hpp"
#include "agency/technology.hpp"

namespace agency {

struct SpNode {
  enum class Kind { Edge, Series, Parallel };
  Kind kind = Kind::Edge;
  int agent = -1;  // 0-based, edges only
  std::vector<SpNode> children;

  static SpNode edge(int agent) { return {Kind::Edge, agent, {}}; }
  static SpNode series(std::vector<SpNode> c) { return {Kind::Series, -1, std::move(c)}; }
  static SpNode parallel(std::vector<SpNode> c) { return {Kind::Parallel, -1, std::move(c)}; }
};

/// Undirected edge-labeled graph; vertex ids are 0..vertices-1.
struct EdgeGraph {
  struct Edge {
    int u;
    int v;
    int agent;
  };
  int vertices = 0;
  std::vector<Edge> edges;
  int source = 0;
  int sink = 1;
};

using ReadOnceNetwork = std::variant<SpNode, EdgeGraph>;

inline constexpr int kMaxNetworkEdges = 20;

namespace detail {

inline void collect_agents(const SpNode& node, std::vector<int>& out) {
  if (node.kind == SpNode::Kind::Edge) {
    out.push_back(node.agent);
    return;
  }
  if (node.children.empty()) throw InvalidInput("series/parallel node without children");
  for (const auto& c : node.children) collect_agents(c, out);
}

inline void check_read_once(std::vector<int> agents) {
  std::sort(agents.begin(), agents.end());
  for (std::size_t k = 0; k < agents.size(); ++k)
    if (agents[k] != static_cast<int>(k))
      throw InvalidInput("network edges must carry agents 1..m, each exactly once");
  if (agents.size() > static_cast<std::size_t>(kMaxNetworkEdges))
    throw CapacityError("networks support at most 20 edges");
}

}  // namespace detail

inline int edge_count(const ReadOnceNetwork& net) {
  if (const auto* sp = std::get_if<SpNode>(&net)) {
    std::vector<int> agents;
    detail::collect_agents(*sp, agents);
    detail::check_read_once(agents);
    return static_cast<int>(agents.size());
  }
  const auto& g = std::get<EdgeGraph>(net);
  std::vector<int> agents;
  for (const auto& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.vertices || e.v >= g.vertices) throw InvalidInput("edge endpoint out of range");
    agents.push_back(e.agent);
  }
  if (g.source == g.sink) throw InvalidInput("source and sink must differ");
  if (g.source < 0 || g.sink < 0 || g.source >= g.vertices || g.sink >= g.vertices)
    throw InvalidInput("source or sink out of range");
  detail::check_read_once(agents);
  return static_cast<int>(agents.size());
}

/// Series: product; parallel: one minus the product of failures.
inline double reliability(const SpNode& node, std::span<const double> probs) {
  switch (node.kind) {
    case SpNode::Kind::Edge:
      return probs[static_cast<std::size_t>(node.agent)];
    case SpNode::Kind::Series: {
      double p = 1.0;
      for (const auto& c : node.children) p *= reliability(c, probs);
      return p;
    }
    case SpNode::Kind::Parallel: {
      double fail = 1.0;
      for (const auto& c : node.children) fail *= 1.0 - reliability(c, probs);
      return 1.0 - fail;
    }
  }
  return 0.0;
}

/// Sum over all 2^m edge states of the state probability times source-sink
/// connectivity.
inline double reliability(const EdgeGraph& g, std::span<const double> probs) {
  const int m = static_cast<int>(g.edges.size());
  if (m > kMaxNetworkEdges) throw CapacityError("networks support at most 20 edges");
  std::vector<int> parent(g.vertices);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double total = 0.0;
  for (AgentSet up = 0; up < (AgentSet{1} << m); ++up) {
    double w = 1.0;
    std::iota(parent.begin(), parent.end(), 0);
    for (int k = 0; k < m; ++k) {
      const auto& e = g.edges[k];
      const double p = probs[static_cast<std::size_t>(e.agent)];
      if (contains(up, k)) {
        w *= p;
        parent[find(e.u)] = find(e.v);
      } else {
        w *= 1.0 - p;
      }
    }
    if (find(g.source) == find(g.sink)) total += w;
  }
  return total;
}

inline double reliability(const ReadOnceNetwork& net, std::span<const double> probs) {
  const int m = edge_count(net);
  if (probs.size() != static_cast<std::size_t>(m)) throw InvalidInput("need one probability per edge");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("edge probability outside [0, 1]");
  return std::visit([&](const auto& n) { return reliability(n, probs); }, net);
}

/// The same network as an explicit graph (source 0, sink 1).
inline EdgeGraph to_graph(const SpNode& root) {
  EdgeGraph g;
  g.vertices = 2;
  auto build = [&](auto&& self, const SpNode& node, int s, int t) -> void {
    switch (node.kind) {
      case SpNode::Kind::Edge:
        g.edges.push_back({s, t, node.agent});
        return;
      case SpNode::Kind::Series: {
        int from = s;
        for (std::size_t k = 0; k < node.children.size(); ++k) {
          const int to = k + 1 == node.children.size() ? t : g.vertices++;
          self(self, node.children[k], from, to);
          from = to;
        }
        return;
      }
      case SpNode::Kind::Parallel:
        for (const auto& c : node.children) self(self, c, s, t);
        return;
    }
  };
  build(build, root, 0, 1);
  return g;
}

/// S(...) series, P(...) parallel, e<i> an edge owned by agent i (1-based).
inline SpNode parse_sp(std::string_view text, int line = 1) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& msg) -> SpNode { throw ParseError(line, msg); };
  auto parse = [&](auto&& self) -> SpNode {
    skip();
    if (pos >= text.size()) return fail("unexpected end of network expression");
    const char c = text[pos];
    if (c == 'e') {
      const std::size_t start = ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (start == pos) return fail("edge without agent number");
      const int agent = std::stoi(std::string(text.substr(start, pos - start)));
      if (agent < 1) return fail("agent numbers start at 1");
      return SpNode::edge(agent - 1);
    }
    if (c != 'S' && c != 'P') return fail(std::string("unexpected '") + c + "' in network expression");
    ++pos;
    skip();
    if (pos >= text.size() || text[pos] != '(') return fail("expected '(' after S/P");
    ++pos;
    std::vector<SpNode> children;
    while (true) {
      children.push_back(self(self));
      skip();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        break;
      }
      return fail("expected ',' or ')' in network expression");
    }
    return c == 'S' ? SpNode::series(std::move(children)) : SpNode::parallel(std::move(children));
  };
  SpNode root = parse(parse);
  skip();
  if (pos != text.size()) fail("trailing characters after network expression");
  return root;
}

/// t(a) = reliability with edge i working with probability delta_i under
/// effort and gamma_i otherwise.
inline Technology network_to_technology(const ReadOnceNetwork& net, std::span<const double> gamma,
                                        std::span<const double> delta, std::span<const double> costs) {
  const int n = edge_count(net);
  if (gamma.size() != static_cast<std::size_t>(n) || delta.size() != static_cast<std::size_t>(n) ||
      costs.size() != static_cast<std::size_t>(n))
    throw InvalidInput("gamma, delta and costs need one entry per edge");
  for (int i = 0; i < n; ++i) {
    if (!(gamma[i] >= 0.0 && gamma[i] < 1.0)) throw InvalidInput("gamma outside [0, 1) for agent " + std::to_string(i + 1));
    if (!(delta[i] > gamma[i] && delta[i] <= 1.0))
      throw InvalidInput("need gamma < delta <= 1 for agent " + std::to_string(i + 1));
  }
  std::vector<double> table(std::size_t{1} << n), probs(n);
  for (AgentSet a = 0; a < table.size(); ++a) {
    for (int i = 0; i < n; ++i) probs[i] = contains(a, i) ? delta[i] : gamma[i];
    table[a] = std::visit([&](const auto& net_) { return reliability(net_, probs); }, net);
  }
  Technology tech(std::vector<double>(costs.begin(), costs.end()), std::move(table));
  require_valid(tech);
  return tech;
}

}  // namespace agency
