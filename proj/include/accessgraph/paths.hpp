#pragma once

#include <accessgraph/edge_costs.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

namespace accessgraph {

struct PathResult {
  std::vector<VertexId> vertices; // edges.size() + 1 entries, or just the start
  std::vector<EdgeId> edges;
  std::map<std::string, double> totals; // per-factor sums, including steps
  double score = 0.0;  // rho-weighted sum, no threshold rules
  double cost = 0.0;   // search cost, threshold rules applied
  double length = 0.0; // meters
  std::size_t steps = 0;
};

/// Number of stepped (OVER, UP, DOWN) edges on the path.
inline std::size_t count_steps(const AccessGraph& graph, const std::vector<EdgeId>& edges) {
  const Csr& csr = graph.csr();
  std::size_t n = 0;
  for (EdgeId e : edges) n += is_step(csr.step.at(e)) ? 1 : 0;
  return n;
}

/// rho-weighted sum of the path's weight vectors.
inline double path_score(const AccessGraph& graph, const std::vector<EdgeId>& edges, const CostCoefficients& coefficients) {
  const ResolvedCost resolved(graph, {coefficients.rho, {}});
  double total = 0.0;
  for (EdgeId e : edges) {
    if (e >= graph.csr().edge_count()) throw Error(ErrorCode::InvalidArgument, "edge id out of range");
    total += resolved.score(e);
  }
  return total;
}

/// Edge id of (parent, child), if present.
inline std::optional<EdgeId> find_edge(const AccessGraph& graph, VertexId parent, VertexId child) {
  const Csr& csr = graph.csr();
  for (EdgeId e = csr.row_begin(parent); e < csr.row_end(parent); ++e) {
    if (csr.columns[e] == child) return e;
  }
  return std::nullopt;
}

/// Fills totals, score, length and steps for a vertex sequence.
inline PathResult describe_path(const AccessGraph& graph, const std::vector<VertexId>& vertices,
                                const CostCoefficients& coefficients) {
  if (vertices.empty()) throw Error(ErrorCode::InvalidArgument, "path has no vertices");
  PathResult result;
  result.vertices = vertices;
  const Csr& csr = graph.csr();
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    const auto e = find_edge(graph, vertices[k], vertices[k + 1]);
    if (!e) throw Error(ErrorCode::InvalidArgument, "consecutive path vertices are not connected");
    result.edges.push_back(*e);
  }
  const ResolvedCost resolved(graph, coefficients);
  result.totals[std::string(kDistance)] = 0.0;
  result.totals[std::string(kSlope)] = 0.0;
  result.totals[std::string(kCrossSlope)] = 0.0;
  result.totals[std::string(kEnergy)] = 0.0;
  for (const auto& [name, values] : csr.extras) result.totals[name] = 0.0;
  for (std::size_t k = 0; k < result.edges.size(); ++k) {
    const EdgeId e = result.edges[k];
    result.totals[std::string(kDistance)] += csr.distance[e];
    result.totals[std::string(kSlope)] += csr.slope[e];
    result.totals[std::string(kCrossSlope)] += csr.cross_slope[e];
    result.totals[std::string(kEnergy)] += csr.energy[e];
    for (const auto& [name, values] : csr.extras) result.totals[name] += values[e];
    result.score += resolved.score(e);
    result.cost += resolved.cost(vertices[k], e);
  }
  result.steps = count_steps(graph, result.edges);
  result.totals[std::string(kSteps)] = static_cast<double>(result.steps);
  result.length = result.totals[std::string(kDistance)];
  return result;
}

/// Least-cost path under the composed cost (rho-weighted factors times the
/// threshold multipliers of the tail vertex). Ties are broken by fewer edges,
/// then by the lexicographically smaller sequence of node keys. Throws
/// NonPositiveEdgeCost if any edge of the graph has a cost <= 0.
inline std::optional<PathResult> shortest_path(const AccessGraph& graph, VertexId start, VertexId goal,
                                               const CostCoefficients& coefficients) {
  const std::size_t n = graph.vertex_count();
  if (start >= n || goal >= n) throw Error(ErrorCode::NotFound, "path endpoint is not a vertex");
  const Csr& csr = graph.csr();
  const ResolvedCost resolved(graph, coefficients);

  std::vector<double> edge_cost(csr.edge_count());
  for (VertexId v = 0; v < n; ++v) {
    for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
      const double c = resolved.cost(v, e);
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw Error(ErrorCode::NonPositiveEdgeCost,
                    "edge " + std::to_string(v) + "->" + std::to_string(csr.columns[e]) + " has cost " + std::to_string(c));
      }
      edge_cost[e] = c;
    }
  }
  if (start == goal) return describe_path(graph, {start}, coefficients);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr VertexId kNone = std::numeric_limits<VertexId>::max();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> hops(n, 0);
  std::vector<VertexId> pred(n, kNone);
  std::vector<bool> settled(n, false);

  // True when the path ending at a sorts before the one ending at b; both
  // paths have the same number of edges and settled predecessor chains.
  auto path_less = [&](VertexId a, VertexId b) {
    std::optional<std::pair<VertexId, VertexId>> first_diff;
    while (a != b) {
      first_diff = {a, b};
      a = pred[a];
      b = pred[b];
    }
    return first_diff && graph.key(first_diff->first) < graph.key(first_diff->second);
  };

  using Label = std::tuple<double, std::size_t, VertexId>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  dist[start] = 0.0;
  heap.emplace(0.0, 0, start);
  while (!heap.empty()) {
    const auto [d, h, u] = heap.top();
    heap.pop();
    if (settled[u] || d != dist[u] || h != hops[u]) continue;
    settled[u] = true;
    if (u == goal) break;
    for (EdgeId e = csr.row_begin(u); e < csr.row_end(u); ++e) {
      const VertexId v = csr.columns[e];
      if (settled[v]) continue;
      const double nd = d + edge_cost[e];
      const std::size_t nh = h + 1;
      if (std::tie(nd, nh) < std::tie(dist[v], hops[v])) {
        dist[v] = nd;
        hops[v] = nh;
        pred[v] = u;
        heap.emplace(nd, nh, v);
      } else if (nd == dist[v] && nh == hops[v] && path_less(u, pred[v])) {
        pred[v] = u;
      }
    }
  }
  if (!settled[goal]) return std::nullopt;

  std::vector<VertexId> vertices;
  for (VertexId v = goal; v != kNone; v = pred[v]) vertices.push_back(v);
  std::reverse(vertices.begin(), vertices.end());
  PathResult result = describe_path(graph, vertices, coefficients);
  result.cost = dist[goal];
  return result;
}

} // namespace accessgraph
