#include "fixtures.hpp"

#include <accessgraph/builder.hpp>
#include <accessgraph/edge_costs.hpp>
#include <accessgraph/paths.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace accessgraph;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

WeightVector dist(double d) {
  WeightVector w;
  w.distance = d;
  return w;
}

AccessGraph random_graph(std::mt19937_64& rng, std::uint32_t n, double edge_prob, bool integer_costs) {
  std::uniform_real_distribution<double> u(0, 1), cost(0.05, 3);
  std::uniform_int_distribution<int> icost(1, 3);
  AccessGraph g;
  for (std::uint32_t v = 0; v < n; ++v) {
    g.add_vertex({static_cast<std::int32_t>(v % 20), static_cast<std::int32_t>(v / 20), 0},
                 {static_cast<double>(v % 20), static_cast<double>(v / 20), 0});
  }
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = 0; b < n; ++b) {
      if (a != b && u(rng) < edge_prob) g.add_edge(a, b, dist(integer_costs ? icost(rng) : cost(rng)));
    }
  }
  finalize_csr(g);
  return g;
}

// Plain Bellman-Ford over the same composed edge costs.
std::vector<double> bellman_ford(const AccessGraph& g, VertexId start, const CostCoefficients& c) {
  const ResolvedCost cost(g, c);
  const Csr& csr = g.csr();
  std::vector<double> d(g.vertex_count(), std::numeric_limits<double>::infinity());
  d[start] = 0.0;
  for (std::size_t round = 0; round + 1 < g.vertex_count(); ++round) {
    bool changed = false;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (!std::isfinite(d[v])) continue;
      for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
        const double nd = d[v] + cost.cost(v, e);
        if (nd < d[csr.columns[e]]) {
          d[csr.columns[e]] = nd;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return d;
}

// Exhaustive search over simple paths for the (cost, hops, key sequence) minimum.
struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<VertexId> vertices;
};

void enumerate(const AccessGraph& g, VertexId goal, std::vector<VertexId>& stack, std::vector<bool>& on, double cost,
               Best& best) {
  const VertexId v = stack.back();
  if (v == goal) {
    auto keys = [&](const std::vector<VertexId>& p) {
      std::vector<NodeKey> k;
      for (VertexId x : p) k.push_back(g.key(x));
      return k;
    };
    const bool better = cost < best.cost ||
                        (cost == best.cost && (stack.size() < best.vertices.size() ||
                                               (stack.size() == best.vertices.size() && keys(stack) < keys(best.vertices))));
    if (better) {
      best.cost = cost;
      best.vertices = stack;
    }
    return;
  }
  const Csr& csr = g.csr();
  for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
    const VertexId c = csr.columns[e];
    if (on[c]) continue;
    on[c] = true;
    stack.push_back(c);
    enumerate(g, goal, stack, on, cost + csr.distance[e], best);
    stack.pop_back();
    on[c] = false;
  }
}

} // namespace

TEST(Paths, AgreesWithBellmanFord) {
  std::mt19937_64 rng(5);
  const auto c = CostCoefficients::distance_only();
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t n = 50 + 35 * static_cast<std::uint32_t>(trial) % 350;
    const AccessGraph g = random_graph(rng, n, 4.0 / n, false);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    const VertexId s = pick(rng);
    const auto d = bellman_ford(g, s, c);
    for (int q = 0; q < 10; ++q) {
      const VertexId t = pick(rng);
      const auto path = shortest_path(g, s, t, c);
      ASSERT_EQ(path.has_value(), std::isfinite(d[t]));
      if (!path) continue;
      EXPECT_EQ(path->cost, d[t]);
      EXPECT_EQ(path->vertices.front(), s);
      EXPECT_EQ(path->vertices.back(), t);
      EXPECT_EQ(path->edges.size() + 1, path->vertices.size());
      EXPECT_NEAR(path->score, path->cost, 1e-9 * (1 + path->cost));
      EXPECT_NEAR(path_score(g, path->edges, c), path->score, 1e-12 * (1 + path->cost));
    }
  }
}

TEST(Paths, TieBreakMatchesExhaustiveSearch) {
  std::mt19937_64 rng(17);
  const auto c = CostCoefficients::distance_only();
  for (int trial = 0; trial < 200; ++trial) {
    const AccessGraph g = random_graph(rng, 8, 0.35, true);
    const auto path = shortest_path(g, 0, 7, c);
    Best best;
    std::vector<VertexId> stack{0};
    std::vector<bool> on(8, false);
    on[0] = true;
    enumerate(g, 7, stack, on, 0.0, best);
    ASSERT_EQ(path.has_value(), std::isfinite(best.cost)) << trial;
    if (!path) continue;
    EXPECT_EQ(path->cost, best.cost) << trial;
    EXPECT_EQ(path->vertices, best.vertices) << trial;
  }
}

TEST(Paths, LexicographicTieOnSquare) {
  AccessGraph g;
  g.add_vertex({0, 0, 0}, {0, 0, 0});
  g.add_vertex({1, 0, 0}, {1, 0, 0});
  g.add_vertex({0, 1, 0}, {0, 1, 0});
  g.add_vertex({1, 1, 0}, {1, 1, 0});
  g.add_edge(0, 1, dist(1));
  g.add_edge(0, 2, dist(1));
  g.add_edge(1, 3, dist(1));
  g.add_edge(2, 3, dist(1));
  finalize_csr(g);
  const auto path = shortest_path(g, 0, 3, CostCoefficients::distance_only());
  ASSERT_TRUE(path.has_value());
  EXPECT_EQ(path->vertices, (std::vector<VertexId>{0, 2, 3}));
}

TEST(Paths, StartEqualsGoal) {
  const AccessGraph g = [] {
    AccessGraph g;
    g.add_vertex({0, 0, 0}, {0, 0, 0});
    g.add_vertex({1, 0, 0}, {1, 0, 0});
    g.add_edge(0, 1, dist(1));
    finalize_csr(g);
    return g;
  }();
  const auto path = shortest_path(g, 1, 1, CostCoefficients::distance_only());
  ASSERT_TRUE(path.has_value());
  EXPECT_EQ(path->vertices, (std::vector<VertexId>{1}));
  EXPECT_TRUE(path->edges.empty());
  EXPECT_EQ(path->score, 0.0);
  EXPECT_EQ(path->cost, 0.0);
  EXPECT_EQ(path->length, 0.0);
  EXPECT_EQ(path->steps, 0u);
  // Edges are one-way.
  EXPECT_FALSE(shortest_path(g, 1, 0, CostCoefficients::distance_only()).has_value());
  EXPECT_EQ(code_of([&] { shortest_path(g, 0, 5, CostCoefficients::distance_only()); }), ErrorCode::NotFound);
}

TEST(Paths, RejectsNonPositiveCosts) {
  AccessGraph g;
  g.add_vertex({0, 0, 0}, {0, 0, 0});
  g.add_vertex({1, 0, 0}, {1, 0, 0});
  g.add_vertex({2, 0, 0}, {2, 0, 0});
  g.add_edge(0, 1, dist(1));
  g.add_edge(1, 2, dist(1));
  finalize_csr(g);
  // Flat edges have zero slope, so a slope-only cost is zero everywhere.
  const CostCoefficients slope_only{{{"slope", 1.0}}, {}};
  EXPECT_EQ(code_of([&] { shortest_path(g, 0, 2, slope_only); }), ErrorCode::NonPositiveEdgeCost);
  EXPECT_EQ(code_of([&] { shortest_path(g, 0, 0, slope_only); }), ErrorCode::NonPositiveEdgeCost);
  const CostCoefficients negative{{{"distance", -1.0}}, {}};
  EXPECT_EQ(code_of([&] { shortest_path(g, 0, 2, negative); }), ErrorCode::NonPositiveEdgeCost);
}

TEST(Paths, ThresholdRulesDetour) {
  // Two routes from 0 to 3; the short one passes a vertex with a poor attribute.
  AccessGraph g;
  g.add_vertex({0, 0, 0}, {0, 0, 0});
  g.add_vertex({1, 0, 0}, {1, 0, 0});
  g.add_vertex({1, 1, 0}, {1, 1, 0});
  g.add_vertex({2, 0, 0}, {2, 0, 0});
  g.add_edge(0, 1, dist(1));
  g.add_edge(1, 3, dist(1));
  g.add_edge(0, 2, dist(1.2));
  g.add_edge(2, 3, dist(1.2));
  finalize_csr(g);
  g.set_node_attr("view_max", {5, 0.5, 5, 5});
  CostCoefficients c = CostCoefficients::distance_only();
  EXPECT_EQ(shortest_path(g, 0, 3, c)->vertices, (std::vector<VertexId>{0, 1, 3}));
  c.threshold_rules.push_back({"view_max", 1.0, 10.0, true});
  const auto detour = shortest_path(g, 0, 3, c);
  EXPECT_EQ(detour->vertices, (std::vector<VertexId>{0, 2, 3}));
  EXPECT_DOUBLE_EQ(detour->score, 2.4);
  EXPECT_DOUBLE_EQ(detour->cost, 2.4);
  const auto forced = describe_path(g, {0, 1, 3}, c);
  EXPECT_DOUBLE_EQ(forced.score, 2.0);
  EXPECT_DOUBLE_EQ(forced.cost, 11.0);
  EXPECT_EQ(code_of([&] { describe_path(g, {0, 3}, c); }), ErrorCode::InvalidArgument);
}

TEST(Paths, OctileBoundOnFlatFloor) {
  GraphParams p;
  p.start = {0, 0, 0};
  auto g = build_graph(fixtures::flat_floor().build(), p).graph;
  compute_edge_costs(g);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int32_t> cell(0, 40);
  const double bound = std::sqrt(4.0 - 2.0 * std::numbers::sqrt2);
  for (int q = 0; q < 20; ++q) {
    const NodeKey a{cell(rng), cell(rng), 0}, b{cell(rng), cell(rng), 0};
    const auto path = shortest_path(g, *g.find(a), *g.find(b), CostCoefficients::distance_only());
    ASSERT_TRUE(path.has_value());
    const double euclid = dst(g.point(*g.find(a)), g.point(*g.find(b)));
    EXPECT_GE(path->length, euclid - 1e-9);
    EXPECT_LE(path->length, bound * euclid + 1e-9);
    const double di = std::abs(a.i - b.i), dj = std::abs(a.j - b.j);
    const double octile = 0.25 * (std::max(di, dj) + (std::numbers::sqrt2 - 1) * std::min(di, dj));
    EXPECT_NEAR(path->length, octile, 1e-9);
  }
  const auto axis = shortest_path(g, *g.find({2, 5, 0}), *g.find({38, 5, 0}), CostCoefficients::distance_only());
  EXPECT_LT(axis->length / 9.0 - 1.0, 1e-3);
  EXPECT_EQ(axis->edges.size(), 36u);
}

TEST(Paths, StepCountAndTotals) {
  AccessGraph g;
  for (int k = 0; k < 4; ++k) g.add_vertex({k, 0, 0}, {static_cast<double>(k), 0, 0.1 * k});
  WeightVector up;
  up.step = ConnectionType::Up;
  WeightVector over;
  over.step = ConnectionType::Over;
  g.add_edge(0, 1, up);
  g.add_edge(1, 2, {});
  g.add_edge(2, 3, over);
  compute_edge_costs(g);
  const CostCoefficients c{{{"distance", 1.0}, {"steps", 2.0}}, {}};
  const auto path = shortest_path(g, 0, 3, c);
  ASSERT_TRUE(path.has_value());
  EXPECT_EQ(path->steps, 2u);
  EXPECT_EQ(path->totals.at("steps"), 2.0);
  EXPECT_NEAR(path->totals.at("distance"), 3 * std::hypot(1.0, 0.1), 1e-12);
  EXPECT_NEAR(path->totals.at("slope"), 0.3, 1e-12);
  EXPECT_NEAR(path->score, 3 * std::hypot(1.0, 0.1) + 4.0, 1e-12);
  EXPECT_NEAR(path->totals.at("energy"), 3 * energy_polynomial(0.1) * std::hypot(1.0, 0.1), 1e-9);
  EXPECT_EQ(path->length, path->totals.at("distance"));
}
