#pragma once

#include <accessgraph/edge_costs.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/mesh.hpp>
#include <accessgraph/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace accessgraph {

struct GridOffset {
  std::int32_t i = 0;
  std::int32_t j = 0;
  auto operator<=>(const GridOffset&) const = default;
};

inline std::vector<GridOffset> eight_neighbors() {
  std::vector<GridOffset> phi;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      if (i != 0 || j != 0) phi.push_back({i, j});
    }
  }
  return phi;
}

/// Creation parameters. Lengths in meters, angles in degrees.
struct GraphParams {
  Vec3 start;                         // seed point; the first node is the surface below it
  double height = 1.0;                // downcast origin offset above the parent node
  double spacing = 0.25;              // grid spacing in x and y
  double step_up = 0.2;               // max ascent step (>= 0)
  double step_down = -0.2;            // max descent step (<= 0)
  double slope_up = 20.0;             // max incline for direct connections (>= 0)
  double slope_down = -20.0;          // max decline for direct connections (<= 0)
  std::optional<double> cross_slope_limit; // optional post-build filter on direct edges
  std::size_t min_children = 0;       // parents with fewer valid children get none
  std::vector<GridOffset> directions = eight_neighbors();

  std::optional<double> max_drop;     // downcast length; defaults to 4 * height
  std::optional<double> merge_tolerance; // same-column merge distance in z; defaults to spacing / 2
  double level_epsilon = 1e-3;        // |dz| at or below which a blocked step is a step-over
  double ray_lift = 0.01;             // both ends of connection rays are raised by this much

  double drop_length() const { return max_drop.value_or(4.0 * height); }
  double merge_tol() const { return merge_tolerance.value_or(spacing / 2.0); }

  /// Sorts directions into row-major order and checks every invariant.
  void normalize() {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!is_finite(start)) fail("start point must be finite");
    if (!(spacing > 0.0)) fail("spacing must be > 0");
    if (!(height > 0.0)) fail("height must be > 0");
    if (!(step_up >= 0.0)) fail("step_up must be >= 0");
    if (!(step_down <= 0.0)) fail("step_down must be <= 0");
    if (!(slope_up >= 0.0 && slope_up < 90.0)) fail("slope_up must be in [0, 90)");
    if (!(slope_down <= 0.0 && slope_down > -90.0)) fail("slope_down must be in (-90, 0]");
    if (cross_slope_limit && !(*cross_slope_limit >= 0.0 && *cross_slope_limit < 90.0)) {
      fail("cross_slope_limit must be in [0, 90)");
    }
    if (directions.empty()) fail("direction set is empty");
    std::sort(directions.begin(), directions.end());
    if (std::adjacent_find(directions.begin(), directions.end()) != directions.end()) {
      fail("direction set has duplicates");
    }
    if (std::find(directions.begin(), directions.end(), GridOffset{0, 0}) != directions.end()) {
      fail("direction set must not contain (0, 0)");
    }
    if (min_children > directions.size()) fail("min_children exceeds the number of directions");
    if (!(drop_length() > height)) fail("max_drop must exceed height");
    if (!(merge_tol() > 0.0)) fail("merge_tolerance must be > 0");
    if (!(level_epsilon >= 0.0) || !(ray_lift >= 0.0)) fail("tolerances must be >= 0");
  }
};

struct BuildReport {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t queue_peak = 0;
  bool terminated_early = false;
  std::vector<std::size_t> frontier_snapshots; // vertices discovered per breadth-first ring
  std::size_t removed_by_cross_slope = 0;
};

struct BuildOptions {
  unsigned threads = 1;
  bool record_frontiers = false;
};

struct BuildResult {
  AccessGraph graph;
  BuildReport report;
};

inline constexpr Vec3 kDown{0.0, 0.0, -1.0};

namespace detail {
inline double tan_degrees(double deg) { return std::tan(deg * std::numbers::pi / 180.0); }
} // namespace detail

/// Classifies the movement from node p to node c (both on surfaces).
/// Rays run between the points lifted by ray_lift; a blocked direct ray is
/// retried from p raised by step_up (ascending or level) or by |step_down|
/// (descending).
inline ConnectionType get_connection(const Scene& scene, const GraphParams& params, const Vec3& p,
                                     const Vec3& c) {
  const Vec3 lift{0.0, 0.0, params.ray_lift};
  const Vec3 from = p + lift;
  const Vec3 to = c + lift;
  if (!scene.segment_blocked(from, to)) return ConnectionType::Direct;

  const double dz = c.z - p.z;
  const bool level = std::abs(dz) <= params.level_epsilon;
  if (level || dz > 0.0) {
    if (params.step_up <= 0.0) return ConnectionType::Invalid;
    if (!scene.segment_blocked(from + Vec3{0.0, 0.0, params.step_up}, to)) {
      return level ? ConnectionType::Over : ConnectionType::Up;
    }
    return ConnectionType::Invalid;
  }
  if (params.step_down >= 0.0) return ConnectionType::Invalid;
  if (!scene.segment_blocked(from + Vec3{0.0, 0.0, -params.step_down}, to)) return ConnectionType::Down;
  return ConnectionType::Invalid;
}

struct ChildCandidate {
  ConnectionType type = ConnectionType::Invalid;
  Vec3 point;
  std::uint32_t object_id = 0;
};

/// Validates one candidate. `candidate` is the grid position lifted by the
/// height parameter; it is dropped onto the nearest surface below and must
/// land on a walkable object within max_drop. Direct connections must then
/// satisfy the slope limits, stepped ones the step limits.
inline std::optional<ChildCandidate> check_child(const Scene& scene, const GraphParams& params,
                                                 const Vec3& parent, const Vec3& candidate) {
  const auto hit = scene.inter(candidate, kDown, params.drop_length());
  if (!hit || !scene.is_walkable(hit->object_id)) return std::nullopt;
  const Vec3 child = hit->point;
  const ConnectionType type = get_connection(scene, params, parent, child);
  const double dz = child.z - parent.z;
  switch (type) {
    case ConnectionType::Invalid:
      return std::nullopt;
    case ConnectionType::Direct: {
      const double run = horizontal_distance(parent, child);
      if (dz < detail::tan_degrees(params.slope_down) * run || dz > detail::tan_degrees(params.slope_up) * run) {
        return std::nullopt;
      }
      break;
    }
    case ConnectionType::Over:
      break;
    case ConnectionType::Up:
      if (!(dz > 0.0 && dz <= params.step_up)) return std::nullopt;
      break;
    case ConnectionType::Down:
      if (!(dz < 0.0 && dz >= params.step_down)) return std::nullopt;
      break;
  }
  return ChildCandidate{type, child, hit->object_id};
}

struct NodeChild {
  GridOffset offset;
  ChildCandidate candidate;
};

/// Grid position of key (i, j) for a given start point and spacing.
inline Vec3 grid_position(const GraphParams& params, std::int32_t i, std::int32_t j, double z) {
  return {params.start.x + i * params.spacing, params.start.y + j * params.spacing, z};
}

/// Valid children of the parent at grid column (i, j), in direction order.
/// Returns nothing when fewer than min_children validate.
inline std::vector<NodeChild> get_nodes(const Scene& scene, const GraphParams& params, std::int32_t i,
                                        std::int32_t j, const Vec3& parent) {
  std::vector<NodeChild> children;
  for (const GridOffset& d : params.directions) {
    const Vec3 candidate = grid_position(params, i + d.i, j + d.j, parent.z + params.height);
    if (auto child = check_child(scene, params, parent, candidate)) children.push_back({d, *child});
  }
  if (children.size() < params.min_children) children.clear();
  return children;
}

namespace detail {

// Drops DIRECT edges whose cross-slope rise per run exceeds the limit, then
// keeps only vertices still reachable from the root.
inline std::size_t apply_cross_slope_gate(AccessGraph& graph, double limit_degrees) {
  set_base_costs(graph);
  set_cross_slopes(graph);
  const Csr& csr = graph.csr();
  const double limit = tan_degrees(limit_degrees);
  std::vector<bool> keep_edge(csr.edge_count(), true);
  std::size_t removed = 0;
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
      if (csr.step[e] != ConnectionType::Direct) continue;
      const double run = horizontal_distance(graph.point(v), graph.point(csr.columns[e]));
      if (run > 0.0 && csr.cross_slope[e] / run > limit) {
        keep_edge[e] = false;
        ++removed;
      }
    }
  }
  if (removed == 0) {
    // Cross-slopes belong to the cost stage; leave the graph as an ungated build would.
    std::fill(graph.csr().cross_slope.begin(), graph.csr().cross_slope.end(), 0.0);
    return 0;
  }

  std::vector<bool> reachable(graph.vertex_count(), false);
  std::deque<VertexId> queue{0};
  reachable[0] = true;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
      if (keep_edge[e] && !reachable[csr.columns[e]]) {
        reachable[csr.columns[e]] = true;
        queue.push_back(csr.columns[e]);
      }
    }
  }

  AccessGraph filtered;
  std::vector<VertexId> remap(graph.vertex_count(), 0);
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (reachable[v]) remap[v] = filtered.add_vertex(graph.key(v), graph.point(v));
  }
  for (const auto& [name, values] : graph.node_attrs()) {
    std::vector<double> kept;
    for (VertexId v = 0; v < graph.vertex_count(); ++v) {
      if (reachable[v]) kept.push_back(values[v]);
    }
    filtered.set_node_attr(name, std::move(kept));
  }
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (!reachable[v]) continue;
    for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
      if (!keep_edge[e]) continue;
      WeightVector w = csr.weights(e);
      w.cross_slope = 0.0;
      filtered.add_edge(remap[v], remap[csr.columns[e]], std::move(w));
    }
  }
  finalize_csr(filtered);
  graph = std::move(filtered);
  return removed;
}

} // namespace detail

inline constexpr std::string_view kSurfaceObjectAttr = "surface_object";

/// Surface point below the start, found by casting down from start + h.
/// Throws InvalidStart when nothing walkable lies within the drop length.
inline RayHit find_start(const Scene& scene, const GraphParams& params) {
  const Vec3 seed = params.start + Vec3{0.0, 0.0, params.height};
  const auto hit = scene.inter(seed, kDown, params.drop_length());
  if (!hit || !scene.is_walkable(hit->object_id)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "start point (" << params.start.x << ", " << params.start.y << ", " << params.start.z
        << ") is not above walkable geometry";
    throw Error(ErrorCode::InvalidStart, msg.str());
  }
  return *hit;
}

/// Breadth-first construction from the start point. Parents are expanded in
/// FIFO order and children in direction order, so the result is a pure
/// function of (scene, params). With threads > 1 the ray casts for a batch of
/// queued parents run concurrently (they only read the scene); graph updates
/// are still applied one parent at a time in queue order.
inline BuildResult build_graph(const Scene& scene, GraphParams params, const BuildOptions& options = {}) {
  params.normalize();
  const auto root_hit = find_start(scene, params);

  BuildResult result;
  AccessGraph& graph = result.graph;
  BuildReport& report = result.report;
  std::vector<double> surface_object;
  std::vector<std::size_t> depth;

  const VertexId root = graph.add_vertex({0, 0, 0}, root_hit.point);
  surface_object.push_back(root_hit.object_id);
  depth.push_back(0);

  std::deque<VertexId> queue{root};
  report.queue_peak = 1;
  const std::size_t batch_limit = options.threads > 1 ? 64 * static_cast<std::size_t>(options.threads) : 1;
  std::vector<VertexId> batch;
  std::vector<std::vector<NodeChild>> batch_children;

  while (!queue.empty()) {
    const std::size_t batch_size = std::min(queue.size(), batch_limit);
    batch.assign(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(batch_size));
    queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(batch_size));
    batch_children.assign(batch_size, {});
    parallel_for(batch_size, options.threads, [&](std::size_t k) {
      const NodeKey& key = graph.key(batch[k]);
      batch_children[k] = get_nodes(scene, params, key.i, key.j, graph.point(batch[k]));
    }, 8);

    for (std::size_t k = 0; k < batch_size; ++k) {
      const VertexId parent = batch[k];
      const NodeKey parent_key = graph.key(parent);
      const Vec3 parent_point = graph.point(parent);
      for (const NodeChild& child : batch_children[k]) {
        const std::int32_t ci = parent_key.i + child.offset.i;
        const std::int32_t cj = parent_key.j + child.offset.j;
        const Vec3 point = grid_position(params, ci, cj, child.candidate.point.z);
        const auto [id, inserted] = graph.find_or_add(ci, cj, point, params.merge_tol());
        WeightVector w;
        w.step = child.candidate.type;
        fill_geometric_weights(parent_point, graph.point(id), w);
        graph.add_edge(parent, id, std::move(w));
        if (inserted) {
          surface_object.push_back(child.candidate.object_id);
          depth.push_back(depth[parent] + 1);
          queue.push_back(id);
        }
      }
      // Queue length as a strictly sequential expansion would see it.
      report.queue_peak = std::max(report.queue_peak, queue.size() + (batch_size - k - 1));
    }
  }

  graph.set_node_attr(std::string(kSurfaceObjectAttr), std::move(surface_object));
  finalize_csr(graph);
  if (params.cross_slope_limit) {
    report.removed_by_cross_slope = detail::apply_cross_slope_gate(graph, *params.cross_slope_limit);
  }
  if (options.record_frontiers) {
    for (std::size_t d : depth) {
      if (report.frontier_snapshots.size() <= d) report.frontier_snapshots.resize(d + 1, 0);
      ++report.frontier_snapshots[d];
    }
  }
  report.vertex_count = graph.vertex_count();
  report.edge_count = graph.edge_count();
  report.terminated_early = report.vertex_count == 1;
  return result;
}

} // namespace accessgraph
