#pragma once

#include <accessgraph/error.hpp>
#include <accessgraph/geometry.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace accessgraph {

using VertexId = std::uint32_t;
using EdgeId = std::uint64_t;

/// Stable identity of a grid location: (i, j) are offsets from the start
/// point in multiples of the grid spacing, and level separates vertices that
/// share a footprint at different heights (e.g. stacked floors).
struct NodeKey {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t level = 0;

  auto operator<=>(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int32_t v : {k.i, k.j, k.level}) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

enum class ConnectionType : std::uint8_t { Direct = 0, Over = 1, Up = 2, Down = 3, Invalid = 4 };

constexpr std::string_view to_string(ConnectionType t) noexcept {
  switch (t) {
    case ConnectionType::Direct: return "DIRECT";
    case ConnectionType::Over: return "OVER";
    case ConnectionType::Up: return "UP";
    case ConnectionType::Down: return "DOWN";
    case ConnectionType::Invalid: return "INVALID";
  }
  return "INVALID";
}

inline ConnectionType connection_type_from_string(std::string_view s) {
  for (auto t : {ConnectionType::Direct, ConnectionType::Over, ConnectionType::Up, ConnectionType::Down}) {
    if (s == to_string(t)) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown connection type '" + std::string(s) + "'");
}

constexpr bool is_step(ConnectionType t) noexcept {
  return t == ConnectionType::Over || t == ConnectionType::Up || t == ConnectionType::Down;
}

/// Costs attached to one directed edge.
struct WeightVector {
  double distance = 0.0;    // meters
  double slope = 0.0;       // signed rise over horizontal run
  double cross_slope = 0.0; // meters of height difference across the direction of travel
  double energy = 0.0;      // J/kg over the whole edge
  ConnectionType step = ConnectionType::Direct;
  std::map<std::string, double> extras;

  bool operator==(const WeightVector&) const = default;
};

/// Compressed sparse row form. Row v spans [offsets[v], offsets[v+1]) in the
/// column array and in every per-factor weight array.
struct Csr {
  std::vector<std::uint64_t> offsets{0};
  std::vector<VertexId> columns;
  std::vector<double> distance;
  std::vector<double> slope;
  std::vector<double> cross_slope;
  std::vector<double> energy;
  std::vector<ConnectionType> step;
  std::map<std::string, std::vector<double>> extras;

  std::size_t edge_count() const { return columns.size(); }
  EdgeId row_begin(VertexId v) const { return offsets[v]; }
  EdgeId row_end(VertexId v) const { return offsets[v + 1]; }

  WeightVector weights(EdgeId e) const {
    WeightVector w{distance[e], slope[e], cross_slope[e], energy[e], step[e], {}};
    for (const auto& [name, values] : extras) w.extras[name] = values[e];
    return w;
  }

  bool operator==(const Csr&) const = default;
};

struct SubgraphEdge {
  VertexId parent = 0;
  VertexId child = 0;
  WeightVector weights;
};

struct GraphStats {
  std::size_t energy_clamped = 0; // edges whose gradient fell outside the energy model's range
};

/// Weighted digraph whose vertices map to 3D points. Edges are collected in a
/// per-vertex adjacency during construction; finalize_csr() converts them once
/// into Csr, after which topology is frozen and only weights may change.
class AccessGraph {
 public:
  std::size_t vertex_count() const { return keys_.size(); }
  std::size_t edge_count() const { return finalized() ? csr_->edge_count() : pending_edges_; }
  bool finalized() const { return csr_.has_value(); }

  const NodeKey& key(VertexId v) const { return keys_.at(v); }
  const Vec3& point(VertexId v) const { return points_.at(v); }
  std::span<const NodeKey> keys() const { return keys_; }
  std::span<const Vec3> points() const { return points_; }

  std::optional<VertexId> find(const NodeKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  VertexId add_vertex(const NodeKey& key, const Vec3& point) {
    if (finalized()) throw Error(ErrorCode::InvalidArgument, "graph is finalized");
    if (index_.contains(key)) throw Error(ErrorCode::AlreadyExists, "vertex key already present");
    const auto id = static_cast<VertexId>(keys_.size());
    keys_.push_back(key);
    points_.push_back(point);
    adjacency_.emplace_back();
    index_.emplace(key, id);
    columns_[column_key(key.i, key.j)].push_back(id);
    for (auto& [name, values] : node_attrs_) values.push_back(0.0);
    return id;
  }

  /// Returns the vertex at grid column (i, j) whose height is within
  /// merge_tol of point.z, or creates a new level there.
  std::pair<VertexId, bool> find_or_add(std::int32_t i, std::int32_t j, const Vec3& point, double merge_tol) {
    auto it = columns_.find(column_key(i, j));
    if (it != columns_.end()) {
      std::optional<VertexId> best;
      double best_dz = merge_tol;
      for (VertexId v : it->second) {
        const double dz = std::abs(points_[v].z - point.z);
        if (dz < best_dz) {
          best_dz = dz;
          best = v;
        }
      }
      if (best) return {*best, false};
    }
    const auto level = it == columns_.end() ? 0 : static_cast<std::int32_t>(it->second.size());
    return {add_vertex({i, j, level}, point), true};
  }

  void add_edge(VertexId parent, VertexId child, WeightVector weights) {
    if (finalized()) throw Error(ErrorCode::InvalidArgument, "graph is finalized");
    if (parent >= vertex_count() || child >= vertex_count()) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint is not a vertex");
    }
    if (weights.step == ConnectionType::Invalid) {
      throw Error(ErrorCode::InvalidArgument, "INVALID connection type cannot be stored on an edge");
    }
    auto& row = adjacency_[parent];
    for (const auto& e : row) {
      if (e.child == child) {
        throw Error(ErrorCode::DuplicateEdge,
                    "edge " + std::to_string(parent) + "->" + std::to_string(child) + " already present");
      }
    }
    row.push_back({child, std::move(weights)});
    ++pending_edges_;
  }

  std::size_t out_degree(VertexId v) const {
    if (finalized()) return csr_->row_end(v) - csr_->row_begin(v);
    return adjacency_.at(v).size();
  }

  /// Children of v in insertion order.
  std::vector<VertexId> out(VertexId v) const {
    std::vector<VertexId> children;
    if (finalized()) {
      for (EdgeId e = csr_->row_begin(v); e < csr_->row_end(v); ++e) children.push_back(csr_->columns[e]);
    } else {
      for (const auto& e : adjacency_.at(v)) children.push_back(e.child);
    }
    return children;
  }

  /// The edge-induced subgraph over the outgoing edges of v.
  std::vector<SubgraphEdge> out_subgraph(VertexId v) const {
    if (v >= vertex_count()) throw Error(ErrorCode::InvalidArgument, "unknown vertex");
    std::vector<SubgraphEdge> edges;
    if (finalized()) {
      for (EdgeId e = csr_->row_begin(v); e < csr_->row_end(v); ++e) {
        edges.push_back({v, csr_->columns[e], csr_->weights(e)});
      }
    } else {
      for (const auto& e : adjacency_[v]) edges.push_back({v, e.child, e.weights});
    }
    return edges;
  }

  /// Vertices with at least one outgoing edge.
  std::vector<VertexId> parents() const {
    std::vector<VertexId> result;
    for (VertexId v = 0; v < vertex_count(); ++v) {
      if (out_degree(v) > 0) result.push_back(v);
    }
    return result;
  }

  bool is_parent(VertexId v) const { return out_degree(v) > 0; }

  const Csr& csr() const {
    if (!csr_) throw Error(ErrorCode::InvalidArgument, "graph is not finalized");
    return *csr_;
  }
  Csr& csr() {
    if (!csr_) throw Error(ErrorCode::InvalidArgument, "graph is not finalized");
    return *csr_;
  }

  // Node attributes are dense arrays indexed by vertex id.
  const std::map<std::string, std::vector<double>>& node_attrs() const { return node_attrs_; }
  bool has_node_attr(const std::string& name) const { return node_attrs_.contains(name); }
  const std::vector<double>& node_attr(const std::string& name) const {
    auto it = node_attrs_.find(name);
    if (it == node_attrs_.end()) throw Error(ErrorCode::MissingAttribute, "node attribute '" + name + "' not present");
    return it->second;
  }
  void set_node_attr(const std::string& name, std::vector<double> values) {
    if (values.size() != vertex_count()) {
      throw Error(ErrorCode::InvalidArgument, "node attribute '" + name + "' has wrong length");
    }
    node_attrs_[name] = std::move(values);
  }

  GraphStats& stats() { return stats_; }
  const GraphStats& stats() const { return stats_; }

  friend void finalize_csr(AccessGraph& graph);
  friend AccessGraph graph_from_csr(std::vector<NodeKey> keys, std::vector<Vec3> points, Csr csr,
                                    std::map<std::string, std::vector<double>> node_attrs);

 private:
  struct PendingEdge {
    VertexId child;
    WeightVector weights;
  };

  static std::uint64_t column_key(std::int32_t i, std::int32_t j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
  }

  std::vector<NodeKey> keys_;
  std::vector<Vec3> points_;
  std::unordered_map<NodeKey, VertexId, NodeKeyHash> index_;
  std::unordered_map<std::uint64_t, std::vector<VertexId>> columns_;
  std::vector<std::vector<PendingEdge>> adjacency_;
  std::size_t pending_edges_ = 0;
  std::optional<Csr> csr_;
  std::map<std::string, std::vector<double>> node_attrs_;
  GraphStats stats_;
};

/// Converts the build-time adjacency into CSR, preserving per-row insertion
/// order. Extras missing on some edges are stored as 0. No-op when already
/// finalized.
inline void finalize_csr(AccessGraph& graph) {
  if (graph.finalized()) return;
  Csr csr;
  const std::size_t n = graph.vertex_count();
  const std::size_t m = graph.pending_edges_;
  csr.offsets.assign(n + 1, 0);
  csr.columns.reserve(m);
  csr.distance.reserve(m);
  csr.slope.reserve(m);
  csr.cross_slope.reserve(m);
  csr.energy.reserve(m);
  csr.step.reserve(m);
  for (const auto& row : graph.adjacency_) {
    for (const auto& e : row) {
      for (const auto& [name, value] : e.weights.extras) csr.extras.try_emplace(name, m, 0.0);
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    for (const auto& e : graph.adjacency_[v]) {
      const EdgeId id = csr.columns.size();
      csr.columns.push_back(e.child);
      csr.distance.push_back(e.weights.distance);
      csr.slope.push_back(e.weights.slope);
      csr.cross_slope.push_back(e.weights.cross_slope);
      csr.energy.push_back(e.weights.energy);
      csr.step.push_back(e.weights.step);
      for (const auto& [name, value] : e.weights.extras) csr.extras[name][id] = value;
    }
    csr.offsets[v + 1] = csr.columns.size();
  }
  graph.csr_ = std::move(csr);
  graph.adjacency_.clear();
  graph.adjacency_.shrink_to_fit();
  graph.pending_edges_ = 0;
}

/// Reassembles a finalized graph from stored arrays (binary import).
inline AccessGraph graph_from_csr(std::vector<NodeKey> keys, std::vector<Vec3> points, Csr csr,
                                  std::map<std::string, std::vector<double>> node_attrs) {
  const std::size_t n = keys.size();
  if (points.size() != n || csr.offsets.size() != n + 1 || csr.offsets.front() != 0 ||
      csr.offsets.back() != csr.columns.size()) {
    throw Error(ErrorCode::ParseError, "inconsistent CSR arrays");
  }
  const std::size_t m = csr.columns.size();
  if (csr.distance.size() != m || csr.slope.size() != m || csr.cross_slope.size() != m ||
      csr.energy.size() != m || csr.step.size() != m) {
    throw Error(ErrorCode::ParseError, "weight array length mismatch");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (csr.offsets[v] > csr.offsets[v + 1]) throw Error(ErrorCode::ParseError, "CSR offsets not monotone");
  }
  for (VertexId c : csr.columns) {
    if (c >= n) throw Error(ErrorCode::ParseError, "CSR column out of range");
  }
  for (ConnectionType t : csr.step) {
    if (t == ConnectionType::Invalid || static_cast<std::uint8_t>(t) > 4) {
      throw Error(ErrorCode::ParseError, "CSR edge has no valid connection type");
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<VertexId> row(csr.columns.begin() + static_cast<std::ptrdiff_t>(csr.offsets[v]),
                              csr.columns.begin() + static_cast<std::ptrdiff_t>(csr.offsets[v + 1]));
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw Error(ErrorCode::DuplicateEdge, "CSR row " + std::to_string(v) + " repeats a child");
    }
  }
  for (const auto& [name, values] : csr.extras) {
    if (values.size() != m) throw Error(ErrorCode::ParseError, "extra '" + name + "' length mismatch");
  }
  AccessGraph graph;
  for (std::size_t v = 0; v < n; ++v) graph.add_vertex(keys[v], points[v]);
  for (auto& [name, values] : node_attrs) graph.set_node_attr(name, std::move(values));
  graph.csr_ = std::move(csr);
  graph.adjacency_.clear();
  return graph;
}

} // namespace accessgraph
