#pragma once

#include <accessgraph/geometry.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace accessgraph {

struct Triangle {
  Vec3 v0;
  Vec3 v1;
  Vec3 v2;
  std::uint32_t object_id = 0;
  std::uint32_t triangle_id = 0; // index within the owning object

  Aabb bounds() const {
    Aabb b;
    b.expand(v0);
    b.expand(v1);
    b.expand(v2);
    return b;
  }
  Vec3 centroid() const { return (v0 + v1 + v2) / 3.0; }
  double area() const { return 0.5 * norm(cross(v1 - v0, v2 - v0)); }
};

struct RayHit {
  double distance = 0.0;
  Vec3 point;
  std::uint32_t object_id = 0;
  std::uint32_t triangle_id = 0;
};

/// Möller–Trumbore intersection, two-sided. Edges and vertices count as
/// inside (with a small barycentric slack) so rays through shared edges of a
/// tessellated floor never slip between its triangles.
inline std::optional<double> intersect_triangle(const Triangle& tri, const Vec3& origin,
                                                const Vec3& dir) {
  constexpr double kBarySlack = 1e-10;
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 pvec = cross(dir, e2);
  const double det = dot(e1, pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - tri.v0;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < -kBarySlack || u > 1.0 + kBarySlack) return std::nullopt;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(dir, qvec) * inv_det;
  if (v < -kBarySlack || u + v > 1.0 + kBarySlack) return std::nullopt;
  const double t = dot(e2, qvec) * inv_det;
  if (t < 0.0) return std::nullopt;
  return t;
}

/// Binary BVH over a triangle soup, built once with binned SAH and immutable
/// afterwards. Queries are const and safe to run concurrently.
class Bvh {
 public:
  Bvh() = default;

  explicit Bvh(std::vector<Triangle> triangles) : triangles_(std::move(triangles)) {
    if (triangles_.empty()) return;
    std::vector<std::uint32_t> order(triangles_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<Aabb> boxes(triangles_.size());
    std::vector<Vec3> centroids(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      boxes[i] = triangles_[i].bounds();
      centroids[i] = triangles_[i].centroid();
    }
    nodes_.reserve(2 * triangles_.size());
    nodes_.push_back({});
    build(0, 0, static_cast<std::uint32_t>(order.size()), 0, order, boxes, centroids);
    std::vector<Triangle> reordered;
    reordered.reserve(triangles_.size());
    for (std::uint32_t idx : order) reordered.push_back(triangles_[idx]);
    triangles_ = std::move(reordered);
  }

  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::span<const Triangle> triangles() const { return triangles_; }
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

  /// Nearest hit with distance <= max_dist. Hits within kGeometryEpsilon of
  /// the nearest distance are tied and resolved by (object_id, triangle_id).
  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double max_dist) const {
    if (nodes_.empty()) return std::nullopt;
    double nearest = max_dist;
    bool found = false;
    traverse(origin, dir, max_dist, [&](const Triangle&, double t, double& bound) {
      if (t <= bound) {
        nearest = std::min(nearest, t);
        found = true;
        bound = t;
      }
      return false;
    });
    if (!found) return std::nullopt;

    const double tie_limit = std::min(max_dist, nearest + kGeometryEpsilon);
    std::optional<RayHit> best;
    traverse(origin, dir, tie_limit, [&](const Triangle& tri, double t, double&) {
      if (t > tie_limit) return false;
      if (!best || std::tie(tri.object_id, tri.triangle_id) <
                       std::tie(best->object_id, best->triangle_id)) {
        best = RayHit{t, origin + dir * t, tri.object_id, tri.triangle_id};
      }
      return false;
    });
    return best;
  }

  /// True when any triangle is hit at a distance strictly below max_dist.
  bool occluded(const Vec3& origin, const Vec3& dir, double max_dist) const {
    if (nodes_.empty()) return false;
    bool hit = false;
    traverse(origin, dir, max_dist, [&](const Triangle&, double t, double&) {
      if (t < max_dist) {
        hit = true;
        return true;
      }
      return false;
    });
    return hit;
  }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0; // first triangle (leaf) or right child (interior)
    std::uint32_t count = 0; // 0 for interior nodes
  };

  static constexpr std::uint32_t kLeafSize = 4;
  static constexpr int kBins = 12;
  // Beyond this depth splits are forced to the median, bounding the tree
  // height (and the traversal stack) at kMaxSahDepth + log2(n).
  static constexpr int kMaxSahDepth = 64;

  void build(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end, int depth,
             std::vector<std::uint32_t>& order, const std::vector<Aabb>& boxes,
             const std::vector<Vec3>& centroids) {
    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t i = begin; i < end; ++i) {
      box.expand(boxes[order[i]]);
      centroid_box.expand(centroids[order[i]]);
    }
    // Pad so flat boxes and rounding in the slab test stay conservative.
    const double pad = 1e-9 * (1.0 + norm(box.extent()));
    box.lo = box.lo - Vec3{pad, pad, pad};
    box.hi = box.hi + Vec3{pad, pad, pad};
    nodes_[node_index].box = box;

    const std::uint32_t count = end - begin;
    if (count <= kLeafSize) {
      make_leaf(node_index, begin, count);
      return;
    }

    const int axis = centroid_box.longest_axis();
    const double lo = centroid_box.lo[axis];
    const double extent = centroid_box.hi[axis] - lo;
    std::uint32_t mid = begin;
    if (extent > 0.0 && depth < kMaxSahDepth) {
      std::array<Aabb, kBins> bin_boxes{};
      std::array<std::uint32_t, kBins> bin_counts{};
      auto bin_of = [&](std::uint32_t tri) {
        const int b = static_cast<int>(kBins * (centroids[tri][axis] - lo) / extent);
        return std::clamp(b, 0, kBins - 1);
      };
      for (std::uint32_t i = begin; i < end; ++i) {
        const int b = bin_of(order[i]);
        bin_boxes[b].expand(boxes[order[i]]);
        ++bin_counts[b];
      }
      double best_cost = std::numeric_limits<double>::infinity();
      int best_split = -1;
      for (int split = 1; split < kBins; ++split) {
        Aabb left, right;
        std::uint32_t nl = 0, nr = 0;
        for (int b = 0; b < split; ++b) {
          if (bin_counts[b]) left.expand(bin_boxes[b]);
          nl += bin_counts[b];
        }
        for (int b = split; b < kBins; ++b) {
          if (bin_counts[b]) right.expand(bin_boxes[b]);
          nr += bin_counts[b];
        }
        if (nl == 0 || nr == 0) continue;
        const double cost = left.surface_area() * nl + right.surface_area() * nr;
        if (cost < best_cost) {
          best_cost = cost;
          best_split = split;
        }
      }
      if (best_split > 0) {
        auto it = std::partition(order.begin() + begin, order.begin() + end,
                                 [&](std::uint32_t tri) { return bin_of(tri) < best_split; });
        mid = static_cast<std::uint32_t>(it - order.begin());
      }
    }
    if (mid == begin || mid == end) {
      // Coincident centroids: fall back to a median split on index order.
      mid = begin + count / 2;
      std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         return std::pair{centroids[a][axis], a} < std::pair{centroids[b][axis], b};
                       });
    }

    const auto left_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    build(left_index, begin, mid, depth + 1, order, boxes, centroids);
    const auto right_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    build(right_index, mid, end, depth + 1, order, boxes, centroids);
    nodes_[node_index].first = right_index;
    nodes_[node_index].count = 0;
  }

  void make_leaf(std::uint32_t node_index, std::uint32_t begin, std::uint32_t count) {
    nodes_[node_index].first = begin;
    nodes_[node_index].count = count;
  }

  // Visits triangles whose boxes overlap the ray segment. The visitor may
  // shrink `bound` to prune, and returns true to stop the traversal.
  template <typename Visitor>
  void traverse(const Vec3& origin, const Vec3& dir, double max_dist, Visitor&& visit) const {
    const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    double bound = max_dist;
    std::array<std::uint32_t, 160> stack;
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      double t_enter = 0.0;
      if (!node.box.intersects(origin, inv, bound, t_enter)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const auto t = intersect_triangle(triangles_[i], origin, dir);
          if (t && *t <= bound && visit(triangles_[i], *t, bound)) return;
        }
        continue;
      }
      const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
      const std::uint32_t right = node.first;
      double tl = 0.0, tr = 0.0;
      const bool hit_left = nodes_[left].box.intersects(origin, inv, bound, tl);
      const bool hit_right = nodes_[right].box.intersects(origin, inv, bound, tr);
      if (hit_left && hit_right) {
        // Push the farther child first so the nearer one is visited first.
        if (tl <= tr) {
          stack[top++] = right;
          stack[top++] = left;
        } else {
          stack[top++] = left;
          stack[top++] = right;
        }
      } else if (hit_left) {
        stack[top++] = left;
      } else if (hit_right) {
        stack[top++] = right;
      }
    }
  }

  std::vector<Triangle> triangles_;
  std::vector<Node> nodes_;
};

} // namespace accessgraph
