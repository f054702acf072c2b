#pragma once

#include <accessgraph/bvh.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/geometry.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace accessgraph {

struct TriangleMesh {
  std::string name;
  std::vector<Vec3> vertices; // meters, +z up
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Per-object surface label. Surface classes are walkable and carry a name
/// that node attributes can refer to.
struct SurfaceTag {
  enum class Kind { Walkable, Obstacle, SurfaceClass };

  Kind kind = Kind::Walkable;
  std::string surface_class;

  static SurfaceTag walkable() { return {}; }
  static SurfaceTag obstacle() { return {Kind::Obstacle, {}}; }
  static SurfaceTag of_class(std::string name) { return {Kind::SurfaceClass, std::move(name)}; }

  bool is_walkable() const { return kind != Kind::Obstacle; }

  std::string to_string() const {
    switch (kind) {
      case Kind::Walkable: return "walkable";
      case Kind::Obstacle: return "obstacle";
      case Kind::SurfaceClass: return "surface-class:" + surface_class;
    }
    return "walkable";
  }

  static SurfaceTag parse(const std::string& text) {
    if (text == "walkable") return walkable();
    if (text == "obstacle") return obstacle();
    static constexpr std::string_view kPrefix = "surface-class:";
    if (text.starts_with(kPrefix) && text.size() > kPrefix.size()) {
      return of_class(text.substr(kPrefix.size()));
    }
    throw Error(ErrorCode::ParseError, "unknown surface tag '" + text + "'");
  }

  bool operator==(const SurfaceTag&) const = default;
};

/// Labels keyed by object name. Objects without an entry are walkable.
using SurfaceLabels = std::map<std::string, SurfaceTag>;

struct SceneObject {
  TriangleMesh mesh;
  SurfaceTag tag;
};

/// Immutable set of labeled meshes plus the BVH used for every ray query.
class Scene {
 public:
  const std::vector<SceneObject>& objects() const { return objects_; }
  const SceneObject& object(std::uint32_t id) const { return objects_.at(id); }
  bool is_walkable(std::uint32_t object_id) const { return objects_.at(object_id).tag.is_walkable(); }
  std::size_t walkable_count() const {
    std::size_t n = 0;
    for (const auto& o : objects_) n += o.tag.is_walkable() ? 1 : 0;
    return n;
  }
  std::size_t triangle_count() const { return bvh_.triangle_count(); }
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }
  const Bvh& bvh() const { return bvh_; }
  Aabb bounds() const { return bounds_; }

  /// Nearest intersection of the ray (origin, unit dir) within max_dist.
  std::optional<RayHit> inter(const Vec3& origin, const Vec3& dir, double max_dist) const {
    return bvh_.intersect(origin, dir, max_dist);
  }

  /// True when the open segment a->b crosses any triangle.
  bool segment_blocked(const Vec3& a, const Vec3& b) const {
    const double len = dst(a, b);
    if (len <= 0.0) return false;
    return bvh_.occluded(a, (b - a) / len, len);
  }

  friend Scene build_scene(std::vector<TriangleMesh> meshes, const SurfaceLabels& labels);

 private:
  std::vector<SceneObject> objects_;
  Bvh bvh_;
  Aabb bounds_;
  std::size_t dropped_degenerate_ = 0;
};

/// Validates meshes, drops zero-area triangles and builds the BVH.
inline Scene build_scene(std::vector<TriangleMesh> meshes, const SurfaceLabels& labels = {}) {
  if (meshes.empty()) throw Error(ErrorCode::EmptyScene, "scene has no meshes");

  for (const auto& [name, tag] : labels) {
    const bool known = std::any_of(meshes.begin(), meshes.end(),
                                   [&](const TriangleMesh& m) { return m.name == name; });
    if (!known) throw Error(ErrorCode::InvalidArgument, "label refers to unknown object '" + name + "'");
  }

  Scene scene;
  std::vector<Triangle> soup;
  std::size_t total_triangles = 0;
  for (std::uint32_t object_id = 0; object_id < meshes.size(); ++object_id) {
    TriangleMesh& mesh = meshes[object_id];
    for (const Vec3& v : mesh.vertices) {
      if (!is_finite(v)) {
        throw Error(ErrorCode::InvalidArgument, "non-finite vertex in object '" + mesh.name + "'");
      }
    }
    std::vector<std::array<std::uint32_t, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (const auto& idx : mesh.triangles) {
      for (std::uint32_t i : idx) {
        if (i >= mesh.vertices.size()) {
          throw Error(ErrorCode::InvalidArgument,
                      "triangle index out of range in object '" + mesh.name + "'");
        }
      }
      Triangle tri{mesh.vertices[idx[0]], mesh.vertices[idx[1]], mesh.vertices[idx[2]], object_id,
                   static_cast<std::uint32_t>(kept.size())};
      if (tri.area() <= 0.5 * kGeometryEpsilon * kGeometryEpsilon) {
        ++scene.dropped_degenerate_;
        continue;
      }
      kept.push_back(idx);
      scene.bounds_.expand(tri.bounds());
      soup.push_back(tri);
    }
    total_triangles += kept.size();
    mesh.triangles = std::move(kept);

    SurfaceTag tag;
    if (auto it = labels.find(mesh.name); it != labels.end()) tag = it->second;
    scene.objects_.push_back({std::move(mesh), tag});
  }
  if (total_triangles == 0) throw Error(ErrorCode::EmptyScene, "scene has no non-degenerate triangles");
  if (scene.walkable_count() == 0) {
    throw Error(ErrorCode::EmptyWalkableSet, "no object in the scene is walkable");
  }
  scene.bvh_ = Bvh(std::move(soup));
  return scene;
}

} // namespace accessgraph
