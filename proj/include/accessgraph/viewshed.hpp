#pragma once

#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/mesh.hpp>
#include <accessgraph/parallel.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace accessgraph {

inline constexpr std::string_view kViewMaxAttr = "view_max";
inline constexpr std::string_view kViewMinAttr = "view_min";

struct ViewshedConfig {
  double eye_height = 1.8;
  std::size_t ray_count = 2000;
  double azimuth_span = 360.0;   // degrees, centered on +x
  double elevation_min = -40.0;  // degrees
  double elevation_max = 40.0;
  std::optional<double> max_range; // defaults to the scene's bounding-sphere diameter
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (ray_count == 0) fail("ray_count must be > 0");
    if (!(azimuth_span > 0.0 && azimuth_span <= 360.0)) fail("azimuth_span must be in (0, 360]");
    if (!(elevation_min >= -90.0 && elevation_max <= 90.0 && elevation_min <= elevation_max)) {
      fail("elevation band must lie within [-90, 90]");
    }
    if (!(eye_height >= 0.0)) fail("eye_height must be >= 0");
    if (max_range && !(*max_range > 0.0)) fail("max_range must be > 0");
  }
};

/// Fibonacci-lattice directions over the elevation band: heights are spaced
/// uniformly in sin(elevation) (equal-area), azimuths advance by the golden
/// ratio. The seed only rotates the lattice in azimuth, so the set is fully
/// determined by the config.
inline std::vector<Vec3> viewshed_directions(const ViewshedConfig& config) {
  config.validate();
  constexpr double kDeg = std::numbers::pi / 180.0;
  std::mt19937_64 rng(config.seed);
  // Raw engine output: the distribution classes are not portable bit-for-bit.
  const double phase = config.seed == 0 ? 0.0 : static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double z_lo = std::sin(config.elevation_min * kDeg);
  const double z_hi = std::sin(config.elevation_max * kDeg);
  const double span = config.azimuth_span * kDeg;
  const double start = config.azimuth_span >= 360.0 ? 0.0 : -0.5 * span;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

  std::vector<Vec3> dirs;
  dirs.reserve(config.ray_count);
  for (std::size_t k = 0; k < config.ray_count; ++k) {
    const double z = z_lo + (static_cast<double>(k) + 0.5) / static_cast<double>(config.ray_count) * (z_hi - z_lo);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double frac = phase + static_cast<double>(k) * golden;
    frac -= std::floor(frac);
    const double az = start + frac * span;
    dirs.push_back({r * std::cos(az), r * std::sin(az), z});
  }
  return dirs;
}

struct ViewRange {
  double max = 0.0;
  double min = 0.0;
};

/// Longest and shortest visible distance from an eye point; rays that hit
/// nothing count as max_range.
inline ViewRange view_range(const Scene& scene, const Vec3& eye, const std::vector<Vec3>& dirs, double max_range) {
  ViewRange r{0.0, max_range};
  for (const Vec3& d : dirs) {
    const auto hit = scene.inter(eye, d, max_range);
    const double dist = hit ? hit->distance : max_range;
    r.max = std::max(r.max, dist);
    r.min = std::min(r.min, dist);
  }
  return r;
}

inline double default_view_range(const Scene& scene) {
  const double diameter = norm(scene.bounds().extent());
  return diameter > 0.0 ? diameter : 1.0;
}

/// Stores view_max and view_min node attributes. Vertices are independent.
inline void viewshed(AccessGraph& graph, const Scene& scene, const ViewshedConfig& config) {
  const std::vector<Vec3> dirs = viewshed_directions(config);
  const double range = config.max_range.value_or(default_view_range(scene));
  std::vector<double> view_max(graph.vertex_count());
  std::vector<double> view_min(graph.vertex_count());
  parallel_for(graph.vertex_count(), config.threads, [&](std::size_t v) {
    const Vec3 eye = graph.point(static_cast<VertexId>(v)) + Vec3{0.0, 0.0, config.eye_height};
    const ViewRange r = view_range(scene, eye, dirs, range);
    view_max[v] = r.max;
    view_min[v] = r.min;
  }, 16);
  graph.set_node_attr(std::string(kViewMaxAttr), std::move(view_max));
  graph.set_node_attr(std::string(kViewMinAttr), std::move(view_min));
}

} // namespace accessgraph
