#pragma once

// Procedural scenes shared by the unit tests and the acceptance suite.

#include <accessgraph/builder.hpp>
#include <accessgraph/mesh.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace fixtures {

using accessgraph::SurfaceLabels;
using accessgraph::SurfaceTag;
using accessgraph::TriangleMesh;
using accessgraph::Vec3;

struct SceneSpec {
  std::vector<TriangleMesh> meshes;
  SurfaceLabels labels;

  accessgraph::Scene build() const { return accessgraph::build_scene(meshes, labels); }

  void add(TriangleMesh mesh, SurfaceTag tag = SurfaceTag::walkable()) {
    if (tag != SurfaceTag::walkable()) labels[mesh.name] = tag;
    meshes.push_back(std::move(mesh));
  }
};

/// Horizontal rectangle [x0, x1] x [y0, y1] at height z.
inline TriangleMesh quad(const std::string& name, double x0, double y0, double x1, double y1, double z) {
  return {name, {{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}}, {{0, 1, 2}, {0, 2, 3}}};
}

/// Closed axis-aligned box.
inline TriangleMesh box(const std::string& name, const Vec3& lo, const Vec3& hi) {
  TriangleMesh m{name, {}, {}};
  for (int k = 0; k < 8; ++k) {
    m.vertices.push_back({(k & 1) ? hi.x : lo.x, (k & 2) ? hi.y : lo.y, (k & 4) ? hi.z : lo.z});
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

/// Height field z = f(x, y) sampled on an (nx + 1) x (ny + 1) vertex lattice.
inline TriangleMesh heightfield(const std::string& name, double x0, double y0, double x1, double y1, int nx, int ny,
                                const std::function<double(double, double)>& f) {
  TriangleMesh m{name, {}, {}};
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = x0 + (x1 - x0) * i / nx;
      const double y = y0 + (y1 - y0) * j / ny;
      m.vertices.push_back({x, y, f(x, y)});
    }
  }
  auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

/// Square floor [0, size]^2 with a margin so grid nodes never sit on its rim.
inline SceneSpec flat_floor(double size = 10.0, double margin = 0.1) {
  SceneSpec s;
  s.add(quad("floor", -margin, -margin, size + margin, size + margin, 0.0));
  return s;
}

/// 4 m floor with an obstacle wall occupying x in [2.1, 2.4].
inline SceneSpec wall_scene() {
  SceneSpec s;
  s.add(quad("floor", -0.1, -0.1, 4.1, 4.1, 0.0));
  s.add(box("wall", {2.1, -0.2, 0.0}, {2.4, 4.2, 2.5}), SurfaceTag::obstacle());
  return s;
}

struct Stair {
  int risers = 12;
  double riser = 0.15;
  double tread = 0.25; // equal to the grid spacing
  double width = 1.1;
};

/// Lower floor for x < tread/2, then risers between grid columns, then the
/// upper floor. Every +x grid move on the flight crosses exactly one riser.
inline SceneSpec stair_scene(const Stair& st = {}) {
  SceneSpec s;
  const double y0 = -st.width / 2, y1 = st.width / 2;
  s.add(quad("lower", -2.0 - 0.05, y0, 0.5 * st.tread, y1, 0.0));
  for (int k = 1; k < st.risers; ++k) {
    s.add(box("step" + std::to_string(k), {(k - 0.5) * st.tread, y0, 0.0}, {(k + 0.5) * st.tread, y1, k * st.riser}));
  }
  const double top = st.risers * st.riser;
  s.add(box("upper", {(st.risers - 0.5) * st.tread, y0, 0.0}, {(st.risers - 0.5) * st.tread + 2.05, y1, top}));
  return s;
}

/// Ramp of the given pitch angle along +x, too narrow for a side step, with
/// obstacle walls that follow its surface on both sides.
inline SceneSpec narrow_ramp(double degrees = 40.0, double length = 4.0, double half_width = 0.1) {
  const double t = std::tan(degrees * std::numbers::pi / 180.0);
  SceneSpec s;
  auto ramp_z = [t](double x) { return t * x; };
  s.add(heightfield("ramp", 0.0, -half_width, length, half_width, 8, 1, [&](double x, double) { return ramp_z(x); }));
  for (int side : {-1, 1}) {
    const double ya = side * half_width, yb = side * (half_width + 0.6);
    s.add(heightfield(side < 0 ? "wall_a" : "wall_b", 0.0, std::min(ya, yb), length, std::max(ya, yb), 8, 1,
                      [&](double x, double) { return ramp_z(x) + 0.5; }),
          SurfaceTag::obstacle());
  }
  return s;
}

/// Gaussian hill centered at the origin on [-extent, extent]^2.
inline double hill_height(double x, double y, double peak = 1.0, double sigma = 1.5) {
  return peak * std::exp(-(x * x + y * y) / (2 * sigma * sigma));
}

inline SceneSpec hill_scene(double extent = 4.6, int cells = 92) {
  SceneSpec s;
  s.add(heightfield("terrain", -extent, -extent, extent, extent, cells, cells,
                    [](double x, double y) { return hill_height(x, y); }));
  return s;
}

struct RampCorner {
  double pitch = 0.1;    // rise per run along +x
  double length = 2.0;   // ramp run
  double landing = 1.5;  // flat top beyond the ramp
  double y_min = -1.0;
  double y_max = 3.0;
};

/// Flat bottom (x < 0), a planar ramp rising along +x, then a flat landing.
inline SceneSpec ramp_corner(const RampCorner& rc = {}) {
  SceneSpec s;
  const double m = 0.1;
  const double x0 = -1.0 - m, x1 = rc.length + rc.landing + m;
  auto z = [&](double x) { return rc.pitch * std::clamp(x, 0.0, rc.length); };
  // Lattice lines at the creases keep the surface exactly piecewise planar.
  TriangleMesh mesh{"ground", {}, {}};
  const std::vector<double> xs{x0, 0.0, rc.length, x1};
  const std::vector<double> ys{rc.y_min - m, rc.y_max + m};
  for (double y : ys) {
    for (double x : xs) mesh.vertices.push_back({x, y, z(x)});
  }
  for (std::uint32_t i = 0; i + 1 < xs.size(); ++i) {
    const std::uint32_t a = i, b = i + 1, c = i + 1 + 4, d = i + 4;
    mesh.triangles.push_back({a, b, c});
    mesh.triangles.push_back({a, c, d});
  }
  s.add(std::move(mesh));
  return s;
}

/// Closed UV sphere approximating radius r about center.
inline TriangleMesh sphere(const std::string& name, const Vec3& center, double r, int stacks = 48, int slices = 96) {
  TriangleMesh m{name, {}, {}};
  for (int i = 0; i <= stacks; ++i) {
    const double phi = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double theta = 2 * std::numbers::pi * j / slices;
      m.vertices.push_back(center + Vec3{r * std::sin(phi) * std::cos(theta), r * std::sin(phi) * std::sin(theta),
                                         r * std::cos(phi)});
    }
  }
  auto id = [slices](int i, int j) { return static_cast<std::uint32_t>(i * slices + (j % slices)); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

/// Straight corridor along x with walls at y = +-half_width and end caps.
inline SceneSpec corridor(double length = 20.0, double half_width = 1.1, double height = 3.0) {
  SceneSpec s;
  s.add(quad("floor", -length / 2, -half_width, length / 2, half_width, 0.0));
  s.add(box("wall_south", {-length / 2, -half_width - 0.2, 0.0}, {length / 2, -half_width, height}),
        SurfaceTag::obstacle());
  s.add(box("wall_north", {-length / 2, half_width, 0.0}, {length / 2, half_width + 0.2, height}),
        SurfaceTag::obstacle());
  s.add(box("cap_west", {-length / 2 - 0.2, -half_width - 0.2, 0.0}, {-length / 2, half_width + 0.2, height}),
        SurfaceTag::obstacle());
  s.add(box("cap_east", {length / 2, -half_width - 0.2, 0.0}, {length / 2 + 0.2, half_width + 0.2, height}),
        SurfaceTag::obstacle());
  return s;
}

} // namespace fixtures
