#pragma once

#include <accessgraph/graph.hpp>
#include <accessgraph/heatmap.hpp>
#include <accessgraph/paths.hpp>

#include <iomanip>
#include <ostream>

namespace accessgraph {

/// Path as an OBJ polyline, raised by `offset` so it draws above the surface.
inline void write_path_obj(std::ostream& out, const AccessGraph& graph, const PathResult& path, double offset = 0.05) {
  out << std::setprecision(17) << "o path\n";
  for (VertexId v : path.vertices) {
    const Vec3& p = graph.point(v);
    out << "v " << p.x << ' ' << p.y << ' ' << p.z + offset << '\n';
  }
  if (path.vertices.size() >= 2) {
    out << 'l';
    for (std::size_t k = 1; k <= path.vertices.size(); ++k) out << ' ' << k;
    out << '\n';
  }
}

/// Graph nodes as an ascii PLY point cloud colored by the heatmap, with the
/// raw metric value as an extra property.
inline void write_heatmap_ply(std::ostream& out, const AccessGraph& graph, const Heatmap& map) {
  out << "ply\nformat ascii 1.0\n"
      << "comment metric " << map.metric << " min " << std::setprecision(17) << map.min << " max " << map.max << '\n'
      << "element vertex " << graph.vertex_count() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property double value\nend_header\n";
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const Vec3& p = graph.point(v);
    const Rgb& c = map.colors[v];
    out << p.x << ' ' << p.y << ' ' << p.z << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]) << ' '
        << map.values[v] << '\n';
  }
}

} // namespace accessgraph
