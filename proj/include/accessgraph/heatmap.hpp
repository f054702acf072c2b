#pragma once

#include <accessgraph/edge_costs.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace accessgraph {

using Rgb = std::array<std::uint8_t, 3>;

/// Blue (t = 0) through cyan, green and yellow to red (t = 1): a hue sweep
/// from 240 to 0 degrees at full saturation and value.
inline Rgb ramp_color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double hue = (1.0 - t) * 4.0; // sextant units, 4 = blue
  const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  if (hue >= 3.0) { g = x; b = 1.0; }
  else if (hue >= 2.0) { g = 1.0; b = x; }
  else if (hue >= 1.0) { r = x; g = 1.0; }
  else { r = 1.0; g = x; }
  auto byte = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
  return {byte(r), byte(g), byte(b)};
}

/// What to color by: a node attribute, or the node score under rho.
struct HeatmapMetric {
  std::string attr;
  std::optional<CostCoefficients> score;

  std::string label() const { return score ? "node_score" : attr; }
};

struct Heatmap {
  std::string metric;
  std::vector<double> values;
  std::vector<double> normalized; // in [0, 1]
  std::vector<Rgb> colors;
  double min = 0.0;
  double max = 0.0;
};

/// Per-vertex scalar field normalized to [0, 1] by its min/max. A constant
/// field maps to 0.5. Vertices without outgoing edges score 0 under the
/// node-score metric.
inline Heatmap heatmap(const AccessGraph& graph, const HeatmapMetric& metric) {
  Heatmap map;
  map.metric = metric.label();
  if (metric.score) {
    map.values.resize(graph.vertex_count(), 0.0);
    for (VertexId v = 0; v < graph.vertex_count(); ++v) {
      if (graph.out_degree(v) > 0) map.values[v] = node_score(graph, v, *metric.score);
    }
  } else {
    map.values = graph.node_attr(metric.attr);
  }
  if (!map.values.empty()) {
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    map.min = *lo;
    map.max = *hi;
  }
  const double range = map.max - map.min;
  map.normalized.reserve(map.values.size());
  map.colors.reserve(map.values.size());
  for (double v : map.values) {
    const double t = range > 0.0 ? (v - map.min) / range : 0.5;
    map.normalized.push_back(t);
    map.colors.push_back(ramp_color(t));
  }
  return map;
}

} // namespace accessgraph
