#pragma once

#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace accessgraph {

// Factor names used in coefficient maps and exports.
inline constexpr std::string_view kDistance = "distance";
inline constexpr std::string_view kSlope = "slope";
inline constexpr std::string_view kCrossSlope = "cross_slope";
inline constexpr std::string_view kEnergy = "energy";
inline constexpr std::string_view kSteps = "steps";

/// Accepts the short symbol aliases (w_d, w_s, w_c, w_e, w_t) as well.
/// w_w (surrounding width) names the promoted view_min attribute.
inline std::string canonical_factor_name(const std::string& name) {
  if (name == "w_d") return std::string(kDistance);
  if (name == "w_s") return std::string(kSlope);
  if (name == "w_c") return std::string(kCrossSlope);
  if (name == "w_e") return std::string(kEnergy);
  if (name == "w_t") return std::string(kSteps);
  if (name == "w_w") return "view_min";
  return name;
}

// ---------------------------------------------------------------------------
// Energy

/// Gradients beyond this magnitude are clamped before evaluating the
/// walking-energy polynomial, which is only fitted on [-0.5, 0.5].
inline constexpr double kDefaultEnergyClamp = 0.5;

/// Metabolic cost of walking in J/(kg*m) as a quintic in the gradient:
/// 280.5 s^5 - 58.7 s^4 - 76.8 s^3 + 51.9 s^2 + 19.6 s + 2.5.
/// No clamping is applied here.
constexpr double energy_polynomial(double s) {
  return ((((280.5 * s - 58.7) * s - 76.8) * s + 51.9) * s + 19.6) * s + 2.5;
}

struct EnergyRate {
  double value = 0.0;
  bool clamped = false;
};

inline EnergyRate energy_rate(double gradient, double clamp = kDefaultEnergyClamp) {
  const double s = std::clamp(gradient, -clamp, clamp);
  return {energy_polynomial(s), s != gradient};
}

// ---------------------------------------------------------------------------
// Base costs

/// Distance and signed gradient between two node points. A zero horizontal
/// run (never produced by the grid builder) yields slope 0.
inline void fill_geometric_weights(const Vec3& from, const Vec3& to, WeightVector& w) {
  w.distance = dst(from, to);
  const double run = horizontal_distance(from, to);
  w.slope = run > 0.0 ? (to.z - from.z) / run : 0.0;
}

/// Sets distance and slope on every edge. Rows are independent.
inline void set_base_costs(AccessGraph& graph, unsigned threads = 1) {
  Csr& csr = graph.csr();
  parallel_for(graph.vertex_count(), threads, [&](std::size_t v) {
    const Vec3& from = graph.point(static_cast<VertexId>(v));
    for (EdgeId e = csr.row_begin(static_cast<VertexId>(v)); e < csr.row_end(static_cast<VertexId>(v)); ++e) {
      WeightVector w;
      fill_geometric_weights(from, graph.point(csr.columns[e]), w);
      csr.distance[e] = w.distance;
      csr.slope[e] = w.slope;
    }
  });
}

/// Energy per edge = rate(gradient) * length. Returns the clamp count, also
/// stored in graph.stats().
inline std::size_t set_energy(AccessGraph& graph, double clamp = kDefaultEnergyClamp, unsigned threads = 1) {
  Csr& csr = graph.csr();
  std::vector<std::size_t> clamped_per_row(graph.vertex_count(), 0);
  parallel_for(graph.vertex_count(), threads, [&](std::size_t v) {
    for (EdgeId e = csr.row_begin(static_cast<VertexId>(v)); e < csr.row_end(static_cast<VertexId>(v)); ++e) {
      const EnergyRate rate = energy_rate(csr.slope[e], clamp);
      csr.energy[e] = rate.value * csr.distance[e];
      clamped_per_row[v] += rate.clamped ? 1 : 0;
    }
  });
  std::size_t total = 0;
  for (std::size_t c : clamped_per_row) total += c;
  graph.stats().energy_clamped = total;
  return total;
}

// ---------------------------------------------------------------------------
// Cross-slope

/// Max |z(head of e) - z(head of k)| over DIRECT out-edges k of the same
/// parent whose grid direction is perpendicular to e's. 0 when none exist.
inline double cross_slope(const AccessGraph& graph, VertexId parent, EdgeId edge) {
  const Csr& csr = graph.csr();
  const NodeKey& pk = graph.key(parent);
  const VertexId head = csr.columns[edge];
  const NodeKey& hk = graph.key(head);
  const long di = hk.i - pk.i;
  const long dj = hk.j - pk.j;
  double result = 0.0;
  for (EdgeId k = csr.row_begin(parent); k < csr.row_end(parent); ++k) {
    if (k == edge || csr.step[k] != ConnectionType::Direct) continue;
    const NodeKey& ok = graph.key(csr.columns[k]);
    const long oi = ok.i - pk.i;
    const long oj = ok.j - pk.j;
    if (di * oi + dj * oj != 0) continue;
    result = std::max(result, std::abs(graph.point(head).z - graph.point(csr.columns[k]).z));
  }
  return result;
}

inline void set_cross_slopes(AccessGraph& graph, unsigned threads = 1) {
  Csr& csr = graph.csr();
  parallel_for(graph.vertex_count(), threads, [&](std::size_t v) {
    const auto parent = static_cast<VertexId>(v);
    for (EdgeId e = csr.row_begin(parent); e < csr.row_end(parent); ++e) {
      csr.cross_slope[e] = cross_slope(graph, parent, e);
    }
  });
}

struct CostOptions {
  double energy_clamp = kDefaultEnergyClamp;
  unsigned threads = 1;
};

/// Distance, slope, cross-slope and energy for every edge.
inline void compute_edge_costs(AccessGraph& graph, const CostOptions& options = {}) {
  finalize_csr(graph);
  set_base_costs(graph, options.threads);
  set_cross_slopes(graph, options.threads);
  set_energy(graph, options.energy_clamp, options.threads);
}

// ---------------------------------------------------------------------------
// Node attributes as edge costs

enum class PromoteMode { ToNode, FromNode, Reciprocal };

inline constexpr double kAttributeFloor = 1e-6;

constexpr std::string_view to_string(PromoteMode mode) noexcept {
  switch (mode) {
    case PromoteMode::ToNode: return "to_node";
    case PromoteMode::FromNode: return "from_node";
    case PromoteMode::Reciprocal: return "reciprocal";
  }
  return "to_node";
}

inline PromoteMode promote_mode_from_string(const std::string& s) {
  if (s == "to_node") return PromoteMode::ToNode;
  if (s == "from_node") return PromoteMode::FromNode;
  if (s == "reciprocal") return PromoteMode::Reciprocal;
  throw Error(ErrorCode::InvalidArgument, "unknown promote mode '" + s + "'");
}

/// Copies a node attribute onto every edge as extras[output_name]. ToNode
/// takes the head's value, FromNode the tail's, Reciprocal takes
/// 1 / max(head value, kAttributeFloor).
inline void promote_attr_to_edges(AccessGraph& graph, const std::string& attr, PromoteMode mode,
                                  std::string output_name = {}) {
  const std::vector<double>& values = graph.node_attr(attr);
  if (output_name.empty()) output_name = attr;
  Csr& csr = graph.csr();
  std::vector<double> edge_values(csr.edge_count());
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) {
      const VertexId head = csr.columns[e];
      switch (mode) {
        case PromoteMode::ToNode: edge_values[e] = values[head]; break;
        case PromoteMode::FromNode: edge_values[e] = values[v]; break;
        case PromoteMode::Reciprocal: edge_values[e] = 1.0 / std::max(values[head], kAttributeFloor); break;
      }
    }
  }
  csr.extras[output_name] = std::move(edge_values);
}

// ---------------------------------------------------------------------------
// Coefficients and composed costs

struct ThresholdRule {
  std::string attr;
  double threshold = 0.0;
  double multiplier = 1.0;
  bool below = true; // vertex violates when attr < threshold (otherwise attr > threshold)

  bool violated_by(double value) const { return below ? value < threshold : value > threshold; }
};

/// User-chosen importance per factor plus multiplicative threshold rules.
struct CostCoefficients {
  std::map<std::string, double> rho;
  std::vector<ThresholdRule> threshold_rules;

  static CostCoefficients distance_only() { return {{{std::string(kDistance), 1.0}}, {}}; }

  void validate() const {
    for (const auto& [name, value] : rho) {
      if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "coefficient '" + name + "' is not finite");
    }
    for (const auto& rule : threshold_rules) {
      if (!(rule.multiplier > 0.0) || !std::isfinite(rule.multiplier)) {
        throw Error(ErrorCode::InvalidArgument, "threshold multiplier for '" + rule.attr + "' must be > 0");
      }
    }
  }
};

/// Coefficients bound to a finalized graph's weight arrays.
class ResolvedCost {
 public:
  ResolvedCost(const AccessGraph& graph, const CostCoefficients& coefficients) : csr_(&graph.csr()) {
    coefficients.validate();
    for (const auto& [raw_name, value] : coefficients.rho) {
      const std::string name = canonical_factor_name(raw_name);
      if (value == 0.0) continue;
      if (name == kSteps) {
        steps_coefficient_ += value;
        continue;
      }
      const std::vector<double>* array = nullptr;
      if (name == kDistance) array = &csr_->distance;
      else if (name == kSlope) array = &csr_->slope;
      else if (name == kCrossSlope) array = &csr_->cross_slope;
      else if (name == kEnergy) array = &csr_->energy;
      else if (auto it = csr_->extras.find(name); it != csr_->extras.end()) array = &it->second;
      else throw Error(ErrorCode::MissingAttribute, "edge factor '" + name + "' not present");
      factors_.push_back({array, value});
    }
    if (!coefficients.threshold_rules.empty()) {
      multipliers_.assign(graph.vertex_count(), 1.0);
      for (const auto& rule : coefficients.threshold_rules) {
        const auto& values = graph.node_attr(rule.attr);
        for (VertexId v = 0; v < graph.vertex_count(); ++v) {
          if (rule.violated_by(values[v])) multipliers_[v] *= rule.multiplier;
        }
      }
    }
  }

  /// rho-weighted sum of the edge's factors, without threshold rules.
  double score(EdgeId e) const {
    double total = 0.0;
    for (const auto& [array, coefficient] : factors_) total += coefficient * (*array)[e];
    if (steps_coefficient_ != 0.0 && is_step(csr_->step[e])) total += steps_coefficient_;
    return total;
  }

  /// Score of the edge with the tail vertex's threshold multipliers applied.
  double cost(VertexId tail, EdgeId e) const {
    const double base = score(e);
    return multipliers_.empty() ? base : base * multipliers_[tail];
  }

 private:
  const Csr* csr_;
  std::vector<std::pair<const std::vector<double>*, double>> factors_;
  double steps_coefficient_ = 0.0;
  std::vector<double> multipliers_;
};

/// Sum over the vertex's outgoing edges of the rho-weighted weight vectors.
inline double node_score(const AccessGraph& graph, VertexId v, const CostCoefficients& coefficients) {
  if (v >= graph.vertex_count()) throw Error(ErrorCode::InvalidArgument, "unknown vertex");
  if (graph.out_degree(v) == 0) {
    throw Error(ErrorCode::ChildlessVertex, "vertex " + std::to_string(v) + " has no outgoing edges");
  }
  const ResolvedCost resolved(graph, {coefficients.rho, {}});
  const Csr& csr = graph.csr();
  double total = 0.0;
  for (EdgeId e = csr.row_begin(v); e < csr.row_end(v); ++e) total += resolved.score(e);
  return total;
}

} // namespace accessgraph
