#pragma once

#include <accessgraph/builder.hpp>
#include <accessgraph/edge_costs.hpp>
#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/heatmap.hpp>
#include <accessgraph/paths.hpp>
#include <accessgraph/viewshed.hpp>

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <vector>

namespace accessgraph {

using nlohmann::json;

inline json to_json(const Vec3& p) { return json::array({p.x, p.y, p.z}); }
inline json to_json(const NodeKey& k) { return json::array({k.i, k.j, k.level}); }

namespace detail {

// Runs a parse step, turning nlohmann's exceptions into ParseError.
template <typename Fn>
auto parse_guard(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::ParseError, what + ": unknown field '" + key + "'");
  }
}

// First present key among aliases.
inline const json* field(const json& j, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (auto it = j.find(n); it != j.end()) return &*it;
  }
  return nullptr;
}

} // namespace detail

inline Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected [x, y, z]");
  return detail::parse_guard("point", [&] { return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; });
}

inline NodeKey node_key_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 2)) throw Error(ErrorCode::ParseError, "expected node key [i, j, level]");
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw Error(ErrorCode::ParseError, "node key components must be integers");
  }
  return detail::parse_guard("node key", [&] {
    return NodeKey{j[0].get<std::int32_t>(), j[1].get<std::int32_t>(), j.size() == 3 ? j[2].get<std::int32_t>() : 0};
  });
}

// ---------------------------------------------------------------------------
// Graph parameters. Keys follow the parameter symbols (tau, h, a, ...);
// descriptive aliases are accepted too.

inline GraphParams params_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"tau", "start", "h", "height", "a", "spacing", "b_u", "step_up", "b_d", "step_down",
                                  "s_u", "slope_up", "s_d", "slope_down", "s_c", "cross_slope_limit", "gamma",
                                  "min_children", "phi", "directions", "max_drop", "merge_tolerance", "level_epsilon",
                                  "ray_lift"},
                              "params");
  return detail::parse_guard("params", [&] {
    GraphParams p;
    const json* tau = detail::field(j, {"tau", "start"});
    if (!tau) throw Error(ErrorCode::ParseError, "params: missing start point 'tau'");
    p.start = vec3_from_json(*tau);
    if (auto f = detail::field(j, {"h", "height"})) p.height = f->get<double>();
    if (auto f = detail::field(j, {"a", "spacing"})) p.spacing = f->get<double>();
    if (auto f = detail::field(j, {"b_u", "step_up"})) p.step_up = f->get<double>();
    if (auto f = detail::field(j, {"b_d", "step_down"})) p.step_down = f->get<double>();
    if (auto f = detail::field(j, {"s_u", "slope_up"})) p.slope_up = f->get<double>();
    if (auto f = detail::field(j, {"s_d", "slope_down"})) p.slope_down = f->get<double>();
    if (auto f = detail::field(j, {"s_c", "cross_slope_limit"}); f && !f->is_null()) p.cross_slope_limit = f->get<double>();
    if (auto f = detail::field(j, {"gamma", "min_children"})) p.min_children = f->get<std::size_t>();
    if (auto f = detail::field(j, {"phi", "directions"})) {
      p.directions.clear();
      for (const auto& d : *f) {
        if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() || !d[1].is_number_integer()) {
          throw Error(ErrorCode::ParseError, "params: phi entries must be integer pairs [i, j]");
        }
        p.directions.push_back({d[0].get<std::int32_t>(), d[1].get<std::int32_t>()});
      }
    }
    if (auto f = detail::field(j, {"max_drop"}); f && !f->is_null()) p.max_drop = f->get<double>();
    if (auto f = detail::field(j, {"merge_tolerance"}); f && !f->is_null()) p.merge_tolerance = f->get<double>();
    if (auto f = detail::field(j, {"level_epsilon"})) p.level_epsilon = f->get<double>();
    if (auto f = detail::field(j, {"ray_lift"})) p.ray_lift = f->get<double>();
    p.normalize();
    return p;
  });
}

/// Canonical form (normalized, every field explicit); used for content hashing.
inline json to_json(GraphParams p) {
  p.normalize();
  json phi = json::array();
  for (const auto& d : p.directions) phi.push_back(json::array({d.i, d.j}));
  return json{{"tau", to_json(p.start)},
              {"h", p.height},
              {"a", p.spacing},
              {"b_u", p.step_up},
              {"b_d", p.step_down},
              {"s_u", p.slope_up},
              {"s_d", p.slope_down},
              {"s_c", p.cross_slope_limit ? json(*p.cross_slope_limit) : json(nullptr)},
              {"gamma", p.min_children},
              {"phi", phi},
              {"max_drop", p.drop_length()},
              {"merge_tolerance", p.merge_tol()},
              {"level_epsilon", p.level_epsilon},
              {"ray_lift", p.ray_lift}};
}

inline json to_json(const BuildReport& r) {
  return json{{"vertex_count", r.vertex_count},
              {"edge_count", r.edge_count},
              {"queue_peak", r.queue_peak},
              {"terminated_early", r.terminated_early},
              {"frontier_snapshots", r.frontier_snapshots},
              {"removed_by_cross_slope", r.removed_by_cross_slope}};
}

inline BuildReport build_report_from_json(const json& j) {
  return detail::parse_guard("report", [&] {
    BuildReport r;
    r.vertex_count = j.at("vertex_count").get<std::size_t>();
    r.edge_count = j.at("edge_count").get<std::size_t>();
    r.queue_peak = j.at("queue_peak").get<std::size_t>();
    r.terminated_early = j.at("terminated_early").get<bool>();
    r.frontier_snapshots = j.value("frontier_snapshots", std::vector<std::size_t>{});
    r.removed_by_cross_slope = j.value("removed_by_cross_slope", std::size_t{0});
    return r;
  });
}

// ---------------------------------------------------------------------------
// Costs

inline std::vector<ThresholdRule> threshold_rules_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "threshold_rules must be an array");
  std::vector<ThresholdRule> rules;
  for (const auto& r : j) {
    detail::reject_unknown_keys(r, {"attr", "threshold", "multiplier", "below"}, "threshold rule");
    rules.push_back(detail::parse_guard("threshold rule", [&] {
      return ThresholdRule{r.at("attr").get<std::string>(), r.at("threshold").get<double>(),
                           r.at("multiplier").get<double>(), r.value("below", true)};
    }));
  }
  return rules;
}

inline std::map<std::string, double> rho_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "rho must be an object of factor -> coefficient");
  std::map<std::string, double> rho;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number()) throw Error(ErrorCode::ParseError, "rho['" + name + "'] must be a number");
    rho[canonical_factor_name(name)] += value.get<double>();
  }
  return rho;
}

inline json to_json(const CostCoefficients& c) {
  json rules = json::array();
  for (const auto& r : c.threshold_rules) {
    rules.push_back({{"attr", r.attr}, {"threshold", r.threshold}, {"multiplier", r.multiplier}, {"below", r.below}});
  }
  return json{{"rho", c.rho}, {"threshold_rules", rules}};
}

struct AttributePromotion {
  std::string attr;
  PromoteMode mode = PromoteMode::ToNode;
  std::string output_name;
};

/// Cost configuration file: {rho, threshold_rules, energy: {clamp}, promote: [...]}.
struct CostConfig {
  CostCoefficients coefficients = CostCoefficients::distance_only();
  double energy_clamp = kDefaultEnergyClamp;
  std::vector<AttributePromotion> promotions;
};

inline CostConfig cost_config_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"rho", "threshold_rules", "energy", "promote"}, "cost config");
  CostConfig config;
  if (auto it = j.find("rho"); it != j.end()) config.coefficients.rho = rho_from_json(*it);
  if (auto it = j.find("threshold_rules"); it != j.end()) config.coefficients.threshold_rules = threshold_rules_from_json(*it);
  if (auto it = j.find("energy"); it != j.end()) {
    detail::reject_unknown_keys(*it, {"clamp"}, "energy");
    config.energy_clamp = detail::parse_guard("energy", [&] { return it->value("clamp", kDefaultEnergyClamp); });
    if (!(config.energy_clamp > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy clamp must be > 0");
  }
  if (auto it = j.find("promote"); it != j.end()) {
    for (const auto& p : *it) {
      detail::reject_unknown_keys(p, {"attr", "mode", "as"}, "promotion");
      config.promotions.push_back(detail::parse_guard("promotion", [&] {
        return AttributePromotion{p.at("attr").get<std::string>(), promote_mode_from_string(p.value("mode", "to_node")),
                                  p.value("as", std::string{})};
      }));
    }
  }
  config.coefficients.validate();
  return config;
}

inline ViewshedConfig viewshed_config_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"eye_height", "ray_count", "azimuth_span", "elevation_min", "elevation_max", "max_range", "seed"},
                              "viewshed config");
  return detail::parse_guard("viewshed config", [&] {
    ViewshedConfig c;
    c.eye_height = j.value("eye_height", c.eye_height);
    c.ray_count = j.value("ray_count", c.ray_count);
    c.azimuth_span = j.value("azimuth_span", c.azimuth_span);
    c.elevation_min = j.value("elevation_min", c.elevation_min);
    c.elevation_max = j.value("elevation_max", c.elevation_max);
    if (auto it = j.find("max_range"); it != j.end() && !it->is_null()) c.max_range = it->get<double>();
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  });
}

// ---------------------------------------------------------------------------
// Graph, path and heatmap documents

inline json edge_to_json(const AccessGraph& graph, VertexId from, EdgeId e) {
  const Csr& csr = graph.csr();
  json extras = json::object();
  for (const auto& [name, values] : csr.extras) extras[name] = values[e];
  return json{{"from", from},
              {"to", csr.columns[e]},
              {"distance", csr.distance[e]},
              {"slope", csr.slope[e]},
              {"cross_slope", csr.cross_slope[e]},
              {"energy", csr.energy[e]},
              {"step", std::string(to_string(csr.step[e]))},
              {"extras", extras}};
}

inline json vertex_to_json(const AccessGraph& graph, VertexId v) {
  json attrs = json::object();
  for (const auto& [name, values] : graph.node_attrs()) attrs[name] = values[v];
  return json{{"id", v}, {"key", to_json(graph.key(v))}, {"point", to_json(graph.point(v))}, {"attrs", attrs}};
}

/// Graph document. With a page, only vertices [offset, offset + limit) and
/// their outgoing edges are included.
inline json graph_to_json(const AccessGraph& graph, std::size_t offset = 0,
                          std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  const Csr& csr = graph.csr();
  const std::size_t n = graph.vertex_count();
  const std::size_t begin = std::min(offset, n);
  const std::size_t end = limit >= n - begin ? n : begin + limit;
  json vertices = json::array();
  json edges = json::array();
  for (std::size_t v = begin; v < end; ++v) {
    vertices.push_back(vertex_to_json(graph, static_cast<VertexId>(v)));
    for (EdgeId e = csr.row_begin(static_cast<VertexId>(v)); e < csr.row_end(static_cast<VertexId>(v)); ++e) {
      edges.push_back(edge_to_json(graph, static_cast<VertexId>(v), e));
    }
  }
  return json{{"format", "accessgraph"},
              {"version", 1},
              {"vertex_count", n},
              {"edge_count", csr.edge_count()},
              {"offset", begin},
              {"vertices", vertices},
              {"edges", edges}};
}

/// Rebuilds a graph from a complete (unpaged) graph document.
inline AccessGraph graph_from_json(const json& j) {
  return detail::parse_guard("graph", [&] {
    if (j.at("format").get<std::string>() != "accessgraph") throw Error(ErrorCode::ParseError, "not an accessgraph document");
    const std::size_t n = j.at("vertex_count").get<std::size_t>();
    if (j.at("vertices").size() != n || j.value("offset", std::size_t{0}) != 0) {
      throw Error(ErrorCode::ParseError, "graph document is paged or incomplete");
    }
    AccessGraph graph;
    std::map<std::string, std::vector<double>> attrs;
    for (const auto& v : j.at("vertices")) {
      const VertexId id = graph.add_vertex(node_key_from_json(v.at("key")), vec3_from_json(v.at("point")));
      if (id != v.at("id").get<VertexId>()) throw Error(ErrorCode::ParseError, "vertex ids must be dense and ordered");
      for (const auto& [name, value] : v.at("attrs").items()) {
        auto& column = attrs[name];
        column.resize(n, 0.0);
        column[id] = value.get<double>();
      }
    }
    for (auto& [name, values] : attrs) graph.set_node_attr(name, std::move(values));
    for (const auto& e : j.at("edges")) {
      WeightVector w;
      w.distance = e.at("distance").get<double>();
      w.slope = e.at("slope").get<double>();
      w.cross_slope = e.at("cross_slope").get<double>();
      w.energy = e.at("energy").get<double>();
      w.step = connection_type_from_string(e.at("step").get<std::string>());
      for (const auto& [name, value] : e.at("extras").items()) w.extras[name] = value.get<double>();
      graph.add_edge(e.at("from").get<VertexId>(), e.at("to").get<VertexId>(), std::move(w));
    }
    finalize_csr(graph);
    return graph;
  });
}

inline json path_to_json(const AccessGraph& graph, const PathResult& path) {
  json vertices = json::array();
  for (VertexId v : path.vertices) {
    vertices.push_back({{"id", v}, {"key", to_json(graph.key(v))}, {"point", to_json(graph.point(v))}});
  }
  json edges = json::array();
  for (std::size_t k = 0; k < path.edges.size(); ++k) edges.push_back(edge_to_json(graph, path.vertices[k], path.edges[k]));
  return json{{"vertices", vertices},
              {"edges", edges},
              {"totals", path.totals},
              {"score", path.score},
              {"cost", path.cost},
              {"length", path.length},
              {"steps", path.steps}};
}

inline json heatmap_to_json(const Heatmap& map) {
  json colors = json::array();
  for (const auto& c : map.colors) colors.push_back(json::array({c[0], c[1], c[2]}));
  return json{{"metric", map.metric},
              {"bounds", {{"min", map.min}, {"max", map.max}}},
              {"values", map.values},
              {"normalized", map.normalized},
              {"colors", colors}};
}

/// "view_max" selects a node attribute; "score:{...rho...}" a node score.
inline HeatmapMetric heatmap_metric_from_string(const std::string& spec) {
  static constexpr std::string_view kScorePrefix = "score:";
  if (spec.starts_with(kScorePrefix)) {
    const json rho = detail::parse_guard("metric", [&] { return json::parse(spec.substr(kScorePrefix.size())); });
    return {{}, CostCoefficients{rho_from_json(rho), {}}};
  }
  if (spec.empty()) throw Error(ErrorCode::InvalidArgument, "empty heatmap metric");
  return {spec, std::nullopt};
}

} // namespace accessgraph
