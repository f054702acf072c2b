#include <accessgraph/app/pipeline.hpp>

#include <accessgraph/json_io.hpp>
#include <accessgraph/viewshed.hpp>

#include <mutex>

namespace accessgraph::app {

using nlohmann::json;

BuildPlan plan_build(ProjectStore& store, const std::string& scene, const json& params, const std::string& name,
                     bool check_start) {
  BuildPlan plan;
  plan.params = params_from_json(params);
  plan.params_json = to_json(plan.params);
  plan.params_hash = content_hash(plan.params_json.dump());
  plan.scene = store.scene_record(scene);
  plan.id = graph_id(plan.scene.hash, plan.params_hash);
  plan.name = name.empty() ? plan.id : name;
  validate_name(plan.name, "graph");
  store.check_graph_name(plan.name, plan.id);
  plan.cached = store.has_graph_id(plan.id);
  if (!plan.cached && check_start) find_start(*store.scene(scene), plan.params);
  return plan;
}

std::shared_ptr<GraphHandle> execute_build(ProjectStore& store, const BuildPlan& plan, unsigned threads) {
  if (store.has_graph_id(plan.id)) return store.graph(plan.id);
  const auto scene = store.scene(plan.scene.name);
  BuildOptions options;
  options.threads = threads;
  BuildResult result = build_graph(*scene, plan.params, options);
  CostOptions costs;
  costs.threads = threads;
  compute_edge_costs(result.graph, costs);

  GraphMeta meta;
  meta.id = plan.id;
  meta.name = plan.name;
  meta.scene = plan.scene.name;
  meta.scene_hash = plan.scene.hash;
  meta.params = plan.params_json;
  meta.params_hash = plan.params_hash;
  meta.report = to_json(result.report);
  meta.report["energy_clamped"] = result.graph.stats().energy_clamped;
  meta.costs = {{"energy", {{"clamp", costs.energy_clamp}}}, {"promote", json::array()}};
  return store.put_graph(std::move(meta), std::move(result.graph));
}

json build_summary(const GraphHandle& handle, bool cached) {
  return {{"graph", handle.meta.id},
          {"name", handle.meta.name},
          {"scene", handle.meta.scene},
          {"scene_hash", handle.meta.scene_hash},
          {"params_hash", handle.meta.params_hash},
          {"vertex_count", handle.graph.vertex_count()},
          {"edge_count", handle.graph.edge_count()},
          {"report", handle.meta.report},
          {"cached", cached}};
}

json apply_costs(ProjectStore& store, GraphHandle& handle, const json& config_json, unsigned threads) {
  const CostConfig config = cost_config_from_json(config_json);
  std::unique_lock lock(handle.mutex);
  CostOptions options;
  options.energy_clamp = config.energy_clamp;
  options.threads = threads;
  compute_edge_costs(handle.graph, options);
  json promoted = json::array();
  for (const auto& p : config.promotions) {
    const std::string out = p.output_name.empty() ? p.attr : p.output_name;
    promote_attr_to_edges(handle.graph, p.attr, p.mode, out);
    promoted.push_back({{"attr", p.attr}, {"mode", to_string(p.mode)}, {"as", out}});
  }
  handle.meta.costs = {{"energy", {{"clamp", config.energy_clamp}}}, {"promote", promoted}};
  handle.meta.report["energy_clamped"] = handle.graph.stats().energy_clamped;
  store.save_graph(handle);
  json out = handle.meta.costs;
  out["graph"] = handle.meta.id;
  out["energy_clamped"] = handle.graph.stats().energy_clamped;
  return out;
}

json apply_viewshed(ProjectStore& store, GraphHandle& handle, const json& config_json, unsigned threads) {
  ViewshedConfig config = viewshed_config_from_json(config_json);
  config.threads = threads;
  std::unique_lock lock(handle.mutex);
  if (handle.meta.scene.empty()) throw Error(ErrorCode::NotFound, "graph " + handle.meta.id + " has no source scene");
  const auto scene = store.scene(handle.meta.scene);
  if (store.scene_record(handle.meta.scene).hash != handle.meta.scene_hash) {
    throw Error(ErrorCode::NotFound, "source scene of graph " + handle.meta.id + " is not in this store");
  }
  viewshed(handle.graph, *scene, config);
  json cfg = config_json.is_null() ? json::object() : config_json;
  handle.meta.viewshed = cfg;
  store.save_graph(handle);

  const auto& vmax = handle.graph.node_attr(std::string(kViewMaxAttr));
  const auto& vmin = handle.graph.node_attr(std::string(kViewMinAttr));
  const auto [lo, hi] = std::minmax_element(vmax.begin(), vmax.end());
  return {{"graph", handle.meta.id},
          {"config", cfg},
          {"attrs", {kViewMaxAttr, kViewMinAttr}},
          {"view_max", {{"min", vmax.empty() ? 0.0 : *lo}, {"max", vmax.empty() ? 0.0 : *hi}}},
          {"view_min", {{"min", vmin.empty() ? 0.0 : *std::min_element(vmin.begin(), vmin.end())},
                        {"max", vmin.empty() ? 0.0 : *std::max_element(vmin.begin(), vmin.end())}}}};
}

PathQuery path_query_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "path query must be a JSON object");
  detail::reject_unknown_keys(j, {"start_key", "goal_key", "rho", "threshold_rules"}, "path query");
  PathQuery q;
  if (!j.contains("start_key") || !j.contains("goal_key")) {
    throw Error(ErrorCode::InvalidArgument, "path query needs start_key and goal_key");
  }
  q.start = node_key_from_json(j.at("start_key"));
  q.goal = node_key_from_json(j.at("goal_key"));
  if (auto it = j.find("rho"); it != j.end()) q.coefficients.rho = rho_from_json(*it);
  if (auto it = j.find("threshold_rules"); it != j.end()) q.coefficients.threshold_rules = threshold_rules_from_json(*it);
  q.coefficients.validate();
  return q;
}

namespace {

VertexId vertex_for(const AccessGraph& graph, const NodeKey& key) {
  const auto v = graph.find(key);
  if (!v) {
    throw Error(ErrorCode::NotFound, "no node with key [" + std::to_string(key.i) + ", " + std::to_string(key.j) + ", " +
                                         std::to_string(key.level) + "]");
  }
  return *v;
}

} // namespace

std::optional<PathResult> solve_path(const AccessGraph& graph, const PathQuery& query) {
  return shortest_path(graph, vertex_for(graph, query.start), vertex_for(graph, query.goal), query.coefficients);
}

json run_path(const AccessGraph& graph, const PathQuery& query) {
  const auto result = solve_path(graph, query);
  json out = result ? path_to_json(graph, *result) : json{{"vertices", json::array()}, {"edges", json::array()}};
  out["found"] = result.has_value();
  out["start_key"] = to_json(query.start);
  out["goal_key"] = to_json(query.goal);
  out["coefficients"] = to_json(query.coefficients);
  return out;
}

json run_heatmap(const AccessGraph& graph, const std::string& metric) {
  return heatmap_to_json(heatmap(graph, heatmap_metric_from_string(metric)));
}

json graph_report(const GraphHandle& handle) {
  json out = to_json(handle.meta);
  out["vertex_count"] = handle.graph.vertex_count();
  out["edge_count"] = handle.graph.edge_count();
  json attrs = json::array();
  for (const auto& [name, values] : handle.graph.node_attrs()) attrs.push_back(name);
  out["node_attrs"] = attrs;
  json extras = json::array();
  for (const auto& [name, values] : handle.graph.csr().extras) extras.push_back(name);
  out["edge_extras"] = extras;
  return out;
}

} // namespace accessgraph::app
