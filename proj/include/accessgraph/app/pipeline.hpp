#pragma once

#include <accessgraph/app/store.hpp>
#include <accessgraph/builder.hpp>
#include <accessgraph/edge_costs.hpp>
#include <accessgraph/heatmap.hpp>
#include <accessgraph/paths.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace accessgraph::app {

/// A validated build request. `cached` is set when the graph already exists.
struct BuildPlan {
  std::string id;
  std::string name;
  SceneRecord scene;
  GraphParams params;
  nlohmann::json params_json; // canonical form
  std::string params_hash;
  bool cached = false;
};

/// Parses params, resolves the scene and derives the content id. Checks the
/// start point when `check_start` is set so a bad start fails fast.
BuildPlan plan_build(ProjectStore& store, const std::string& scene, const nlohmann::json& params,
                     const std::string& name = {}, bool check_start = true);

/// Builds the graph, computes the geometric edge costs (cross-slope and
/// energy at the default clamp) and stores it. Returns the cached graph when
/// the id already exists.
std::shared_ptr<GraphHandle> execute_build(ProjectStore& store, const BuildPlan& plan, unsigned threads);

nlohmann::json build_summary(const GraphHandle& handle, bool cached);

/// Recomputes energy with the configured clamp and applies attribute
/// promotions. Returns the stored cost section.
nlohmann::json apply_costs(ProjectStore& store, GraphHandle& handle, const nlohmann::json& config, unsigned threads);

/// Adds view_max and view_min node attributes.
nlohmann::json apply_viewshed(ProjectStore& store, GraphHandle& handle, const nlohmann::json& config, unsigned threads);

/// Request body shared by the CLI and the API:
/// {start_key, goal_key, rho, threshold_rules}.
struct PathQuery {
  NodeKey start;
  NodeKey goal;
  CostCoefficients coefficients = CostCoefficients::distance_only();
};

PathQuery path_query_from_json(const nlohmann::json& j);

/// Cheapest path as a document; {"found": false, ...} when unreachable.
nlohmann::json run_path(const AccessGraph& graph, const PathQuery& query);
std::optional<PathResult> solve_path(const AccessGraph& graph, const PathQuery& query);

nlohmann::json run_heatmap(const AccessGraph& graph, const std::string& metric);

nlohmann::json graph_report(const GraphHandle& handle);

} // namespace accessgraph::app
