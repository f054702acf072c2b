#include <accessgraph/app/cli.hpp>

#include <accessgraph/app/errors.hpp>
#include <accessgraph/app/pipeline.hpp>
#include <accessgraph/app/service.hpp>
#include <accessgraph/app/store.hpp>
#include <accessgraph/exports.hpp>
#include <accessgraph/graph_io.hpp>
#include <accessgraph/json_io.hpp>
#include <accessgraph/mesh_io.hpp>
#include <accessgraph/parallel.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

namespace accessgraph::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_serve_stop = 0;

extern "C" void on_stop_signal(int) { g_serve_stop = 1; }

// A JSON argument given inline ("{...}", "[...]") or as a file path.
json json_arg(const std::string& value, const std::string& what) {
  const auto first = value.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && (value[first] == '{' || value[first] == '[');
  const std::string text = inline_json ? value : read_file(value);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + " is not valid JSON: " + e.what());
  }
}

// "i,j,level", "i,j" or a JSON array.
NodeKey key_arg(const std::string& value) {
  if (!value.empty() && value.front() == '[') return node_key_from_json(json_arg(value, "node key"));
  json parts = json::array();
  std::stringstream ss(value);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      parts.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "node key '" + value + "' must look like i,j,level");
    }
  }
  return node_key_from_json(parts);
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

struct Options {
  std::string store;
  unsigned threads = 0;

  std::string file;
  std::string name;
  std::string labels;
  std::string format;
  bool y_up = false;
  bool as_graph = false;

  std::string scene;
  std::string params;
  std::string graph;
  std::string config;

  std::string start;
  std::string goal;
  std::vector<std::string> via;
  std::string rho;
  std::string rules;
  std::string query;

  std::string metric;
  std::string ply;
  std::string out;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t workers = 0;
  std::size_t page_size = 50000;
};

unsigned thread_count(const Options& o) { return o.threads ? o.threads : default_thread_count(); }

json cmd_import(ProjectStore& store, const Options& o) {
  if (o.as_graph) {
    AccessGraph graph = load_csr_binary(o.file);
    const fs::path sidecar = o.file + ".meta.json";
    GraphMeta meta;
    if (fs::exists(sidecar)) {
      meta = graph_meta_from_json(json_arg(sidecar.string(), "graph metadata"));
    } else {
      if (o.scene.empty() || o.params.empty()) {
        throw Error(ErrorCode::InvalidArgument, "graph import needs " + sidecar.string() + " or --scene and --params");
      }
      const SceneRecord scene = store.scene_record(o.scene);
      meta.scene = scene.name;
      meta.scene_hash = scene.hash;
      meta.params = to_json(params_from_json(json_arg(o.params, "params")));
      meta.params_hash = content_hash(meta.params.dump());
      meta.id = graph_id(meta.scene_hash, meta.params_hash);
      meta.name = meta.id;
    }
    if (!o.name.empty()) meta.name = o.name;
    const bool cached = store.has_graph_id(meta.id);
    const auto handle = store.put_graph(std::move(meta), std::move(graph));
    return build_summary(*handle, cached);
  }
  const std::string format = o.format.empty() ? mesh_format_of(o.file) : o.format;
  const std::string name = o.name.empty() ? fs::path(o.file).stem().string() : o.name;
  const json labels = o.labels.empty() ? json::object() : json_arg(o.labels, "labels");
  return to_json(store.put_scene(name, read_file(o.file), format, labels, o.y_up));
}

json cmd_build(ProjectStore& store, const Options& o) {
  const BuildPlan plan = plan_build(store, o.scene, json_arg(o.params, "params"), o.name, false);
  const auto handle = execute_build(store, plan, thread_count(o));
  json summary = build_summary(*handle, plan.cached);
  if (!o.out.empty()) {
    std::shared_lock read(handle->mutex);
    write_bytes(o.out, csr_bytes(handle->graph));
    write_bytes(o.out + ".meta.json", to_json(handle->meta).dump(2));
    summary["out"] = o.out;
  }
  return summary;
}

PathQuery query_from(const Options& o, const NodeKey& start, const NodeKey& goal) {
  json body = o.query.empty() ? json::object() : json_arg(o.query, "path query");
  if (!o.rho.empty()) body["rho"] = json_arg(o.rho, "rho");
  if (!o.rules.empty()) body["threshold_rules"] = json_arg(o.rules, "threshold rules");
  body["start_key"] = to_json(start);
  body["goal_key"] = to_json(goal);
  return path_query_from_json(body);
}

std::pair<NodeKey, NodeKey> endpoints(const Options& o) {
  json body = o.query.empty() ? json::object() : json_arg(o.query, "path query");
  if (o.start.empty() && !body.contains("start_key")) throw Error(ErrorCode::InvalidArgument, "path needs --start");
  if (o.goal.empty() && !body.contains("goal_key")) throw Error(ErrorCode::InvalidArgument, "path needs --goal");
  return {o.start.empty() ? node_key_from_json(body.at("start_key")) : key_arg(o.start),
          o.goal.empty() ? node_key_from_json(body.at("goal_key")) : key_arg(o.goal)};
}

json cmd_path(ProjectStore& store, const Options& o) {
  const auto handle = store.graph(o.graph);
  std::shared_lock read(handle->mutex);
  const auto [start, goal] = endpoints(o);
  if (o.via.empty()) return run_path(handle->graph, query_from(o, start, goal));

  // Legs through the waypoints in order.
  std::vector<NodeKey> stops{start};
  for (const auto& v : o.via) stops.push_back(key_arg(v));
  stops.push_back(goal);
  json legs = json::array();
  double length = 0.0, cost = 0.0, score = 0.0;
  std::size_t steps = 0;
  bool found = true;
  for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
    json leg = run_path(handle->graph, query_from(o, stops[k], stops[k + 1]));
    if (leg.at("found").get<bool>()) {
      length += leg.at("length").get<double>();
      cost += leg.at("cost").get<double>();
      score += leg.at("score").get<double>();
      steps += leg.at("steps").get<std::size_t>();
    } else {
      found = false;
    }
    legs.push_back(std::move(leg));
  }
  return {{"legs", legs}, {"found", found}, {"length", length}, {"cost", cost}, {"score", score}, {"steps", steps}};
}

json cmd_export(ProjectStore& store, const Options& o) {
  const auto handle = store.graph(o.graph);
  std::shared_lock read(handle->mutex);
  std::string bytes;
  if (o.format == "csr") {
    bytes = csr_bytes(handle->graph);
    write_bytes(o.out + ".meta.json", to_json(handle->meta).dump(2));
  } else if (o.format == "json") {
    bytes = graph_to_json(handle->graph).dump();
  } else if (o.format == "obj") {
    const auto [start, goal] = endpoints(o);
    const auto path = solve_path(handle->graph, query_from(o, start, goal));
    if (!path) throw Error(ErrorCode::NotFound, "goal is unreachable from start");
    std::ostringstream ss;
    write_path_obj(ss, handle->graph, *path);
    bytes = ss.str();
  } else if (o.format == "ply") {
    if (o.metric.empty()) throw Error(ErrorCode::InvalidArgument, "ply export needs --metric");
    std::ostringstream ss;
    write_heatmap_ply(ss, handle->graph, heatmap(handle->graph, heatmap_metric_from_string(o.metric)));
    bytes = ss.str();
  } else {
    throw Error(ErrorCode::InvalidArgument, "export format must be csr, json, obj or ply");
  }
  write_bytes(o.out, bytes);
  return {{"graph", handle->meta.id}, {"format", o.format}, {"out", o.out}, {"bytes", bytes.size()},
          {"hash", content_hash(bytes)}};
}

int cmd_serve(ProjectStore& store, const Options& o, std::ostream& out) {
  ServiceOptions options;
  options.build_workers = o.workers;
  options.build_threads = o.threads ? o.threads : 1;
  options.page_size = o.page_size;
  Service service(store, options);
  const int port = service.bind(o.host, o.port);
  out << json{{"host", o.host}, {"port", port}}.dump() << std::endl;

  g_serve_stop = 0;
  auto previous_int = std::signal(SIGINT, on_stop_signal);
  auto previous_term = std::signal(SIGTERM, on_stop_signal);
  std::jthread watcher([&service](std::stop_token token) {
    while (!token.stop_requested() && !g_serve_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    service.stop();
  });
  service.listen();
  watcher.request_stop();
  watcher.join();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  return 0;
}

} // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accessibility graphs for 3D scenes", "accessgraph"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--store", o.store, "Store directory (default $SHAPE_STORE or ./shape-store)");
  app.add_option("--threads", o.threads, "Worker threads (default: hardware parallelism)");

  auto* import = app.add_subcommand("import", "Import a mesh as a scene, or a binary CSR as a graph");
  import->add_option("file", o.file, "OBJ, PLY or (with --graph) CSR file")->required();
  import->add_option("--name", o.name, "Scene or graph name (default: file stem / graph id)");
  import->add_option("--labels", o.labels, "Label sidecar JSON file or inline object");
  import->add_option("--format", o.format, "obj or ply (default: from the extension)");
  import->add_flag("--y-up", o.y_up, "Mesh uses +y as up");
  import->add_flag("--graph", o.as_graph, "Import a binary CSR graph");
  import->add_option("--scene", o.scene, "Source scene of an imported graph without metadata");
  import->add_option("--params", o.params, "Params of an imported graph without metadata");

  auto* build = app.add_subcommand("build", "Build the accessibility graph of a scene");
  build->add_option("--scene", o.scene, "Scene name")->required();
  build->add_option("--params", o.params, "Params JSON file or inline object")->required();
  build->add_option("--name", o.name, "Graph name (default: graph id)");
  build->add_option("--out", o.out, "Also write the graph as binary CSR (plus <out>.meta.json)");

  auto* costs = app.add_subcommand("costs", "Recompute energy and promote node attributes to edges");
  costs->add_option("--graph", o.graph, "Graph name or id")->required();
  costs->add_option("--config", o.config, "Cost config JSON file or inline object");

  auto* view = app.add_subcommand("viewshed", "Compute view_max and view_min per node");
  view->add_option("--graph", o.graph, "Graph name or id")->required();
  view->add_option("--config", o.config, "Viewshed config JSON file or inline object");

  auto add_path_options = [&o](CLI::App* cmd) {
    cmd->add_option("--start", o.start, "Start node key i,j,level");
    cmd->add_option("--goal", o.goal, "Goal node key i,j,level");
    cmd->add_option("--rho", o.rho, "Cost coefficients, e.g. '{\"distance\": 1}'");
    cmd->add_option("--rules", o.rules, "Threshold rules JSON array");
    cmd->add_option("--query", o.query, "Path query JSON {start_key, goal_key, rho, threshold_rules}");
  };
  auto* path = app.add_subcommand("path", "Cheapest path between two nodes");
  path->add_option("--graph", o.graph, "Graph name or id")->required();
  add_path_options(path);
  path->add_option("--via", o.via, "Intermediate node keys, visited in order");

  auto* heat = app.add_subcommand("heatmap", "Per-node metric normalized to colors");
  heat->add_option("--graph", o.graph, "Graph name or id")->required();
  heat->add_option("--metric", o.metric, "Node attribute or score:{rho}")->required();
  heat->add_option("--ply", o.ply, "Also write a colored PLY point cloud");

  auto* exp = app.add_subcommand("export", "Write a graph, path or heatmap file");
  exp->add_option("--graph", o.graph, "Graph name or id")->required();
  exp->add_option("--format", o.format, "csr, json, obj (path) or ply (heatmap)")->required();
  exp->add_option("--out", o.out, "Output file")->required();
  exp->add_option("--metric", o.metric, "Heatmap metric for ply");
  add_path_options(exp);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port, 0 picks a free one");
  serve->add_option("--workers", o.workers, "Concurrent build jobs (default: hardware parallelism)");
  serve->add_option("--page-size", o.page_size, "Default vertices per graph page");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_json("Usage", e.what()).dump() << '\n';
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    ProjectStore store(o.store.empty() ? ProjectStore::default_root() : fs::path(o.store));
    json result;
    if (*import) {
      result = cmd_import(store, o);
    } else if (*build) {
      result = cmd_build(store, o);
    } else if (*costs) {
      const auto handle = store.graph(o.graph);
      result = apply_costs(store, *handle, o.config.empty() ? json::object() : json_arg(o.config, "cost config"),
                           thread_count(o));
    } else if (*view) {
      const auto handle = store.graph(o.graph);
      result = apply_viewshed(store, *handle, o.config.empty() ? json::object() : json_arg(o.config, "viewshed config"),
                              thread_count(o));
    } else if (*path) {
      result = cmd_path(store, o);
    } else if (*heat) {
      const auto handle = store.graph(o.graph);
      std::shared_lock read(handle->mutex);
      const Heatmap map = heatmap(handle->graph, heatmap_metric_from_string(o.metric));
      if (!o.ply.empty()) {
        std::ostringstream ss;
        write_heatmap_ply(ss, handle->graph, map);
        write_bytes(o.ply, ss.str());
      }
      result = heatmap_to_json(map);
    } else if (*exp) {
      result = cmd_export(store, o);
    } else if (*serve) {
      return cmd_serve(store, o, out);
    }
    out << result.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    out << error_json(e).dump() << '\n';
    err << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    out << error_json("ParseError", e.what()).dump() << '\n';
    err << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    out << error_json("Internal", e.what()).dump() << '\n';
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace accessgraph::app
