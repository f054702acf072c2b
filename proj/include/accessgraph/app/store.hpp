#pragma once

#include <accessgraph/graph.hpp>
#include <accessgraph/mesh.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace accessgraph::app {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

struct SceneRecord {
  std::string name;
  std::string hash;
  std::string format; // "obj" or "ply"
  bool y_up = false;
  nlohmann::json labels = nlohmann::json::object();
  std::size_t object_count = 0;
  std::size_t walkable_count = 0;
  std::size_t triangle_count = 0;
  std::size_t dropped_degenerate = 0;
};

nlohmann::json to_json(const SceneRecord& r);
SceneRecord scene_record_from_json(const nlohmann::json& j);

struct GraphMeta {
  std::string id;
  std::string name;
  std::string scene;
  std::string scene_hash;
  nlohmann::json params;
  std::string params_hash;
  nlohmann::json report = nlohmann::json::object();
  nlohmann::json costs = nlohmann::json::object();
  nlohmann::json viewshed; // null until a viewshed has been run
};

nlohmann::json to_json(const GraphMeta& m);
GraphMeta graph_meta_from_json(const nlohmann::json& j);

/// Id of the graph built from a scene and parameter set.
std::string graph_id(std::string_view scene_hash, std::string_view params_hash);

/// A loaded graph. Readers take `mutex` shared, mutating stages take it
/// exclusively and call ProjectStore::save_graph before releasing it.
struct GraphHandle {
  std::shared_mutex mutex;
  GraphMeta meta;
  AccessGraph graph;
};

/// On-disk registry of scenes and graphs:
///
///   <root>/scenes/<name>/scene.json, mesh.<format>
///   <root>/graphs/<id>/meta.json, graph.csr
///
/// Names are unique per kind. Loaded scenes and graphs are cached in memory.
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path root);

  /// $SHAPE_STORE, or ./shape-store when unset.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const { return root_; }

  /// Stores a scene. Re-importing identical content under the same name is a
  /// no-op; different content under a taken name throws AlreadyExists.
  SceneRecord put_scene(const std::string& name, const std::string& bytes, const std::string& format,
                        const nlohmann::json& labels, bool y_up);
  SceneRecord scene_record(const std::string& name) const;
  std::vector<SceneRecord> scenes() const;
  std::shared_ptr<const Scene> scene(const std::string& name);

  /// Resolves a graph name or id.
  std::optional<std::string> find_graph(const std::string& name_or_id) const;
  bool has_graph_id(const std::string& id) const;
  /// Throws AlreadyExists when `name` belongs to a graph other than `id`.
  void check_graph_name(const std::string& name, const std::string& id) const;
  std::vector<GraphMeta> graphs() const;

  /// Writes a new graph. An existing id is left untouched and returned.
  std::shared_ptr<GraphHandle> put_graph(GraphMeta meta, AccessGraph graph);
  std::shared_ptr<GraphHandle> graph(const std::string& name_or_id);
  void save_graph(const GraphHandle& handle);

 private:
  std::filesystem::path scene_dir(const std::string& name) const { return root_ / "scenes" / name; }
  std::filesystem::path graph_dir(const std::string& id) const { return root_ / "graphs" / id; }

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Scene>> scenes_;
  std::map<std::string, std::shared_ptr<GraphHandle>> graphs_;
};

/// Rejects names that are empty or not usable as a directory name.
void validate_name(const std::string& name, const std::string& what);

} // namespace accessgraph::app
