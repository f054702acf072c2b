#include <accessgraph/app/store.hpp>

#include <accessgraph/error.hpp>
#include <accessgraph/graph_io.hpp>
#include <accessgraph/mesh_io.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace accessgraph::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[static_cast<std::size_t>(k)] = kHex[h & 0xf];
  return out;
}

std::string graph_id(std::string_view scene_hash, std::string_view params_hash) {
  return "g" + content_hash(std::string(scene_hash) + ":" + std::string(params_hash));
}

void validate_name(const std::string& name, const std::string& what) {
  if (name.empty() || name.size() > 128) throw Error(ErrorCode::InvalidArgument, what + " name must be 1-128 characters");
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) throw Error(ErrorCode::InvalidArgument, what + " name '" + name + "' may only use [A-Za-z0-9._-]");
  }
  if (name == "." || name == "..") throw Error(ErrorCode::InvalidArgument, what + " name '" + name + "' is reserved");
}

json to_json(const SceneRecord& r) {
  return {{"name", r.name},
          {"hash", r.hash},
          {"format", r.format},
          {"y_up", r.y_up},
          {"labels", r.labels},
          {"object_count", r.object_count},
          {"walkable_count", r.walkable_count},
          {"triangle_count", r.triangle_count},
          {"dropped_degenerate", r.dropped_degenerate}};
}

SceneRecord scene_record_from_json(const json& j) {
  SceneRecord r;
  r.name = j.at("name").get<std::string>();
  r.hash = j.at("hash").get<std::string>();
  r.format = j.at("format").get<std::string>();
  r.y_up = j.value("y_up", false);
  r.labels = j.value("labels", json::object());
  r.object_count = j.value("object_count", std::size_t{0});
  r.walkable_count = j.value("walkable_count", std::size_t{0});
  r.triangle_count = j.value("triangle_count", std::size_t{0});
  r.dropped_degenerate = j.value("dropped_degenerate", std::size_t{0});
  return r;
}

json to_json(const GraphMeta& m) {
  return {{"id", m.id},         {"name", m.name},       {"scene", m.scene},       {"scene_hash", m.scene_hash},
          {"params", m.params}, {"params_hash", m.params_hash}, {"report", m.report}, {"costs", m.costs},
          {"viewshed", m.viewshed}};
}

GraphMeta graph_meta_from_json(const json& j) {
  GraphMeta m;
  m.id = j.at("id").get<std::string>();
  m.name = j.value("name", m.id);
  m.scene = j.value("scene", std::string{});
  m.scene_hash = j.at("scene_hash").get<std::string>();
  m.params = j.at("params");
  m.params_hash = j.at("params_hash").get<std::string>();
  m.report = j.value("report", json::object());
  m.costs = j.value("costs", json::object());
  m.viewshed = j.value("viewshed", json{});
  return m;
}

namespace {

// Write to a sibling temp file, then rename over the target.
void write_atomic(const fs::path& path, const std::string& bytes) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path tmp = path.string() + ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename to '" + path.string() + "': " + ec.message());
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "corrupt store file '" + path.string() + "': " + e.what());
  }
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

} // namespace

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {
  make_dirs(root_ / "scenes");
  make_dirs(root_ / "graphs");
}

fs::path ProjectStore::default_root() {
  if (const char* env = std::getenv("SHAPE_STORE"); env && *env) return env;
  return "shape-store";
}

SceneRecord ProjectStore::put_scene(const std::string& name, const std::string& bytes, const std::string& format,
                                    const json& labels, bool y_up) {
  validate_name(name, "scene");
  // Parse before touching the disk so bad uploads leave no trace.
  MeshLoadOptions options;
  options.y_up = y_up;
  auto meshes = parse_meshes(bytes, format, name, options);
  const Scene scene = build_scene(std::move(meshes), parse_labels(labels));

  SceneRecord record;
  record.name = name;
  record.format = format;
  record.y_up = y_up;
  record.labels = labels;
  record.hash = content_hash(format + '\n' + (y_up ? "y_up\n" : "z_up\n") + labels.dump() + '\n' + bytes);
  record.object_count = scene.objects().size();
  record.walkable_count = scene.walkable_count();
  record.triangle_count = scene.triangle_count();
  record.dropped_degenerate = scene.dropped_degenerate();

  std::lock_guard lock(mutex_);
  const fs::path dir = scene_dir(name);
  if (fs::exists(dir / "scene.json")) {
    const SceneRecord existing = scene_record_from_json(read_json_file(dir / "scene.json"));
    if (existing.hash != record.hash) throw Error(ErrorCode::AlreadyExists, "scene '" + name + "' already exists");
    return existing;
  }
  make_dirs(dir);
  write_atomic(dir / ("mesh." + format), bytes);
  write_atomic(dir / "scene.json", to_json(record).dump(2));
  return record;
}

SceneRecord ProjectStore::scene_record(const std::string& name) const {
  validate_name(name, "scene");
  const fs::path file = scene_dir(name) / "scene.json";
  if (!fs::exists(file)) throw Error(ErrorCode::NotFound, "no scene named '" + name + "'");
  return scene_record_from_json(read_json_file(file));
}

std::vector<SceneRecord> ProjectStore::scenes() const {
  std::vector<SceneRecord> out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_ / "scenes")) {
    if (fs::exists(entry.path() / "scene.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(scene_record_from_json(read_json_file(d / "scene.json")));
  return out;
}

std::shared_ptr<const Scene> ProjectStore::scene(const std::string& name) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = scenes_.find(name); it != scenes_.end()) return it->second;
  }
  const SceneRecord record = scene_record(name);
  MeshLoadOptions options;
  options.y_up = record.y_up;
  auto meshes = parse_meshes(read_file(scene_dir(name) / ("mesh." + record.format)), record.format, name, options);
  auto scene = std::make_shared<const Scene>(build_scene(std::move(meshes), parse_labels(record.labels)));
  std::lock_guard lock(mutex_);
  return scenes_.try_emplace(name, std::move(scene)).first->second;
}

bool ProjectStore::has_graph_id(const std::string& id) const {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos) return false;
  return fs::exists(graph_dir(id) / "meta.json");
}

std::vector<GraphMeta> ProjectStore::graphs() const {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_ / "graphs")) {
    if (fs::exists(entry.path() / "meta.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<GraphMeta> out;
  for (const auto& d : dirs) out.push_back(graph_meta_from_json(read_json_file(d / "meta.json")));
  return out;
}

std::optional<std::string> ProjectStore::find_graph(const std::string& name_or_id) const {
  if (has_graph_id(name_or_id)) return name_or_id;
  for (const auto& meta : graphs()) {
    if (meta.name == name_or_id) return meta.id;
  }
  return std::nullopt;
}

void ProjectStore::check_graph_name(const std::string& name, const std::string& id) const {
  for (const auto& meta : graphs()) {
    if (meta.id != id && (meta.name == name || meta.id == name)) {
      throw Error(ErrorCode::AlreadyExists, "graph name '" + name + "' is taken by " + meta.id);
    }
  }
}

std::shared_ptr<GraphHandle> ProjectStore::put_graph(GraphMeta meta, AccessGraph graph) {
  std::unique_lock lock(mutex_);
  if (has_graph_id(meta.id)) {
    lock.unlock();
    return this->graph(meta.id);
  }
  if (meta.name.empty()) meta.name = meta.id;
  validate_name(meta.name, "graph");
  check_graph_name(meta.name, meta.id);
  auto handle = std::make_shared<GraphHandle>();
  handle->meta = std::move(meta);
  handle->graph = std::move(graph);
  const fs::path dir = graph_dir(handle->meta.id);
  make_dirs(dir);
  write_atomic(dir / "graph.csr", csr_bytes(handle->graph));
  write_atomic(dir / "meta.json", to_json(handle->meta).dump(2));
  graphs_[handle->meta.id] = handle;
  return handle;
}

std::shared_ptr<GraphHandle> ProjectStore::graph(const std::string& name_or_id) {
  const auto id = find_graph(name_or_id);
  if (!id) throw Error(ErrorCode::NotFound, "no graph named '" + name_or_id + "'");
  std::lock_guard lock(mutex_);
  if (auto it = graphs_.find(*id); it != graphs_.end()) return it->second;
  auto handle = std::make_shared<GraphHandle>();
  handle->meta = graph_meta_from_json(read_json_file(graph_dir(*id) / "meta.json"));
  handle->graph = load_csr_binary(graph_dir(*id) / "graph.csr");
  graphs_[*id] = handle;
  return handle;
}

void ProjectStore::save_graph(const GraphHandle& handle) {
  const fs::path dir = graph_dir(handle.meta.id);
  write_atomic(dir / "graph.csr", csr_bytes(handle.graph));
  write_atomic(dir / "meta.json", to_json(handle.meta).dump(2));
}

} // namespace accessgraph::app
