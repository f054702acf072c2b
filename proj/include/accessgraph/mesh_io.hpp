#pragma once

#include <accessgraph/error.hpp>
#include <accessgraph/mesh.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace accessgraph {

struct MeshLoadOptions {
  bool y_up = false; // convert from a +y-up source to +z-up
};

/// (x, y, z) in a +y-up frame maps to (x, -z, y) in the +z-up frame.
inline void convert_y_up(std::vector<TriangleMesh>& meshes) {
  for (auto& mesh : meshes) {
    for (auto& v : mesh.vertices) v = {v.x, -v.z, v.y};
  }
}

namespace detail {

inline long parse_obj_index(const std::string& token, std::size_t vertex_count, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  try {
    idx = std::stol(head);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  if (idx < 0) idx = static_cast<long>(vertex_count) + idx + 1;
  if (idx < 1 || idx > static_cast<long>(vertex_count)) {
    throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": face index out of range");
  }
  return idx - 1;
}

} // namespace detail

/// Wavefront OBJ. Each `o` (or `g` when no `o` is present) starts a new
/// object; polygons are fan-triangulated. Vertex indices are global in OBJ,
/// so every object gets a compacted copy of the vertices it references.
inline std::vector<TriangleMesh> load_obj(std::istream& in, const std::string& default_name = "mesh",
                                          const MeshLoadOptions& options = {}) {
  std::vector<Vec3> positions;
  struct Group {
    std::string name;
    std::vector<std::array<std::uint32_t, 3>> faces; // global indices
  };
  std::vector<Group> groups;
  bool saw_object_statement = false;

  auto current = [&]() -> Group& {
    if (groups.empty()) groups.push_back({default_name, {}});
    return groups.back();
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) {
        throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": bad vertex");
      }
      positions.push_back(p);
    } else if (tag == "o" || tag == "g") {
      if (tag == "g" && saw_object_statement) continue;
      if (tag == "o") saw_object_statement = true;
      std::string name;
      std::getline(ls >> std::ws, name);
      if (name.empty()) name = default_name + "_" + std::to_string(groups.size());
      if (!groups.empty() && groups.back().faces.empty()) {
        groups.back().name = name;
      } else {
        groups.push_back({name, {}});
      }
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ls >> token) {
        poly.push_back(static_cast<std::uint32_t>(detail::parse_obj_index(token, positions.size(), line_no)));
      }
      if (poly.size() < 3) {
        throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": face with < 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        current().faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }

  std::vector<TriangleMesh> meshes;
  for (auto& group : groups) {
    if (group.faces.empty()) continue;
    TriangleMesh mesh;
    mesh.name = group.name;
    std::map<std::uint32_t, std::uint32_t> remap;
    for (const auto& face : group.faces) {
      std::array<std::uint32_t, 3> local{};
      for (int k = 0; k < 3; ++k) {
        auto [it, inserted] = remap.try_emplace(face[k], static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(positions[face[k]]);
        local[k] = it->second;
      }
      mesh.triangles.push_back(local);
    }
    meshes.push_back(std::move(mesh));
  }
  if (meshes.empty()) throw Error(ErrorCode::EmptyScene, "OBJ contains no faces");
  if (options.y_up) convert_y_up(meshes);
  return meshes;
}

inline void write_obj(std::ostream& out, const std::vector<TriangleMesh>& meshes) {
  out << std::setprecision(17);
  std::size_t base = 1;
  for (const auto& mesh : meshes) {
    out << "o " << mesh.name << '\n';
    for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const auto& t : mesh.triangles) {
      out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
    }
    base += mesh.vertices.size();
  }
}

namespace detail {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline PlyType parse_ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  throw Error(ErrorCode::ParseError, "PLY: unknown type '" + name + "'");
}

template <typename T>
T read_le(std::istream& in) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::ParseError, "PLY: unexpected end of data");
  return value;
}

inline double read_ply_scalar(std::istream& in, PlyType type, bool binary) {
  if (!binary) {
    double v = 0.0;
    if (!(in >> v)) throw Error(ErrorCode::ParseError, "PLY: bad ascii value");
    return v;
  }
  switch (type) {
    case PlyType::Int8: return read_le<std::int8_t>(in);
    case PlyType::UInt8: return read_le<std::uint8_t>(in);
    case PlyType::Int16: return read_le<std::int16_t>(in);
    case PlyType::UInt16: return read_le<std::uint16_t>(in);
    case PlyType::Int32: return read_le<std::int32_t>(in);
    case PlyType::UInt32: return read_le<std::uint32_t>(in);
    case PlyType::Float32: return read_le<float>(in);
    case PlyType::Float64: return read_le<double>(in);
  }
  return 0.0;
}

} // namespace detail

/// PLY (binary little-endian or ascii) with a `vertex` element carrying
/// x/y/z and a `face` element carrying a vertex index list. Other elements
/// and properties are skipped. Produces one object.
inline TriangleMesh load_ply(std::istream& in, const std::string& name = "mesh",
                             const MeshLoadOptions& options = {}) {
  using detail::PlyType;
  struct Property {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
  };
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
  };

  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(ErrorCode::ParseError, "PLY: missing magic");
  bool binary = false;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else throw Error(ErrorCode::ParseError, "PLY: unsupported format '" + fmt + "'");
    } else if (word == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw Error(ErrorCode::ParseError, "PLY: property before element");
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = detail::parse_ply_type(count_type);
        p.type = detail::parse_ply_type(item_type);
      } else {
        p.type = detail::parse_ply_type(type);
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }

  TriangleMesh mesh;
  mesh.name = name;
  for (const auto& element : elements) {
    for (std::size_t row = 0; row < element.count; ++row) {
      Vec3 p;
      std::vector<std::uint32_t> poly;
      for (const auto& prop : element.properties) {
        if (prop.is_list) {
          const auto n = static_cast<std::size_t>(detail::read_ply_scalar(in, prop.count_type, binary));
          for (std::size_t k = 0; k < n; ++k) {
            const double v = detail::read_ply_scalar(in, prop.type, binary);
            if (element.name == "face" && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
              if (v < 0) throw Error(ErrorCode::ParseError, "PLY: negative face index");
              poly.push_back(static_cast<std::uint32_t>(v));
            }
          }
        } else {
          const double v = detail::read_ply_scalar(in, prop.type, binary);
          if (element.name == "vertex") {
            if (prop.name == "x") p.x = v;
            else if (prop.name == "y") p.y = v;
            else if (prop.name == "z") p.z = v;
          }
        }
      }
      if (element.name == "vertex") mesh.vertices.push_back(p);
      if (element.name == "face") {
        if (poly.size() < 3) throw Error(ErrorCode::ParseError, "PLY: face with < 3 vertices");
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyScene, "PLY contains no faces");
  for (const auto& t : mesh.triangles) {
    for (std::uint32_t i : t) {
      if (i >= mesh.vertices.size()) throw Error(ErrorCode::ParseError, "PLY: face index out of range");
    }
  }
  if (options.y_up) {
    std::vector<TriangleMesh> one{std::move(mesh)};
    convert_y_up(one);
    mesh = std::move(one.front());
  }
  return mesh;
}

/// Writes a binary little-endian PLY with float64 positions and int32 faces.
inline void write_ply_binary(std::ostream& out, const TriangleMesh& mesh) {
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) {
    for (double c : {v.x, v.y, v.z}) out.write(reinterpret_cast<const char*>(&c), sizeof c);
  }
  for (const auto& t : mesh.triangles) {
    const std::uint8_t n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    for (std::uint32_t i : t) {
      const auto idx = static_cast<std::int32_t>(i);
      out.write(reinterpret_cast<const char*>(&idx), sizeof idx);
    }
  }
}

/// Sidecar label map: {"object_name": "walkable" | "obstacle" | "surface-class:<name>"}.
inline SurfaceLabels parse_labels(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "labels must be a JSON object");
  SurfaceLabels labels;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_string()) throw Error(ErrorCode::ParseError, "label for '" + name + "' must be a string");
    labels[name] = SurfaceTag::parse(value.get<std::string>());
  }
  return labels;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SurfaceLabels load_labels(const std::filesystem::path& path) {
  try {
    return parse_labels(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "labels '" + path.string() + "': " + e.what());
  }
}

/// Parses mesh bytes; `format` is "obj" or "ply".
inline std::vector<TriangleMesh> parse_meshes(const std::string& bytes, const std::string& format,
                                              const std::string& name, const MeshLoadOptions& options = {}) {
  std::istringstream in(bytes, std::ios::binary);
  if (format == "obj") return load_obj(in, name, options);
  if (format == "ply") return {load_ply(in, name, options)};
  throw Error(ErrorCode::InvalidArgument, "unsupported mesh format '" + format + "'");
}

inline std::string mesh_format_of(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return "obj";
  if (ext == ".ply") return "ply";
  throw Error(ErrorCode::InvalidArgument, "unsupported mesh extension '" + ext + "'");
}

inline std::vector<TriangleMesh> load_meshes(const std::filesystem::path& path, const MeshLoadOptions& options = {}) {
  return parse_meshes(read_file(path), mesh_format_of(path), path.stem().string(), options);
}

} // namespace accessgraph
