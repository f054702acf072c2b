#pragma once

#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace accessgraph {

// Binary CSR file, all integers and floats little-endian:
//
//   char[8]  magic "AGCSRBIN"
//   u32      version (1)
//   u32      reserved (0)
//   u64      vertex_count V
//   u64      edge_count E
//   u32      edge_factor_count F   (5 fixed factors, then extras by name)
//   u32      node_attr_count A
//   V x { i32 i, i32 j, i32 level, f64 x, f64 y, f64 z }
//   u64[V+1] row offsets
//   u32[E]   column indices
//   F x { u32 name_length, name bytes, f64[E] values }
//   A x { u32 name_length, name bytes, f64[V] values }
//
// The fixed factors are distance, slope, cross_slope, energy and step, the
// last holding the connection type code (0 DIRECT, 1 OVER, 2 UP, 3 DOWN).

inline constexpr char kCsrMagic[8] = {'A', 'G', 'C', 'S', 'R', 'B', 'I', 'N'};
inline constexpr std::uint32_t kCsrVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary CSR I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& values) {
  if (!values.empty()) out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
}

inline void put_name(std::ostream& out, const std::string& name) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::ParseError, "binary CSR: truncated file");
  return value;
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::uint64_t count) {
  if (count > (std::uint64_t{1} << 40) / sizeof(T)) throw Error(ErrorCode::ParseError, "binary CSR: implausible size");
  // Grow in chunks so a corrupt count fails on truncation, not allocation.
  constexpr std::uint64_t kChunk = std::uint64_t{1} << 20;
  std::vector<T> values;
  while (values.size() < count) {
    const std::size_t done = values.size();
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - done));
    values.resize(done + n);
    in.read(reinterpret_cast<char*>(values.data() + done), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw Error(ErrorCode::ParseError, "binary CSR: truncated array");
  }
  return values;
}

inline std::string get_name(std::istream& in) {
  const auto len = get<std::uint32_t>(in);
  if (len > 4096) throw Error(ErrorCode::ParseError, "binary CSR: name too long");
  std::string name(len, '\0');
  in.read(name.data(), len);
  if (!in) throw Error(ErrorCode::ParseError, "binary CSR: truncated name");
  return name;
}

} // namespace detail

inline void write_csr_binary(std::ostream& out, const AccessGraph& graph) {
  using namespace detail;
  const Csr& csr = graph.csr();
  out.write(kCsrMagic, sizeof kCsrMagic);
  put<std::uint32_t>(out, kCsrVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, graph.vertex_count());
  put<std::uint64_t>(out, csr.edge_count());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(5 + csr.extras.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(graph.node_attrs().size()));
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const NodeKey& k = graph.key(v);
    const Vec3& p = graph.point(v);
    put(out, k.i);
    put(out, k.j);
    put(out, k.level);
    put(out, p.x);
    put(out, p.y);
    put(out, p.z);
  }
  put_array(out, csr.offsets);
  put_array(out, csr.columns);
  std::vector<double> step(csr.step.size());
  for (std::size_t e = 0; e < step.size(); ++e) step[e] = static_cast<double>(csr.step[e]);
  const std::pair<const char*, const std::vector<double>*> fixed[] = {
      {"distance", &csr.distance}, {"slope", &csr.slope}, {"cross_slope", &csr.cross_slope},
      {"energy", &csr.energy}, {"step", &step}};
  for (const auto& [name, values] : fixed) {
    put_name(out, name);
    put_array(out, *values);
  }
  for (const auto& [name, values] : csr.extras) {
    put_name(out, name);
    put_array(out, values);
  }
  for (const auto& [name, values] : graph.node_attrs()) {
    put_name(out, name);
    put_array(out, values);
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing binary CSR");
}

inline AccessGraph read_csr_binary(std::istream& in) {
  using namespace detail;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCsrMagic, sizeof magic) != 0) throw Error(ErrorCode::ParseError, "binary CSR: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kCsrVersion) throw Error(ErrorCode::ParseError, "binary CSR: unsupported version " + std::to_string(version));
  get<std::uint32_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto m = get<std::uint64_t>(in);
  const auto factor_count = get<std::uint32_t>(in);
  const auto attr_count = get<std::uint32_t>(in);
  if (n > std::numeric_limits<VertexId>::max()) throw Error(ErrorCode::ParseError, "binary CSR: too many vertices");
  if (factor_count < 5) throw Error(ErrorCode::ParseError, "binary CSR: missing fixed factors");

  std::vector<NodeKey> keys(n);
  std::vector<Vec3> points(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    keys[v].i = get<std::int32_t>(in);
    keys[v].j = get<std::int32_t>(in);
    keys[v].level = get<std::int32_t>(in);
    points[v].x = get<double>(in);
    points[v].y = get<double>(in);
    points[v].z = get<double>(in);
  }
  Csr csr;
  csr.offsets = get_array<std::uint64_t>(in, n + 1);
  csr.columns = get_array<VertexId>(in, m);
  const char* fixed_names[] = {"distance", "slope", "cross_slope", "energy", "step"};
  std::vector<double> step;
  for (std::uint32_t f = 0; f < factor_count; ++f) {
    const std::string name = get_name(in);
    auto values = get_array<double>(in, m);
    if (f < 5) {
      if (name != fixed_names[f]) throw Error(ErrorCode::ParseError, "binary CSR: unexpected factor '" + name + "'");
      switch (f) {
        case 0: csr.distance = std::move(values); break;
        case 1: csr.slope = std::move(values); break;
        case 2: csr.cross_slope = std::move(values); break;
        case 3: csr.energy = std::move(values); break;
        case 4: step = std::move(values); break;
      }
    } else {
      csr.extras[name] = std::move(values);
    }
  }
  csr.step.reserve(m);
  for (double code : step) {
    if (!(code == 0.0 || code == 1.0 || code == 2.0 || code == 3.0)) {
      throw Error(ErrorCode::ParseError, "binary CSR: invalid connection type code");
    }
    csr.step.push_back(static_cast<ConnectionType>(static_cast<int>(code)));
  }
  std::map<std::string, std::vector<double>> attrs;
  for (std::uint32_t a = 0; a < attr_count; ++a) {
    const std::string name = get_name(in);
    attrs[name] = get_array<double>(in, n);
  }
  return graph_from_csr(std::move(keys), std::move(points), std::move(csr), std::move(attrs));
}

inline std::string csr_bytes(const AccessGraph& graph) {
  std::ostringstream out(std::ios::binary);
  write_csr_binary(out, graph);
  return out.str();
}

inline void save_csr_binary(const std::filesystem::path& path, const AccessGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_csr_binary(out, graph);
}

inline AccessGraph load_csr_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  return read_csr_binary(in);
}

} // namespace accessgraph
