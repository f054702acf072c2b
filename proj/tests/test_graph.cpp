#include <accessgraph/error.hpp>
#include <accessgraph/graph.hpp>
#include <accessgraph/graph_io.hpp>
#include <accessgraph/json_io.hpp>
#include <accessgraph/json_schema.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

using namespace accessgraph;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

WeightVector weight(double d, ConnectionType t = ConnectionType::Direct) {
  WeightVector w;
  w.distance = d;
  w.step = t;
  return w;
}

// Random finalized graph with every factor, an extra and a node attribute.
AccessGraph random_graph(std::uint64_t seed, std::uint32_t n, std::uint32_t max_degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10, 10), pos(0.01, 3);
  AccessGraph g;
  for (std::uint32_t v = 0; v < n; ++v) {
    g.add_vertex({static_cast<std::int32_t>(v % 37) - 18, static_cast<std::int32_t>(v / 37), static_cast<std::int32_t>(v % 3)},
                 {u(rng), u(rng), u(rng)});
  }
  std::uniform_int_distribution<std::uint32_t> pick(0, n - 1), degree(0, max_degree), type(0, 3);
  for (VertexId v = 0; v < n; ++v) {
    std::set<VertexId> children;
    const auto k = degree(rng);
    while (children.size() < k) children.insert(pick(rng));
    for (VertexId c : children) {
      WeightVector w{pos(rng), u(rng), pos(rng), pos(rng), static_cast<ConnectionType>(type(rng)), {}};
      if (c % 2 == 0) w.extras["lighting"] = u(rng);
      g.add_edge(v, c, w);
    }
  }
  std::vector<double> attr(n);
  for (auto& a : attr) a = u(rng);
  g.set_node_attr("view_max", attr);
  finalize_csr(g);
  return g;
}

} // namespace

TEST(NodeKey, OrderingIsLexicographic) {
  EXPECT_LT((NodeKey{0, 5, 9}), (NodeKey{1, -3, 0}));
  EXPECT_LT((NodeKey{1, -3, 0}), (NodeKey{1, -2, 0}));
  EXPECT_LT((NodeKey{1, -2, 0}), (NodeKey{1, -2, 1}));
  EXPECT_NE(NodeKeyHash{}({1, 2, 3}), NodeKeyHash{}({3, 2, 1}));
}

TEST(ConnectionType, StringsRoundTrip) {
  for (auto t : {ConnectionType::Direct, ConnectionType::Over, ConnectionType::Up, ConnectionType::Down}) {
    EXPECT_EQ(connection_type_from_string(to_string(t)), t);
  }
  EXPECT_EQ(code_of([] { connection_type_from_string("INVALID"); }), ErrorCode::ParseError);
  EXPECT_TRUE(is_step(ConnectionType::Over));
  EXPECT_FALSE(is_step(ConnectionType::Direct));
}

TEST(AccessGraph, DuplicatesAreRejected) {
  AccessGraph g;
  const auto a = g.add_vertex({0, 0, 0}, {0, 0, 0});
  const auto b = g.add_vertex({1, 0, 0}, {1, 0, 0});
  EXPECT_EQ(code_of([&] { g.add_vertex({1, 0, 0}, {5, 5, 5}); }), ErrorCode::AlreadyExists);
  g.add_edge(a, b, weight(1));
  EXPECT_EQ(code_of([&] { g.add_edge(a, b, weight(2)); }), ErrorCode::DuplicateEdge);
  g.add_edge(b, a, weight(1));
  EXPECT_EQ(code_of([&] { g.add_edge(a, 7, weight(1)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { g.add_edge(b, b, weight(1, ConnectionType::Invalid)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(g.edge_count(), 2u);
}

// A parent with three children, one of which leads on to a fourth vertex:
// v1 -> {v2, v3, v4}, v4 -> v5.
TEST(AccessGraph, ParentChildSetsAndSubgraphs) {
  AccessGraph g;
  std::vector<VertexId> v;
  for (int k = 0; k < 5; ++k) v.push_back(g.add_vertex({k, 0, 0}, {double(k), 0, 0}));
  g.add_edge(v[0], v[1], weight(1));
  g.add_edge(v[0], v[2], weight(2, ConnectionType::Up));
  g.add_edge(v[0], v[3], weight(3));
  g.add_edge(v[3], v[4], weight(1));
  EXPECT_EQ(g.out_degree(v[0]), 3u);
  EXPECT_EQ(g.out(v[0]), (std::vector<VertexId>{v[1], v[2], v[3]}));
  EXPECT_EQ(g.parents(), (std::vector<VertexId>{v[0], v[3]}));
  EXPECT_FALSE(g.is_parent(v[4]));

  const auto sub = g.out_subgraph(v[0]);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub[1].child, v[2]);
  EXPECT_EQ(sub[1].weights.step, ConnectionType::Up);

  finalize_csr(g);
  EXPECT_EQ(g.out_degree(v[0]), 3u);
  EXPECT_EQ(g.out(v[0]), (std::vector<VertexId>{v[1], v[2], v[3]}));
  EXPECT_EQ(g.out_subgraph(v[0])[1].weights, sub[1].weights);
  EXPECT_EQ(g.parents(), (std::vector<VertexId>{v[0], v[3]}));
  EXPECT_EQ(code_of([&] { g.out_subgraph(9); }), ErrorCode::InvalidArgument);
}

TEST(AccessGraph, FinalizeIsIdempotentAndFreezesTopology) {
  AccessGraph g;
  EXPECT_EQ(code_of([&] { g.csr(); }), ErrorCode::InvalidArgument);
  const auto a = g.add_vertex({0, 0, 0}, {0, 0, 0});
  const auto b = g.add_vertex({0, 1, 0}, {0, 1, 0});
  auto w = weight(1);
  w.extras["noise"] = 4.0;
  g.add_edge(a, b, w);
  g.add_edge(b, a, weight(1));
  finalize_csr(g);
  const Csr first = g.csr();
  finalize_csr(g);
  EXPECT_EQ(g.csr(), first);
  EXPECT_EQ(first.offsets, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(first.extras.at("noise"), (std::vector<double>{4.0, 0.0}));
  EXPECT_EQ(code_of([&] { g.add_edge(a, b, weight(1)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { g.add_vertex({5, 5, 0}, {}); }), ErrorCode::InvalidArgument);
}

TEST(AccessGraph, FindOrAddMergesWithinTolerance) {
  AccessGraph g;
  const auto [a, new_a] = g.find_or_add(2, 3, {0, 0, 1.0}, 0.125);
  EXPECT_TRUE(new_a);
  const auto [b, new_b] = g.find_or_add(2, 3, {0, 0, 1.1}, 0.125);
  EXPECT_FALSE(new_b);
  EXPECT_EQ(a, b);
  const auto [c, new_c] = g.find_or_add(2, 3, {0, 0, 3.0}, 0.125);
  EXPECT_TRUE(new_c);
  EXPECT_EQ(g.key(c), (NodeKey{2, 3, 1}));
  // The closer of two levels wins.
  const auto [d, new_d] = g.find_or_add(2, 3, {0, 0, 2.95}, 0.125);
  EXPECT_FALSE(new_d);
  EXPECT_EQ(d, c);
}

TEST(AccessGraph, NodeAttributes) {
  AccessGraph g;
  g.add_vertex({0, 0, 0}, {});
  g.set_node_attr("light", {0.5});
  g.add_vertex({1, 0, 0}, {});
  EXPECT_EQ(g.node_attr("light"), (std::vector<double>{0.5, 0.0}));
  EXPECT_EQ(code_of([&] { g.node_attr("sound"); }), ErrorCode::MissingAttribute);
  EXPECT_EQ(code_of([&] { g.set_node_attr("sound", {1.0}); }), ErrorCode::InvalidArgument);
}

TEST(BinaryCsr, RoundTripIsByteIdentical) {
  const AccessGraph g = random_graph(99, 500, 8);
  const std::string bytes = csr_bytes(g);
  std::istringstream in(bytes);
  const AccessGraph back = read_csr_binary(in);
  EXPECT_EQ(back.csr(), g.csr());
  EXPECT_EQ(back.node_attrs(), g.node_attrs());
  EXPECT_TRUE(std::equal(back.keys().begin(), back.keys().end(), g.keys().begin(), g.keys().end()));
  EXPECT_EQ(csr_bytes(back), bytes);
}

TEST(BinaryCsr, FileRoundTrip) {
  const AccessGraph g = random_graph(3, 60, 4);
  const auto path = std::filesystem::temp_directory_path() / "accessgraph_roundtrip.csr";
  save_csr_binary(path, g);
  EXPECT_EQ(csr_bytes(load_csr_binary(path)), csr_bytes(g));
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { load_csr_binary(path); }), ErrorCode::NotFound);
}

TEST(BinaryCsr, CorruptInputIsRejected) {
  const std::string bytes = csr_bytes(random_graph(5, 40, 4));
  auto parse = [](std::string b) {
    std::istringstream in(b);
    read_csr_binary(in);
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { parse(bad_magic); }), ErrorCode::ParseError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_EQ(code_of([&] { parse(bad_version); }), ErrorCode::ParseError);
  for (std::size_t cut : {std::size_t{10}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(code_of([&] { parse(bytes.substr(0, cut)); }), ErrorCode::ParseError) << cut;
  }
  std::string huge = bytes;
  const std::uint64_t m = std::uint64_t{1} << 36;
  std::memcpy(huge.data() + 24, &m, sizeof m);
  EXPECT_EQ(code_of([&] { parse(huge); }), ErrorCode::ParseError);
}

TEST(GraphFromCsr, ValidatesArrays) {
  Csr csr;
  csr.offsets = {0, 1, 2};
  csr.columns = {1, 5};
  csr.distance = csr.slope = csr.cross_slope = csr.energy = {1, 1};
  csr.step = {ConnectionType::Direct, ConnectionType::Direct};
  const std::vector<NodeKey> keys{{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3> points(2);
  EXPECT_EQ(code_of([&] { graph_from_csr(keys, points, csr, {}); }), ErrorCode::ParseError);
  csr.columns = {1, 0};
  EXPECT_NO_THROW(graph_from_csr(keys, points, csr, {}));
  csr.offsets = {0, 2, 2};
  csr.columns = {1, 1};
  EXPECT_EQ(code_of([&] { graph_from_csr(keys, points, csr, {}); }), ErrorCode::DuplicateEdge);
  csr.columns = {1, 0};
  csr.step[0] = ConnectionType::Invalid;
  EXPECT_EQ(code_of([&] { graph_from_csr(keys, points, csr, {}); }), ErrorCode::ParseError);
}

TEST(GraphJson, RoundTripAndPaging) {
  const AccessGraph g = random_graph(17, 120, 5);
  const auto doc = graph_to_json(g);
  const AccessGraph back = graph_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(csr_bytes(back), csr_bytes(g));

  const auto page = graph_to_json(g, 100, 50);
  EXPECT_EQ(page.at("vertices").size(), 20u);
  EXPECT_EQ(page.at("offset"), 100);
  EXPECT_EQ(page.at("vertex_count"), 120);
  std::size_t expected_edges = 0;
  for (VertexId v = 100; v < 120; ++v) expected_edges += g.out_degree(v);
  EXPECT_EQ(page.at("edges").size(), expected_edges);
  EXPECT_EQ(code_of([&] { graph_from_json(page); }), ErrorCode::ParseError);
  EXPECT_EQ(graph_to_json(g, 500, 10).at("vertices").size(), 0u);
}

TEST(GraphJson, ValidatesAgainstSchema) {
  std::ifstream in(std::string(ACCESSGRAPH_SCHEMA_DIR) + "/graph.schema.json");
  ASSERT_TRUE(in);
  const SchemaValidator validator(nlohmann::json::parse(in));
  auto doc = graph_to_json(random_graph(23, 80, 6));
  EXPECT_TRUE(validator.validate(doc).empty());

  auto broken = doc;
  broken["edges"][0]["step"] = "JUMP";
  EXPECT_FALSE(validator.validate(broken).empty());
  broken = doc;
  broken["vertices"][0].erase("point");
  EXPECT_FALSE(validator.validate(broken).empty());
  broken = doc;
  broken["surprise"] = 1;
  EXPECT_FALSE(validator.validate(broken).empty());
  broken = doc;
  broken["edges"][0]["distance"] = 0.0;
  EXPECT_FALSE(validator.validate(broken).empty());
  broken = doc;
  broken["vertices"][0]["key"] = {1, 2};
  EXPECT_FALSE(validator.validate(broken).empty());
}
