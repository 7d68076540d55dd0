/* Copyright 2026 The bqnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <cstring>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "testing.hpp"

#include "bqnn/fixtures.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/transform.hpp"

using namespace bqnn;

namespace {

Graph minimal_graph() {
  std::mt19937_64 rng(1);
  GraphBuilder b;
  const auto in = b.input(6, 6, 3);
  const auto c = b.conv(in, oracle::random_normals(TensorDesc{3, 3, 3, 8, DType::F32, Layout::HeightInnermost}, rng),
                        1, 1, false);
  b.output(c);
  return b.build();
}

// Splits a container into its JSON document and blob bytes, and back.
struct Container {
  Json doc;
  std::vector<std::uint8_t> blobs;
};

Container split(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t{bytes[6 + i]} << (8 * i);
  Container c;
  c.doc = Json::parse(bytes.begin() + 14, bytes.begin() + 14 + static_cast<std::ptrdiff_t>(len));
  c.blobs.assign(bytes.begin() + 14 + static_cast<std::ptrdiff_t>(len), bytes.end());
  return c;
}

std::vector<std::uint8_t> join(const Container& c) {
  const std::string text = c.doc.dump();
  std::vector<std::uint8_t> out{'B', 'Q', 'N', '1', 1, 0};
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(text.size() >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), c.blobs.begin(), c.blobs.end());
  return out;
}

Json& node_json(Json& doc, const std::string& id) {
  for (auto& n : doc.at("nodes"))
    if (n.at("id") == id) return n;
  throw std::runtime_error("no node " + id);
}

}  // namespace

TEST_CASE("minimal file parses to three nodes and one blob") {
  const Graph g = minimal_graph();
  const auto bytes = serialize_model(g);
  CHECK(std::memcmp(bytes.data(), "BQN1", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  const Graph back = parse_model(bytes);
  CHECK(back.nodes.size() == 3);
  CHECK(back.blobs.size() == 1);
  CHECK(structurally_equal(g, back));
  CHECK(serialize_model(back) == bytes);
}

TEST_CASE("header errors") {
  auto bytes = serialize_model(minimal_graph());
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_ERROR_CODE(parse_model(bad), ErrorCode::BadMagic);
  bad = bytes;
  bad[4] = 2;
  CHECK_ERROR_CODE(parse_model(bad), ErrorCode::VersionUnsupported);
  CHECK_ERROR_CODE(parse_model(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)), ErrorCode::TruncatedBlob);
}

TEST_CASE("blob length must match its desc") {
  const auto bytes = serialize_model(minimal_graph());
  CHECK_ERROR_CODE(parse_model(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 4)), ErrorCode::TruncatedBlob);
  auto longer = bytes;
  longer.push_back(0);
  CHECK_ERROR_CODE(parse_model(longer), ErrorCode::TruncatedBlob);

  Container c = split(bytes);
  c.doc["blobs"][0]["depth"] = 4;
  CHECK_ERROR_CODE(parse_model(join(c)), ErrorCode::TruncatedBlob);
}

TEST_CASE("structural errors name the node") {
  GraphBuilder b;
  const auto in = b.input(2, 2, 2);
  const auto b1 = b.bias(in, {0.0, 0.0});
  const auto b2 = b.bias(b1, {0.0, 0.0});
  b.output(b2);
  const auto bytes = serialize_model(b.build());

  Container c = split(bytes);
  node_json(c.doc, "bias1")["inputs"] = Json::array({"bias2"});
  try {
    parse_model(join(c));
    FAIL("cycle accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CyclicGraph);
    CHECK(std::string(e.what()).find("bias") != std::string::npos);
  }

  c = split(bytes);
  node_json(c.doc, "output1")["inputs"] = Json::array({"nowhere"});
  try {
    parse_model(join(c));
    FAIL("dangling input accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingInput);
    CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
  }
}

TEST_CASE("unknown JSON keys are errors") {
  const auto bytes = serialize_model(minimal_graph());
  Container c = split(bytes);
  c.doc["comment"] = "x";
  CHECK_ERROR_CODE(parse_model(join(c)), ErrorCode::SchemaError);
  c = split(bytes);
  node_json(c.doc, "conv1")["attrs"]["dilation"] = 2;
  CHECK_ERROR_CODE(parse_model(join(c)), ErrorCode::SchemaError);
  c = split(bytes);
  c.doc["blobs"][0]["scale"] = 1.0;
  CHECK_ERROR_CODE(parse_model(join(c)), ErrorCode::SchemaError);
  c = split(bytes);
  node_json(c.doc, "conv1")["attrs"].erase("stride");
  CHECK_ERROR_CODE(parse_model(join(c)), ErrorCode::SchemaError);
}

TEST_CASE("u2 blobs take one byte per element") {
  GraphBuilder b;
  b.output(b.input(2, 2, 2));
  const auto base = serialize_model(b.build()).size();
  std::mt19937_64 rng(4);
  const TensorBlob codes = oracle::random_codes(TensorDesc{2, 3, 5}, rng);
  b.add_blob(codes);
  const Graph g = b.build();
  const auto bytes = serialize_model(g);
  const Container c = split(bytes);
  REQUIRE(c.blobs.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(c.blobs[i] == static_cast<std::uint8_t>(codes.codes()[i]));
  CHECK(bytes.size() > base + 30);
  CHECK(structurally_equal(parse_model(bytes), g));
}

TEST_CASE("bin1 blobs are coded 0x00 and 0x01") {
  GraphBuilder b;
  b.output(b.input(1, 1, 1));
  b.add_blob(TensorBlob(TensorDesc{1, 1, 3, 1, DType::Bin1}, std::vector<std::int8_t>{-1, 1, -1}));
  const Container c = split(serialize_model(b.build()));
  CHECK(c.blobs == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("round-trip identity on 120 random graphs") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const Graph g = random_tiny_graph(seed);
    const auto bytes = serialize_model(g);
    const Graph back = parse_model(bytes);
    REQUIRE(structurally_equal(g, back));
    REQUIRE(back.topo_order == g.topo_order);
    REQUIRE(serialize_model(back) == bytes);
  }
}

TEST_CASE("lowered graphs round-trip with packed blobs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph lowered = lowered_to_graph(lower_graph(random_tiny_graph(seed)));
    CHECK(lowered.lowered);
    const auto bytes = serialize_model(lowered);
    const Graph back = parse_model(bytes);
    REQUIRE(structurally_equal(lowered, back));
    REQUIRE(serialize_model(lowered_to_graph(graph_to_lowered(back))) == bytes);
  }
}

TEST_CASE("darknet-shaped file keeps section order") {
  const Graph g = make_fixture("darknet19_320", 5);
  const Graph back = parse_model(serialize_model(g));
  CHECK(back.topo_order == g.topo_order);
  const auto convs = conv_nodes(back);
  REQUIRE(convs.size() == 19);
  for (std::size_t i = 0; i < convs.size(); ++i) CHECK(convs[i] == "conv" + std::to_string(i + 1));
  int pools = 0, bns = 0;
  for (const auto& [id, n] : back.nodes) {
    pools += n.kind == NodeKind::MaxPool;
    bns += n.kind == NodeKind::BatchNorm;
  }
  CHECK(pools == 5);
  CHECK(bns == 18);
}

TEST_CASE("file I/O") {
  const std::string dir = oracle::scratch_dir("model_ir");
  const Graph g = minimal_graph();
  write_model_file(dir + "/m.bqn", g);
  CHECK(structurally_equal(read_model_file(dir + "/m.bqn"), g));
  CHECK_ERROR_CODE(read_model_file(dir + "/missing.bqn"), ErrorCode::Io);
  std::filesystem::remove_all(dir);
}

TEST_CASE("shape inference walks the chain") {
  const Graph g = make_fixture("toy", 42);
  const ShapeInfo info = infer_shapes(g);
  CHECK(info.diagnostics.empty());
  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    if (n.kind == NodeKind::QuantizeAct) CHECK(info.shapes.at(id).domain == Domain::Codes);
    if (n.kind == NodeKind::Output) CHECK(info.shapes.count(id) == 1);
  }
}
