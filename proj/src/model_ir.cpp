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

#include "bqnn/model_ir.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <queue>
#include <set>

#include "bqnn/error.hpp"

namespace bqnn {

namespace {

constexpr char kMagic[4] = {'B', 'Q', 'N', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 8;

struct KindName {
  NodeKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {NodeKind::Input, "input"},           {NodeKind::QuantizeAct, "quantize_act"}, {NodeKind::MaxPool, "maxpool"},
    {NodeKind::Output, "output"},         {NodeKind::Conv2d, "conv2d"},            {NodeKind::BatchNorm, "batchnorm"},
    {NodeKind::Scale, "scale"},           {NodeKind::Bias, "bias"},                {NodeKind::LeakyRelu, "leaky_relu"},
    {NodeKind::BinarizeW, "binarize_w"},  {NodeKind::ConvF32, "conv_f32"},         {NodeKind::BinConv, "binconv"},
    {NodeKind::Threshold, "threshold"},
};

// Attribute schema ------------------------------------------------------------

enum class AttrType { Int, Number, Bool, String, NumberArray, BoolArray, IntTriples };

struct AttrSpec {
  std::string_view key;
  AttrType type;
  bool required;
};

using Schema = std::vector<AttrSpec>;

const Schema& attr_schema(NodeKind kind, bool lowered) {
  static const Schema kEmpty;
  static const Schema kInput{{"height", AttrType::Int, true}, {"width", AttrType::Int, true}, {"depth", AttrType::Int, true}};
  static const Schema kConv{{"kernel_h", AttrType::Int, true}, {"kernel_w", AttrType::Int, true},
                            {"stride", AttrType::Int, true},   {"pad", AttrType::Int, true},
                            {"out_channels", AttrType::Int, true}, {"binarized", AttrType::Bool, false}};
  static const Schema kBatchNorm{{"gamma", AttrType::NumberArray, true},    {"beta", AttrType::NumberArray, true},
                                 {"mean", AttrType::NumberArray, true},     {"variance", AttrType::NumberArray, true},
                                 {"epsilon", AttrType::Number, true}};
  static const Schema kValues{{"values", AttrType::NumberArray, true}};
  static const Schema kLeaky{{"slope", AttrType::Number, true}};
  static const Schema kQuant{{"step", AttrType::Number, true}};
  static const Schema kPool{{"window", AttrType::Int, true}, {"stride", AttrType::Int, true}};
  // lowered
  static const Schema kLoweredConv{{"kernel_h", AttrType::Int, true},         {"kernel_w", AttrType::Int, true},
                                   {"stride", AttrType::Int, true},           {"pad", AttrType::Int, true},
                                   {"out_channels", AttrType::Int, true},     {"input_step", AttrType::Number, true},
                                   {"epilogue_scale", AttrType::NumberArray, true},
                                   {"epilogue_offset", AttrType::NumberArray, true}};
  static const Schema kLoweredQuant{{"step", AttrType::Number, true},
                                    {"scale", AttrType::NumberArray, true},
                                    {"offset", AttrType::NumberArray, true},
                                    {"leaky_slope", AttrType::Number, false},
                                    {"origin", AttrType::String, false}};
  static const Schema kThreshold{{"cut_points", AttrType::IntTriples, true},
                                 {"increasing", AttrType::BoolArray, true},
                                 {"step", AttrType::Number, true},
                                 {"origin", AttrType::String, false}};
  static const Schema kLoweredPool{{"window", AttrType::Int, true}, {"stride", AttrType::Int, true},
                                   {"origin", AttrType::String, false}};

  switch (kind) {
    case NodeKind::Input: return kInput;
    case NodeKind::Output: return kEmpty;
    case NodeKind::QuantizeAct: return lowered ? kLoweredQuant : kQuant;
    case NodeKind::MaxPool: return lowered ? kLoweredPool : kPool;
    case NodeKind::Conv2d: return kConv;
    case NodeKind::BatchNorm: return kBatchNorm;
    case NodeKind::Scale:
    case NodeKind::Bias: return kValues;
    case NodeKind::LeakyRelu: return kLeaky;
    case NodeKind::BinarizeW: return kEmpty;
    case NodeKind::ConvF32:
    case NodeKind::BinConv: return kLoweredConv;
    case NodeKind::Threshold: return kThreshold;
  }
  return kEmpty;
}

bool kind_allowed(NodeKind kind, bool lowered) {
  switch (kind) {
    case NodeKind::Input:
    case NodeKind::QuantizeAct:
    case NodeKind::MaxPool:
    case NodeKind::Output: return true;
    case NodeKind::ConvF32:
    case NodeKind::BinConv:
    case NodeKind::Threshold: return lowered;
    default: return !lowered;
  }
}

bool type_matches(const Json& v, AttrType type) {
  switch (type) {
    case AttrType::Int: return v.is_number_integer();
    case AttrType::Number: return v.is_number();
    case AttrType::Bool: return v.is_boolean();
    case AttrType::String: return v.is_string();
    case AttrType::NumberArray:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
    case AttrType::BoolArray:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_boolean(); });
    case AttrType::IntTriples:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) {
               return e.is_array() && e.size() == 3 &&
                      std::all_of(e.begin(), e.end(), [](const Json& x) { return x.is_number_integer(); });
             });
  }
  return false;
}

void check_attrs(const Node& n, bool lowered) {
  if (!kind_allowed(n.kind, lowered))
    throw Error(ErrorCode::SchemaError, "node '" + n.id + "': kind " + std::string(to_string(n.kind)) +
                                            (lowered ? " not allowed in a lowered graph" : " requires a lowered graph"));
  if (!n.attrs.is_object()) throw Error(ErrorCode::SchemaError, "node '" + n.id + "': attrs must be an object");
  const Schema& schema = attr_schema(n.kind, lowered);
  for (auto it = n.attrs.begin(); it != n.attrs.end(); ++it) {
    auto spec = std::find_if(schema.begin(), schema.end(), [&](const AttrSpec& s) { return s.key == it.key(); });
    if (spec == schema.end()) throw Error(ErrorCode::SchemaError, "node '" + n.id + "': unknown attr '" + it.key() + "'");
    if (!type_matches(it.value(), spec->type))
      throw Error(ErrorCode::SchemaError, "node '" + n.id + "': attr '" + it.key() + "' has the wrong type");
  }
  for (const auto& spec : schema)
    if (spec.required && !n.attrs.contains(std::string(spec.key)))
      throw Error(ErrorCode::SchemaError, "node '" + n.id + "': missing attr '" + std::string(spec.key) + "'");
}

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::SchemaError, where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw Error(ErrorCode::SchemaError, where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T required(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorCode::SchemaError, where + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaError, where + ": key '" + key + "' has the wrong type");
  }
}

// Little-endian byte I/O --------------------------------------------------------

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::int64_t payload_bytes(const TensorDesc& desc, bool packed) {
  if (packed) {
    const std::int64_t wpd = (desc.depth + kWordBits - 1) / kWordBits;
    return plane_count(desc.dtype) * 4 * desc.count * desc.height * desc.width * wpd;
  }
  switch (desc.dtype) {
    case DType::F32:
    case DType::I32: return 4 * desc.elements();
    case DType::U2:
    case DType::Bin1: return desc.elements();
  }
  return 0;
}

Json desc_json(const TensorDesc& d, bool packed, std::int64_t bytes) {
  return Json{{"height", d.height}, {"width", d.width},   {"depth", d.depth},   {"count", d.count},
              {"dtype", std::string(to_string(d.dtype))}, {"layout", std::string(to_string(d.layout))},
              {"packed", packed},   {"bytes", bytes}};
}

void encode_blob(std::vector<std::uint8_t>& out, const Blob& blob) {
  if (const auto* p = std::get_if<PackedTensor>(&blob)) {
    for (const auto& plane : p->planes)
      for (auto w : plane) put_u32(out, w);
    return;
  }
  const auto& t = std::get<TensorBlob>(blob);
  switch (t.desc().dtype) {
    case DType::F32:
      for (float v : t.f32()) put_u32(out, std::bit_cast<std::uint32_t>(v));
      break;
    case DType::I32:
      for (auto v : t.i32()) put_u32(out, static_cast<std::uint32_t>(v));
      break;
    case DType::U2:
      for (auto v : t.codes()) out.push_back(static_cast<std::uint8_t>(v));
      break;
    case DType::Bin1:
      for (auto v : t.codes()) out.push_back(v > 0 ? 0x01 : 0x00);
      break;
  }
}

Blob decode_blob(const TensorDesc& desc, bool packed, const std::uint8_t* p, std::size_t index) {
  const auto n = static_cast<std::size_t>(desc.elements());
  if (packed) {
    PackedTensor t;
    t.desc = desc;
    const auto words = static_cast<std::size_t>(t.words_per_plane());
    t.planes.resize(static_cast<std::size_t>(plane_count(desc.dtype)));
    for (auto& plane : t.planes) {
      plane.resize(words);
      for (auto& w : plane) {
        w = get_u32(p);
        p += 4;
      }
    }
    check_packed(t);
    return t;
  }
  switch (desc.dtype) {
    case DType::F32: {
      std::vector<float> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = std::bit_cast<float>(get_u32(p + 4 * i));
      return TensorBlob(desc, std::move(v));
    }
    case DType::I32: {
      std::vector<std::int32_t> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::int32_t>(get_u32(p + 4 * i));
      return TensorBlob(desc, std::move(v));
    }
    case DType::U2: {
      std::vector<std::int8_t> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 3) throw Error(ErrorCode::SchemaError, "blob " + std::to_string(index) + ": u2 byte out of range");
        v[i] = static_cast<std::int8_t>(p[i]);
      }
      return TensorBlob(desc, std::move(v));
    }
    case DType::Bin1: {
      std::vector<std::int8_t> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 1) throw Error(ErrorCode::SchemaError, "blob " + std::to_string(index) + ": bin1 byte must be 0 or 1");
        v[i] = p[i] ? 1 : -1;
      }
      return TensorBlob(desc, std::move(v));
    }
  }
  throw Error(ErrorCode::Internal, "unreachable dtype");
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "?";
}

NodeKind node_kind_from_string(std::string_view s) {
  for (const auto& k : kKindNames)
    if (k.name == s) return k.kind;
  throw Error(ErrorCode::SchemaError, "unknown node kind '" + std::string(s) + "'");
}

const Node& Graph::node(const std::string& id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::DanglingInput, "no node with id '" + id + "'");
  return it->second;
}

Node& Graph::node(const std::string& id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::DanglingInput, "no node with id '" + id + "'");
  return it->second;
}

std::vector<std::string> Graph::consumers(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& n : topo_order) {
    const auto& ins = node(n).inputs;
    if (std::find(ins.begin(), ins.end(), id) != ins.end()) out.push_back(n);
  }
  return out;
}

const TensorBlob& Graph::tensor(std::size_t blob) const {
  if (blob >= blobs.size()) throw Error(ErrorCode::DanglingInput, "blob index " + std::to_string(blob) + " out of range");
  if (const auto* t = std::get_if<TensorBlob>(&blobs[blob])) return *t;
  throw Error(ErrorCode::WrongDtype, "blob " + std::to_string(blob) + " is packed");
}

const PackedTensor& Graph::packed(std::size_t blob) const {
  if (blob >= blobs.size()) throw Error(ErrorCode::DanglingInput, "blob index " + std::to_string(blob) + " out of range");
  if (const auto* t = std::get_if<PackedTensor>(&blobs[blob])) return *t;
  throw Error(ErrorCode::WrongDtype, "blob " + std::to_string(blob) + " is not packed");
}

bool structurally_equal(const Graph& a, const Graph& b) {
  if (a.lowered != b.lowered || a.topo_order != b.topo_order || a.nodes != b.nodes) return false;
  if (a.blobs.size() != b.blobs.size()) return false;
  for (std::size_t i = 0; i < a.blobs.size(); ++i) {
    if (a.blobs[i].index() != b.blobs[i].index()) return false;
    if (const auto* t = std::get_if<TensorBlob>(&a.blobs[i])) {
      if (!t->identical(std::get<TensorBlob>(b.blobs[i]))) return false;
    } else if (!(std::get<PackedTensor>(a.blobs[i]) == std::get<PackedTensor>(b.blobs[i]))) {
      return false;
    }
  }
  return true;
}

void finalize_graph(Graph& g, std::span<const std::string> order_hint) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order_hint.size(); ++i) rank.emplace(order_hint[i], i);
  std::size_t next_rank = order_hint.size();
  for (const auto& [id, n] : g.nodes)
    if (!rank.count(id)) rank.emplace(id, next_rank++);

  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> out_edges;
  for (const auto& [id, n] : g.nodes) {
    if (n.id != id) throw Error(ErrorCode::SchemaError, "node key '" + id + "' does not match id '" + n.id + "'");
    indegree[id];
    for (const auto& in : n.inputs) {
      if (!g.nodes.count(in)) throw Error(ErrorCode::DanglingInput, "node '" + id + "' reads unknown node '" + in + "'");
      ++indegree[id];
      out_edges[in].push_back(id);
    }
    if (n.weights && *n.weights >= g.blobs.size())
      throw Error(ErrorCode::DanglingInput, "node '" + id + "' references missing blob " + std::to_string(*n.weights));
  }

  using Entry = std::pair<std::size_t, std::string>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.emplace(rank[id], id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto [r, id] = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& next : out_edges[id])
      if (--indegree[next] == 0) ready.emplace(rank[next], next);
  }
  if (order.size() != g.nodes.size()) {
    for (const auto& [id, deg] : indegree)
      if (deg > 0) throw Error(ErrorCode::CyclicGraph, "cycle through node '" + id + "'");
  }
  g.topo_order = std::move(order);

  std::vector<std::string> inputs, outputs;
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Input) inputs.push_back(id);
    if (n.kind == NodeKind::Output) outputs.push_back(id);
    if (n.kind == NodeKind::Input && !n.inputs.empty())
      throw Error(ErrorCode::SchemaError, "input node '" + id + "' must not have inputs");
  }
  if (inputs.size() != 1 || outputs.size() != 1)
    throw Error(ErrorCode::SchemaError, "graph needs exactly one input and one output node (found " +
                                            std::to_string(inputs.size()) + " and " + std::to_string(outputs.size()) + ")");

  std::set<std::string> reached{inputs[0]};
  std::vector<std::string> stack{inputs[0]};
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    for (const auto& next : out_edges[id])
      if (reached.insert(next).second) stack.push_back(next);
  }
  for (const auto& [id, n] : g.nodes)
    if (n.kind != NodeKind::BinarizeW && !reached.count(id))
      throw Error(ErrorCode::SchemaError, "node '" + id + "' is not reachable from the input");
}

Graph parse_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::BadMagic, "expected magic 'BQN1' at offset 0");
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::TruncatedBlob, "header truncated at offset " + std::to_string(bytes.size()));
  const std::uint16_t version = get_u16(bytes.data() + 4);
  if (version != kVersion)
    throw Error(ErrorCode::VersionUnsupported, "container version " + std::to_string(version) + " at offset 4");
  const std::uint64_t json_len = get_u64(bytes.data() + 6);
  if (json_len > bytes.size() - kHeaderBytes)
    throw Error(ErrorCode::TruncatedBlob, "graph JSON of " + std::to_string(json_len) + " bytes at offset 14 exceeds file");

  Json doc;
  try {
    doc = Json::parse(bytes.begin() + kHeaderBytes, bytes.begin() + kHeaderBytes + static_cast<std::ptrdiff_t>(json_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("graph JSON: ") + e.what());
  }
  check_keys(doc, {"lowered", "nodes", "blobs"}, "graph");

  Graph g;
  g.lowered = doc.contains("lowered") ? required<bool>(doc, "lowered", "graph") : false;

  const Json blobs = doc.contains("blobs") ? doc.at("blobs") : Json::array();
  if (!blobs.is_array()) throw Error(ErrorCode::SchemaError, "graph: 'blobs' must be an array");
  std::size_t offset = kHeaderBytes + static_cast<std::size_t>(json_len);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const std::string where = "blob " + std::to_string(i);
    const Json& b = blobs[i];
    check_keys(b, {"height", "width", "depth", "count", "dtype", "layout", "packed", "bytes"}, where);
    TensorDesc desc;
    desc.height = required<std::int64_t>(b, "height", where);
    desc.width = required<std::int64_t>(b, "width", where);
    desc.depth = required<std::int64_t>(b, "depth", where);
    desc.count = b.contains("count") ? required<std::int64_t>(b, "count", where) : 1;
    desc.dtype = dtype_from_string(required<std::string>(b, "dtype", where));
    desc.layout = layout_from_string(required<std::string>(b, "layout", where));
    const bool packed = b.contains("packed") ? required<bool>(b, "packed", where) : false;
    check_desc(desc);
    const std::int64_t expected = payload_bytes(desc, packed);
    const auto declared = required<std::int64_t>(b, "bytes", where);
    if (declared != expected)
      throw Error(ErrorCode::TruncatedBlob, where + " declares " + std::to_string(declared) + " bytes but its desc implies " +
                                                std::to_string(expected));
    if (static_cast<std::uint64_t>(expected) > bytes.size() - offset)
      throw Error(ErrorCode::TruncatedBlob, where + " at offset " + std::to_string(offset) + " runs past end of file");
    g.blobs.push_back(decode_blob(desc, packed, bytes.data() + offset, i));
    offset += static_cast<std::size_t>(expected);
  }
  if (offset != bytes.size())
    throw Error(ErrorCode::TruncatedBlob, std::to_string(bytes.size() - offset) + " trailing bytes at offset " + std::to_string(offset));

  const Json nodes = doc.contains("nodes") ? doc.at("nodes") : Json::array();
  if (!nodes.is_array()) throw Error(ErrorCode::SchemaError, "graph: 'nodes' must be an array");
  std::vector<std::string> file_order;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& j = nodes[i];
    std::string where = "node #" + std::to_string(i);
    check_keys(j, {"id", "kind", "inputs", "attrs", "weights"}, where);
    Node n;
    n.id = required<std::string>(j, "id", where);
    where = "node '" + n.id + "'";
    n.kind = node_kind_from_string(required<std::string>(j, "kind", where));
    if (j.contains("inputs")) n.inputs = required<std::vector<std::string>>(j, "inputs", where);
    if (j.contains("attrs")) n.attrs = j.at("attrs");
    if (j.contains("weights")) n.weights = required<std::size_t>(j, "weights", where);
    check_attrs(n, g.lowered);
    if (g.nodes.count(n.id)) throw Error(ErrorCode::SchemaError, "duplicate node id '" + n.id + "'");
    file_order.push_back(n.id);
    g.nodes.emplace(n.id, std::move(n));
  }
  finalize_graph(g, file_order);
  return g;
}

std::vector<std::uint8_t> serialize_model(const Graph& g) {
  Json doc;
  doc["lowered"] = g.lowered;
  Json nodes = Json::array();
  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    Json j{{"id", n.id}, {"kind", std::string(to_string(n.kind))}, {"inputs", n.inputs}, {"attrs", n.attrs}};
    if (n.weights) j["weights"] = *n.weights;
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  Json blobs = Json::array();
  for (const auto& blob : g.blobs) {
    if (const auto* p = std::get_if<PackedTensor>(&blob)) {
      blobs.push_back(desc_json(p->desc, true, payload_bytes(p->desc, true)));
    } else {
      const auto& t = std::get<TensorBlob>(blob);
      blobs.push_back(desc_json(t.desc(), false, payload_bytes(t.desc(), false)));
    }
  }
  doc["blobs"] = std::move(blobs);

  const std::string text = doc.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u16(out, kVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& blob : g.blobs) encode_blob(out, blob);
  return out;
}

Graph read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model(bytes);
}

void write_model_file(const std::string& path, const Graph& g) {
  const auto bytes = serialize_model(g);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path + "'");
}

}  // namespace bqnn
