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

#ifndef BQNN_MODEL_IR_HPP_
#define BQNN_MODEL_IR_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bqnn/layout_pack.hpp"
#include "bqnn/tensor.hpp"

namespace bqnn {

using Json = nlohmann::json;

enum class NodeKind {
  // shared
  Input,
  QuantizeAct,
  MaxPool,
  Output,
  // trained graph only
  Conv2d,
  BatchNorm,
  Scale,
  Bias,
  LeakyRelu,
  BinarizeW,
  // lowered graph only
  ConvF32,
  BinConv,
  Threshold,
};

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view s);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Input;
  // Kind-specific attributes; see docs/container.md for the per-kind schema.
  Json attrs = Json::object();
  std::vector<std::string> inputs;
  std::optional<std::size_t> weights;  // index into Graph::blobs

  bool operator==(const Node&) const = default;
};

using Blob = std::variant<TensorBlob, PackedTensor>;

struct Graph {
  std::map<std::string, Node> nodes;
  std::vector<std::string> topo_order;
  std::vector<Blob> blobs;
  bool lowered = false;

  const Node& node(const std::string& id) const;
  Node& node(const std::string& id);
  // Ids of nodes that list `id` among their inputs, in topological order.
  std::vector<std::string> consumers(const std::string& id) const;
  const TensorBlob& tensor(std::size_t blob) const;
  const PackedTensor& packed(std::size_t blob) const;
};

// Structural equality: same nodes, topo order and byte-identical blobs.
bool structurally_equal(const Graph& a, const Graph& b);

// Recomputes topo_order (Kahn's algorithm, ties broken by `order_hint`) and
// checks the graph-level invariants: resolvable inputs, acyclic, exactly one
// input and one output, everything reachable from the input. Weight-marker
// nodes are constant sources and exempt from reachability.
void finalize_graph(Graph& g, std::span<const std::string> order_hint);

// Container file. Layout (little-endian):
//   "BQN1" | u16 version=1 | u64 json length | graph JSON | blobs in index order
Graph parse_model(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_model(const Graph& g);

Graph read_model_file(const std::string& path);
void write_model_file(const std::string& path, const Graph& g);

// Shape and value-domain inference ---------------------------------------------

enum class Domain { Real, Codes, Accumulator };

struct NodeShape {
  TensorDesc desc;
  Domain domain = Domain::Real;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string node;
  std::string rule;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& d);
std::string format_diagnostic(const Diagnostic& d);

// Output shape of every node reachable from the input, plus any structural
// problems found on the way.
struct ShapeInfo {
  std::map<std::string, NodeShape> shapes;
  Diagnostics diagnostics;
};

ShapeInfo infer_shapes(const Graph& g);

// True when the conv carries a weight-binarization marker (or has been tagged by pruning).
bool is_binarized_conv(const Graph& g, const Node& conv);

// Convolutions in topological order.
std::vector<std::string> conv_nodes(const Graph& g);

Diagnostics validate_graph(const Graph& g);

// Model size -------------------------------------------------------------------

struct LoweredGraph;

struct LayerSize {
  std::string node;
  bool binarized = false;
  std::int64_t dense_bytes = 0;
  std::int64_t packed_bytes = 0;
};

struct SizeReport {
  std::vector<LayerSize> layers;
  std::int64_t dense_total = 0;
  std::int64_t packed_total = 0;
  double ratio = 0.0;
};

// dense_bytes: conv weights plus the per-channel parameters of the chain that
// follows the conv, all at f32. packed_bytes: packed weight words, threshold
// vectors (3 x i32 per channel), f32 weights of unquantized layers, and folded
// (scale, offset) pairs at f32 where a chain was folded into an f32 epilogue.
SizeReport model_size_report(const Graph& g, const LoweredGraph& lowered);

Json to_json(const SizeReport& r);

}  // namespace bqnn

#endif  // BQNN_MODEL_IR_HPP_
