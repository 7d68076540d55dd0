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

#include <map>

#include "bqnn/error.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

namespace {

// f32 parameters per channel carried by the chain that follows `conv`, up to
// the next quantizer, conv or output.
std::int64_t chain_params_per_channel(const Graph& g, const std::string& conv) {
  std::int64_t per_channel = 0;
  std::string cur = conv;
  for (;;) {
    const auto next = g.consumers(cur);
    if (next.size() != 1) break;
    const Node& n = g.node(next[0]);
    if (n.kind == NodeKind::BatchNorm) {
      per_channel += 4;
    } else if (n.kind == NodeKind::Scale || n.kind == NodeKind::Bias) {
      per_channel += 1;
    } else if (n.kind != NodeKind::LeakyRelu && n.kind != NodeKind::MaxPool) {
      break;
    }
    cur = n.id;
  }
  return per_channel;
}

}  // namespace

SizeReport model_size_report(const Graph& original, const LoweredGraph& lowered) {
  const Graph g = prune_weight_quant_subgraph(original);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < lowered.nodes.size(); ++i) position[lowered_id(lowered.nodes[i])] = i;

  SizeReport r;
  for (const auto& id : conv_nodes(g)) {
    const Node& conv = g.node(id);
    const auto it = position.find(id);
    if (it == position.end()) throw Error(ErrorCode::Internal, "conv '" + id + "' is missing from the lowered graph");
    const TensorDesc& w = g.tensor(*conv.weights).desc();
    const std::int64_t od = w.count;
    const std::int64_t params = chain_params_per_channel(g, id);

    LayerSize layer;
    layer.node = id;
    layer.dense_bytes = 4 * (w.elements() + params * od);
    const LoweredNode& ln = lowered.nodes[it->second];
    if (const auto* b = std::get_if<LoweredBinConv>(&ln)) {
      layer.binarized = true;
      layer.packed_bytes = b->weights.bytes();
      const bool thresholded = it->second + 1 < lowered.nodes.size() &&
                               std::holds_alternative<LoweredThreshold>(lowered.nodes[it->second + 1]);
      if (thresholded) {
        layer.packed_bytes += 12 * od;
      } else if (params > 0) {
        layer.packed_bytes += 8 * od;
      }
    } else if (const auto* c = std::get_if<LoweredConvF32>(&ln)) {
      layer.packed_bytes = 4 * c->weights.desc().elements() + (params > 0 ? 8 * od : 0);
    } else {
      throw Error(ErrorCode::Internal, "lowered node '" + id + "' is not a convolution");
    }
    r.dense_total += layer.dense_bytes;
    r.packed_total += layer.packed_bytes;
    r.layers.push_back(layer);
  }
  r.ratio = r.packed_total > 0 ? static_cast<double>(r.dense_total) / static_cast<double>(r.packed_total) : 0.0;
  return r;
}

Json to_json(const SizeReport& r) {
  Json layers = Json::array();
  for (const auto& l : r.layers)
    layers.push_back(
        {{"node", l.node}, {"binarized", l.binarized}, {"dense_bytes", l.dense_bytes}, {"packed_bytes", l.packed_bytes}});
  return Json{{"layers", layers}, {"dense_total", r.dense_total}, {"packed_total", r.packed_total}, {"ratio", r.ratio}};
}

}  // namespace bqnn
