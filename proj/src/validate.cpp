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

#include <algorithm>
#include <cmath>

#include "bqnn/error.hpp"
#include "bqnn/model_ir.hpp"

namespace bqnn {

namespace {

class ShapeWalker {
 public:
  explicit ShapeWalker(const Graph& g) : g_(g) {}

  ShapeInfo run() {
    if (g_.lowered) {
      error("", "already-lowered", "graph is already lowered");
      return std::move(info_);
    }
    for (const auto& id : g_.topo_order) visit(g_.node(id));
    return std::move(info_);
  }

 private:
  void error(const std::string& node, const std::string& rule, const std::string& msg) {
    info_.diagnostics.push_back({Severity::Error, node, rule, msg});
  }

  const NodeShape* input_shape(const Node& n) {
    if (n.inputs.empty()) {
      error(n.id, "arity", std::string(to_string(n.kind)) + " needs an input");
      return nullptr;
    }
    auto it = info_.shapes.find(n.inputs[0]);
    return it == info_.shapes.end() ? nullptr : &it->second;
  }

  bool check_arity(const Node& n, std::size_t expected) {
    if (n.inputs.size() == expected) return true;
    error(n.id, "arity", std::string(to_string(n.kind)) + " takes " + std::to_string(expected) + " input(s), has " +
                             std::to_string(n.inputs.size()));
    return false;
  }

  void check_channels(const Node& n, const char* key, std::int64_t depth) {
    const auto& v = n.attrs.at(key);
    if (static_cast<std::int64_t>(v.size()) != depth)
      error(n.id, "channel-count", std::string(key) + " has " + std::to_string(v.size()) + " entries for " +
                                       std::to_string(depth) + " channels");
    for (const auto& x : v)
      if (!std::isfinite(x.get<double>())) error(n.id, "non-finite", std::string(key) + " contains a non-finite value");
  }

  void affine_like(const Node& n, const NodeShape& in) {
    if (in.domain == Domain::Codes) {
      error(n.id, "affine-on-codes", std::string(to_string(n.kind)) + " cannot act on quantized codes");
      return;
    }
    NodeShape out{in.desc, Domain::Real};
    out.desc.dtype = DType::F32;
    info_.shapes[n.id] = out;
  }

  void visit(const Node& n) {
    switch (n.kind) {
      case NodeKind::Input: {
        TensorDesc d;
        d.height = n.attrs.at("height").get<std::int64_t>();
        d.width = n.attrs.at("width").get<std::int64_t>();
        d.depth = n.attrs.at("depth").get<std::int64_t>();
        if (d.height < 1 || d.width < 1 || d.depth < 1) {
          error(n.id, "shape", "input dims must be >= 1");
          return;
        }
        info_.shapes[n.id] = {d, Domain::Real};
        return;
      }
      case NodeKind::BinarizeW: {
        if (!n.inputs.empty() || !n.weights) {
          error(n.id, "marker-edge", "binarize_w must wrap a weight blob and read no activations");
          return;
        }
        for (const auto& c : g_.consumers(n.id)) {
          const Node& cn = g_.node(c);
          if (cn.kind != NodeKind::Conv2d || cn.inputs.size() != 2 || cn.inputs[1] != n.id || cn.inputs[0] == n.id)
            error(n.id, "marker-edge", "binarize_w feeds '" + c + "' on a non-weight edge");
        }
        return;
      }
      case NodeKind::Conv2d: return conv(n);
      case NodeKind::BatchNorm: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        for (const char* k : {"gamma", "beta", "mean", "variance"}) check_channels(n, k, in->desc.depth);
        const double eps = n.attrs.at("epsilon").get<double>();
        for (const auto& v : n.attrs.at("variance"))
          if (!(v.get<double>() + eps > 0.0)) error(n.id, "variance", "variance + epsilon must be positive");
        return affine_like(n, *in);
      }
      case NodeKind::Scale:
      case NodeKind::Bias: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        check_channels(n, "values", in->desc.depth);
        return affine_like(n, *in);
      }
      case NodeKind::LeakyRelu: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        const double slope = n.attrs.at("slope").get<double>();
        if (!(slope > 0.0) || !std::isfinite(slope))
          error(n.id, "non-monotone-activation", "leaky_relu slope must be positive");
        return affine_like(n, *in);
      }
      case NodeKind::QuantizeAct: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        const double step = n.attrs.at("step").get<double>();
        if (!(step > 0.0) || !std::isfinite(step)) error(n.id, "step", "quantize_act step must be positive and finite");
        if (in->domain == Domain::Codes) {
          error(n.id, "double-quantize", "input is already quantized");
          return;
        }
        NodeShape out{in->desc, Domain::Codes};
        out.desc.dtype = DType::U2;
        info_.shapes[n.id] = out;
        return;
      }
      case NodeKind::MaxPool: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        const auto window = n.attrs.at("window").get<std::int64_t>();
        const auto stride = n.attrs.at("stride").get<std::int64_t>();
        if (window < 1 || stride < 1 || window > in->desc.height || window > in->desc.width) {
          error(n.id, "pool-shape", "maxpool window/stride invalid for input " + std::to_string(in->desc.height) + "x" +
                                        std::to_string(in->desc.width));
          return;
        }
        NodeShape out = *in;
        out.desc.height = (in->desc.height - window) / stride + 1;
        out.desc.width = (in->desc.width - window) / stride + 1;
        if (out.domain == Domain::Accumulator) {
          out.domain = Domain::Real;
          out.desc.dtype = DType::F32;
        }
        info_.shapes[n.id] = out;
        return;
      }
      case NodeKind::Output: {
        if (!check_arity(n, 1)) return;
        const NodeShape* in = input_shape(n);
        if (!in) return;
        NodeShape out = *in;
        if (out.domain == Domain::Accumulator) {
          out.domain = Domain::Real;
          out.desc.dtype = DType::F32;
        }
        info_.shapes[n.id] = out;
        return;
      }
      default:
        error(n.id, "lowered-kind", std::string(to_string(n.kind)) + " belongs to lowered graphs");
        return;
    }
  }

  void conv(const Node& n) {
    if (n.inputs.empty() || n.inputs.size() > 2) {
      error(n.id, "arity", "conv2d takes an activation input and an optional weight marker");
      return;
    }
    const NodeShape* in = input_shape(n);
    std::optional<std::size_t> blob = n.weights;
    if (n.inputs.size() == 2) {
      const Node& marker = g_.node(n.inputs[1]);
      if (marker.kind != NodeKind::BinarizeW) {
        error(n.id, "marker-edge", "second conv input must be a binarize_w marker");
        return;
      }
      if (!blob) blob = marker.weights;
    }
    if (!in) return;
    const auto kh = n.attrs.at("kernel_h").get<std::int64_t>();
    const auto kw = n.attrs.at("kernel_w").get<std::int64_t>();
    const auto stride = n.attrs.at("stride").get<std::int64_t>();
    const auto pad = n.attrs.at("pad").get<std::int64_t>();
    const auto od = n.attrs.at("out_channels").get<std::int64_t>();
    bool ok = true;
    if (kh < 1 || kw < 1 || od < 1) {
      error(n.id, "shape", "kernel dims and out_channels must be >= 1");
      ok = false;
    }
    if (stride < 1) {
      error(n.id, "stride", "stride must be >= 1");
      ok = false;
    }
    if (pad != 0 && pad != (kw - 1) / 2) {
      error(n.id, "pad", "pad must be 0 or (kernel_w-1)/2");
      ok = false;
    }
    if (!blob || *blob >= g_.blobs.size() || !std::holds_alternative<TensorBlob>(g_.blobs[*blob])) {
      error(n.id, "weights", "conv2d has no dense weight blob");
      return;
    }
    const TensorDesc& w = g_.tensor(*blob).desc();
    if (w.height != kh || w.width != kw || w.count != od) {
      error(n.id, "weights", "weight blob shape does not match kernel attrs");
      ok = false;
    }
    if (w.depth != in->desc.depth) {
      error(n.id, "kernel-depth", "kernel depth " + std::to_string(w.depth) + " != input depth " +
                                      std::to_string(in->desc.depth));
      ok = false;
    }
    if (w.dtype != DType::F32) {
      error(n.id, "weights", "trained weights must be f32");
      ok = false;
    }
    const bool binarized = is_binarized_conv(g_, n);
    if (binarized && in->domain != Domain::Codes) {
      error(n.id, "binconv-input", "binarized conv must read quantized activations");
      ok = false;
    }
    if (in->domain == Domain::Accumulator) {
      error(n.id, "conv-input", "conv reads raw accumulators of another conv");
      ok = false;
    }
    if (!ok) return;
    const ConvGeometry geom{kh, kw, stride, pad};
    NodeShape out;
    out.desc.height = geom.out_height(in->desc.height);
    out.desc.width = geom.out_width(in->desc.width);
    out.desc.depth = od;
    if (out.desc.height < 1 || out.desc.width < 1) {
      error(n.id, "shape", "kernel larger than padded input");
      return;
    }
    out.desc.dtype = binarized ? DType::I32 : DType::F32;
    out.domain = binarized ? Domain::Accumulator : Domain::Real;
    info_.shapes[n.id] = out;
  }

  const Graph& g_;
  ShapeInfo info_;
};

}  // namespace

bool has_errors(const Diagnostics& d) {
  return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == Severity::Error; });
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string s = d.severity == Severity::Error ? "error" : "warning";
  s += " [" + d.rule + "]";
  if (!d.node.empty()) s += " node '" + d.node + "'";
  return s + ": " + d.message;
}

ShapeInfo infer_shapes(const Graph& g) { return ShapeWalker(g).run(); }

bool is_binarized_conv(const Graph& g, const Node& conv) {
  if (conv.kind == NodeKind::BinConv) return true;
  if (conv.kind != NodeKind::Conv2d) return false;
  if (conv.attrs.value("binarized", false)) return true;
  return conv.inputs.size() == 2 && g.nodes.count(conv.inputs[1]) && g.node(conv.inputs[1]).kind == NodeKind::BinarizeW;
}

std::vector<std::string> conv_nodes(const Graph& g) {
  std::vector<std::string> out;
  for (const auto& id : g.topo_order) {
    const auto k = g.node(id).kind;
    if (k == NodeKind::Conv2d || k == NodeKind::ConvF32 || k == NodeKind::BinConv) out.push_back(id);
  }
  return out;
}

Diagnostics validate_graph(const Graph& g) {
  ShapeInfo info = infer_shapes(g);
  Diagnostics diags = std::move(info.diagnostics);
  if (g.lowered) return diags;

  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    if (n.kind == NodeKind::BinarizeW || n.kind == NodeKind::Output) continue;
    const auto consumers = g.consumers(id);
    if (consumers.size() > 1)
      diags.push_back({Severity::Error, id, "branching",
                       "output feeds " + std::to_string(consumers.size()) + " nodes; only linear pipelines are lowered"});
  }

  const auto convs = conv_nodes(g);
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const Node& n = g.node(convs[i]);
    const bool edge = i == 0 || i + 1 == convs.size();
    const bool binarized = is_binarized_conv(g, n);
    if (!binarized) {
      if (!edge)
        diags.push_back({Severity::Warning, n.id, "missing-weight-marker",
                         "interior conv has no binarize_w marker and stays f32"});
      continue;
    }
    if (edge) continue;  // first and last layers stay unquantized
    auto shape = info.shapes.find(n.id);
    auto in_shape = n.inputs.empty() ? info.shapes.end() : info.shapes.find(n.inputs[0]);
    if (shape == info.shapes.end() || in_shape == info.shapes.end()) continue;
    const std::int64_t od = shape->second.desc.depth;
    const std::int64_t id_ = in_shape->second.desc.depth;
    if (od % 8 != 0)
      diags.push_back({Severity::Error, n.id, "od-multiple-of-8",
                       "output feature maps (" + std::to_string(od) + ") must be a multiple of 8"});
    if (id_ % 16 != 0)
      diags.push_back({Severity::Error, n.id, "id-multiple-of-16",
                       "input feature maps (" + std::to_string(id_) + ") must be a multiple of 16"});
  }
  return diags;
}

}  // namespace bqnn
