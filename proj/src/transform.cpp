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

#include "bqnn/transform.hpp"

#include <algorithm>
#include <limits>

#include "bqnn/error.hpp"

namespace bqnn {

const std::string& lowered_id(const LoweredNode& n) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, n);
}

Graph prune_weight_quant_subgraph(const Graph& g) {
  if (g.lowered) throw Error(ErrorCode::AlreadyLowered, "graph is already lowered");
  Graph out = g;
  std::vector<std::string> markers;
  for (const auto& id : g.topo_order)
    if (g.node(id).kind == NodeKind::BinarizeW) markers.push_back(id);

  for (const auto& id : markers) {
    const Node& marker = g.node(id);
    if (!marker.inputs.empty())
      throw Error(ErrorCode::MarkerOnNonWeightEdge, "binarize_w '" + id + "' is applied to activation '" + marker.inputs[0] + "'");
    if (!marker.weights) throw Error(ErrorCode::MarkerOnNonWeightEdge, "binarize_w '" + id + "' wraps no weight blob");
    for (const auto& c : g.consumers(id)) {
      Node& conv = out.node(c);
      if (conv.kind != NodeKind::Conv2d || conv.inputs.size() != 2 || conv.inputs[0] == id || conv.inputs[1] != id)
        throw Error(ErrorCode::MarkerOnNonWeightEdge, "binarize_w '" + id + "' feeds '" + c + "' on a non-weight edge");
      conv.inputs.resize(1);
      conv.weights = marker.weights;
      conv.attrs["binarized"] = true;
    }
    out.nodes.erase(id);
  }
  if (markers.empty()) return out;
  std::vector<std::string> hint;
  for (const auto& id : g.topo_order)
    if (out.nodes.count(id)) hint.push_back(id);
  finalize_graph(out, hint);
  return out;
}

TensorBlob binarize_weights(const TensorBlob& w) {
  if (w.desc().dtype != DType::F32) throw Error(ErrorCode::WrongDtype, "binarize_weights expects f32 weights");
  TensorDesc desc = w.desc();
  desc.dtype = DType::Bin1;
  std::vector<std::int8_t> bits(w.f32().size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const float v = w.f32()[i];
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteWeight, "weight element " + std::to_string(i) + " is not finite");
    bits[i] = v >= 0.0f ? 1 : -1;
  }
  return TensorBlob(desc, std::move(bits));
}

namespace {

std::vector<double> channel_vector(const Node& n, const char* key, std::int64_t channels) {
  auto v = n.attrs.at(key).get<std::vector<double>>();
  if (static_cast<std::int64_t>(v.size()) != channels)
    throw Error(ErrorCode::ChannelMismatch, "node '" + n.id + "': " + key + " has " + std::to_string(v.size()) +
                                                " entries for " + std::to_string(channels) + " channels");
  return v;
}

}  // namespace

AffineFold fold_affine_chain(const std::vector<Node>& chain, std::int64_t channels) {
  const auto n = static_cast<std::size_t>(channels);
  AffineFold a{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
  for (const Node& node : chain) {
    switch (node.kind) {
      case NodeKind::BatchNorm: {
        const auto gamma = channel_vector(node, "gamma", channels);
        const auto beta = channel_vector(node, "beta", channels);
        const auto mean = channel_vector(node, "mean", channels);
        const auto var = channel_vector(node, "variance", channels);
        const double eps = node.attrs.at("epsilon").get<double>();
        for (std::size_t c = 0; c < n; ++c) {
          const double k = gamma[c] / std::sqrt(var[c] + eps);
          a.scale[c] = k * a.scale[c];
          a.offset[c] = k * a.offset[c] + (beta[c] - k * mean[c]);
        }
        break;
      }
      case NodeKind::Scale: {
        const auto v = channel_vector(node, "values", channels);
        for (std::size_t c = 0; c < n; ++c) {
          a.scale[c] *= v[c];
          a.offset[c] *= v[c];
        }
        break;
      }
      case NodeKind::Bias: {
        const auto v = channel_vector(node, "values", channels);
        for (std::size_t c = 0; c < n; ++c) a.offset[c] += v[c];
        break;
      }
      default:
        throw Error(ErrorCode::NonAffineNodeInChain,
                    "node '" + node.id + "' (" + std::string(to_string(node.kind)) + ") is not a per-channel affine op");
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (a.scale[c] == 0.0 || !std::isfinite(a.scale[c]) || !std::isfinite(a.offset[c]))
      throw Error(ErrorCode::ZeroScaleChannel, "folded scale of channel " + std::to_string(c) + " is zero or non-finite");
  }
  return a;
}

ThresholdUnit affine_to_thresholds(const AffineFold& a, double step, std::optional<double> leaky_slope,
                                   std::int64_t acc_bound) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::UnfoldableSubgraph, "quantizer step must be positive");
  if (leaky_slope && !(*leaky_slope > 0.0))
    throw Error(ErrorCode::NonMonotoneActivation, "leaky_relu slope " + std::to_string(*leaky_slope) + " is not positive");
  if (acc_bound < 0 || acc_bound > (std::int64_t{1} << 30))
    throw Error(ErrorCode::Overflow, "accumulator bound " + std::to_string(acc_bound) + " exceeds the i32 threshold domain");

  const std::int64_t lo = -acc_bound - 1;
  const std::int64_t hi = acc_bound + 1;
  ThresholdUnit unit;
  unit.cut_points.resize(a.channels());
  unit.direction.resize(a.channels());

  for (std::size_t c = 0; c < a.channels(); ++c) {
    const double s = a.scale[c];
    const double b = a.offset[c];
    if (s == 0.0 || !std::isfinite(s)) throw Error(ErrorCode::ZeroScaleChannel, "channel " + std::to_string(c) + " has zero scale");
    // Real pipeline the cut-points must reproduce.
    auto code_of = [&](std::int64_t y) {
      double r = s * static_cast<double>(y) + b;
      if (leaky_slope) r = leaky_relu(r, *leaky_slope);
      return quantize_real(r, step);
    };
    const bool increasing = s > 0.0;
    unit.direction[c] = increasing ? Direction::Increasing : Direction::Decreasing;
    for (int j = 1; j <= 3; ++j) {
      const double cut = (j - 0.5) * step;
      // Pre-activation value at which the crossing happens, on the linear piece it lies on.
      const double target = (leaky_slope && cut < 0.0) ? cut / *leaky_slope : cut;
      const double exact = (target - b) / s;
      const double guess = increasing ? std::ceil(exact) : std::floor(exact);
      std::int64_t t = static_cast<std::int64_t>(std::clamp(guess, static_cast<double>(lo), static_cast<double>(hi)));
      auto reaches = [&](std::int64_t y) { return code_of(y) >= j; };
      // Settle on the exact boundary of the floating-point pipeline.
      if (increasing) {
        while (t > lo && reaches(t - 1)) --t;
        while (t < hi && !reaches(t)) ++t;
      } else {
        while (t < hi && reaches(t + 1)) ++t;
        while (t > lo && !reaches(t)) --t;
      }
      unit.cut_points[c][static_cast<std::size_t>(j - 1)] = static_cast<std::int32_t>(t);
    }
  }
  return unit;
}

namespace {

std::int64_t attr_int(const Node& n, const char* key) { return n.attrs.at(key).get<std::int64_t>(); }

ConvGeometry conv_geometry(const Node& n) {
  return {attr_int(n, "kernel_h"), attr_int(n, "kernel_w"), attr_int(n, "stride"), attr_int(n, "pad")};
}

TensorBlob depth_innermost(const TensorBlob& t) {
  return t.desc().layout == Layout::DepthInnermost ? t : to_depth_innermost(t);
}

AffineFold scaled(AffineFold a, double factor) {
  for (auto& s : a.scale) s *= factor;
  return a;
}

// The per-channel ops gathered between a conv (or the input) and the next
// quantizer / output, split into their foldable parts.
struct Chain {
  std::vector<Node> affine;
  std::optional<double> leaky;
  const Node* pool = nullptr;
};

Chain split_chain(const std::vector<const Node*>& pending, const std::string& end) {
  Chain c;
  for (const Node* n : pending) {
    const bool after_leaky = c.leaky.has_value();
    if (c.pool)
      throw Error(ErrorCode::UnfoldableSubgraph,
                  "'" + n->id + "' follows maxpool '" + c.pool->id + "' before '" + end + "'; pooling must come last");
    switch (n->kind) {
      case NodeKind::BatchNorm:
      case NodeKind::Scale:
      case NodeKind::Bias:
        if (after_leaky)
          throw Error(ErrorCode::UnfoldableSubgraph, "affine node '" + n->id + "' after leaky_relu cannot be folded");
        c.affine.push_back(*n);
        break;
      case NodeKind::LeakyRelu: {
        if (after_leaky) throw Error(ErrorCode::UnfoldableSubgraph, "two activations before '" + end + "'");
        const double slope = n->attrs.at("slope").get<double>();
        if (!(slope > 0.0)) throw Error(ErrorCode::NonMonotoneActivation, "leaky_relu '" + n->id + "' slope must be positive");
        c.leaky = slope;
        break;
      }
      case NodeKind::MaxPool:
        c.pool = n;
        break;
      default:
        throw Error(ErrorCode::UnfoldableSubgraph, "node '" + n->id + "' cannot be folded");
    }
  }
  return c;
}

enum class State { Image, AfterConvF32, AfterBinConv, Codes };

}  // namespace

LoweredGraph lower_graph(const Graph& input_graph) {
  if (input_graph.lowered) throw Error(ErrorCode::AlreadyLowered, "graph is already lowered; refusing to lower twice");
  const Graph g = prune_weight_quant_subgraph(input_graph);
  const Diagnostics diags = validate_graph(g);
  for (const auto& d : diags)
    if (d.severity == Severity::Error) throw Error(ErrorCode::ValidationFailed, format_diagnostic(d));
  const ShapeInfo info = infer_shapes(g);
  auto shape_of = [&](const std::string& id) -> const TensorDesc& { return info.shapes.at(id).desc; };

  LoweredGraph lg;
  State state = State::Image;
  double step = 0.0;          // real step of the current codes
  double binconv_step = 0.0;  // input step of the pending binconv
  std::vector<const Node*> pending;
  std::size_t last_conv = 0;

  auto pool_node = [&](const Node& pool, const std::string& origin, Domain domain) {
    LoweredMaxPool p;
    p.id = pool.id;
    p.origin = origin;
    p.input = shape_of(pool.inputs[0]);
    p.output = shape_of(pool.id);
    p.window = attr_int(pool, "window");
    p.stride = attr_int(pool, "stride");
    p.domain = domain;
    if (domain == Domain::Codes) {
      p.input.dtype = p.output.dtype = DType::U2;
    } else {
      p.input.dtype = p.output.dtype = DType::F32;
    }
    return p;
  };

  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    switch (n.kind) {
      case NodeKind::Input:
        lg.input_id = n.id;
        lg.input = shape_of(n.id);
        break;

      case NodeKind::Conv2d: {
        if (!pending.empty())
          throw Error(ErrorCode::UnfoldableSubgraph,
                      "chain ending at '" + pending.back()->id + "' feeds conv '" + n.id + "' without a quantizer");
        const ConvGeometry geom = conv_geometry(n);
        const TensorDesc& in = shape_of(n.inputs[0]);
        const TensorBlob& w = g.tensor(*n.weights);
        if (is_binarized_conv(g, n)) {
          if (state != State::Codes)
            throw Error(ErrorCode::UnfoldableSubgraph, "binarized conv '" + n.id + "' does not read quantized codes");
          const std::int64_t bound = 3 * geom.kernel_h * geom.kernel_w * in.depth;
          if (bound > (std::int64_t{1} << 30))
            throw Error(ErrorCode::Overflow, "accumulator range of '" + n.id + "' does not fit i32 thresholds");
          LoweredBinConv b;
          b.id = n.id;
          b.input = in;
          b.input.dtype = DType::U2;
          b.input.layout = Layout::DepthInnermost;
          b.output = shape_of(n.id);
          b.output.layout = Layout::DepthInnermost;
          b.geom = geom;
          b.weights = bitpack(depth_innermost(binarize_weights(w)));
          b.input_step = step;
          binconv_step = step;
          lg.nodes.emplace_back(std::move(b));
          state = State::AfterBinConv;
        } else {
          LoweredConvF32 c;
          c.id = n.id;
          c.input = in;
          c.input.layout = Layout::DepthInnermost;
          c.output = shape_of(n.id);
          c.output.layout = Layout::DepthInnermost;
          c.geom = geom;
          c.weights = depth_innermost(w);
          c.input_step = state == State::Codes ? step : 0.0;
          lg.nodes.emplace_back(std::move(c));
          state = State::AfterConvF32;
        }
        last_conv = lg.nodes.size() - 1;
        break;
      }

      case NodeKind::BatchNorm:
      case NodeKind::Scale:
      case NodeKind::Bias:
      case NodeKind::LeakyRelu:
        if (state == State::Codes)
          throw Error(ErrorCode::UnfoldableSubgraph, "'" + n.id + "' acts on quantized codes");
        pending.push_back(&n);
        break;

      case NodeKind::MaxPool:
        if (state == State::Codes) {
          lg.nodes.emplace_back(pool_node(n, n.id, Domain::Codes));
        } else {
          pending.push_back(&n);
        }
        break;

      case NodeKind::QuantizeAct: {
        const Chain chain = split_chain(pending, n.id);
        pending.clear();
        // Dims before any pooling in the chain.
        const TensorDesc pre = chain.pool ? shape_of(chain.pool->inputs[0]) : shape_of(n.inputs[0]);
        const AffineFold a = fold_affine_chain(chain.affine, pre.depth);
        const double q_step = n.attrs.at("step").get<double>();
        const std::string origin = chain.pool ? std::string() : n.id;
        TensorDesc codes = pre;
        codes.dtype = DType::U2;
        codes.layout = Layout::DepthInnermost;
        if (state == State::AfterBinConv) {
          const auto& conv = std::get<LoweredBinConv>(lg.nodes[last_conv]);
          const std::int64_t bound = 3 * conv.geom.kernel_h * conv.geom.kernel_w * conv.input.depth;
          LoweredThreshold t;
          t.id = n.id;
          t.origin = origin;
          t.desc = codes;
          t.unit = affine_to_thresholds(scaled(a, binconv_step), q_step, chain.leaky, bound);
          t.step = q_step;
          lg.nodes.emplace_back(std::move(t));
        } else if (state == State::AfterConvF32 || state == State::Image) {
          LoweredQuantize q;
          q.id = n.id;
          q.origin = origin;
          q.desc = codes;
          q.affine = a;
          q.leaky_slope = chain.leaky;
          q.step = q_step;
          lg.nodes.emplace_back(std::move(q));
        } else {
          throw Error(ErrorCode::UnfoldableSubgraph, "quantize_act '" + n.id + "' reads codes");
        }
        if (chain.pool) lg.nodes.emplace_back(pool_node(*chain.pool, n.id, Domain::Codes));
        state = State::Codes;
        step = q_step;
        break;
      }

      case NodeKind::Output: {
        LoweredOutput out;
        out.id = n.id;
        out.desc = shape_of(n.id);
        out.desc.layout = Layout::DepthInnermost;
        if (state == State::Codes) {
          if (!pending.empty()) throw Error(ErrorCode::UnfoldableSubgraph, "unquantized chain before output");
          out.domain = Domain::Codes;
          out.step = step;
        } else {
          const Chain chain = split_chain(pending, n.id);
          if (chain.leaky) throw Error(ErrorCode::UnfoldableSubgraph, "activation after the final conv is not supported");
          pending.clear();
          if (state == State::Image && !chain.affine.empty())
            throw Error(ErrorCode::UnfoldableSubgraph, "affine ops on the raw input are not supported");
          if (state == State::AfterBinConv) {
            auto& conv = std::get<LoweredBinConv>(lg.nodes[last_conv]);
            conv.epilogue = scaled(fold_affine_chain(chain.affine, conv.output.depth), binconv_step);
          } else if (state == State::AfterConvF32 && !chain.affine.empty()) {
            auto& conv = std::get<LoweredConvF32>(lg.nodes[last_conv]);
            conv.epilogue = fold_affine_chain(chain.affine, conv.output.depth);
          }
          if (chain.pool) lg.nodes.emplace_back(pool_node(*chain.pool, chain.pool->id, Domain::Real));
          out.domain = Domain::Real;
          out.desc.dtype = DType::F32;
        }
        lg.nodes.emplace_back(std::move(out));
        break;
      }

      default:
        throw Error(ErrorCode::UnfoldableSubgraph, "unexpected node '" + n.id + "' of kind " + std::string(to_string(n.kind)));
    }
  }
  return lg;
}

namespace {

Json fold_scale_json(const AffineFold& a) { return Json(a.scale); }
Json fold_offset_json(const AffineFold& a) { return Json(a.offset); }

AffineFold fold_from_json(const Node& n, const char* scale_key, const char* offset_key, std::int64_t channels) {
  AffineFold a{n.attrs.at(scale_key).get<std::vector<double>>(), n.attrs.at(offset_key).get<std::vector<double>>()};
  if (a.scale.size() != a.offset.size() ||
      (!a.scale.empty() && static_cast<std::int64_t>(a.scale.size()) != channels))
    throw Error(ErrorCode::ChannelMismatch, "node '" + n.id + "': folded affine has the wrong channel count");
  return a;
}

Json conv_attrs(const ConvGeometry& geom, std::int64_t out_channels, double input_step, const AffineFold& epilogue) {
  return Json{{"kernel_h", geom.kernel_h},
              {"kernel_w", geom.kernel_w},
              {"stride", geom.stride},
              {"pad", geom.pad},
              {"out_channels", out_channels},
              {"input_step", input_step},
              {"epilogue_scale", fold_scale_json(epilogue)},
              {"epilogue_offset", fold_offset_json(epilogue)}};
}

}  // namespace

Graph lowered_to_graph(const LoweredGraph& lg) {
  Graph g;
  g.lowered = true;
  std::vector<std::string> order;
  auto add = [&](Node n) {
    if (!order.empty()) n.inputs = {order.back()};
    order.push_back(n.id);
    if (!g.nodes.emplace(n.id, std::move(n)).second) throw Error(ErrorCode::SchemaError, "duplicate node id '" + order.back() + "'");
  };
  add(Node{lg.input_id, NodeKind::Input, Json{{"height", lg.input.height}, {"width", lg.input.width}, {"depth", lg.input.depth}}, {}, {}});
  for (const auto& ln : lg.nodes) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          Node n;
          n.id = x.id;
          if constexpr (std::is_same_v<T, LoweredConvF32>) {
            n.kind = NodeKind::ConvF32;
            n.attrs = conv_attrs(x.geom, x.output.depth, x.input_step, x.epilogue);
            n.weights = g.blobs.size();
            g.blobs.emplace_back(x.weights);
          } else if constexpr (std::is_same_v<T, LoweredBinConv>) {
            n.kind = NodeKind::BinConv;
            n.attrs = conv_attrs(x.geom, x.output.depth, x.input_step, x.epilogue);
            n.weights = g.blobs.size();
            g.blobs.emplace_back(x.weights);
          } else if constexpr (std::is_same_v<T, LoweredQuantize>) {
            n.kind = NodeKind::QuantizeAct;
            n.attrs = Json{{"step", x.step}, {"scale", fold_scale_json(x.affine)}, {"offset", fold_offset_json(x.affine)}};
            if (x.leaky_slope) n.attrs["leaky_slope"] = *x.leaky_slope;
            if (!x.origin.empty()) n.attrs["origin"] = x.origin;
          } else if constexpr (std::is_same_v<T, LoweredThreshold>) {
            n.kind = NodeKind::Threshold;
            Json cuts = Json::array();
            Json inc = Json::array();
            for (std::size_t c = 0; c < x.unit.channels(); ++c) {
              cuts.push_back(x.unit.cut_points[c]);
              inc.push_back(x.unit.direction[c] == Direction::Increasing);
            }
            n.attrs = Json{{"cut_points", cuts}, {"increasing", inc}, {"step", x.step}};
            if (!x.origin.empty()) n.attrs["origin"] = x.origin;
          } else if constexpr (std::is_same_v<T, LoweredMaxPool>) {
            n.kind = NodeKind::MaxPool;
            n.attrs = Json{{"window", x.window}, {"stride", x.stride}};
            if (!x.origin.empty()) n.attrs["origin"] = x.origin;
          } else {
            n.kind = NodeKind::Output;
          }
          add(std::move(n));
        },
        ln);
  }
  finalize_graph(g, order);
  return g;
}

LoweredGraph graph_to_lowered(const Graph& g) {
  if (!g.lowered) throw Error(ErrorCode::NotLowered, "graph has not been lowered");
  LoweredGraph lg;
  TensorDesc cur;
  Domain domain = Domain::Real;
  double step = 0.0;
  std::string prev;

  auto expect_chain = [&](const Node& n) {
    if (prev.empty() ? !n.inputs.empty() : (n.inputs.size() != 1 || n.inputs[0] != prev))
      throw Error(ErrorCode::SchemaError, "lowered node '" + n.id + "' must read the previous node only");
  };
  auto conv_out = [&](const Node& n, const ConvGeometry& geom) {
    TensorDesc out = cur;
    out.height = geom.out_height(cur.height);
    out.width = geom.out_width(cur.width);
    out.depth = attr_int(n, "out_channels");
    out.layout = Layout::DepthInnermost;
    if (out.height < 1 || out.width < 1 || geom.stride < 1 || geom.pad < 0)
      throw Error(ErrorCode::ShapeMismatch, "conv '" + n.id + "' geometry does not fit its input");
    return out;
  };
  auto check_kernel = [&](const Node& n, const TensorDesc& k, const ConvGeometry& geom, std::int64_t od) {
    if (k.height != geom.kernel_h || k.width != geom.kernel_w || k.depth != cur.depth || k.count != od)
      throw Error(ErrorCode::ShapeMismatch, "weights of '" + n.id + "' do not match its geometry");
    if (k.layout != Layout::DepthInnermost) throw Error(ErrorCode::LayoutMismatch, "weights of '" + n.id + "' are not depth-innermost");
  };

  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    expect_chain(n);
    switch (n.kind) {
      case NodeKind::Input:
        lg.input_id = n.id;
        lg.input = TensorDesc{attr_int(n, "height"), attr_int(n, "width"), attr_int(n, "depth"), 1, DType::F32,
                              Layout::DepthInnermost};
        cur = lg.input;
        domain = Domain::Real;
        break;
      case NodeKind::ConvF32: {
        LoweredConvF32 c;
        c.id = n.id;
        c.geom = conv_geometry(n);
        c.input_step = n.attrs.at("input_step").get<double>();
        if ((domain == Domain::Codes) != (c.input_step > 0.0))
          throw Error(ErrorCode::SchemaError, "conv_f32 '" + n.id + "' input_step disagrees with its input domain");
        if (domain == Domain::Accumulator) throw Error(ErrorCode::SchemaError, "conv_f32 '" + n.id + "' reads accumulators");
        c.input = cur;
        c.output = conv_out(n, c.geom);
        c.output.dtype = DType::F32;
        c.weights = g.tensor(*n.weights);
        if (c.weights.desc().dtype != DType::F32) throw Error(ErrorCode::WrongDtype, "conv_f32 '" + n.id + "' needs f32 weights");
        check_kernel(n, c.weights.desc(), c.geom, c.output.depth);
        c.epilogue = fold_from_json(n, "epilogue_scale", "epilogue_offset", c.output.depth);
        cur = c.output;
        domain = Domain::Real;
        lg.nodes.emplace_back(std::move(c));
        break;
      }
      case NodeKind::BinConv: {
        LoweredBinConv b;
        b.id = n.id;
        b.geom = conv_geometry(n);
        b.input_step = n.attrs.at("input_step").get<double>();
        if (domain != Domain::Codes) throw Error(ErrorCode::SchemaError, "binconv '" + n.id + "' must read codes");
        b.input = cur;
        b.output = conv_out(n, b.geom);
        b.output.dtype = DType::I32;
        b.weights = g.packed(*n.weights);
        if (b.weights.desc.dtype != DType::Bin1) throw Error(ErrorCode::WrongDtype, "binconv '" + n.id + "' needs bin1 weights");
        check_kernel(n, b.weights.desc, b.geom, b.output.depth);
        b.epilogue = fold_from_json(n, "epilogue_scale", "epilogue_offset", b.output.depth);
        cur = b.output;
        if (b.epilogue.empty()) {
          domain = Domain::Accumulator;
        } else {
          cur.dtype = DType::F32;
          domain = Domain::Real;
        }
        lg.nodes.emplace_back(std::move(b));
        break;
      }
      case NodeKind::QuantizeAct: {
        if (domain != Domain::Real) throw Error(ErrorCode::SchemaError, "quantize_act '" + n.id + "' must read a real map");
        LoweredQuantize q;
        q.id = n.id;
        q.origin = n.attrs.value("origin", std::string());
        q.step = n.attrs.at("step").get<double>();
        q.affine = fold_from_json(n, "scale", "offset", cur.depth);
        if (n.attrs.contains("leaky_slope")) q.leaky_slope = n.attrs.at("leaky_slope").get<double>();
        cur.dtype = DType::U2;
        q.desc = cur;
        domain = Domain::Codes;
        step = q.step;
        lg.nodes.emplace_back(std::move(q));
        break;
      }
      case NodeKind::Threshold: {
        if (domain != Domain::Accumulator) throw Error(ErrorCode::SchemaError, "threshold '" + n.id + "' must read accumulators");
        LoweredThreshold t;
        t.id = n.id;
        t.origin = n.attrs.value("origin", std::string());
        t.step = n.attrs.at("step").get<double>();
        const auto& cuts = n.attrs.at("cut_points");
        const auto& inc = n.attrs.at("increasing");
        if (static_cast<std::int64_t>(cuts.size()) != cur.depth || inc.size() != cuts.size())
          throw Error(ErrorCode::ChannelMismatch, "threshold '" + n.id + "' has the wrong channel count");
        for (std::size_t c = 0; c < cuts.size(); ++c) {
          t.unit.cut_points.push_back(cuts[c].get<std::array<std::int32_t, 3>>());
          t.unit.direction.push_back(inc[c].get<bool>() ? Direction::Increasing : Direction::Decreasing);
        }
        cur.dtype = DType::U2;
        t.desc = cur;
        domain = Domain::Codes;
        step = t.step;
        lg.nodes.emplace_back(std::move(t));
        break;
      }
      case NodeKind::MaxPool: {
        if (domain == Domain::Accumulator) throw Error(ErrorCode::SchemaError, "maxpool '" + n.id + "' reads accumulators");
        LoweredMaxPool p;
        p.id = n.id;
        p.origin = n.attrs.value("origin", std::string());
        p.window = attr_int(n, "window");
        p.stride = attr_int(n, "stride");
        if (p.window < 1 || p.stride < 1 || p.window > cur.height || p.window > cur.width)
          throw Error(ErrorCode::ShapeMismatch, "maxpool '" + n.id + "' does not fit its input");
        p.input = cur;
        p.domain = domain;
        cur.height = (cur.height - p.window) / p.stride + 1;
        cur.width = (cur.width - p.window) / p.stride + 1;
        p.output = cur;
        lg.nodes.emplace_back(std::move(p));
        break;
      }
      case NodeKind::Output: {
        if (domain == Domain::Accumulator) throw Error(ErrorCode::SchemaError, "output reads raw accumulators");
        LoweredOutput o;
        o.id = n.id;
        o.desc = cur;
        o.domain = domain;
        o.step = domain == Domain::Codes ? step : 0.0;
        lg.nodes.emplace_back(std::move(o));
        break;
      }
      default:
        throw Error(ErrorCode::SchemaError, "node kind " + std::string(to_string(n.kind)) + " is not allowed in a lowered graph");
    }
    prev = n.id;
  }
  return lg;
}

}  // namespace bqnn
