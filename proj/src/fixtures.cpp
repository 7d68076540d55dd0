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

#include "bqnn/fixtures.hpp"

#include <cmath>

#include "bqnn/error.hpp"

namespace bqnn {

// GraphBuilder -----------------------------------------------------------------

std::string GraphBuilder::next_id(const std::string& kind, std::string id) {
  if (!id.empty()) return id;
  for (;;) {
    std::string candidate = kind + std::to_string(++counters_[kind]);
    if (!g_.nodes.count(candidate)) return candidate;
  }
}

std::string GraphBuilder::raw(Node node) {
  const std::string id = node.id;
  if (!g_.nodes.emplace(id, std::move(node)).second) throw Error(ErrorCode::SchemaError, "duplicate node id '" + id + "'");
  order_.push_back(id);
  return id;
}

std::size_t GraphBuilder::add_blob(Blob blob) {
  g_.blobs.push_back(std::move(blob));
  return g_.blobs.size() - 1;
}

std::string GraphBuilder::input(std::int64_t height, std::int64_t width, std::int64_t depth, std::string id) {
  return raw({next_id("input", std::move(id)), NodeKind::Input,
              Json{{"height", height}, {"width", width}, {"depth", depth}}, {}, {}});
}

std::string GraphBuilder::conv(const std::string& in, TensorBlob weights, std::int64_t stride, std::int64_t pad,
                               bool binarized, std::string id) {
  const TensorDesc d = weights.desc();
  const std::string conv_id = next_id("conv", std::move(id));
  const std::size_t blob = add_blob(std::move(weights));
  Node n{conv_id, NodeKind::Conv2d,
         Json{{"kernel_h", d.height}, {"kernel_w", d.width}, {"stride", stride}, {"pad", pad}, {"out_channels", d.count}},
         {in}, {}};
  if (binarized) {
    const std::string marker = raw({conv_id + "_binarize_w", NodeKind::BinarizeW, Json::object(), {}, blob});
    n.inputs.push_back(marker);
  } else {
    n.weights = blob;
  }
  return raw(std::move(n));
}

std::string GraphBuilder::batchnorm(const std::string& in, std::vector<double> gamma, std::vector<double> beta,
                                    std::vector<double> mean, std::vector<double> variance, double epsilon,
                                    std::string id) {
  return raw({next_id("bn", std::move(id)), NodeKind::BatchNorm,
              Json{{"gamma", gamma}, {"beta", beta}, {"mean", mean}, {"variance", variance}, {"epsilon", epsilon}},
              {in}, {}});
}

std::string GraphBuilder::scale(const std::string& in, std::vector<double> values, std::string id) {
  return raw({next_id("scale", std::move(id)), NodeKind::Scale, Json{{"values", values}}, {in}, {}});
}

std::string GraphBuilder::bias(const std::string& in, std::vector<double> values, std::string id) {
  return raw({next_id("bias", std::move(id)), NodeKind::Bias, Json{{"values", values}}, {in}, {}});
}

std::string GraphBuilder::leaky_relu(const std::string& in, double slope, std::string id) {
  return raw({next_id("leaky", std::move(id)), NodeKind::LeakyRelu, Json{{"slope", slope}}, {in}, {}});
}

std::string GraphBuilder::quantize(const std::string& in, double step, std::string id) {
  return raw({next_id("quant", std::move(id)), NodeKind::QuantizeAct, Json{{"step", step}}, {in}, {}});
}

std::string GraphBuilder::maxpool(const std::string& in, std::int64_t window, std::int64_t stride, std::string id) {
  return raw({next_id("pool", std::move(id)), NodeKind::MaxPool, Json{{"window", window}, {"stride", stride}}, {in}, {}});
}

std::string GraphBuilder::output(const std::string& in, std::string id) {
  return raw({next_id("output", std::move(id)), NodeKind::Output, Json::object(), {in}, {}});
}

Graph GraphBuilder::build() const {
  Graph g = g_;
  finalize_graph(g, order_);
  return g;
}

// Random model construction ----------------------------------------------------

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Rough per-element statistics of the real-valued activations entering a conv.
struct ActStats {
  double mean = 0.5;
  double var = 1.0 / 12.0;
};

TensorBlob random_kernels(Rng& rng, std::int64_t kh, std::int64_t kw, std::int64_t kd, std::int64_t od) {
  const TensorDesc d{kh, kw, kd, od, DType::F32, Layout::HeightInnermost};
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(kh * kw * kd)));
  std::vector<float> v(static_cast<std::size_t>(d.elements()));
  for (auto& x : v) x = static_cast<float>(normal(rng));
  return TensorBlob(d, std::move(v));
}

// Batch-norm statistics matching the conv's expected output distribution, so
// the normalized values straddle the quantizer's cut-points. About one channel
// in ten gets a negative gamma.
std::string normalizing_batchnorm(GraphBuilder& b, Rng& rng, const std::string& in, const TensorBlob& w, bool binarized,
                                  const ActStats& stats, double next_step) {
  const TensorDesc& d = w.desc();
  const std::int64_t taps = d.height * d.width * d.depth;
  std::vector<double> gamma, beta, mean, var;
  for (std::int64_t o = 0; o < d.count; ++o) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = 0; i < taps; ++i) {
      const double x = w.f32()[static_cast<std::size_t>(o * taps + i)];
      const double wv = binarized ? (x >= 0.0 ? 1.0 : -1.0) : x;
      sum += wv;
      sum_sq += wv * wv;
    }
    mean.push_back(stats.mean * sum * uniform(rng, 0.9, 1.1));
    var.push_back(stats.var * sum_sq * uniform(rng, 0.8, 1.25) + 1e-3);
    const double sign = uniform(rng, 0.0, 1.0) < 0.1 ? -1.0 : 1.0;
    gamma.push_back(sign * next_step * uniform(rng, 0.6, 1.3));
    beta.push_back(next_step * uniform(rng, 0.6, 1.6));
  }
  return b.batchnorm(in, gamma, beta, mean, var, 1e-5);
}

// Statistics of dequantized codes from a normalized chain.
ActStats code_stats(double step) { return {1.3 * step, 0.9 * step * step}; }

Graph toy(std::uint64_t seed) {
  Rng rng(seed);
  GraphBuilder b;
  const std::string in = b.input(8, 8, 3, "input");
  double step = uniform(rng, 0.4, 0.6);

  TensorBlob w1 = random_kernels(rng, 3, 3, 3, 16);
  std::string x = b.conv(in, w1, 1, 1, false, "conv1");
  x = normalizing_batchnorm(b, rng, x, w1, false, ActStats{}, step);
  x = b.leaky_relu(x, 0.1);
  x = b.maxpool(x, 2, 2);
  x = b.quantize(x, step);

  const std::int64_t depths[][2] = {{16, 32}, {32, 16}};
  const std::int64_t kernel[] = {3, 1};
  for (int i = 0; i < 2; ++i) {
    const double next = uniform(rng, 0.4, 0.6);
    TensorBlob w = random_kernels(rng, kernel[i], kernel[i], depths[i][0], depths[i][1]);
    x = b.conv(x, w, 1, (kernel[i] - 1) / 2, true, "conv" + std::to_string(i + 2));
    x = normalizing_batchnorm(b, rng, x, w, true, code_stats(step), next);
    x = b.leaky_relu(x, 0.1);
    x = b.quantize(x, next);
    step = next;
  }

  TensorBlob w4 = random_kernels(rng, 1, 1, 16, 8);
  x = b.conv(x, w4, 1, 0, false, "conv4");
  std::vector<double> bias;
  for (int o = 0; o < 8; ++o) bias.push_back(uniform(rng, -0.5, 0.5));
  x = b.bias(x, bias);
  b.output(x, "output");
  return b.build();
}

Graph darknet19_320(std::uint64_t seed) {
  struct Layer {
    std::int64_t kernel;
    std::int64_t filters;
    bool pool;
  };
  // Darknet-19 backbone: 18 convolutions, 2x2 pooling after convs 1, 2, 5, 8, 13.
  const Layer layers[] = {{3, 32, true},    {3, 64, true},    {3, 128, false}, {1, 64, false},  {3, 128, true},
                          {3, 256, false},  {1, 128, false},  {3, 256, true},  {3, 512, false}, {1, 256, false},
                          {3, 512, false},  {1, 256, false},  {3, 512, true},  {3, 1024, false}, {1, 512, false},
                          {3, 1024, false}, {1, 512, false},  {3, 1024, false}};
  Rng rng(seed);
  GraphBuilder b;
  std::string x = b.input(320, 320, 3, "input");
  std::int64_t depth = 3;
  double step = 0.0;
  ActStats stats;
  int index = 0;
  for (const Layer& l : layers) {
    ++index;
    const std::string n = std::to_string(index);
    const bool binarized = index > 1;
    const double next = uniform(rng, 0.4, 0.6);
    TensorBlob w = random_kernels(rng, l.kernel, l.kernel, depth, l.filters);
    x = b.conv(x, w, 1, (l.kernel - 1) / 2, binarized, "conv" + n);
    x = normalizing_batchnorm(b, rng, x, w, binarized, stats, next);
    x = b.leaky_relu(x, 0.1, "leaky" + n);
    if (l.pool) x = b.maxpool(x, 2, 2, "pool" + n);
    x = b.quantize(x, next, "quant" + n);
    step = next;
    stats = code_stats(step);
    depth = l.filters;
  }
  // Detection head input: 125 = 5 anchors x (20 classes + 5).
  TensorBlob w = random_kernels(rng, 1, 1, depth, 125);
  x = b.conv(x, w, 1, 0, false, "conv19");
  std::vector<double> bias;
  for (int o = 0; o < 125; ++o) bias.push_back(uniform(rng, -0.5, 0.5));
  x = b.bias(x, bias, "bias19");
  b.output(x, "output");
  return b.build();
}

std::vector<double> random_vector(Rng& rng, std::int64_t n, double lo, double hi) {
  std::vector<double> v;
  for (std::int64_t i = 0; i < n; ++i) v.push_back(uniform(rng, lo, hi));
  return v;
}

// Random affine ops (optionally ending in a normalizing batchnorm) followed by
// an optional leaky relu. Returns the new tail id.
std::string random_chain(GraphBuilder& b, Rng& rng, std::string x, const TensorBlob& w, bool binarized,
                         const ActStats& stats, double next_step, bool allow_leaky) {
  const std::int64_t od = w.desc().count;
  const std::int64_t extra = pick(rng, 0, 2);
  for (std::int64_t i = 0; i < extra; ++i) {
    if (pick(rng, 0, 1) == 0) {
      std::vector<double> v = random_vector(rng, od, 0.5, 1.5);
      for (auto& s : v)
        if (pick(rng, 0, 9) == 0) s = -s;
      x = b.scale(x, v);
    } else {
      x = b.bias(x, random_vector(rng, od, -0.3, 0.3));
    }
  }
  x = normalizing_batchnorm(b, rng, x, w, binarized, stats, next_step);
  if (pick(rng, 0, 2) == 0) x = b.bias(x, random_vector(rng, od, -0.2 * next_step, 0.2 * next_step));
  if (allow_leaky && pick(rng, 0, 3) != 0) x = b.leaky_relu(x, uniform(rng, 0.05, 0.5));
  return x;
}

}  // namespace

Graph random_tiny_graph(std::uint64_t seed) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  GraphBuilder b;
  std::int64_t h = pick(rng, 3, 9), w = pick(rng, 3, 9), depth = pick(rng, 1, 4);
  std::string x = b.input(h, w, depth);

  auto conv_shape = [&](std::int64_t& k, std::int64_t& stride, std::int64_t& pad) {
    k = (h >= 3 && w >= 3 && pick(rng, 0, 2) != 0) ? 3 : 1;
    pad = k == 3 && pick(rng, 0, 3) != 0 ? 1 : 0;
    stride = (h + 2 * pad - k) >= 2 && (w + 2 * pad - k) >= 2 && pick(rng, 0, 4) == 0 ? 2 : 1;
  };
  auto advance = [&](std::int64_t k, std::int64_t stride, std::int64_t pad) {
    h = (h + 2 * pad - k) / stride + 1;
    w = (w + 2 * pad - k) / stride + 1;
  };
  auto maybe_pool = [&](std::string in) {
    if (h >= 2 && w >= 2 && pick(rng, 0, 2) == 0) {
      const std::int64_t window = 2, stride = pick(rng, 1, 2);
      h = (h - window) / stride + 1;
      w = (w - window) / stride + 1;
      return b.maxpool(in, window, stride);
    }
    return in;
  };

  double step = uniform(rng, 0.3, 0.7);
  std::int64_t k, stride, pad;
  conv_shape(k, stride, pad);
  std::int64_t od = pick(rng, 1, 2) * 16;
  TensorBlob w0 = random_kernels(rng, k, k, depth, od);
  x = b.conv(x, w0, stride, pad, false);
  advance(k, stride, pad);
  x = random_chain(b, rng, x, w0, false, ActStats{}, step, true);
  const bool pool_before_quant = pick(rng, 0, 1) == 0;
  if (pool_before_quant) x = maybe_pool(x);
  x = b.quantize(x, step);
  if (!pool_before_quant) x = maybe_pool(x);
  depth = od;

  const std::int64_t binconvs = pick(rng, 0, 3);
  const std::int64_t tail = pick(rng, 0, 2);  // 0: f32 conv, 1: final binconv, 2: codes to output
  for (std::int64_t i = 0; i < binconvs; ++i) {
    conv_shape(k, stride, pad);
    od = pick(rng, 1, 3) * 16;
    const double next = uniform(rng, 0.3, 0.7);
    TensorBlob wi = random_kernels(rng, k, k, depth, od);
    x = b.conv(x, wi, stride, pad, true);
    advance(k, stride, pad);
    x = random_chain(b, rng, x, wi, true, code_stats(step), next, true);
    const bool before = pick(rng, 0, 1) == 0;
    if (before) x = maybe_pool(x);
    x = b.quantize(x, next);
    if (!before) x = maybe_pool(x);
    step = next;
    depth = od;
  }

  if (tail == 0 || (tail == 1 && binconvs == 0)) {
    conv_shape(k, stride, pad);
    od = pick(rng, 1, 8);
    TensorBlob wl = random_kernels(rng, k, k, depth, od);
    x = b.conv(x, wl, stride, pad, false);
    advance(k, stride, pad);
    if (pick(rng, 0, 1) == 0) x = b.bias(x, random_vector(rng, od, -0.5, 0.5));
    if (pick(rng, 0, 3) == 0) x = b.scale(x, random_vector(rng, od, 0.5, 2.0));
    if (pick(rng, 0, 3) == 0) x = maybe_pool(x);
  } else if (tail == 1) {
    conv_shape(k, stride, pad);
    od = pick(rng, 1, 8);
    TensorBlob wl = random_kernels(rng, k, k, depth, od);
    x = b.conv(x, wl, stride, pad, true);
    advance(k, stride, pad);
    if (pick(rng, 0, 1) == 0) x = random_chain(b, rng, x, wl, true, code_stats(step), 1.0, false);
    if (pick(rng, 0, 3) == 0) x = maybe_pool(x);
  }
  b.output(x);
  return b.build();
}

Graph make_fixture(const std::string& arch, std::uint64_t seed) {
  if (arch == "toy") return toy(seed);
  if (arch == "darknet19_320") return darknet19_320(seed);
  throw Error(ErrorCode::UnknownArchitecture, "unknown architecture '" + arch + "' (expected toy or darknet19_320)");
}

std::vector<std::string> fixture_names() { return {"toy", "darknet19_320"}; }

TensorBlob random_image(const TensorDesc& input, std::uint64_t seed) {
  Rng rng(seed);
  TensorDesc d{input.height, input.width, input.depth, 1, DType::F32, Layout::DepthInnermost};
  std::vector<float> v(static_cast<std::size_t>(d.elements()));
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& x : v) x = u(rng);
  return TensorBlob(d, std::move(v));
}

TensorBlob random_image(const Graph& g, std::uint64_t seed) {
  for (const auto& id : g.topo_order) {
    const Node& n = g.node(id);
    if (n.kind == NodeKind::Input)
      return random_image(TensorDesc{n.attrs.at("height").get<std::int64_t>(), n.attrs.at("width").get<std::int64_t>(),
                                     n.attrs.at("depth").get<std::int64_t>(), 1, DType::F32, Layout::DepthInnermost},
                          seed);
  }
  throw Error(ErrorCode::SchemaError, "graph has no input node");
}

}  // namespace bqnn
