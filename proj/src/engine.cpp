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

#include "bqnn/engine.hpp"

#include <algorithm>
#include <bit>
#include <chrono>

#include "bqnn/error.hpp"
#include "bqnn/parallel.hpp"

namespace bqnn {

namespace {

std::string dims(const TensorDesc& d) {
  return std::to_string(d.height) + "x" + std::to_string(d.width) + "x" + std::to_string(d.depth);
}

// Channel index of flat element i of a single (count = 1) tensor.
std::int64_t channel_of(const TensorDesc& d, std::int64_t i) {
  if (d.layout == Layout::DepthInnermost) return i % d.depth;
  return (i / (d.height * d.width)) % d.depth;
}

struct OutputGeometry {
  std::int64_t height;
  std::int64_t width;
};

OutputGeometry conv_output(const TensorDesc& in, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                           std::int64_t pad) {
  if (stride < 1 || pad < 0) throw Error(ErrorCode::ShapeMismatch, "stride must be >= 1 and pad >= 0");
  const ConvGeometry g{kh, kw, stride, pad};
  const OutputGeometry out{g.out_height(in.height), g.out_width(in.width)};
  if (in.height + 2 * pad < kh || in.width + 2 * pad < kw || out.height < 1 || out.width < 1)
    throw Error(ErrorCode::ShapeMismatch,
                "kernel " + std::to_string(kh) + "x" + std::to_string(kw) + " does not fit input " + dims(in));
  return out;
}

// Valid kernel tap range [lo, hi) for a window starting at `origin` on an axis of size n.
inline void tap_range(std::int64_t origin, std::int64_t k, std::int64_t n, std::int64_t& lo, std::int64_t& hi) {
  lo = std::max<std::int64_t>(0, -origin);
  hi = std::min<std::int64_t>(k, n - origin);
}

TensorBlob as_depth_innermost(const TensorBlob& t) {
  return t.desc().layout == Layout::DepthInnermost ? t : to_depth_innermost(t);
}

TensorBlob pool(const TensorBlob& t, std::int64_t window, std::int64_t stride) {
  const TensorDesc& in = t.desc();
  if (window < 1 || stride < 1 || window > in.height || window > in.width || in.count != 1)
    throw Error(ErrorCode::ShapeMismatch, "maxpool window " + std::to_string(window) + " does not fit " + dims(in));
  TensorDesc out = in;
  out.height = (in.height - window) / stride + 1;
  out.width = (in.width - window) / stride + 1;
  TensorBlob result(out);
  for (std::int64_t y = 0; y < out.height; ++y)
    for (std::int64_t x = 0; x < out.width; ++x)
      for (std::int64_t d = 0; d < out.depth; ++d) {
        const std::int64_t o = out.offset(0, y, x, d);
        if (in.dtype == DType::F32) {
          float m = t.f32()[static_cast<std::size_t>(in.offset(0, y * stride, x * stride, d))];
          for (std::int64_t i = 0; i < window; ++i)
            for (std::int64_t j = 0; j < window; ++j)
              m = std::max(m, t.f32()[static_cast<std::size_t>(in.offset(0, y * stride + i, x * stride + j, d))]);
          result.f32()[static_cast<std::size_t>(o)] = m;
        } else {
          std::int8_t m = 0;
          for (std::int64_t i = 0; i < window; ++i)
            for (std::int64_t j = 0; j < window; ++j)
              m = std::max(m, t.codes()[static_cast<std::size_t>(in.offset(0, y * stride + i, x * stride + j, d))]);
          result.codes()[static_cast<std::size_t>(o)] = m;
        }
      }
  return result;
}

}  // namespace

AccumulatorMap binconv_reference(const TensorBlob& acts, const TensorBlob& weights, std::int64_t stride,
                                 std::int64_t pad) {
  const TensorDesc& in = acts.desc();
  const TensorDesc& k = weights.desc();
  if (in.dtype != DType::U2 || k.dtype != DType::Bin1)
    throw Error(ErrorCode::ShapeMismatch, "binconv_reference expects u2 activations and bin1 weights");
  if (in.count != 1 || k.depth != in.depth)
    throw Error(ErrorCode::ShapeMismatch, "kernel depth " + std::to_string(k.depth) + " != input depth " +
                                               std::to_string(in.depth));
  const OutputGeometry og = conv_output(in, k.height, k.width, stride, pad);
  const TensorDesc out{og.height, og.width, k.count, 1, DType::I32, Layout::DepthInnermost};
  std::vector<std::int32_t> acc(static_cast<std::size_t>(out.elements()), 0);
  for (std::int64_t oy = 0; oy < og.height; ++oy)
    for (std::int64_t ox = 0; ox < og.width; ++ox)
      for (std::int64_t o = 0; o < k.count; ++o) {
        std::int64_t sum = 0;
        for (std::int64_t kh = 0; kh < k.height; ++kh)
          for (std::int64_t kw = 0; kw < k.width; ++kw) {
            const std::int64_t iy = oy * stride - pad + kh;
            const std::int64_t ix = ox * stride - pad + kw;
            if (iy < 0 || ix < 0 || iy >= in.height || ix >= in.width) continue;
            for (std::int64_t d = 0; d < k.depth; ++d)
              sum += weights.codes()[static_cast<std::size_t>(k.offset(o, kh, kw, d))] *
                     acts.codes()[static_cast<std::size_t>(in.offset(0, iy, ix, d))];
          }
        acc[static_cast<std::size_t>(out.offset(0, oy, ox, o))] = static_cast<std::int32_t>(sum);
      }
  return TensorBlob(out, std::move(acc));
}

AccumulatorMap binconv_packed(const PackedTensor& acts, const PackedTensor& weights, std::int64_t stride,
                              std::int64_t pad, int threads) {
  const TensorDesc& in = acts.desc;
  const TensorDesc& k = weights.desc;
  if (in.layout != Layout::DepthInnermost || k.layout != Layout::DepthInnermost)
    throw Error(ErrorCode::LayoutMismatch, "packed operands must be depth-innermost");
  if (in.dtype != DType::U2 || acts.planes.size() != 2)
    throw Error(ErrorCode::PlaneCountMismatch, "activations must be u2 with 2 planes, got " +
                                                   std::to_string(acts.planes.size()));
  if (k.dtype != DType::Bin1 || weights.planes.size() != 1)
    throw Error(ErrorCode::PlaneCountMismatch, "weights must be bin1 with 1 plane, got " +
                                                   std::to_string(weights.planes.size()));
  if (acts.words_per_dbar() != weights.words_per_dbar())
    throw Error(ErrorCode::LayoutMismatch, "activation and kernel D-bars have different word counts");
  if (in.depth != k.depth || in.count != 1)
    throw Error(ErrorCode::ShapeMismatch, "kernel depth " + std::to_string(k.depth) + " != input depth " +
                                               std::to_string(in.depth));
  check_packed(acts);
  check_packed(weights);

  const OutputGeometry og = conv_output(in, k.height, k.width, stride, pad);
  const TensorDesc out{og.height, og.width, k.count, 1, DType::I32, Layout::DepthInnermost};
  std::vector<std::int32_t> acc(static_cast<std::size_t>(out.elements()));
  const std::int64_t wpd = acts.words_per_dbar();
  const std::uint32_t* a0 = acts.planes[0].data();
  const std::uint32_t* a1 = acts.planes[1].data();
  const std::uint32_t* wt = weights.planes[0].data();

  parallel_for(og.height, threads, [&](std::int64_t row_begin, std::int64_t row_end) {
    for (std::int64_t oy = row_begin; oy < row_end; ++oy) {
      const std::int64_t y0 = oy * stride - pad;
      std::int64_t kh_lo, kh_hi;
      tap_range(y0, k.height, in.height, kh_lo, kh_hi);
      for (std::int64_t ox = 0; ox < og.width; ++ox) {
        const std::int64_t x0 = ox * stride - pad;
        std::int64_t kw_lo, kw_hi;
        tap_range(x0, k.width, in.width, kw_lo, kw_hi);
        const std::int64_t span = (kw_hi - kw_lo) * wpd;
        // Sum of pc(a0) + 2 pc(a1) over the window does not depend on the kernel.
        std::int64_t act_total = 0;
        for (std::int64_t kh = kh_lo; kh < kh_hi; ++kh) {
          const std::int64_t base = acts.word_offset(0, y0 + kh, x0 + kw_lo);
          for (std::int64_t i = 0; i < span; ++i)
            act_total += std::popcount(a0[base + i]) + 2 * std::popcount(a1[base + i]);
        }
        std::int32_t* dst = acc.data() + out.offset(0, oy, ox, 0);
        for (std::int64_t o = 0; o < k.count; ++o) {
          std::int64_t dot = 0;
          for (std::int64_t kh = kh_lo; kh < kh_hi; ++kh) {
            const std::int64_t abase = acts.word_offset(0, y0 + kh, x0 + kw_lo);
            const std::uint32_t* w = wt + weights.word_offset(o, kh, kw_lo);
            const std::uint32_t* p0 = a0 + abase;
            const std::uint32_t* p1 = a1 + abase;
            for (std::int64_t i = 0; i < span; ++i)
              dot += std::popcount(p0[i] & w[i]) + 2 * std::popcount(p1[i] & w[i]);
          }
          dst[o] = static_cast<std::int32_t>(2 * dot - act_total);
        }
      }
    }
  });
  return TensorBlob(out, std::move(acc));
}

TensorBlob apply_thresholds(const AccumulatorMap& acc, const ThresholdUnit& th) {
  const TensorDesc& d = acc.desc();
  if (d.dtype != DType::I32) throw Error(ErrorCode::WrongDtype, "thresholds apply to i32 accumulators");
  if (static_cast<std::int64_t>(th.channels()) != d.depth || th.direction.size() != th.channels())
    throw Error(ErrorCode::ChannelMismatch, "threshold unit has " + std::to_string(th.channels()) +
                                                 " channels, accumulator map has " + std::to_string(d.depth));
  TensorDesc out = d;
  out.dtype = DType::U2;
  std::vector<std::int8_t> codes(acc.size());
  const auto& a = acc.i32();
  for (std::size_t i = 0; i < codes.size(); ++i)
    codes[i] = static_cast<std::int8_t>(th.code(static_cast<std::size_t>(channel_of(d, static_cast<std::int64_t>(i))), a[i]));
  return TensorBlob(out, std::move(codes));
}

TensorBlob apply_epilogue(const AccumulatorMap& acc, const AffineFold& epilogue) {
  const TensorDesc& d = acc.desc();
  if (d.dtype != DType::I32) throw Error(ErrorCode::WrongDtype, "epilogue applies to i32 accumulators");
  if (!epilogue.empty() && static_cast<std::int64_t>(epilogue.channels()) != d.depth)
    throw Error(ErrorCode::ChannelMismatch, "epilogue has " + std::to_string(epilogue.channels()) + " channels");
  TensorDesc out = d;
  out.dtype = DType::F32;
  std::vector<float> values(acc.size());
  const auto& a = acc.i32();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = static_cast<double>(a[i]);
    if (epilogue.empty()) {
      values[i] = static_cast<float>(y);
    } else {
      const auto c = static_cast<std::size_t>(channel_of(d, static_cast<std::int64_t>(i)));
      values[i] = static_cast<float>(y * epilogue.scale[c] + epilogue.offset[c]);
    }
  }
  return TensorBlob(out, std::move(values));
}

TensorBlob maxpool_u2(const TensorBlob& t, std::int64_t window, std::int64_t stride) {
  if (t.desc().dtype != DType::U2) throw Error(ErrorCode::WrongDtype, "maxpool_u2 expects u2 codes");
  return pool(t, window, stride);
}

TensorBlob maxpool_f32(const TensorBlob& t, std::int64_t window, std::int64_t stride) {
  if (t.desc().dtype != DType::F32) throw Error(ErrorCode::WrongDtype, "maxpool_f32 expects f32 values");
  return pool(t, window, stride);
}

TensorBlob conv_f32(const TensorBlob& acts_in, const TensorBlob& weights_in, const ConvGeometry& geom,
                    const AffineFold& epilogue, double input_step, int threads) {
  const TensorDesc& in = acts_in.desc();
  const TensorDesc& k = weights_in.desc();
  if (k.dtype != DType::F32) throw Error(ErrorCode::WrongDtype, "conv_f32 expects f32 weights");
  if (in.dtype != DType::F32 && !(in.dtype == DType::U2 && input_step > 0.0))
    throw Error(ErrorCode::WrongDtype, "conv_f32 reads f32 values, or u2 codes with a positive input step");
  if (in.count != 1 || k.depth != in.depth || k.height != geom.kernel_h || k.width != geom.kernel_w)
    throw Error(ErrorCode::ShapeMismatch, "kernel " + dims(k) + " does not match input " + dims(in));
  if (!epilogue.empty() && static_cast<std::int64_t>(epilogue.channels()) != k.count)
    throw Error(ErrorCode::ChannelMismatch, "epilogue has " + std::to_string(epilogue.channels()) + " channels");
  const OutputGeometry og = conv_output(in, k.height, k.width, geom.stride, geom.pad);

  const TensorBlob acts = as_depth_innermost(acts_in);
  const TensorBlob weights = as_depth_innermost(weights_in);
  std::vector<double> x(acts.size());
  if (in.dtype == DType::F32) {
    std::transform(acts.f32().begin(), acts.f32().end(), x.begin(), [](float v) { return static_cast<double>(v); });
  } else {
    std::transform(acts.codes().begin(), acts.codes().end(), x.begin(),
                   [&](std::int8_t c) { return input_step * static_cast<double>(c); });
  }
  std::vector<double> w(weights.f32().begin(), weights.f32().end());

  const TensorDesc xd = acts.desc();
  const TensorDesc wd = weights.desc();
  const TensorDesc out{og.height, og.width, k.count, 1, DType::F32, Layout::DepthInnermost};
  std::vector<float> result(static_cast<std::size_t>(out.elements()));
  parallel_for(og.height, threads, [&](std::int64_t row_begin, std::int64_t row_end) {
    for (std::int64_t oy = row_begin; oy < row_end; ++oy) {
      const std::int64_t y0 = oy * geom.stride - geom.pad;
      std::int64_t kh_lo, kh_hi;
      tap_range(y0, k.height, in.height, kh_lo, kh_hi);
      for (std::int64_t ox = 0; ox < og.width; ++ox) {
        const std::int64_t x0 = ox * geom.stride - geom.pad;
        std::int64_t kw_lo, kw_hi;
        tap_range(x0, k.width, in.width, kw_lo, kw_hi);
        const std::int64_t span = (kw_hi - kw_lo) * in.depth;
        for (std::int64_t o = 0; o < k.count; ++o) {
          double acc = 0.0;
          for (std::int64_t kh = kh_lo; kh < kh_hi; ++kh) {
            const double* xp = x.data() + xd.offset(0, y0 + kh, x0 + kw_lo, 0);
            const double* wp = w.data() + wd.offset(o, kh, kw_lo, 0);
            for (std::int64_t i = 0; i < span; ++i) acc += xp[i] * wp[i];
          }
          const auto oc = static_cast<std::size_t>(o);
          result[static_cast<std::size_t>(out.offset(0, oy, ox, o))] =
              epilogue.empty() ? static_cast<float>(acc)
                               : static_cast<float>(acc * epilogue.scale[oc] + epilogue.offset[oc]);
        }
      }
    }
  });
  return TensorBlob(out, std::move(result));
}

TensorBlob quantize(const TensorBlob& x, const AffineFold& affine, std::optional<double> leaky_slope, double step) {
  const TensorDesc& d = x.desc();
  if (d.dtype != DType::F32) throw Error(ErrorCode::WrongDtype, "quantize expects an f32 map");
  if (!affine.empty() && static_cast<std::int64_t>(affine.channels()) != d.depth)
    throw Error(ErrorCode::ChannelMismatch, "quantizer affine has " + std::to_string(affine.channels()) + " channels");
  TensorDesc out = d;
  out.dtype = DType::U2;
  std::vector<std::int8_t> codes(x.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    double r = static_cast<double>(x.f32()[i]);
    if (!affine.empty()) {
      const auto c = static_cast<std::size_t>(channel_of(d, static_cast<std::int64_t>(i)));
      r = affine.scale[c] * r + affine.offset[c];
    }
    if (leaky_slope) r = leaky_relu(r, *leaky_slope);
    codes[i] = static_cast<std::int8_t>(quantize_real(r, step));
  }
  return TensorBlob(out, std::move(codes));
}

RunResult run_network(const LoweredGraph& lg, const TensorBlob& image, const RunOptions& options) {
  const TensorDesc& id = image.desc();
  if (id.dtype != DType::F32 || !id.same_shape(lg.input))
    throw Error(ErrorCode::ShapeMismatch, "image " + dims(id) + " does not match model input " + dims(lg.input));
  RunResult result;
  TensorBlob cur = as_depth_innermost(image);
  const int threads = resolve_threads(options.threads);

  auto trace = [&](const std::string& origin) {
    if (options.trace_codes && !origin.empty()) result.codes[origin] = cur;
  };

  for (std::size_t i = 0; i < lg.nodes.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string op;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LoweredConvF32>) {
            op = "conv_f32";
            cur = conv_f32(cur, n.weights, n.geom, n.epilogue, n.input_step, threads);
          } else if constexpr (std::is_same_v<T, LoweredBinConv>) {
            op = "binconv";
            cur = binconv_packed(bitpack(cur), n.weights, n.geom.stride, n.geom.pad, threads);
            const bool thresholded = i + 1 < lg.nodes.size() && std::holds_alternative<LoweredThreshold>(lg.nodes[i + 1]);
            if (!thresholded) cur = apply_epilogue(cur, n.epilogue);
          } else if constexpr (std::is_same_v<T, LoweredThreshold>) {
            op = "threshold";
            cur = apply_thresholds(cur, n.unit);
            trace(n.origin);
          } else if constexpr (std::is_same_v<T, LoweredQuantize>) {
            op = "quantize";
            cur = quantize(cur, n.affine, n.leaky_slope, n.step);
            trace(n.origin);
          } else if constexpr (std::is_same_v<T, LoweredMaxPool>) {
            op = "maxpool";
            if (n.domain == Domain::Codes) {
              cur = maxpool_u2(cur, n.window, n.stride);
              trace(n.origin);
            } else {
              cur = maxpool_f32(cur, n.window, n.stride);
            }
          } else {
            op = "output";
            if (cur.desc().dtype == DType::U2) {
              TensorDesc d = cur.desc();
              d.dtype = DType::F32;
              std::vector<float> values(cur.size());
              for (std::size_t j = 0; j < values.size(); ++j)
                values[j] = static_cast<float>(n.step * static_cast<double>(cur.codes()[j]));
              cur = TensorBlob(d, std::move(values));
            } else if (cur.desc().dtype != DType::F32) {
              throw Error(ErrorCode::Internal, "network output is not a real or code map");
            }
          }
        },
        lg.nodes[i]);
    if (options.time_ops) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      result.timings.push_back({lowered_id(lg.nodes[i]), op, elapsed.count()});
    }
  }
  result.output = std::move(cur);
  return result;
}

}  // namespace bqnn
