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

#include "bqnn/codegen.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>

#include "bqnn/error.hpp"

namespace bqnn {

namespace {

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08Xu", v);
  return buf;
}

std::string hex64(double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016llXull", static_cast<unsigned long long>(v));
  return buf;
}

std::uint32_t bits_of(float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, sizeof v);
  return v;
}

template <typename T, typename Fmt>
void emit_array(std::ostringstream& out, const char* ctype, const std::string& name, const std::vector<T>& values,
                std::size_t per_line, Fmt fmt) {
  out << "static const " << ctype << ' ' << name << '[' << (values.empty() ? 1 : values.size()) << "] = {\n";
  if (values.empty()) out << "  0,\n";
  for (std::size_t i = 0; i < values.size(); i += per_line) {
    out << "  ";
    for (std::size_t j = i; j < std::min(values.size(), i + per_line); ++j) {
      if (j != i) out << ", ";
      out << fmt(values[j]);
    }
    out << ",\n";
  }
  out << "};\n";
}

void emit_words(std::ostringstream& out, const std::string& name, const std::vector<std::uint32_t>& words) {
  emit_array(out, "uint32_t", name, words, 8, hex32);
}

void emit_doubles(std::ostringstream& out, const std::string& name, const std::vector<double>& values) {
  emit_array(out, "uint64_t", name, values, 4, hex64);
}

std::string sanitize(const std::string& id) {
  std::string s;
  for (char c : id) s += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return s;
}

const char* kF64 = R"(
static double bq_f64(uint64_t u) {
  double d;
  memcpy(&d, &u, sizeof d);
  return d;
}
)";

const char* kWindow = R"(
/* Kernel taps [lo, hi) of a window starting at `origin` that fall inside the input. */
static long bq_lo(long origin) { return origin < 0 ? -origin : 0; }
static long bq_hi(long origin, long k, long n) { return n - origin < k ? n - origin : k; }
)";

const char* kPopcount = R"(
/* SWAR population count: pairs, nibbles, bytes, then a multiply-add of the bytes. */
static int bq_popcount(uint32_t x) {
  x = x - ((x >> 1) & 0x55555555u);
  x = (x & 0x33333333u) + ((x >> 2) & 0x33333333u);
  x = (x + (x >> 4)) & 0x0F0F0F0Fu;
  return (int)((x * 0x01010101u) >> 24);
}

static void bq_pack(const uint8_t* codes, long hw, long d, uint32_t* p0, uint32_t* p1) {
  long wpd = (d + 31) / 32, i, k;
  memset(p0, 0, (size_t)(hw * wpd) * sizeof(uint32_t));
  memset(p1, 0, (size_t)(hw * wpd) * sizeof(uint32_t));
  for (i = 0; i < hw; ++i) {
    for (k = 0; k < d; ++k) {
      uint32_t bit = 1u << (k % 32);
      uint8_t c = codes[i * d + k];
      if (c & 1u) p0[i * wpd + k / 32] |= bit;
      if (c & 2u) p1[i * wpd + k / 32] |= bit;
    }
  }
}

/* acc = sum over planes p of (2 * popcount(a_p & w) - popcount(a_p)) << p. */
static void bq_binconv(const uint32_t* p0, const uint32_t* p1, long h, long w, long d, const uint32_t* wt, long kh,
                       long kw, long od, long stride, long pad, int32_t* acc) {
  long wpd = (d + 31) / 32;
  long oh = (h + 2 * pad - kh) / stride + 1, ow = (w + 2 * pad - kw) / stride + 1;
  long oy, ox, o, y, i;
  for (oy = 0; oy < oh; ++oy) {
    long y0 = oy * stride - pad, ylo = bq_lo(y0), yhi = bq_hi(y0, kh, h);
    for (ox = 0; ox < ow; ++ox) {
      long x0 = ox * stride - pad, xlo = bq_lo(x0), xhi = bq_hi(x0, kw, w);
      long span = (xhi - xlo) * wpd, total = 0;
      for (y = ylo; y < yhi; ++y) {
        long base = ((y0 + y) * w + x0 + xlo) * wpd;
        for (i = 0; i < span; ++i) total += bq_popcount(p0[base + i]) + 2 * bq_popcount(p1[base + i]);
      }
      for (o = 0; o < od; ++o) {
        long dot = 0;
        for (y = ylo; y < yhi; ++y) {
          long base = ((y0 + y) * w + x0 + xlo) * wpd;
          const uint32_t* k = wt + ((o * kh + y) * kw + xlo) * wpd;
          for (i = 0; i < span; ++i) dot += bq_popcount(p0[base + i] & k[i]) + 2 * bq_popcount(p1[base + i] & k[i]);
        }
        acc[(oy * ow + ox) * od + o] = (int32_t)(2 * dot - total);
      }
    }
  }
}
)";

const char* kThreshold = R"(
static void bq_threshold(const int32_t* acc, long n, long d, const int32_t* t, const uint8_t* inc, uint8_t* out) {
  long i;
  for (i = 0; i < n; ++i) {
    long c = i % d;
    int32_t a = acc[i];
    const int32_t* tc = t + 3 * c;
    out[i] = inc[c] ? (uint8_t)((a >= tc[0]) + (a >= tc[1]) + (a >= tc[2]))
                    : (uint8_t)((a <= tc[0]) + (a <= tc[1]) + (a <= tc[2]));
  }
}
)";

const char* kEpilogue = R"(
static void bq_epilogue(const int32_t* acc, long n, long d, const uint64_t* s, const uint64_t* b, float* out) {
  long i;
  for (i = 0; i < n; ++i) out[i] = (float)((double)acc[i] * bq_f64(s[i % d]) + bq_f64(b[i % d]));
}
)";

const char* kConvF32 = R"(
static float bq_f32(uint32_t u) {
  float f;
  memcpy(&f, &u, sizeof f);
  return f;
}

/* Dense convolution; the input is either f32 values or u2 codes scaled by in_step. */
static void bq_conv_f32(const float* in_f, const uint8_t* in_c, double in_step, long h, long w, long d,
                        const uint32_t* wt, long kh, long kw, long od, long stride, long pad, const uint64_t* es,
                        const uint64_t* eo, float* out) {
  long oh = (h + 2 * pad - kh) / stride + 1, ow = (w + 2 * pad - kw) / stride + 1;
  long oy, ox, o, y, i;
  for (oy = 0; oy < oh; ++oy) {
    long y0 = oy * stride - pad, ylo = bq_lo(y0), yhi = bq_hi(y0, kh, h);
    for (ox = 0; ox < ow; ++ox) {
      long x0 = ox * stride - pad, xlo = bq_lo(x0), xhi = bq_hi(x0, kw, w);
      long span = (xhi - xlo) * d;
      for (o = 0; o < od; ++o) {
        double acc = 0.0;
        for (y = ylo; y < yhi; ++y) {
          long xb = ((y0 + y) * w + x0 + xlo) * d;
          long wb = ((o * kh + y) * kw + xlo) * d;
          for (i = 0; i < span; ++i) {
            double x = in_f ? (double)in_f[xb + i] : in_step * (double)in_c[xb + i];
            acc += x * (double)bq_f32(wt[wb + i]);
          }
        }
        out[(oy * ow + ox) * od + o] = es ? (float)(acc * bq_f64(es[o]) + bq_f64(eo[o])) : (float)acc;
      }
    }
  }
}
)";

const char* kQuantize = R"(
static void bq_quantize(const float* in, long n, long d, const uint64_t* s, const uint64_t* b, int leaky,
                        double slope, double step, uint8_t* out) {
  long i;
  for (i = 0; i < n; ++i) {
    double r = (double)in[i], q;
    if (s) r = bq_f64(s[i % d]) * r + bq_f64(b[i % d]);
    if (leaky && !(r >= 0.0)) r = slope * r;
    q = floor(r / step + 0.5);
    out[i] = !(q > 0.0) ? 0u : (q >= 3.0 ? 3u : (uint8_t)q);
  }
}
)";

const char* kPoolU8 = R"(
static void bq_maxpool_u8(const uint8_t* in, long h, long w, long d, long win, long stride, uint8_t* out) {
  long oh = (h - win) / stride + 1, ow = (w - win) / stride + 1, y, x, c, i, j;
  for (y = 0; y < oh; ++y)
    for (x = 0; x < ow; ++x)
      for (c = 0; c < d; ++c) {
        uint8_t m = 0;
        for (i = 0; i < win; ++i)
          for (j = 0; j < win; ++j) {
            uint8_t v = in[((y * stride + i) * w + x * stride + j) * d + c];
            if (v > m) m = v;
          }
        out[(y * ow + x) * d + c] = m;
      }
}
)";

const char* kPoolF32 = R"(
static void bq_maxpool_f32(const float* in, long h, long w, long d, long win, long stride, float* out) {
  long oh = (h - win) / stride + 1, ow = (w - win) / stride + 1, y, x, c, i, j;
  for (y = 0; y < oh; ++y)
    for (x = 0; x < ow; ++x)
      for (c = 0; c < d; ++c) {
        float m = in[((y * stride) * w + x * stride) * d + c];
        for (i = 0; i < win; ++i)
          for (j = 0; j < win; ++j) {
            float v = in[((y * stride + i) * w + x * stride + j) * d + c];
            if (v > m) m = v;
          }
        out[(y * ow + x) * d + c] = m;
      }
}
)";

struct Buffer {
  enum Kind { F32, Codes, Acc, Words } kind;
  std::string name;
  std::int64_t elements;
};

}  // namespace

std::string emit_weight_arrays(const std::vector<std::pair<std::string, PackedTensor>>& tensors) {
  std::ostringstream out;
  for (const auto& [name, p] : tensors)
    for (std::size_t k = 0; k < p.planes.size(); ++k) emit_words(out, name + "_p" + std::to_string(k), p.planes[k]);
  return out.str();
}

std::string emit_inference_source(const LoweredGraph& lg) {
  std::ostringstream data;  // constant tables
  std::ostringstream bufs;  // static activation buffers
  std::ostringstream body;  // statements of bqnn_infer
  std::set<std::string> kinds;

  Buffer cur{Buffer::F32, "image", lg.input.elements()};
  TensorDesc shape = lg.input;

  auto declare = [&](Buffer::Kind kind, const std::string& name, std::int64_t n) {
    const char* ctype = kind == Buffer::F32     ? "float"
                        : kind == Buffer::Codes ? "uint8_t"
                        : kind == Buffer::Acc   ? "int32_t"
                                                : "uint32_t";
    bufs << "static " << ctype << ' ' << name << '[' << n << "];\n";
    return Buffer{kind, name, n};
  };
  auto fold_tables = [&](const std::string& base, const AffineFold& a) -> std::pair<std::string, std::string> {
    if (a.empty()) return {"0", "0"};
    emit_doubles(data, base + "_scale", a.scale);
    emit_doubles(data, base + "_offset", a.offset);
    return {base + "_scale", base + "_offset"};
  };

  for (std::size_t idx = 0; idx < lg.nodes.size(); ++idx) {
    const LoweredNode& node = lg.nodes[idx];
    const std::string base = "l" + std::to_string(idx) + "_" + sanitize(lowered_id(node));
    body << "  /* " << lowered_id(node) << " */\n";
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LoweredConvF32>) {
            kinds.insert("conv_f32");
            std::vector<std::uint32_t> words;
            for (float f : n.weights.f32()) words.push_back(bits_of(f));
            emit_words(data, base + "_w", words);
            const auto [s, b] = fold_tables(base + "_ep", n.epilogue);
            const Buffer out = declare(Buffer::F32, base + "_out", n.output.elements());
            const bool codes = cur.kind == Buffer::Codes;
            body << "  bq_conv_f32(" << (codes ? "0" : cur.name) << ", " << (codes ? cur.name : "0") << ", "
                 << (codes ? "bq_f64(" + hex64(n.input_step) + ")" : "0.0") << ", " << shape.height << ", "
                 << shape.width << ", " << shape.depth << ", " << base << "_w, " << n.geom.kernel_h << ", "
                 << n.geom.kernel_w << ", " << n.output.depth << ", " << n.geom.stride << ", " << n.geom.pad << ", "
                 << s << ", " << b << ", " << out.name << ");\n";
            cur = out;
            shape = n.output;
          } else if constexpr (std::is_same_v<T, LoweredBinConv>) {
            kinds.insert("binconv");
            if (cur.kind != Buffer::Codes) throw Error(ErrorCode::UnsupportedNode, "binconv '" + n.id + "' without code input");
            const bool thresholded = idx + 1 < lg.nodes.size() && std::holds_alternative<LoweredThreshold>(lg.nodes[idx + 1]);
            if (!thresholded && n.epilogue.empty())
              throw Error(ErrorCode::UnsupportedNode, "binconv '" + n.id + "' has neither a threshold nor an epilogue");
            data << emit_weight_arrays({{base + "_w", n.weights}});
            const std::int64_t in_words = shape.height * shape.width * ((shape.depth + 31) / 32);
            const Buffer p0 = declare(Buffer::Words, base + "_in_p0", in_words);
            const Buffer p1 = declare(Buffer::Words, base + "_in_p1", in_words);
            const Buffer acc = declare(Buffer::Acc, base + "_acc", n.output.elements());
            body << "  bq_pack(" << cur.name << ", " << shape.height * shape.width << ", " << shape.depth << ", "
                 << p0.name << ", " << p1.name << ");\n";
            body << "  bq_binconv(" << p0.name << ", " << p1.name << ", "
                 << shape.height << ", " << shape.width << ", " << shape.depth << ", " << base << "_w_p0, "
                 << n.geom.kernel_h << ", " << n.geom.kernel_w << ", " << n.output.depth << ", " << n.geom.stride
                 << ", " << n.geom.pad << ", " << acc.name << ");\n";
            cur = acc;
            shape = n.output;
            if (!thresholded) {
              kinds.insert("epilogue");
              const auto [s, b] = fold_tables(base + "_ep", n.epilogue);
              const Buffer out = declare(Buffer::F32, base + "_out", n.output.elements());
              body << "  bq_epilogue(" << acc.name << ", " << acc.elements << ", " << shape.depth << ", " << s << ", "
                   << b << ", " << out.name << ");\n";
              cur = out;
            }
          } else if constexpr (std::is_same_v<T, LoweredThreshold>) {
            kinds.insert("threshold");
            if (cur.kind != Buffer::Acc) throw Error(ErrorCode::UnsupportedNode, "threshold '" + n.id + "' without accumulators");
            std::vector<std::int32_t> t;
            std::vector<int> inc;
            for (std::size_t c = 0; c < n.unit.channels(); ++c) {
              t.insert(t.end(), n.unit.cut_points[c].begin(), n.unit.cut_points[c].end());
              inc.push_back(n.unit.direction[c] == Direction::Increasing ? 1 : 0);
            }
            emit_array(data, "int32_t", base + "_t", t, 12, [](std::int32_t v) { return std::to_string(v); });
            emit_array(data, "uint8_t", base + "_inc", inc, 32, [](int v) { return std::to_string(v); });
            const Buffer out = declare(Buffer::Codes, base + "_out", cur.elements);
            body << "  bq_threshold(" << cur.name << ", " << cur.elements << ", " << shape.depth << ", " << base
                 << "_t, " << base << "_inc, " << out.name << ");\n";
            cur = out;
          } else if constexpr (std::is_same_v<T, LoweredQuantize>) {
            kinds.insert("quantize");
            if (cur.kind != Buffer::F32) throw Error(ErrorCode::UnsupportedNode, "quantize '" + n.id + "' without real input");
            const auto [s, b] = fold_tables(base + "_q", n.affine);
            const Buffer out = declare(Buffer::Codes, base + "_out", cur.elements);
            body << "  bq_quantize(" << cur.name << ", " << cur.elements << ", " << shape.depth << ", " << s << ", "
                 << b << ", " << (n.leaky_slope ? 1 : 0) << ", "
                 << (n.leaky_slope ? "bq_f64(" + hex64(*n.leaky_slope) + ")" : "0.0") << ", bq_f64("
                 << hex64(n.step) << "), " << out.name << ");\n";
            cur = out;
          } else if constexpr (std::is_same_v<T, LoweredMaxPool>) {
            const bool codes = cur.kind == Buffer::Codes;
            if (!codes && cur.kind != Buffer::F32)
              throw Error(ErrorCode::UnsupportedNode, "maxpool '" + n.id + "' over accumulators");
            kinds.insert(codes ? "pool_u8" : "pool_f32");
            const Buffer out = declare(codes ? Buffer::Codes : Buffer::F32, base + "_out", n.output.elements());
            body << "  " << (codes ? "bq_maxpool_u8(" : "bq_maxpool_f32(") << cur.name << ", " << shape.height << ", "
                 << shape.width << ", " << shape.depth << ", " << n.window << ", " << n.stride << ", " << out.name
                 << ");\n";
            cur = out;
            shape = n.output;
          } else {
            if (cur.kind == Buffer::Codes) {
              body << "  for (i = 0; i < " << cur.elements << "; ++i) out[i] = (float)(bq_f64(" << hex64(n.step)
                   << ") * (double)" << cur.name << "[i]);\n";
            } else if (cur.kind == Buffer::F32) {
              body << "  memcpy(out, " << cur.name << ", sizeof(float) * " << cur.elements << ");\n";
            } else {
              throw Error(ErrorCode::UnsupportedNode, "output '" + n.id + "' reads raw accumulators");
            }
          }
        },
        node);
  }

  std::ostringstream src;
  src << "/* Inference unit generated by bqnn. */\n"
      << "#include <math.h>\n#include <stdint.h>\n#include <string.h>\n\n"
      << "#define BQNN_INPUT_HEIGHT " << lg.input.height << "\n"
      << "#define BQNN_INPUT_WIDTH " << lg.input.width << "\n"
      << "#define BQNN_INPUT_DEPTH " << lg.input.depth << "\n"
      << "#define BQNN_OUTPUT_ELEMENTS " << cur.elements << "\n\n"
      << "int bqnn_infer(const float* image, float* out);\n\n"
      ;
  const bool windows = kinds.count("binconv") || kinds.count("conv_f32");
  const bool doubles = kinds.count("conv_f32") || kinds.count("epilogue") || kinds.count("quantize") ||
                       body.str().find("bq_f64") != std::string::npos;
  if (doubles) src << kF64;
  if (windows) src << kWindow;
  if (kinds.count("binconv")) src << kPopcount;
  if (kinds.count("threshold")) src << kThreshold;
  if (kinds.count("epilogue")) src << kEpilogue;
  if (kinds.count("conv_f32")) src << kConvF32;
  if (kinds.count("quantize")) src << kQuantize;
  if (kinds.count("pool_u8")) src << kPoolU8;
  if (kinds.count("pool_f32")) src << kPoolF32;
  src << '\n' << data.str() << '\n' << bufs.str() << '\n';
  src << "int bqnn_infer(const float* image, float* out) {\n  long i;\n"
      << body.str() << "  (void)i;\n  (void)image;\n  return 0;\n}\n";
  return src.str();
}

}  // namespace bqnn
