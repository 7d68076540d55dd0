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

#include "bqnn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "bqnn/engine.hpp"
#include "bqnn/error.hpp"

namespace bqnn {

namespace {

const char* const kOps[] = {"binconv", "threshold", "maxpool", "conv_f32", "quantize"};

template <typename F>
double time_once(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count();
}

Json timing_json(const Timing& t) {
  return Json{{"median_ms", t.median * 1e3}, {"min_ms", t.min * 1e3}, {"samples_ms", [&] {
                 Json a = Json::array();
                 for (double s : t.samples) a.push_back(s * 1e3);
                 return a;
               }()}};
}

}  // namespace

Timing summarize(std::vector<double> samples) {
  Timing t;
  t.samples = samples;
  if (samples.empty()) return t;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  t.median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  t.min = samples.front();
  return t;
}

BenchReport bench_network(const LoweredGraph& lg, const TensorBlob& image, int repeats, int threads,
                          bool compare_kernels) {
  if (repeats < 1) throw Error(ErrorCode::Internal, "repeats must be >= 1");
  BenchReport r;
  r.repeats = repeats;
  r.threads = threads;
  std::map<std::string, std::vector<double>> per_op;
  std::map<std::string, int> layers;
  std::vector<double> totals;
  for (int rep = 0; rep < repeats; ++rep) {
    RunOptions options;
    options.threads = threads;
    options.time_ops = true;
    RunResult result;
    totals.push_back(time_once([&] { result = run_network(lg, image, options); }));
    std::map<std::string, double> sums;
    std::map<std::string, int> counts;
    for (const auto& t : result.timings) {
      sums[t.op] += t.seconds;
      ++counts[t.op];
    }
    for (const char* op : kOps) per_op[op].push_back(sums[op]);
    layers = counts;
  }
  for (const char* op : kOps) r.ops.push_back({op, layers[op], summarize(per_op[op])});
  r.total = summarize(totals);
  if (compare_kernels)
    for (const auto& n : lg.nodes)
      if (const auto* b = std::get_if<LoweredBinConv>(&n)) r.kernels.push_back(compare_kernel(*b, repeats, threads));
  return r;
}

KernelComparison compare_kernel(const LoweredBinConv& layer, int repeats, int threads, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> code(0, 3);
  TensorDesc in = layer.input;
  in.dtype = DType::U2;
  in.layout = Layout::DepthInnermost;
  std::vector<std::int8_t> codes(static_cast<std::size_t>(in.elements()));
  for (auto& c : codes) c = static_cast<std::int8_t>(code(rng));
  const TensorBlob acts(in, std::move(codes));
  const PackedTensor packed_acts = bitpack(acts);

  // Same kernels as +-1 floats.
  const TensorBlob signs = unpack(layer.weights);
  TensorDesc wd = signs.desc();
  wd.dtype = DType::F32;
  std::vector<float> wf(signs.codes().begin(), signs.codes().end());
  const TensorBlob dense_weights(wd, std::move(wf));
  const double step = layer.input_step > 0.0 ? layer.input_step : 1.0;

  std::vector<double> packed, dense;
  for (int rep = 0; rep < repeats; ++rep) {
    packed.push_back(time_once([&] { binconv_packed(packed_acts, layer.weights, layer.geom.stride, layer.geom.pad, threads); }));
    dense.push_back(time_once([&] { conv_f32(acts, dense_weights, layer.geom, {}, step, threads); }));
  }
  KernelComparison k;
  k.node = layer.id;
  k.packed = summarize(packed);
  k.dense = summarize(dense);
  k.speedup = k.packed.median > 0.0 ? k.dense.median / k.packed.median : 0.0;
  return k;
}

Json to_json(const BenchReport& r) {
  Json ops = Json::array();
  for (const auto& o : r.ops) {
    Json j = timing_json(o.timing);
    j["op"] = o.op;
    j["layers"] = o.layers;
    ops.push_back(std::move(j));
  }
  Json kernels = Json::array();
  for (const auto& k : r.kernels)
    kernels.push_back({{"node", k.node}, {"packed", timing_json(k.packed)}, {"dense_f32", timing_json(k.dense)},
                       {"speedup", k.speedup}});
  return Json{{"repeats", r.repeats}, {"threads", r.threads}, {"ops", ops}, {"total", timing_json(r.total)},
              {"kernels", kernels}};
}

std::string to_text(const BenchReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %7s %12s %12s\n", "op", "layers", "median_ms", "min_ms");
  out << line;
  for (const auto& o : r.ops) {
    std::snprintf(line, sizeof line, "%-10s %7d %12.3f %12.3f\n", o.op.c_str(), o.layers, o.timing.median * 1e3,
                  o.timing.min * 1e3);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-10s %7s %12.3f %12.3f\n", "total", "", r.total.median * 1e3, r.total.min * 1e3);
  out << line;
  if (!r.kernels.empty()) {
    std::snprintf(line, sizeof line, "\n%-12s %14s %14s %9s\n", "layer", "packed_ms", "dense_f32_ms", "speedup");
    out << line;
    for (const auto& k : r.kernels) {
      std::snprintf(line, sizeof line, "%-12s %14.3f %14.3f %8.1fx\n", k.node.c_str(), k.packed.median * 1e3,
                    k.dense.median * 1e3, k.speedup);
      out << line;
    }
  }
  return out.str();
}

}  // namespace bqnn
