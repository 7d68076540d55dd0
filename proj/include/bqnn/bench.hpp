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

#ifndef BQNN_BENCH_HPP_
#define BQNN_BENCH_HPP_

#include <string>
#include <vector>

#include "bqnn/model_ir.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

struct Timing {
  std::vector<double> samples;  // seconds, one per repeat
  double median = 0.0;
  double min = 0.0;
};

Timing summarize(std::vector<double> samples);

// Wall-clock per operation kind, summed over the layers of that kind in one
// network run. Rows: binconv, threshold, maxpool, conv_f32, quantize.
struct OpRow {
  std::string op;
  int layers = 0;
  Timing timing;
};

// Packed binary convolution against the dense f32 convolution of the same
// shape (dequantized codes, +-1 weights as floats).
struct KernelComparison {
  std::string node;
  Timing packed;
  Timing dense;
  double speedup = 0.0;  // dense median / packed median
};

struct BenchReport {
  int repeats = 0;
  int threads = 1;
  std::vector<OpRow> ops;
  Timing total;
  std::vector<KernelComparison> kernels;
};

BenchReport bench_network(const LoweredGraph& lg, const TensorBlob& image, int repeats, int threads,
                          bool compare_kernels = false);

KernelComparison compare_kernel(const LoweredBinConv& layer, int repeats, int threads, std::uint64_t seed = 1);

Json to_json(const BenchReport& r);
std::string to_text(const BenchReport& r);

}  // namespace bqnn

#endif  // BQNN_BENCH_HPP_
