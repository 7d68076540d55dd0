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

#ifndef BQNN_ENGINE_HPP_
#define BQNN_ENGINE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bqnn/layout_pack.hpp"
#include "bqnn/tensor.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

// i32 accumulators of a binary convolution, depth-innermost.
using AccumulatorMap = TensorBlob;

// Naive u2 x bin1 convolution. `weights` holds Od kernels (desc.count = Od);
// either layout is accepted for both operands. Padded taps read code 0.
AccumulatorMap binconv_reference(const TensorBlob& acts, const TensorBlob& weights, std::int64_t stride,
                                 std::int64_t pad);

// Packed convolution: per word and activation plane p,
//   acc += (2*popcount(a_p & w) - popcount(a_p)) << p.
AccumulatorMap binconv_packed(const PackedTensor& acts, const PackedTensor& weights, std::int64_t stride,
                              std::int64_t pad, int threads = 1);

TensorBlob apply_thresholds(const AccumulatorMap& acc, const ThresholdUnit& th);

// f32 map float(acc * scale[c] + offset[c]).
TensorBlob apply_epilogue(const AccumulatorMap& acc, const AffineFold& epilogue);

TensorBlob maxpool_u2(const TensorBlob& t, std::int64_t window, std::int64_t stride);
TensorBlob maxpool_f32(const TensorBlob& t, std::int64_t window, std::int64_t stride);

// Dense convolution accumulated in double in (kh, kw, kd) order and rounded to
// f32 at store. u2 input is read as input_step * code. An empty epilogue
// stores float(acc).
TensorBlob conv_f32(const TensorBlob& acts, const TensorBlob& weights, const ConvGeometry& geom,
                    const AffineFold& epilogue = {}, double input_step = 0.0, int threads = 1);

// Codes quantize_real(leaky(scale*x + offset), step) of an f32 map.
TensorBlob quantize(const TensorBlob& x, const AffineFold& affine, std::optional<double> leaky_slope, double step);

struct OpTiming {
  std::string node;
  std::string op;  // binconv, threshold, maxpool, conv_f32, quantize, output
  double seconds = 0.0;
};

struct RunOptions {
  int threads = 1;
  // Record the u2 code map produced for every trained-graph node named by an `origin`.
  bool trace_codes = false;
  bool time_ops = false;
};

struct RunResult {
  TensorBlob output;                         // f32, depth-innermost
  std::map<std::string, TensorBlob> codes;  // origin -> u2 map, depth-innermost
  std::vector<OpTiming> timings;
};

RunResult run_network(const LoweredGraph& lg, const TensorBlob& image, const RunOptions& options = {});

}  // namespace bqnn

#endif  // BQNN_ENGINE_HPP_
