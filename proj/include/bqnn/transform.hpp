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

#ifndef BQNN_TRANSFORM_HPP_
#define BQNN_TRANSFORM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bqnn/layout_pack.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/tensor.hpp"

namespace bqnn {

// Unsigned 2-bit activation quantizer: clamp(round_half_up(r / step), 0, 3).
inline int quantize_real(double r, double step) {
  const double q = std::floor(r / step + 0.5);
  if (!(q > 0.0)) return 0;  // also maps NaN to 0
  return q >= 3.0 ? 3 : static_cast<int>(q);
}

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

// Per-output-channel r = scale[c] * y + offset[c]. An empty fold is the identity.
struct AffineFold {
  std::vector<double> scale;
  std::vector<double> offset;

  std::size_t channels() const { return scale.size(); }
  bool empty() const { return scale.empty(); }
  bool operator==(const AffineFold&) const = default;
};

enum class Direction : std::uint8_t { Increasing, Decreasing };

// Integer cut-points replacing the affine chain + activation + quantizer that
// sits between two binarized convolutions.
//   increasing: code = #{j : acc >= t_j},  t1 <= t2 <= t3
//   decreasing: code = #{j : acc <= t_j},  t1 >= t2 >= t3
struct ThresholdUnit {
  std::vector<std::array<std::int32_t, 3>> cut_points;
  std::vector<Direction> direction;

  std::size_t channels() const { return cut_points.size(); }
  int code(std::size_t channel, std::int64_t acc) const {
    const auto& t = cut_points[channel];
    if (direction[channel] == Direction::Increasing) return (acc >= t[0]) + (acc >= t[1]) + (acc >= t[2]);
    return (acc <= t[0]) + (acc <= t[1]) + (acc <= t[2]);
  }
  bool operator==(const ThresholdUnit&) const = default;
};

// Lowered pipeline -------------------------------------------------------------

// Dense convolution kept in floating point. Input is the f32 map, or u2 codes
// dequantized as input_step * code when input_step > 0. Output element is
// float(acc * scale + offset) under the epilogue, float(acc) without one.
struct LoweredConvF32 {
  std::string id;
  TensorDesc input;
  TensorDesc output;
  ConvGeometry geom;
  TensorBlob weights;  // f32, depth-innermost, count = output depth
  double input_step = 0.0;
  AffineFold epilogue;
};

// Real-valued activation -> u2 codes: quantize_real(leaky(scale*x + offset), step).
struct LoweredQuantize {
  std::string id;
  std::string origin;  // trained-graph node whose codes this reproduces, if any
  TensorDesc desc;
  AffineFold affine;
  std::optional<double> leaky_slope;
  double step = 1.0;
};

// Packed binary convolution over u2 codes. Produces i32 accumulators; when no
// threshold follows (final conv), the epilogue maps them to f32.
struct LoweredBinConv {
  std::string id;
  TensorDesc input;
  TensorDesc output;
  ConvGeometry geom;
  PackedTensor weights;  // bin1, count = output depth
  double input_step = 1.0;
  AffineFold epilogue;
};

struct LoweredThreshold {
  std::string id;
  std::string origin;
  TensorDesc desc;
  ThresholdUnit unit;
  double step = 1.0;  // real step of the codes produced
};

struct LoweredMaxPool {
  std::string id;
  std::string origin;
  TensorDesc input;
  TensorDesc output;
  std::int64_t window = 2;
  std::int64_t stride = 2;
  Domain domain = Domain::Codes;
};

// Final map; u2 codes are returned dequantized as step * code.
struct LoweredOutput {
  std::string id;
  TensorDesc desc;
  Domain domain = Domain::Real;
  double step = 0.0;
};

using LoweredNode =
    std::variant<LoweredConvF32, LoweredQuantize, LoweredBinConv, LoweredThreshold, LoweredMaxPool, LoweredOutput>;

struct LoweredGraph {
  std::string input_id;
  TensorDesc input;
  std::vector<LoweredNode> nodes;
};

const std::string& lowered_id(const LoweredNode& n);

// Graph rewrites ----------------------------------------------------------------

// Removes binarize_w markers, moving their weight blob onto the consuming conv
// and tagging it `binarized`.
Graph prune_weight_quant_subgraph(const Graph& g);

// Sign binarization with ties at 0 going to +1.
TensorBlob binarize_weights(const TensorBlob& w);

// Composes a run of batchnorm / scale / bias nodes, in graph order, into one
// per-channel affine map.
AffineFold fold_affine_chain(const std::vector<Node>& chain, std::int64_t channels);

// Cut-points for an integer accumulator feeding affine -> [leaky_relu] -> quantizer.
// `acc_bound` bounds |acc|; cut-points are exact for every integer in that range.
ThresholdUnit affine_to_thresholds(const AffineFold& a, double step, std::optional<double> leaky_slope = std::nullopt,
                                   std::int64_t acc_bound = std::int64_t{1} << 28);

LoweredGraph lower_graph(const Graph& g);

// LoweredGraph <-> lowered container graph (lowered: true).
Graph lowered_to_graph(const LoweredGraph& lg);
LoweredGraph graph_to_lowered(const Graph& g);

}  // namespace bqnn

#endif  // BQNN_TRANSFORM_HPP_
