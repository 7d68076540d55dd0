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

#ifndef BQNN_ACCEL_MODEL_HPP_
#define BQNN_ACCEL_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bqnn/layout_pack.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

struct BurstConfig {
  std::int64_t issue_latency_cycles = 10;  // L
  std::int64_t max_burst_beats = 16;       // B
  std::int64_t bytes_per_beat = 4;
};

struct AccelConfig {
  std::int64_t pe_word_bits = 32;
  std::int64_t num_parallel_kernels = 16;  // P, the PEN width
  std::int64_t local_mem_budget = std::int64_t{1} << 20;
  BurstConfig burst;
};

// Bits one activation element occupies in external memory (u2 codes).
constexpr std::int64_t kActivationBits = 2;

struct LayerEstimate {
  std::string node;
  ScanOrder ordering = ScanOrder::DepthInnermost;
  std::int64_t compute_cycles = 0;
  std::int64_t mem_transactions = 0;
  std::int64_t mem_beats = 0;
  std::int64_t mem_cycles = 0;  // transactions * L + beats
  std::int64_t bound = 0;       // max(compute_cycles, mem_cycles)
  std::int64_t runs_per_window = 0;
  std::int64_t total_runs = 0;
};

// Bytes of local memory one layer needs at PEN width P: an input stripe of Kh
// rows (both code planes), P kernel word sets and P accumulators.
std::int64_t layer_working_set(const LoweredBinConv& layer, std::int64_t P);

// Largest power of two P in [16, min input depth of the binarized layers] that
// divides every binarized layer's Od and whose working set fits the budget.
AccelConfig choose_pen(const LoweredGraph& lg, const AccelConfig& budget);

// Burst traffic of one output window's element runs. Every address jump starts
// a new burst; a run spanning n beats costs ceil(n / B) transactions.
struct WindowTraffic {
  std::int64_t transactions = 0;
  std::int64_t beats = 0;
};
WindowTraffic window_traffic(std::span<const AddressRun> runs, const BurstConfig& burst,
                             std::int64_t element_bits = kActivationBits);

LayerEstimate estimate_conv(const std::string& node, const TensorDesc& input, const TensorDesc& kernel,
                            std::int64_t stride, std::int64_t pad, const AccelConfig& cfg, ScanOrder ordering);

// Throws NotBinarizedLayer for anything but a binconv.
LayerEstimate estimate_layer(const LoweredNode& layer, const AccelConfig& cfg, ScanOrder ordering);

struct LayerComparison {
  std::string node;
  LayerEstimate depth_innermost;
  LayerEstimate width_innermost;
  double transaction_ratio = 0.0;  // width / depth
};

struct OrderingReport {
  AccelConfig config;
  std::vector<LayerComparison> layers;
  LayerEstimate total_depth_innermost;
  LayerEstimate total_width_innermost;
  double transaction_ratio = 0.0;
};

OrderingReport compare_orderings(const LoweredGraph& lg, const AccelConfig& cfg);

Json to_json(const LayerEstimate& e);
// `orderings` selects which variants appear: "depth", "width" or "both".
Json to_json(const OrderingReport& r, const std::string& orderings = "both");
std::string to_csv(const OrderingReport& r, const std::string& orderings = "both");

}  // namespace bqnn

#endif  // BQNN_ACCEL_MODEL_HPP_
