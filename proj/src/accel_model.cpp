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

#include "bqnn/accel_model.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "bqnn/error.hpp"

namespace bqnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::vector<const LoweredBinConv*> binconv_layers(const LoweredGraph& lg) {
  std::vector<const LoweredBinConv*> out;
  for (const auto& n : lg.nodes)
    if (const auto* b = std::get_if<LoweredBinConv>(&n)) out.push_back(b);
  return out;
}

void accumulate(LayerEstimate& total, const LayerEstimate& e) {
  total.compute_cycles += e.compute_cycles;
  total.mem_transactions += e.mem_transactions;
  total.mem_beats += e.mem_beats;
  total.mem_cycles += e.mem_cycles;
  total.bound += e.bound;
  total.total_runs += e.total_runs;
}

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::int64_t layer_working_set(const LoweredBinConv& layer, std::int64_t P) {
  const std::int64_t in_words = ceil_div(layer.input.depth, kWordBits);
  const std::int64_t k_words = ceil_div(layer.weights.desc.depth, kWordBits);
  const std::int64_t stripe = layer.geom.kernel_h * layer.input.width * in_words * 4 * 2;
  const std::int64_t kernels = P * layer.geom.kernel_h * layer.geom.kernel_w * k_words * 4;
  const std::int64_t accumulators = P * 4;
  return stripe + kernels + accumulators;
}

AccelConfig choose_pen(const LoweredGraph& lg, const AccelConfig& budget) {
  const auto layers = binconv_layers(lg);
  if (layers.empty()) throw Error(ErrorCode::NoLegalPen, "network has no binarized layers to map onto the PEN");
  std::int64_t min_depth = std::numeric_limits<std::int64_t>::max();
  for (const auto* l : layers) min_depth = std::min(min_depth, l->input.depth);

  auto legal = [&](std::int64_t P) {
    return std::all_of(layers.begin(), layers.end(), [&](const LoweredBinConv* l) { return l->output.depth % P == 0; });
  };
  auto working_set = [&](std::int64_t P) {
    std::int64_t ws = 0;
    for (const auto* l : layers) ws = std::max(ws, layer_working_set(*l, P));
    return ws;
  };

  std::vector<std::int64_t> candidates;
  for (std::int64_t P = 16; P <= min_depth; P *= 2)
    if (legal(P)) candidates.push_back(P);
  if (candidates.empty())
    throw Error(ErrorCode::NoLegalPen, "no power of two in [16, " + std::to_string(min_depth) +
                                           "] divides every binarized layer's output depth");
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    if (working_set(*it) <= budget.local_mem_budget) {
      AccelConfig cfg = budget;
      cfg.num_parallel_kernels = *it;
      return cfg;
    }
  }
  throw Error(ErrorCode::BudgetTooSmall, "local memory budget " + std::to_string(budget.local_mem_budget) +
                                             " bytes is below the " + std::to_string(working_set(candidates.front())) +
                                             " bytes needed at P=" + std::to_string(candidates.front()));
}

WindowTraffic window_traffic(std::span<const AddressRun> runs, const BurstConfig& burst, std::int64_t element_bits) {
  const std::int64_t beat_bits = burst.bytes_per_beat * 8;
  WindowTraffic t;
  for (const auto& r : runs) {
    if (r.length() <= 0) continue;
    const std::int64_t first = r.begin * element_bits / beat_bits;
    const std::int64_t last = (r.end * element_bits - 1) / beat_bits;
    const std::int64_t beats = last - first + 1;
    t.beats += beats;
    t.transactions += ceil_div(beats, burst.max_burst_beats);
  }
  return t;
}

LayerEstimate estimate_conv(const std::string& node, const TensorDesc& input, const TensorDesc& kernel,
                            std::int64_t stride, std::int64_t pad, const AccelConfig& cfg, ScanOrder ordering) {
  if (cfg.num_parallel_kernels < 1 || cfg.pe_word_bits < 1 || cfg.burst.max_burst_beats < 1 ||
      cfg.burst.bytes_per_beat < 1)
    throw Error(ErrorCode::Internal, "accelerator configuration values must be positive");
  const RunStats stats = address_runs(input, kernel, ordering, stride, pad);
  const ConvGeometry geom{kernel.height, kernel.width, stride, pad};
  const std::int64_t oh = geom.out_height(input.height);
  const std::int64_t ow = geom.out_width(input.width);

  LayerEstimate e;
  e.node = node;
  e.ordering = ordering;
  e.compute_cycles = oh * ow * ceil_div(kernel.count, cfg.num_parallel_kernels) * kernel.height * kernel.width *
                     ceil_div(kernel.depth, cfg.pe_word_bits);
  e.runs_per_window = stats.runs_per_window;
  e.total_runs = stats.total_runs;
  for_each_window(input, kernel, ordering, stride, pad,
                  [&](std::int64_t, std::int64_t, std::span<const AddressRun> runs) {
                    const WindowTraffic t = window_traffic(runs, cfg.burst);
                    e.mem_transactions += t.transactions;
                    e.mem_beats += t.beats;
                  });
  e.mem_cycles = e.mem_transactions * cfg.burst.issue_latency_cycles + e.mem_beats;
  e.bound = std::max(e.compute_cycles, e.mem_cycles);
  return e;
}

LayerEstimate estimate_layer(const LoweredNode& layer, const AccelConfig& cfg, ScanOrder ordering) {
  const auto* b = std::get_if<LoweredBinConv>(&layer);
  if (!b) throw Error(ErrorCode::NotBinarizedLayer, "'" + lowered_id(layer) + "' is not a binarized convolution");
  return estimate_conv(b->id, b->input, b->weights.desc, b->geom.stride, b->geom.pad, cfg, ordering);
}

OrderingReport compare_orderings(const LoweredGraph& lg, const AccelConfig& cfg) {
  OrderingReport r;
  r.config = cfg;
  r.total_depth_innermost.node = "total";
  r.total_depth_innermost.ordering = ScanOrder::DepthInnermost;
  r.total_width_innermost.node = "total";
  r.total_width_innermost.ordering = ScanOrder::WidthInnermost;
  for (const auto& n : lg.nodes) {
    if (!std::holds_alternative<LoweredBinConv>(n)) continue;
    LayerComparison c;
    c.node = lowered_id(n);
    c.depth_innermost = estimate_layer(n, cfg, ScanOrder::DepthInnermost);
    c.width_innermost = estimate_layer(n, cfg, ScanOrder::WidthInnermost);
    c.transaction_ratio = ratio(c.width_innermost.mem_transactions, c.depth_innermost.mem_transactions);
    accumulate(r.total_depth_innermost, c.depth_innermost);
    accumulate(r.total_width_innermost, c.width_innermost);
    r.layers.push_back(std::move(c));
  }
  r.transaction_ratio = ratio(r.total_width_innermost.mem_transactions, r.total_depth_innermost.mem_transactions);
  return r;
}

Json to_json(const LayerEstimate& e) {
  return Json{{"node", e.node},
              {"ordering", std::string(to_string(e.ordering))},
              {"compute_cycles", e.compute_cycles},
              {"mem_transactions", e.mem_transactions},
              {"mem_beats", e.mem_beats},
              {"mem_cycles", e.mem_cycles},
              {"bound", e.bound},
              {"runs_per_window", e.runs_per_window},
              {"total_runs", e.total_runs}};
}

Json to_json(const OrderingReport& r, const std::string& orderings) {
  const bool depth = orderings != "width";
  const bool width = orderings != "depth";
  Json layers = Json::array();
  for (const auto& l : r.layers) {
    Json j{{"node", l.node}};
    if (depth) j["depth_innermost"] = to_json(l.depth_innermost);
    if (width) j["width_innermost"] = to_json(l.width_innermost);
    if (depth && width) j["transaction_ratio"] = l.transaction_ratio;
    layers.push_back(std::move(j));
  }
  Json totals = Json::object();
  if (depth) totals["depth_innermost"] = to_json(r.total_depth_innermost);
  if (width) totals["width_innermost"] = to_json(r.total_width_innermost);
  if (depth && width) totals["transaction_ratio"] = r.transaction_ratio;
  return Json{{"config",
               {{"pe_word_bits", r.config.pe_word_bits},
                {"num_parallel_kernels", r.config.num_parallel_kernels},
                {"local_mem_budget", r.config.local_mem_budget},
                {"issue_latency_cycles", r.config.burst.issue_latency_cycles},
                {"max_burst_beats", r.config.burst.max_burst_beats},
                {"bytes_per_beat", r.config.burst.bytes_per_beat}}},
              {"layers", layers},
              {"totals", totals}};
}

std::string to_csv(const OrderingReport& r, const std::string& orderings) {
  std::ostringstream out;
  out << "node,ordering,compute_cycles,mem_transactions,mem_beats,mem_cycles,bound,runs_per_window,total_runs\n";
  auto row = [&](const LayerEstimate& e) {
    out << e.node << ',' << to_string(e.ordering) << ',' << e.compute_cycles << ',' << e.mem_transactions << ','
        << e.mem_beats << ',' << e.mem_cycles << ',' << e.bound << ',' << e.runs_per_window << ',' << e.total_runs
        << '\n';
  };
  for (const auto& l : r.layers) {
    if (orderings != "width") row(l.depth_innermost);
    if (orderings != "depth") row(l.width_innermost);
  }
  if (orderings != "width") row(r.total_depth_innermost);
  if (orderings != "depth") row(r.total_width_innermost);
  return out.str();
}

}  // namespace bqnn
