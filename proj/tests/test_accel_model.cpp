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


#include <random>
#include <sstream>

#include "oracles.hpp"
#include "testing.hpp"

#include "bqnn/accel_model.hpp"
#include "bqnn/fixtures.hpp"
#include "bqnn/transform.hpp"

using namespace bqnn;

namespace {

TensorBlob kernels(std::int64_t k, std::int64_t in, std::int64_t out, std::mt19937_64& rng) {
  return oracle::random_normals(TensorDesc{k, k, in, out, DType::F32, Layout::HeightInnermost}, rng);
}

// f32 conv (3 -> depths[0]), binarized convs through `depths`, then an f32 head.
LoweredGraph chain_net(const std::vector<std::int64_t>& depths, std::int64_t hw = 8, std::int64_t k = 3) {
  std::mt19937_64 rng(3);
  GraphBuilder b;
  std::string x = b.input(hw, hw, 3);
  x = b.quantize(b.conv(x, kernels(3, 3, depths[0], rng), 1, 1, false), 0.5);
  for (std::size_t i = 1; i < depths.size(); ++i)
    x = b.quantize(b.conv(x, kernels(k, depths[i - 1], depths[i], rng), 1, (k - 1) / 2, true), 4.0);
  b.output(b.conv(x, kernels(1, depths.back(), 4, rng), 1, 0, false));
  return lower_graph(b.build());
}

AccelConfig ample() {
  AccelConfig c;
  c.local_mem_budget = std::int64_t{1} << 40;
  return c;
}

}  // namespace

TEST_CASE("PEN width: the smallest input depth binds") {
  CHECK(choose_pen(chain_net({16, 32, 64, 64}), ample()).num_parallel_kernels == 16);
  CHECK(choose_pen(chain_net({128, 256, 128}), ample()).num_parallel_kernels == 128);
}

TEST_CASE("PEN width shrinks to fit the budget") {
  const LoweredGraph lg = chain_net({128, 256, 128});
  const auto& layer = std::get<LoweredBinConv>(lg.nodes[2]);
  CHECK(layer_working_set(layer, 16) == 3 * 8 * 4 * 4 * 2 + 16 * 9 * 4 * 4 + 16 * 4);
  AccelConfig tight;
  std::int64_t ws64 = 0;
  for (const auto& n : lg.nodes)
    if (const auto* b = std::get_if<LoweredBinConv>(&n)) ws64 = std::max(ws64, layer_working_set(*b, 64));
  tight.local_mem_budget = ws64;
  CHECK(choose_pen(lg, tight).num_parallel_kernels == 64);
  tight.local_mem_budget = 100;
  CHECK_ERROR_CODE(choose_pen(lg, tight), ErrorCode::BudgetTooSmall);
}

TEST_CASE("PEN width needs binarized layers") {
  std::mt19937_64 rng(1);
  GraphBuilder b;
  b.output(b.conv(b.input(4, 4, 3), kernels(3, 3, 8, rng), 1, 1, false));
  CHECK_ERROR_CODE(choose_pen(lower_graph(b.build()), ample()), ErrorCode::NoLegalPen);
}

TEST_CASE("compute cycles closed form") {
  AccelConfig cfg;
  const LayerEstimate e = estimate_conv("l", TensorDesc{10, 10, 32}, TensorDesc{3, 3, 32, 32}, 1, 1, cfg,
                                        ScanOrder::DepthInnermost);
  CHECK(e.compute_cycles == 10 * 10 * 2 * 9 * 1);
  CHECK(e.compute_cycles == 1800);
  CHECK(e.mem_cycles == e.mem_transactions * 10 + e.mem_beats);
  CHECK(e.bound == std::max(e.compute_cycles, e.mem_cycles));

  const LayerEstimate one = estimate_conv("l", TensorDesc{10, 10, 64}, TensorDesc{1, 1, 64, 32}, 1, 0, cfg,
                                          ScanOrder::WidthInnermost);
  CHECK(one.compute_cycles == 10 * 10 * 2 * 2);
}

TEST_CASE("doubling P halves compute cycles") {
  AccelConfig p16, p32;
  p32.num_parallel_kernels = 32;
  const TensorDesc in{20, 20, 64}, k{3, 3, 64, 128};
  CHECK(estimate_conv("l", in, k, 1, 1, p16, ScanOrder::DepthInnermost).compute_cycles ==
        2 * estimate_conv("l", in, k, 1, 1, p32, ScanOrder::DepthInnermost).compute_cycles);
}

TEST_CASE("1x1 conv on a 1x1 map: orderings tie") {
  const LoweredGraph lg = chain_net({16, 32}, 1, 1);
  const OrderingReport r = compare_orderings(lg, AccelConfig{});
  REQUIRE(r.layers.size() == 1);
  CHECK(r.layers[0].depth_innermost.mem_transactions == r.layers[0].width_innermost.mem_transactions);
  CHECK(r.transaction_ratio == 1.0);
}

TEST_CASE("3x3x64 at 320x320: about 64x fewer transactions depth-innermost") {
  AccelConfig cfg;
  const TensorDesc in{320, 320, 64}, k{3, 3, 64, 64};
  const LayerEstimate d = estimate_conv("l", in, k, 1, 1, cfg, ScanOrder::DepthInnermost);
  const LayerEstimate w = estimate_conv("l", in, k, 1, 1, cfg, ScanOrder::WidthInnermost);
  CHECK(d.runs_per_window == 3);
  CHECK(w.runs_per_window == 192);
  const double ratio = static_cast<double>(w.mem_transactions) / static_cast<double>(d.mem_transactions);
  MESSAGE("width/depth transaction ratio " << ratio);
  CHECK(ratio >= 63.0);
  CHECK(ratio <= 65.0);
}

TEST_CASE("transactions match the brute-force burst simulator") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> hw(1, 10), depth(1, 70);
  const std::int64_t bursts[] = {1, 2, 4, 16};
  const std::int64_t ks[] = {1, 2, 3, 5};
  int tested = 0;
  while (tested < 200) {
    const TensorDesc in{hw(rng), hw(rng), depth(rng), 1, DType::U2};
    const std::int64_t kh = ks[rng() % 4], kw = ks[rng() % 4];
    const std::int64_t pad = rng() % 2 ? (kw - 1) / 2 : 0, stride = 1 + static_cast<std::int64_t>(rng() % 2);
    if (kh > in.height + 2 * pad || kw > in.width + 2 * pad) continue;
    AccelConfig cfg;
    cfg.burst.max_burst_beats = bursts[rng() % 4];
    const TensorDesc k{kh, kw, in.depth, 8, DType::Bin1};
    for (ScanOrder order : {ScanOrder::DepthInnermost, ScanOrder::WidthInnermost, ScanOrder::HeightInnermost}) {
      const LayerEstimate e = estimate_conv("l", in, k, stride, pad, cfg, order);
      const oracle::Traffic t = oracle::brute_force_traffic(in, k, order, stride, pad, kActivationBits,
                                                            cfg.burst.bytes_per_beat, cfg.burst.max_burst_beats);
      REQUIRE(e.mem_transactions == t.transactions);
      REQUIRE(e.mem_beats == t.beats);
    }
    ++tested;
  }
}

TEST_CASE("depth-innermost order wins whenever the window has a seam") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> hw(4, 24), depth(2, 300);
  AccelConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const TensorDesc in{hw(rng), hw(rng), depth(rng), 1, DType::U2};
    const std::int64_t k = rng() % 2 ? 3 : 2;
    const TensorDesc kern{k, k, in.depth, 16, DType::Bin1};
    const LayerEstimate d = estimate_conv("l", in, kern, 1, 0, cfg, ScanOrder::DepthInnermost);
    const LayerEstimate w = estimate_conv("l", in, kern, 1, 0, cfg, ScanOrder::WidthInnermost);
    REQUIRE(d.mem_transactions < w.mem_transactions);
  }
}

TEST_CASE("estimates are pure") {
  const LoweredGraph lg = lower_graph(make_fixture("toy", 2));
  const Json a = to_json(compare_orderings(lg, AccelConfig{}));
  const Json b = to_json(compare_orderings(lg, AccelConfig{}));
  CHECK(a == b);
}

TEST_CASE("report totals are the per-layer sums") {
  const LoweredGraph lg = chain_net({16, 32, 32, 64}, 12);
  const OrderingReport r = compare_orderings(lg, AccelConfig{});
  REQUIRE(r.layers.size() == 3);
  LayerEstimate d, w;
  for (const auto& l : r.layers) {
    d.mem_transactions += l.depth_innermost.mem_transactions;
    d.compute_cycles += l.depth_innermost.compute_cycles;
    d.mem_beats += l.depth_innermost.mem_beats;
    w.mem_transactions += l.width_innermost.mem_transactions;
    w.bound += l.width_innermost.bound;
    CHECK(l.depth_innermost.mem_transactions < l.width_innermost.mem_transactions);
  }
  CHECK(r.total_depth_innermost.mem_transactions == d.mem_transactions);
  CHECK(r.total_depth_innermost.compute_cycles == d.compute_cycles);
  CHECK(r.total_depth_innermost.mem_beats == d.mem_beats);
  CHECK(r.total_width_innermost.mem_transactions == w.mem_transactions);
  CHECK(r.total_width_innermost.bound == w.bound);
  CHECK(r.transaction_ratio ==
        doctest::Approx(static_cast<double>(w.mem_transactions) / static_cast<double>(d.mem_transactions)));
}

TEST_CASE("only binarized layers are estimated") {
  const LoweredGraph lg = chain_net({16, 32});
  CHECK_ERROR_CODE(estimate_layer(lg.nodes[0], AccelConfig{}, ScanOrder::DepthInnermost), ErrorCode::NotBinarizedLayer);
  CHECK_NOTHROW(estimate_layer(lg.nodes[2], AccelConfig{}, ScanOrder::DepthInnermost));
}

TEST_CASE("JSON and CSV exports") {
  const OrderingReport r = compare_orderings(chain_net({16, 32, 32}), AccelConfig{});
  const Json both = to_json(r);
  CHECK(both.at("layers").size() == 2);
  CHECK(both.at("layers")[0].contains("depth_innermost"));
  CHECK(both.at("layers")[0].contains("width_innermost"));
  CHECK(both.at("totals").contains("transaction_ratio"));
  CHECK(both.at("config").at("num_parallel_kernels") == 16);
  const Json depth = to_json(r, "depth");
  CHECK_FALSE(depth.at("layers")[0].contains("width_innermost"));

  std::istringstream csv(to_csv(r));
  std::string line;
  int lines = 0;
  std::getline(csv, line);
  CHECK(line.rfind("node,ordering,compute_cycles", 0) == 0);
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 2 * 2 + 2);
  std::istringstream width(to_csv(r, "width"));
  lines = 0;
  while (std::getline(width, line)) ++lines;
  CHECK(lines == 1 + 2 + 1);
}
