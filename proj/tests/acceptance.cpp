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


// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//   acceptance                 all criteria
//   acceptance --criterion N   criterion N only

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "simulator.hpp"

#include "bqnn/accel_model.hpp"
#include "bqnn/bench.hpp"
#include "bqnn/codegen.hpp"
#include "bqnn/engine.hpp"
#include "bqnn/fixtures.hpp"
#include "bqnn/layout_pack.hpp"
#include "bqnn/transform.hpp"

using namespace bqnn;

namespace {

constexpr std::uint64_t kSeed = 42;
constexpr double kTargetDenseMB = 255.82;
constexpr double kDenseTolerance = 0.02;
constexpr double kRatioLow = 29.0;
constexpr double kRatioHigh = 32.0;
constexpr int kTraceShapes = 200;
constexpr int kPackedLayers = 200;
constexpr int kTinyGraphs = 20;
constexpr int kCodegenTinyGraphs = 5;
constexpr double kMinSpeedup = 4.0;
constexpr int kBenchRepeats = 3;
constexpr double kFlowSeconds = 60.0;
constexpr double kOneMinute = 60.0;
constexpr double kFiveMinutes = 300.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* name;
  double time_limit_s;
  std::function<Verdict()> check;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

TensorDesc f32_kernel(std::int64_t k, std::int64_t in, std::int64_t out) {
  return TensorDesc{k, k, in, out, DType::F32, Layout::HeightInnermost};
}

Verdict compression_ratio() {
  const Graph g = make_fixture("darknet19_320", kSeed);
  const SizeReport r = model_size_report(g, lower_graph(g));
  const double dense_mb = static_cast<double>(r.dense_total) / 1e6;
  const double dense_mib = static_cast<double>(r.dense_total) / (1024.0 * 1024.0);
  const bool dense_ok = std::abs(dense_mb - kTargetDenseMB) <= kDenseTolerance * kTargetDenseMB;
  const bool ratio_ok = r.ratio >= kRatioLow && r.ratio <= kRatioHigh;

  std::mt19937_64 rng(kSeed);
  GraphBuilder b;
  std::string x = b.input(1, 1, 32);
  x = b.quantize(x, 1.0);
  b.output(b.conv(x, oracle::random_normals(f32_kernel(1, 32, 32), rng), 1, 0, true));
  const Graph single = b.build();
  const SizeReport s = model_size_report(single, lower_graph(single));
  const bool single_ok = s.ratio == 32.0;

  return {dense_ok && ratio_ok && single_ok,
          "darknet19_320 dense " + std::to_string(r.dense_total) + " B (" + fmt(dense_mb) + " MB, " +
              fmt(dense_mib) + " MiB; want " + fmt(kTargetDenseMB) + " MB +-" + fmt(kDenseTolerance * 100, 0) +
              "%), packed " + std::to_string(r.packed_total) + " B, ratio " + fmt(r.ratio, 3) + " (want [" +
              fmt(kRatioLow, 0) + ", " + fmt(kRatioHigh, 0) + "]); single binarized layer ratio " + fmt(s.ratio, 3) +
              " (want exactly 32)"};
}

Verdict jump_counts() {
  std::ostringstream detail;
  bool ok = true;
  for (std::int64_t kd : {16, 32, 64}) {
    const TensorDesc in{20, 20, kd, 1, DType::U2};
    const TensorDesc k{3, 3, kd, 32, DType::Bin1};
    const RunStats w = address_runs(in, k, ScanOrder::WidthInnermost, 1, 1);
    const RunStats d = address_runs(in, k, ScanOrder::DepthInnermost, 1, 1);
    ok = ok && w.interior && d.interior && w.runs_per_window == 3 * kd && d.runs_per_window == 3;
    detail << "Kd=" << kd << ": width " << w.runs_per_window << " (want " << 3 * kd << "), depth "
           << d.runs_per_window << " (want 3); ";
  }
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<std::int64_t> hw(1, 12), depth(1, 80), kern(1, 4), stride(1, 2), pad(0, 2);
  int mismatches = 0, shapes = 0;
  while (shapes < kTraceShapes) {
    const TensorDesc in{hw(rng), hw(rng), depth(rng), 1, DType::U2};
    const TensorDesc k{kern(rng), kern(rng), in.depth, 4, DType::Bin1};
    const std::int64_t s = stride(rng), p = pad(rng);
    if (k.height > in.height + 2 * p || k.width > in.width + 2 * p) continue;
    for (ScanOrder order : {ScanOrder::DepthInnermost, ScanOrder::WidthInnermost, ScanOrder::HeightInnermost}) {
      const RunStats got = address_runs(in, k, order, s, p);
      const oracle::TraceStats want = oracle::brute_force_runs(in, k, order, s, p);
      mismatches += got.runs_per_window != want.runs_per_window || got.total_runs != want.total_runs ||
                    got.windows != want.windows || got.run_lengths != want.run_lengths;
    }
    ++shapes;
  }
  detail << shapes << " random shapes x 3 orders vs brute-force trace: " << mismatches << " mismatches";
  return {ok && mismatches == 0, detail.str()};
}

Verdict packed_exactness() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<std::int64_t> depth(16, 128), od(1, 24), hw(1, 12);
  int mismatches = 0;
  for (int i = 0; i < kPackedLayers; ++i) {
    const std::int64_t k = i % 2 == 0 ? 1 : 3;
    const std::int64_t id = depth(rng);
    const TensorDesc in{hw(rng), hw(rng), id, 1, DType::U2, Layout::DepthInnermost};
    const TensorDesc kd{k, k, id, od(rng), DType::Bin1, Layout::DepthInnermost};
    const std::int64_t pad = k == 3 ? static_cast<std::int64_t>(rng() % 2) : 0;
    const std::int64_t stride = 1 + static_cast<std::int64_t>(rng() % 2);
    if (in.height + 2 * pad < k || in.width + 2 * pad < k) {
      --i;
      continue;
    }
    const TensorBlob acts = oracle::random_codes(in, rng);
    const TensorBlob w = oracle::random_signs(kd, rng);
    const AccumulatorMap ref = binconv_reference(acts, w, stride, pad);
    const AccumulatorMap got = binconv_packed(bitpack(acts), bitpack(w), stride, pad);
    mismatches += !ref.identical(got);
  }
  return {mismatches == 0, std::to_string(kPackedLayers) + " random layers (depth 16-128, 1x1 and 3x3): " +
                               std::to_string(mismatches) + " mismatches"};
}

// Count of code maps that differ between the lowered engine and the simulator.
int code_mismatches(const Graph& g, std::uint64_t image_seed, std::size_t& maps) {
  const TensorBlob image = random_image(g, image_seed);
  RunOptions opts;
  opts.trace_codes = true;
  const RunResult run = run_network(lower_graph(g), image, opts);
  const sim::SimResult want = sim::simulate(g, image);
  int bad = run.codes.size() != want.codes.size();
  for (const auto& [id, codes] : want.codes) {
    const auto it = run.codes.find(id);
    bad += it == run.codes.end() || !it->second.identical(codes);
  }
  maps += want.codes.size();
  return bad;
}

Verdict lowering_soundness() {
  std::size_t maps = 0;
  int bad = 0;
  for (int seed = 0; seed < kTinyGraphs; ++seed) bad += code_mismatches(random_tiny_graph(seed), seed + 100, maps);
  const std::size_t tiny_maps = maps;
  bad += code_mismatches(make_fixture("darknet19_320", kSeed), kSeed, maps);
  return {bad == 0, std::to_string(kTinyGraphs) + " random tiny graphs (" + std::to_string(tiny_maps) +
                        " code maps) + darknet19_320 (" + std::to_string(maps - tiny_maps) +
                        " code maps) vs explicit-quantizer simulator: " + std::to_string(bad) + " differing maps"};
}

Verdict codegen_differential() {
  struct Case {
    std::string name;
    Graph graph;
  };
  std::vector<Case> cases{{"toy", make_fixture("toy", kSeed)},
                          {"darknet19_320", make_fixture("darknet19_320", kSeed)},
                          {"hand", oracle::hand_net({1.0, -1.0})},
                          {"minimal", oracle::minimal_net(kSeed)}};
  for (int i = 0; i < kCodegenTinyGraphs; ++i)
    cases.push_back({"tiny" + std::to_string(i), random_tiny_graph(static_cast<std::uint64_t>(i))});
  std::ostringstream detail;
  bool ok = true;
  for (const auto& c : cases) {
    const LoweredGraph lg = lower_graph(c.graph);
    const TensorBlob image = random_image(lg.input, kSeed);
    const RunResult want = run_network(lg, image);
    std::string notice;
    const auto got = oracle::run_emitted_c(emit_inference_source(lg), image.f32(), want.output.size(), notice);
    if (!got) return {true, "SKIPPED: " + notice};
    const bool same = got->size() == want.output.size() &&
                      std::memcmp(got->data(), want.output.f32().data(), got->size() * sizeof(float)) == 0;
    ok = ok && same;
    detail << c.name << (same ? " bit-exact; " : " MISMATCH; ");
  }
  return {ok, detail.str()};
}

Verdict ordering_dominance() {
  const LoweredGraph lg = lower_graph(make_fixture("darknet19_320", kSeed));
  const OrderingReport r = compare_orderings(lg, choose_pen(lg, AccelConfig{}));
  bool ok = true;
  int spatial = 0;
  double min_ratio = 1e300;
  for (const auto& l : r.layers) {
    const auto& b = std::get<LoweredBinConv>(*std::find_if(lg.nodes.begin(), lg.nodes.end(), [&](const LoweredNode& n) {
      return lowered_id(n) == l.node;
    }));
    if (b.geom.kernel_h * b.geom.kernel_w <= 1) continue;
    ++spatial;
    ok = ok && l.depth_innermost.mem_transactions < l.width_innermost.mem_transactions;
    min_ratio = std::min(min_ratio, l.transaction_ratio);
  }
  return {ok && spatial > 0, std::to_string(spatial) + " binconv layers with Kh*Kw>1, min width/depth transaction ratio " +
                                 fmt(min_ratio) + ", network ratio " + fmt(r.transaction_ratio)};
}

Verdict packed_speed() {
  const std::string dir = oracle::scratch_dir("acceptance_bench");
  const std::string model = dir + "/darknet.bqn";
  write_model_file(model, lowered_to_graph(lower_graph(make_fixture("darknet19_320", kSeed))));
  std::string out;
  const std::string cmd = std::string(BQNN_CLI_PATH) + " bench --model " + model + " --compare-f32 --repeats " +
                          std::to_string(kBenchRepeats) + " --threads 1 --format json";
  if (oracle::run_command(cmd, &out) != 0) return {false, "bench failed: " + out};
  const Json j = Json::parse(out);
  std::ostringstream detail;
  double min_speedup = 1e300;
  for (const auto& k : j.at("kernels")) {
    const double s = k.at("speedup").get<double>();
    min_speedup = std::min(min_speedup, s);
    detail << k.at("node").get<std::string>() << " " << fmt(s, 1) << "x; ";
  }
  const bool ok = !j.at("kernels").empty() && min_speedup >= kMinSpeedup;
  return {ok, "packed vs f32 median speedup per darknet19_320 binconv layer (want >= " + fmt(kMinSpeedup, 1) +
                  "x, min " + fmt(min_speedup, 1) + "x): " + detail.str()};
}

Verdict flow_latency() {
  const std::string dir = oracle::scratch_dir("acceptance_flow");
  const std::string bin = BQNN_CLI_PATH;
  const std::vector<std::string> steps{
      bin + " gen-fixture --arch darknet19_320 --seed 42 --out " + dir + "/d.bqn",
      bin + " compile --model " + dir + "/d.bqn --out " + dir + "/d.low.bqn",
      bin + " emit-c --model " + dir + "/d.low.bqn --out " + dir + "/d.c",
      bin + " accel-report --model " + dir + "/d.low.bqn --out " + dir + "/d.json"};
  const auto t0 = Clock::now();
  for (const auto& s : steps) {
    std::string out;
    if (oracle::run_command(s, &out) != 0) return {false, "step failed: " + s + "\n" + out};
  }
  const double elapsed = seconds_since(t0);
  return {elapsed < kFlowSeconds, "gen-fixture -> compile -> emit-c -> accel-report on darknet19_320 took " +
                                      fmt(elapsed) + " s (want < " + fmt(kFlowSeconds, 0) + " s)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bqnn acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "compression ratio", kOneMinute, compression_ratio},
      {2, "jump counts", kOneMinute, jump_counts},
      {3, "packed-kernel exactness", kFiveMinutes, packed_exactness},
      {4, "lowering soundness", kFiveMinutes, lowering_soundness},
      {5, "codegen differential", kFiveMinutes, codegen_differential},
      {6, "ordering dominance", kOneMinute, ordering_dominance},
      {7, "packed-vs-float speed", kFiveMinutes, packed_speed},
      {8, "flow latency", kFlowSeconds, flow_latency},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    while (!v.detail.empty() && (v.detail.back() == ' ' || v.detail.back() == ';')) v.detail.pop_back();
    const bool in_time = elapsed < c.time_limit_s;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.number << " (" << c.name << "): " << v.detail
              << " [" << fmt(elapsed) << " s, limit " << fmt(c.time_limit_s, 0) << " s" << (in_time ? "" : ", EXCEEDED")
              << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
