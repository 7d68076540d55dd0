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

#include "oracles.hpp"
#include "testing.hpp"

#include "bqnn/fixtures.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/transform.hpp"

using namespace bqnn;

namespace {

TensorBlob kernels(std::int64_t k, std::int64_t in, std::int64_t out, std::mt19937_64& rng) {
  return oracle::random_normals(TensorDesc{k, k, in, out, DType::F32, Layout::HeightInnermost}, rng);
}

}  // namespace

TEST_CASE("single binarized conv: 32x") {
  std::mt19937_64 rng(1);
  GraphBuilder b;
  std::string x = b.quantize(b.input(1, 1, 32), 0.5);
  b.output(b.conv(x, kernels(1, 32, 32, rng), 1, 0, true));
  const Graph g = b.build();
  const SizeReport r = model_size_report(g, lower_graph(g));
  REQUIRE(r.layers.size() == 1);
  CHECK(r.layers[0].binarized);
  CHECK(r.layers[0].dense_bytes == 4096);
  CHECK(r.layers[0].packed_bytes == 128);
  CHECK(r.ratio == 32.0);
}

TEST_CASE("nothing quantized: ratio 1 up to parameter overhead") {
  std::mt19937_64 rng(1);
  GraphBuilder b;
  std::string x = b.conv(b.input(8, 8, 16), kernels(3, 16, 32, rng), 1, 1, false);
  b.output(b.bias(x, std::vector<double>(32, 0.1)));
  const Graph g = b.build();
  const SizeReport r = model_size_report(g, lower_graph(g));
  CHECK_FALSE(r.layers[0].binarized);
  CHECK(std::abs(r.ratio - 1.0) < 0.01);

  GraphBuilder bare;
  bare.output(bare.conv(bare.input(8, 8, 16), kernels(3, 16, 32, rng), 1, 1, false));
  const Graph h = bare.build();
  CHECK(model_size_report(h, lower_graph(h)).ratio == 1.0);
}

TEST_CASE("binarized layers count packed words plus threshold vectors") {
  const Graph g = make_fixture("toy", 42);
  const LoweredGraph lg = lower_graph(g);
  const SizeReport r = model_size_report(g, lg);
  REQUIRE(r.layers.size() == 4);
  std::int64_t dense = 0, packed = 0;
  for (const auto& l : r.layers) {
    dense += l.dense_bytes;
    packed += l.packed_bytes;
  }
  CHECK(dense == r.dense_total);
  CHECK(packed == r.packed_total);
  CHECK(r.ratio == doctest::Approx(static_cast<double>(dense) / static_cast<double>(packed)));
  // conv2: 3x3x16x32 weights, bn chain (4 params/channel); 16 bits of each D-bar are padding.
  CHECK(r.layers[1].node == "conv2");
  CHECK(r.layers[1].dense_bytes == 4 * (3 * 3 * 16 * 32 + 4 * 32));
  CHECK(r.layers[1].packed_bytes == 4 * 3 * 3 * 32 + 12 * 32);
}

TEST_CASE("darknet report is consistent") {
  const Graph g = make_fixture("darknet19_320", 42);
  const SizeReport r = model_size_report(g, lower_graph(g));
  CHECK(r.layers.size() == 19);
  int binarized = 0;
  for (const auto& l : r.layers) binarized += l.binarized;
  CHECK(binarized == 17);
  CHECK(r.ratio > 20.0);
  const Json j = to_json(r);
  CHECK(j.at("layers").size() == 19);
  CHECK(j.at("dense_total") == r.dense_total);
  MESSAGE("darknet19_320 dense " << r.dense_total << " B, packed " << r.packed_total << " B, ratio " << r.ratio);
}
