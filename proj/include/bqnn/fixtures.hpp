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

#ifndef BQNN_FIXTURES_HPP_
#define BQNN_FIXTURES_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bqnn/model_ir.hpp"
#include "bqnn/tensor.hpp"

namespace bqnn {

// Incremental construction of trained-model graphs. Ids default to
// "<kind><n>"; build() computes the topological order and checks structure.
class GraphBuilder {
 public:
  std::string input(std::int64_t height, std::int64_t width, std::int64_t depth, std::string id = "");
  // `weights` holds the Od kernels (count = Od). A binarized conv receives its
  // weights through a binarize_w marker node.
  std::string conv(const std::string& in, TensorBlob weights, std::int64_t stride, std::int64_t pad, bool binarized,
                   std::string id = "");
  std::string batchnorm(const std::string& in, std::vector<double> gamma, std::vector<double> beta,
                        std::vector<double> mean, std::vector<double> variance, double epsilon, std::string id = "");
  std::string scale(const std::string& in, std::vector<double> values, std::string id = "");
  std::string bias(const std::string& in, std::vector<double> values, std::string id = "");
  std::string leaky_relu(const std::string& in, double slope, std::string id = "");
  std::string quantize(const std::string& in, double step, std::string id = "");
  std::string maxpool(const std::string& in, std::int64_t window, std::int64_t stride, std::string id = "");
  std::string output(const std::string& in, std::string id = "");

  // Adds an arbitrary node as-is (used for malformed-graph tests).
  std::string raw(Node node);
  std::size_t add_blob(Blob blob);

  Graph build() const;

 private:
  std::string next_id(const std::string& kind, std::string id);

  Graph g_;
  std::vector<std::string> order_;
  std::map<std::string, int> counters_;
};

// Deterministic random-weight models: "toy" and "darknet19_320".
// Unknown names throw UnknownArchitecture.
Graph make_fixture(const std::string& arch, std::uint64_t seed);
std::vector<std::string> fixture_names();

// Small random graph that passes validation and lowers: an f32 first conv,
// zero to three binarized convs and one of several tails (f32 conv, final
// binconv, or codes straight to the output), with random per-channel chains,
// leaky slopes, pooling placements and negative batch-norm scales.
Graph random_tiny_graph(std::uint64_t seed);

// Uniform [0, 1) image for the graph's input node, depth-innermost.
TensorBlob random_image(const Graph& g, std::uint64_t seed);
TensorBlob random_image(const TensorDesc& input, std::uint64_t seed);

}  // namespace bqnn

#endif  // BQNN_FIXTURES_HPP_
