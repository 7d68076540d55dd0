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

#ifndef BQNN_CODEGEN_HPP_
#define BQNN_CODEGEN_HPP_

#include <string>
#include <utility>
#include <vector>

#include "bqnn/layout_pack.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

// Source characters per byte of packed weight data: a full line holds eight
// "0xXXXXXXXXu" literals (32 bytes) in 2 + 8*11 + 7*2 + 2 = 106 characters.
constexpr double kHexExpansion = 106.0 / 32.0;

// One `static const uint32_t <name>_p<k>[]` array per plane, in the given
// order, hex literals eight per line.
std::string emit_weight_arrays(const std::vector<std::pair<std::string, PackedTensor>>& tensors);

// Single C99 translation unit exposing
//   int bqnn_infer(const float* image, float* out);
// `image` is the depth-innermost (H, W, C) input and `out` receives the
// depth-innermost output map. Returns 0.
std::string emit_inference_source(const LoweredGraph& lg);

}  // namespace bqnn

#endif  // BQNN_CODEGEN_HPP_
