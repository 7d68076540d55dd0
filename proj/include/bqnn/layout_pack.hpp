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

#ifndef BQNN_LAYOUT_PACK_HPP_
#define BQNN_LAYOUT_PACK_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "bqnn/tensor.hpp"

namespace bqnn {

constexpr std::int64_t kWordBits = 32;

// Bit-packed, depth-innermost tensor. Every (k, h, w) D-bar occupies
// words_per_dbar() words per plane; bit b of word j of a D-bar holds depth
// index j*32 + b, and bits past `depth` are zero.
//   bin1: one plane, bit 1 <-> +1, bit 0 <-> -1
//   u2:   two planes, plane p holds bit p of the code
struct PackedTensor {
  TensorDesc desc;
  std::vector<std::vector<std::uint32_t>> planes;

  std::int64_t words_per_dbar() const { return (desc.depth + kWordBits - 1) / kWordBits; }
  std::int64_t words_per_plane() const { return desc.count * desc.height * desc.width * words_per_dbar(); }
  std::int64_t word_offset(std::int64_t k, std::int64_t h, std::int64_t w) const {
    return ((k * desc.height + h) * desc.width + w) * words_per_dbar();
  }
  std::int64_t bytes() const { return static_cast<std::int64_t>(planes.size()) * 4 * words_per_plane(); }

  bool operator==(const PackedTensor&) const = default;
};

// Number of bit planes a packed tensor of this dtype carries.
int plane_count(DType dtype);

// Throws WrongLayout / WrongDtype / PlaneCountMismatch / ShapeMismatch when the
// packed tensor is not internally consistent.
void check_packed(const PackedTensor& p);

// Permute a HeightInnermost tensor into DepthInnermost order (and back).
TensorBlob to_depth_innermost(const TensorBlob& t);
TensorBlob to_height_innermost(const TensorBlob& t);

PackedTensor bitpack(const TensorBlob& t);

// strict = true rejects set pad bits with NonZeroPadBits; otherwise they are ignored.
TensorBlob unpack(const PackedTensor& p, bool strict = true);

// Flat address order used when tracing a convolution's reads.
//   DepthInnermost:  (h*W + w)*D + d
//   WidthInnermost:  (d*H + h)*W + w  (the width-contiguous baseline)
//   HeightInnermost: (d*W + w)*H + h
enum class ScanOrder { DepthInnermost, WidthInnermost, HeightInnermost };

std::string_view to_string(ScanOrder order);

// Half-open interval of flat element addresses.
struct AddressRun {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t length() const { return end - begin; }
  bool operator==(const AddressRun&) const = default;
};

struct RunStats {
  // Runs touched by one interior window (no padded taps); if the input admits
  // no interior window, the centre window is used and `interior` is false.
  std::int64_t runs_per_window = 0;
  std::int64_t window_elements = 0;
  bool interior = true;
  // Histogram of run lengths over every output window.
  std::map<std::int64_t, std::int64_t> run_lengths;
  std::int64_t total_runs = 0;
  std::int64_t windows = 0;
};

// Maximal contiguous address runs read by the window of output (oy, ox), sorted
// ascending. Padded taps are not part of the trace.
std::vector<AddressRun> window_runs(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order,
                                    std::int64_t stride, std::int64_t pad, std::int64_t oy, std::int64_t ox);

// Calls `visit` with each output window's runs, row-major over the output.
void for_each_window(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order, std::int64_t stride,
                     std::int64_t pad,
                     const std::function<void(std::int64_t oy, std::int64_t ox, std::span<const AddressRun>)>& visit);

// Kernel depth must equal input depth (KernelDepthMismatch otherwise).
RunStats address_runs(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order, std::int64_t stride,
                      std::int64_t pad);

}  // namespace bqnn

#endif  // BQNN_LAYOUT_PACK_HPP_
