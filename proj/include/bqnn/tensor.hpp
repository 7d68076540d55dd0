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

#ifndef BQNN_TENSOR_HPP_
#define BQNN_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bqnn {

enum class DType { F32, U2, Bin1, I32 };

// Which dimension varies fastest in the flat data array.
//   HeightInnermost: Depth x Width x Height, index (d*W + w)*H + h
//   DepthInnermost:  Height x Width x Depth, index (h*W + w)*D + d
enum class Layout { HeightInnermost, DepthInnermost };

std::string_view to_string(DType dtype);
std::string_view to_string(Layout layout);
DType dtype_from_string(std::string_view s);
Layout layout_from_string(std::string_view s);

// Shape of a 3-D feature map, or of `count` 3-D kernels stored back to back
// (count = Od for convolution weights, 1 for activations).
struct TensorDesc {
  std::int64_t height = 1;
  std::int64_t width = 1;
  std::int64_t depth = 1;
  std::int64_t count = 1;
  DType dtype = DType::F32;
  Layout layout = Layout::DepthInnermost;

  std::int64_t plane_size() const { return height * width * depth; }
  std::int64_t elements() const { return count * plane_size(); }

  // Flat index of element (k, h, w, d) under this layout.
  std::int64_t offset(std::int64_t k, std::int64_t h, std::int64_t w, std::int64_t d) const {
    const std::int64_t base = k * plane_size();
    if (layout == Layout::DepthInnermost) return base + (h * width + w) * depth + d;
    return base + (d * width + w) * height + h;
  }

  bool same_shape(const TensorDesc& o) const {
    return height == o.height && width == o.width && depth == o.depth && count == o.count;
  }

  bool operator==(const TensorDesc&) const = default;
};

// Throws SchemaError unless all dims are >= 1 and the element count is addressable.
void check_desc(const TensorDesc& desc);

// Dense tensor. Storage by dtype: f32 -> float, u2 codes {0..3} and bin1 {-1,+1} -> int8,
// i32 -> int32.
class TensorBlob {
 public:
  using Storage = std::variant<std::vector<float>, std::vector<std::int8_t>, std::vector<std::int32_t>>;

  TensorBlob() = default;
  // Zero-initialised tensor (bin1 tensors start at -1).
  explicit TensorBlob(const TensorDesc& desc);
  TensorBlob(const TensorDesc& desc, std::vector<float> values);
  TensorBlob(const TensorDesc& desc, std::vector<std::int8_t> codes);
  TensorBlob(const TensorDesc& desc, std::vector<std::int32_t> ints);

  const TensorDesc& desc() const { return desc_; }
  TensorDesc& mutable_desc() { return desc_; }

  std::vector<float>& f32();
  const std::vector<float>& f32() const;
  std::vector<std::int8_t>& codes();
  const std::vector<std::int8_t>& codes() const;
  std::vector<std::int32_t>& i32();
  const std::vector<std::int32_t>& i32() const;

  std::size_t size() const;

  // Element value as a real number, for any dtype.
  double value(std::int64_t k, std::int64_t h, std::int64_t w, std::int64_t d) const;

  // Byte-wise equality of desc and payload (distinguishes NaN payloads and -0.0).
  bool identical(const TensorBlob& other) const;

 private:
  void check_invariants() const;

  TensorDesc desc_;
  Storage data_;
};

// Spatial parameters of a convolution or pooling window. Padding is symmetric and
// padded positions read as zero.
struct ConvGeometry {
  std::int64_t kernel_h = 1;
  std::int64_t kernel_w = 1;
  std::int64_t stride = 1;
  std::int64_t pad = 0;

  std::int64_t out_height(std::int64_t in_height) const { return (in_height + 2 * pad - kernel_h) / stride + 1; }
  std::int64_t out_width(std::int64_t in_width) const { return (in_width + 2 * pad - kernel_w) / stride + 1; }
};

}  // namespace bqnn

#endif  // BQNN_TENSOR_HPP_
