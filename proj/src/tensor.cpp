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

#include "bqnn/tensor.hpp"

#include <cstring>
#include <limits>

#include "bqnn/error.hpp"

namespace bqnn {

std::string_view to_string(DType dtype) {
  switch (dtype) {
    case DType::F32: return "f32";
    case DType::U2: return "u2";
    case DType::Bin1: return "bin1";
    case DType::I32: return "i32";
  }
  return "?";
}

std::string_view to_string(Layout layout) {
  return layout == Layout::DepthInnermost ? "depth_innermost" : "height_innermost";
}

DType dtype_from_string(std::string_view s) {
  if (s == "f32") return DType::F32;
  if (s == "u2") return DType::U2;
  if (s == "bin1") return DType::Bin1;
  if (s == "i32") return DType::I32;
  throw Error(ErrorCode::SchemaError, "unknown dtype '" + std::string(s) + "'");
}

Layout layout_from_string(std::string_view s) {
  if (s == "depth_innermost") return Layout::DepthInnermost;
  if (s == "height_innermost") return Layout::HeightInnermost;
  throw Error(ErrorCode::SchemaError, "unknown layout '" + std::string(s) + "'");
}

void check_desc(const TensorDesc& desc) {
  if (desc.height < 1 || desc.width < 1 || desc.depth < 1 || desc.count < 1)
    throw Error(ErrorCode::SchemaError, "tensor dims must be >= 1");
  // Element count must stay well inside the signed 64-bit index range.
  constexpr std::int64_t kMaxDim = std::int64_t{1} << 20;
  if (desc.height > kMaxDim || desc.width > kMaxDim || desc.depth > kMaxDim || desc.count > kMaxDim)
    throw Error(ErrorCode::SchemaError, "tensor dim exceeds addressable range");
  if (desc.elements() > (std::int64_t{1} << 40))
    throw Error(ErrorCode::SchemaError, "tensor element count exceeds addressable range");
}

TensorBlob::TensorBlob(const TensorDesc& desc) : desc_(desc) {
  check_desc(desc);
  const auto n = static_cast<std::size_t>(desc.elements());
  switch (desc.dtype) {
    case DType::F32: data_ = std::vector<float>(n, 0.0f); break;
    case DType::U2: data_ = std::vector<std::int8_t>(n, 0); break;
    case DType::Bin1: data_ = std::vector<std::int8_t>(n, -1); break;
    case DType::I32: data_ = std::vector<std::int32_t>(n, 0); break;
  }
}

TensorBlob::TensorBlob(const TensorDesc& desc, std::vector<float> values)
    : desc_(desc), data_(std::move(values)) {
  check_invariants();
}

TensorBlob::TensorBlob(const TensorDesc& desc, std::vector<std::int8_t> codes)
    : desc_(desc), data_(std::move(codes)) {
  check_invariants();
}

TensorBlob::TensorBlob(const TensorDesc& desc, std::vector<std::int32_t> ints)
    : desc_(desc), data_(std::move(ints)) {
  check_invariants();
}

void TensorBlob::check_invariants() const {
  check_desc(desc_);
  const bool storage_ok =
      (desc_.dtype == DType::F32 && std::holds_alternative<std::vector<float>>(data_)) ||
      ((desc_.dtype == DType::U2 || desc_.dtype == DType::Bin1) &&
       std::holds_alternative<std::vector<std::int8_t>>(data_)) ||
      (desc_.dtype == DType::I32 && std::holds_alternative<std::vector<std::int32_t>>(data_));
  if (!storage_ok) throw Error(ErrorCode::WrongDtype, "storage does not match dtype " + std::string(to_string(desc_.dtype)));
  if (static_cast<std::int64_t>(size()) != desc_.elements())
    throw Error(ErrorCode::TruncatedBlob, "data length " + std::to_string(size()) + " != element count " +
                                              std::to_string(desc_.elements()));
  if (desc_.dtype == DType::U2) {
    for (auto c : codes())
      if (c < 0 || c > 3) throw Error(ErrorCode::SchemaError, "u2 code out of range: " + std::to_string(c));
  } else if (desc_.dtype == DType::Bin1) {
    for (auto c : codes())
      if (c != -1 && c != 1) throw Error(ErrorCode::SchemaError, "bin1 value must be -1 or +1");
  }
}

std::vector<float>& TensorBlob::f32() {
  if (auto* v = std::get_if<std::vector<float>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not f32");
}
const std::vector<float>& TensorBlob::f32() const {
  if (auto* v = std::get_if<std::vector<float>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not f32");
}
std::vector<std::int8_t>& TensorBlob::codes() {
  if (auto* v = std::get_if<std::vector<std::int8_t>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not u2/bin1");
}
const std::vector<std::int8_t>& TensorBlob::codes() const {
  if (auto* v = std::get_if<std::vector<std::int8_t>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not u2/bin1");
}
std::vector<std::int32_t>& TensorBlob::i32() {
  if (auto* v = std::get_if<std::vector<std::int32_t>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not i32");
}
const std::vector<std::int32_t>& TensorBlob::i32() const {
  if (auto* v = std::get_if<std::vector<std::int32_t>>(&data_)) return *v;
  throw Error(ErrorCode::WrongDtype, "tensor is not i32");
}

std::size_t TensorBlob::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

double TensorBlob::value(std::int64_t k, std::int64_t h, std::int64_t w, std::int64_t d) const {
  const auto i = static_cast<std::size_t>(desc_.offset(k, h, w, d));
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, data_);
}

bool TensorBlob::identical(const TensorBlob& other) const {
  if (!(desc_ == other.desc_) || data_.index() != other.data_.index() || size() != other.size()) return false;
  return std::visit(
      [&other](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const auto& o = std::get<V>(other.data_);
        return v.empty() || std::memcmp(v.data(), o.data(), v.size() * sizeof(typename V::value_type)) == 0;
      },
      data_);
}

}  // namespace bqnn
