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

#include "bqnn/layout_pack.hpp"

#include <algorithm>
#include <string>

#include "bqnn/error.hpp"

namespace bqnn {

namespace {

template <typename V>
V permute(const V& src, const TensorDesc& from, const TensorDesc& to) {
  V dst(src.size());
  for (std::int64_t k = 0; k < from.count; ++k)
    for (std::int64_t h = 0; h < from.height; ++h)
      for (std::int64_t w = 0; w < from.width; ++w)
        for (std::int64_t d = 0; d < from.depth; ++d)
          dst[static_cast<std::size_t>(to.offset(k, h, w, d))] = src[static_cast<std::size_t>(from.offset(k, h, w, d))];
  return dst;
}

TensorBlob relayout(const TensorBlob& t, Layout target) {
  TensorDesc to = t.desc();
  to.layout = target;
  switch (t.desc().dtype) {
    case DType::F32: return TensorBlob(to, permute(t.f32(), t.desc(), to));
    case DType::U2:
    case DType::Bin1: return TensorBlob(to, permute(t.codes(), t.desc(), to));
    case DType::I32: return TensorBlob(to, permute(t.i32(), t.desc(), to));
  }
  throw Error(ErrorCode::Internal, "unreachable dtype");
}

std::uint32_t pad_mask(std::int64_t depth, std::int64_t word) {
  const std::int64_t valid = std::min<std::int64_t>(kWordBits, depth - word * kWordBits);
  return valid >= kWordBits ? 0u : ~((std::uint32_t{1} << valid) - 1u);
}

}  // namespace

int plane_count(DType dtype) {
  switch (dtype) {
    case DType::Bin1: return 1;
    case DType::U2: return 2;
    default: throw Error(ErrorCode::WrongDtype, "only u2 and bin1 tensors are bit-packed");
  }
}

void check_packed(const PackedTensor& p) {
  check_desc(p.desc);
  if (p.desc.layout != Layout::DepthInnermost) throw Error(ErrorCode::WrongLayout, "packed tensors are depth-innermost");
  if (static_cast<int>(p.planes.size()) != plane_count(p.desc.dtype))
    throw Error(ErrorCode::PlaneCountMismatch, std::string(to_string(p.desc.dtype)) + " expects " +
                                                   std::to_string(plane_count(p.desc.dtype)) + " planes, got " +
                                                   std::to_string(p.planes.size()));
  for (const auto& plane : p.planes)
    if (static_cast<std::int64_t>(plane.size()) != p.words_per_plane())
      throw Error(ErrorCode::ShapeMismatch, "plane holds " + std::to_string(plane.size()) + " words, expected " +
                                                std::to_string(p.words_per_plane()));
}

TensorBlob to_depth_innermost(const TensorBlob& t) {
  if (t.desc().layout == Layout::DepthInnermost)
    throw Error(ErrorCode::AlreadyDepthInnermost, "tensor is already depth-innermost");
  return relayout(t, Layout::DepthInnermost);
}

TensorBlob to_height_innermost(const TensorBlob& t) {
  if (t.desc().layout == Layout::HeightInnermost) throw Error(ErrorCode::WrongLayout, "tensor is already height-innermost");
  return relayout(t, Layout::HeightInnermost);
}

PackedTensor bitpack(const TensorBlob& t) {
  const TensorDesc& desc = t.desc();
  if (desc.layout != Layout::DepthInnermost) throw Error(ErrorCode::WrongLayout, "bitpack requires depth-innermost data");
  if (desc.dtype != DType::U2 && desc.dtype != DType::Bin1)
    throw Error(ErrorCode::WrongDtype, "bitpack requires u2 or bin1, got " + std::string(to_string(desc.dtype)));

  PackedTensor p;
  p.desc = desc;
  const int planes = plane_count(desc.dtype);
  p.planes.assign(static_cast<std::size_t>(planes), std::vector<std::uint32_t>(static_cast<std::size_t>(p.words_per_plane()), 0u));
  const auto& codes = t.codes();
  const std::int64_t wpd = p.words_per_dbar();
  const std::int64_t dbars = desc.count * desc.height * desc.width;
  for (std::int64_t bar = 0; bar < dbars; ++bar) {
    const std::int8_t* src = codes.data() + bar * desc.depth;
    for (std::int64_t d = 0; d < desc.depth; ++d) {
      const auto word = static_cast<std::size_t>(bar * wpd + d / kWordBits);
      const std::uint32_t bit = std::uint32_t{1} << (d % kWordBits);
      if (desc.dtype == DType::Bin1) {
        if (src[d] > 0) p.planes[0][word] |= bit;
      } else {
        if (src[d] & 1) p.planes[0][word] |= bit;
        if (src[d] & 2) p.planes[1][word] |= bit;
      }
    }
  }
  return p;
}

TensorBlob unpack(const PackedTensor& p, bool strict) {
  check_packed(p);
  const TensorDesc& desc = p.desc;
  const std::int64_t wpd = p.words_per_dbar();
  const std::int64_t dbars = desc.count * desc.height * desc.width;
  if (strict) {
    for (std::size_t plane = 0; plane < p.planes.size(); ++plane)
      for (std::int64_t bar = 0; bar < dbars; ++bar)
        for (std::int64_t j = 0; j < wpd; ++j)
          if (p.planes[plane][static_cast<std::size_t>(bar * wpd + j)] & pad_mask(desc.depth, j))
            throw Error(ErrorCode::NonZeroPadBits, "pad bit set in plane " + std::to_string(plane) + " at D-bar " +
                                                       std::to_string(bar));
  }
  std::vector<std::int8_t> codes(static_cast<std::size_t>(desc.elements()));
  for (std::int64_t bar = 0; bar < dbars; ++bar) {
    for (std::int64_t d = 0; d < desc.depth; ++d) {
      const auto word = static_cast<std::size_t>(bar * wpd + d / kWordBits);
      const int shift = static_cast<int>(d % kWordBits);
      const int b0 = (p.planes[0][word] >> shift) & 1;
      std::int8_t v;
      if (desc.dtype == DType::Bin1) {
        v = b0 ? 1 : -1;
      } else {
        v = static_cast<std::int8_t>(b0 | (((p.planes[1][word] >> shift) & 1) << 1));
      }
      codes[static_cast<std::size_t>(bar * desc.depth + d)] = v;
    }
  }
  return TensorBlob(desc, std::move(codes));
}

std::string_view to_string(ScanOrder order) {
  switch (order) {
    case ScanOrder::DepthInnermost: return "depth";
    case ScanOrder::WidthInnermost: return "width";
    case ScanOrder::HeightInnermost: return "height";
  }
  return "?";
}

namespace {

void append_merged(std::vector<AddressRun>& runs, std::int64_t begin, std::int64_t end) {
  if (!runs.empty() && runs.back().end == begin) {
    runs.back().end = end;
  } else {
    runs.push_back({begin, end});
  }
}

void collect_window(std::vector<AddressRun>& runs, const TensorDesc& in, const TensorDesc& kernel, ScanOrder order,
                    std::int64_t stride, std::int64_t pad, std::int64_t oy, std::int64_t ox) {
  runs.clear();
  const std::int64_t y0 = oy * stride - pad;
  const std::int64_t x0 = ox * stride - pad;
  const std::int64_t r0 = std::max<std::int64_t>(0, y0);
  const std::int64_t r1 = std::min(in.height, y0 + kernel.height);
  const std::int64_t c0 = std::max<std::int64_t>(0, x0);
  const std::int64_t c1 = std::min(in.width, x0 + kernel.width);
  if (r0 >= r1 || c0 >= c1) return;
  const std::int64_t H = in.height, W = in.width, D = in.depth;
  switch (order) {
    case ScanOrder::DepthInnermost:
      for (std::int64_t r = r0; r < r1; ++r) append_merged(runs, (r * W + c0) * D, (r * W + c1) * D);
      break;
    case ScanOrder::WidthInnermost:
      for (std::int64_t d = 0; d < D; ++d)
        for (std::int64_t r = r0; r < r1; ++r) append_merged(runs, (d * H + r) * W + c0, (d * H + r) * W + c1);
      break;
    case ScanOrder::HeightInnermost:
      for (std::int64_t d = 0; d < D; ++d)
        for (std::int64_t c = c0; c < c1; ++c) append_merged(runs, (d * W + c) * H + r0, (d * W + c) * H + r1);
      break;
  }
}

void check_shapes(const TensorDesc& in, const TensorDesc& kernel, std::int64_t stride, std::int64_t pad) {
  if (kernel.depth != in.depth)
    throw Error(ErrorCode::KernelDepthMismatch,
                "kernel depth " + std::to_string(kernel.depth) + " != input depth " + std::to_string(in.depth));
  if (stride < 1 || pad < 0) throw Error(ErrorCode::ShapeMismatch, "stride must be >= 1 and pad >= 0");
  if (in.height + 2 * pad < kernel.height || in.width + 2 * pad < kernel.width)
    throw Error(ErrorCode::ShapeMismatch, "kernel larger than padded input");
}

}  // namespace

std::vector<AddressRun> window_runs(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order,
                                    std::int64_t stride, std::int64_t pad, std::int64_t oy, std::int64_t ox) {
  check_shapes(input, kernel, stride, pad);
  std::vector<AddressRun> runs;
  collect_window(runs, input, kernel, order, stride, pad, oy, ox);
  return runs;
}

void for_each_window(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order, std::int64_t stride,
                     std::int64_t pad,
                     const std::function<void(std::int64_t, std::int64_t, std::span<const AddressRun>)>& visit) {
  check_shapes(input, kernel, stride, pad);
  const ConvGeometry geom{kernel.height, kernel.width, stride, pad};
  const std::int64_t oh = geom.out_height(input.height);
  const std::int64_t ow = geom.out_width(input.width);
  std::vector<AddressRun> runs;
  runs.reserve(static_cast<std::size_t>(kernel.height * kernel.width * kernel.depth));
  for (std::int64_t oy = 0; oy < oh; ++oy) {
    for (std::int64_t ox = 0; ox < ow; ++ox) {
      collect_window(runs, input, kernel, order, stride, pad, oy, ox);
      visit(oy, ox, runs);
    }
  }
}

RunStats address_runs(const TensorDesc& input, const TensorDesc& kernel, ScanOrder order, std::int64_t stride,
                      std::int64_t pad) {
  check_shapes(input, kernel, stride, pad);
  const ConvGeometry geom{kernel.height, kernel.width, stride, pad};
  const std::int64_t oh = geom.out_height(input.height);
  const std::int64_t ow = geom.out_width(input.width);

  // First window with no padded taps, in row-major order.
  std::int64_t iy = -1, ix = -1;
  for (std::int64_t oy = 0; oy < oh && iy < 0; ++oy) {
    const std::int64_t y0 = oy * stride - pad;
    if (y0 < 0 || y0 + kernel.height > input.height) continue;
    for (std::int64_t ox = 0; ox < ow; ++ox) {
      const std::int64_t x0 = ox * stride - pad;
      if (x0 >= 0 && x0 + kernel.width <= input.width) {
        iy = oy;
        ix = ox;
        break;
      }
    }
  }

  RunStats stats;
  if (iy < 0) {
    stats.interior = false;
    iy = oh / 2;
    ix = ow / 2;
  }
  for_each_window(input, kernel, order, stride, pad, [&](std::int64_t oy, std::int64_t ox, std::span<const AddressRun> runs) {
    ++stats.windows;
    stats.total_runs += static_cast<std::int64_t>(runs.size());
    for (const auto& r : runs) ++stats.run_lengths[r.length()];
    if (oy == iy && ox == ix) {
      stats.runs_per_window = static_cast<std::int64_t>(runs.size());
      for (const auto& r : runs) stats.window_elements += r.length();
    }
  });
  return stats;
}

}  // namespace bqnn
