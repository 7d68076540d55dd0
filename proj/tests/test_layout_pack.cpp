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


#include <numeric>
#include <random>

#include "oracles.hpp"
#include "testing.hpp"

#include "bqnn/layout_pack.hpp"

using namespace bqnn;

namespace {

TensorBlob iota_f32(const TensorDesc& d) {
  std::vector<float> v(static_cast<std::size_t>(d.elements()));
  std::iota(v.begin(), v.end(), 0.0f);
  return TensorBlob(d, std::move(v));
}

TensorBlob bin1_dbar(const std::vector<std::int8_t>& values) {
  return TensorBlob(TensorDesc{1, 1, static_cast<std::int64_t>(values.size()), 1, DType::Bin1}, values);
}

}  // namespace

TEST_CASE("1x1xd permutation is the identity") {
  const TensorBlob t = iota_f32(TensorDesc{1, 1, 7, 1, DType::F32, Layout::HeightInnermost});
  const TensorBlob d = to_depth_innermost(t);
  CHECK(d.f32() == t.f32());
  CHECK(d.desc().layout == Layout::DepthInnermost);
}

TEST_CASE("2x2x2 permutation by hand") {
  // Height-innermost index (d*W + w)*H + h; read back in (h, w, d) order.
  const TensorBlob t = iota_f32(TensorDesc{2, 2, 2, 1, DType::F32, Layout::HeightInnermost});
  CHECK(to_depth_innermost(t).f32() == std::vector<float>{0, 4, 2, 6, 1, 5, 3, 7});
}

TEST_CASE("permutation matches the index-map oracle and round-trips") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    std::uniform_int_distribution<std::int64_t> dim(1, 6);
    const TensorDesc d{dim(rng), dim(rng), dim(rng), dim(rng) % 3 + 1, DType::F32, Layout::HeightInnermost};
    const TensorBlob t = iota_f32(d);
    const TensorBlob p = to_depth_innermost(t);
    for (std::int64_t k = 0; k < d.count; ++k)
      for (std::int64_t h = 0; h < d.height; ++h)
        for (std::int64_t w = 0; w < d.width; ++w)
          for (std::int64_t c = 0; c < d.depth; ++c) {
            const auto src = k * d.plane_size() + (c * d.width + w) * d.height + h;
            const auto dst = k * d.plane_size() + (h * d.width + w) * d.depth + c;
            REQUIRE(p.f32()[static_cast<std::size_t>(dst)] == t.f32()[static_cast<std::size_t>(src)]);
          }
    CHECK(to_height_innermost(p).identical(t));
  }
}

TEST_CASE("permutation errors") {
  const TensorBlob d = iota_f32(TensorDesc{2, 2, 2});
  CHECK_ERROR_CODE(to_depth_innermost(d), ErrorCode::AlreadyDepthInnermost);
  CHECK_ERROR_CODE(to_height_innermost(to_height_innermost(d)), ErrorCode::WrongLayout);
}

TEST_CASE("bitpack examples") {
  CHECK(bitpack(bin1_dbar(std::vector<std::int8_t>(32, 1))).planes ==
        std::vector<std::vector<std::uint32_t>>{{0xFFFFFFFFu}});

  std::vector<std::int8_t> alt(32);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1 : -1;
  CHECK(bitpack(bin1_dbar(alt)).planes[0] == std::vector<std::uint32_t>{0x55555555u});

  const TensorDesc u2{1, 1, 32, 1, DType::U2};
  const PackedTensor threes = bitpack(TensorBlob(u2, std::vector<std::int8_t>(32, 3)));
  CHECK(threes.planes == std::vector<std::vector<std::uint32_t>>{{0xFFFFFFFFu}, {0xFFFFFFFFu}});
  const PackedTensor twos = bitpack(TensorBlob(u2, std::vector<std::int8_t>(32, 2)));
  CHECK(twos.planes == std::vector<std::vector<std::uint32_t>>{{0x00000000u}, {0xFFFFFFFFu}});
}

TEST_CASE("bitpack errors") {
  CHECK_ERROR_CODE(bitpack(iota_f32(TensorDesc{1, 1, 4})), ErrorCode::WrongDtype);
  const TensorBlob hi(TensorDesc{1, 1, 4, 1, DType::U2, Layout::HeightInnermost}, std::vector<std::int8_t>{0, 1, 2, 3});
  CHECK_ERROR_CODE(bitpack(hi), ErrorCode::WrongLayout);
}

TEST_CASE("unpack single word") {
  const PackedTensor p{TensorDesc{1, 1, 16, 1, DType::U2}, {{0x00000001u}, {0x00000000u}}};
  std::vector<std::int8_t> expect(16, 0);
  expect[0] = 1;
  CHECK(unpack(p).codes() == expect);
}

TEST_CASE("pad bits: strict rejects, lenient ignores") {
  const PackedTensor p{TensorDesc{1, 1, 16, 1, DType::U2}, {{0x00010000u}, {0x00000000u}}};
  CHECK_ERROR_CODE(unpack(p), ErrorCode::NonZeroPadBits);
  CHECK(unpack(p, false).codes() == std::vector<std::int8_t>(16, 0));
}

TEST_CASE("pack round-trip on 500 random u2 tensors") {
  std::mt19937_64 rng(500);
  std::uniform_int_distribution<std::int64_t> dim(1, 4), depth16(1, 16);
  for (int i = 0; i < 500; ++i) {
    const TensorDesc d{dim(rng), dim(rng), 16 * depth16(rng), 1, DType::U2};
    const TensorBlob t = oracle::random_codes(d, rng);
    const PackedTensor p = bitpack(t);
    REQUIRE(unpack(p).identical(t));
    REQUIRE(p.planes.size() == 2);
  }
}

TEST_CASE("bin1 round-trip with kernel count") {
  std::mt19937_64 rng(9);
  const TensorBlob t = oracle::random_signs(TensorDesc{3, 3, 48, 5, DType::Bin1}, rng);
  const PackedTensor p = bitpack(t);
  CHECK(p.words_per_dbar() == 2);
  CHECK(p.words_per_plane() == 5 * 9 * 2);
  CHECK(unpack(p).identical(t));
}

TEST_CASE("packing density") {
  std::mt19937_64 rng(2);
  for (std::int64_t depth : {16, 32, 48, 64, 100, 128}) {
    const TensorDesc d{3, 5, depth, 1, DType::U2};
    const PackedTensor p = bitpack(oracle::random_codes(d, rng));
    CHECK(p.bytes() == 2 * 4 * 3 * 5 * ((depth + 31) / 32));
  }
  const TensorDesc b{3, 3, 64, 8, DType::Bin1};
  const PackedTensor p = bitpack(oracle::random_signs(b, rng));
  CHECK(p.bytes() * 32 == 4 * b.elements());
}

TEST_CASE("check_packed") {
  PackedTensor p{TensorDesc{1, 1, 32, 1, DType::U2}, {{0u}}};
  CHECK_ERROR_CODE(check_packed(p), ErrorCode::PlaneCountMismatch);
  p.planes = {{0u, 0u}, {0u, 0u}};
  CHECK_ERROR_CODE(check_packed(p), ErrorCode::ShapeMismatch);
  p.planes = {{0u}, {0u}};
  p.desc.layout = Layout::HeightInnermost;
  CHECK_ERROR_CODE(check_packed(p), ErrorCode::WrongLayout);
}

TEST_CASE("jump counts at 320x320x64") {
  const TensorDesc in{320, 320, 64, 1, DType::U2};
  const TensorDesc k{3, 3, 64, 1, DType::Bin1};
  const RunStats depth = address_runs(in, k, ScanOrder::DepthInnermost, 1, 1);
  CHECK(depth.runs_per_window == 3);
  CHECK(depth.interior);
  CHECK(depth.window_elements == 3 * 3 * 64);
  CHECK(depth.windows == 320 * 320);
  const RunStats width = address_runs(in, k, ScanOrder::WidthInnermost, 1, 1);
  CHECK(width.runs_per_window == 192);
  CHECK(address_runs(in, k, ScanOrder::HeightInnermost, 1, 1).runs_per_window == 192);
}

TEST_CASE("1x1 kernel reads one run") {
  for (std::int64_t kd : {16, 32, 64}) {
    const TensorDesc k{1, 1, kd, 1, DType::Bin1};
    CHECK(address_runs(TensorDesc{7, 9, kd}, k, ScanOrder::DepthInnermost, 1, 0).runs_per_window == 1);
    // A 1x1 window is one run under width-innermost order only when the map is 1x1.
    CHECK(address_runs(TensorDesc{1, 1, kd}, k, ScanOrder::WidthInnermost, 1, 0).runs_per_window == 1);
    CHECK(address_runs(TensorDesc{7, 9, kd}, k, ScanOrder::WidthInnermost, 1, 0).runs_per_window == kd);
  }
}

TEST_CASE("kernel depth must match") {
  CHECK_ERROR_CODE(address_runs(TensorDesc{4, 4, 16}, TensorDesc{3, 3, 32}, ScanOrder::DepthInnermost, 1, 1),
                   ErrorCode::KernelDepthMismatch);
}

TEST_CASE("address runs match the brute-force trace on 200 random shapes") {
  std::mt19937_64 rng(200);
  std::uniform_int_distribution<std::int64_t> hw(1, 9), depth(1, 24), kdim(0, 3), stride(1, 3);
  const std::int64_t kernels[] = {1, 2, 3, 5};
  int tested = 0;
  while (tested < 200) {
    const TensorDesc in{hw(rng), hw(rng), depth(rng), 1, DType::U2};
    const std::int64_t kh = kernels[kdim(rng)], kw = kernels[kdim(rng)];
    const std::int64_t pad = rng() % 2 == 0 ? 0 : (kw - 1) / 2;
    const std::int64_t s = stride(rng);
    if (kh > in.height + 2 * pad || kw > in.width + 2 * pad) continue;
    const TensorDesc k{kh, kw, in.depth, 1, DType::Bin1};
    for (ScanOrder order : {ScanOrder::DepthInnermost, ScanOrder::WidthInnermost, ScanOrder::HeightInnermost}) {
      const RunStats got = address_runs(in, k, order, s, pad);
      const oracle::TraceStats want = oracle::brute_force_runs(in, k, order, s, pad);
      REQUIRE(got.runs_per_window == want.runs_per_window);
      REQUIRE(got.total_runs == want.total_runs);
      REQUIRE(got.windows == want.windows);
      REQUIRE(got.run_lengths == want.run_lengths);
      for_each_window(in, k, order, s, pad, [&](std::int64_t oy, std::int64_t ox, std::span<const AddressRun> runs) {
        const auto expect = oracle::runs_from_addresses(oracle::window_addresses(in, kh, kw, order, s, pad, oy, ox));
        REQUIRE(std::vector<AddressRun>(runs.begin(), runs.end()) == expect);
      });
    }
    ++tested;
  }
}

TEST_CASE("interior windows cover Kh*Kw*Kd elements and depth order never loses") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::int64_t> hw(3, 12), depth(2, 40), kdim(1, 3);
  for (int i = 0; i < 200; ++i) {
    const TensorDesc in{hw(rng), hw(rng), depth(rng), 1, DType::U2};
    const std::int64_t kh = 2 * kdim(rng) - 1, kw = 2 * kdim(rng) - 1;
    if (kh > in.height || kw > in.width) continue;
    const TensorDesc k{kh, kw, in.depth, 1, DType::Bin1};
    const RunStats d = address_runs(in, k, ScanOrder::DepthInnermost, 1, 0);
    const RunStats w = address_runs(in, k, ScanOrder::WidthInnermost, 1, 0);
    REQUIRE(d.interior);
    CHECK(d.window_elements == kh * kw * in.depth);
    CHECK(w.window_elements == kh * kw * in.depth);
    CHECK(d.runs_per_window <= w.runs_per_window);
    if (!(kh == in.height && kw == in.width)) CHECK(d.runs_per_window < w.runs_per_window);
    CHECK(d.runs_per_window >= 1);
  }
}
