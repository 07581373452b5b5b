// Copyright 2026 The frogpass Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "frogpass/error.hpp"
#include "frogpass/simd/philox.hpp"
#include "frogpass/walks.hpp"

using namespace frogpass;
using simd::PhiloxKey;

TEST_CASE("philox known answers") {
  using A = std::array<uint32_t, 4>;
  CHECK(simd::philox4x32_10_block({0, 0}, {0, 0, 0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(simd::philox4x32_10_block({0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(simd::philox4x32_10_block({0xa4093822, 0x299f31d0}, {0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

#if defined(__x86_64__) || defined(__i386__)
TEST_CASE("avx2 kernels match the scalar reference") {
  if (simd::detected_isa() != simd::Isa::kAvx2) {
    MESSAGE("AVX2 not available; skipping");
    return;
  }
  std::mt19937_64 gen(7);
  for (size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 64u, 257u}) {
    std::vector<uint32_t> c0(n), c1(n), c2(n), c3(n);
    for (size_t i = 0; i < n; ++i) {
      c0[i] = static_cast<uint32_t>(gen());
      c1[i] = static_cast<uint32_t>(gen());
      c2[i] = static_cast<uint32_t>(gen());
      c3[i] = static_cast<uint32_t>(gen());
    }
    const PhiloxKey key{static_cast<uint32_t>(gen()), static_cast<uint32_t>(gen())};
    const simd::PhiloxCounters ctr{c0, c1, c2, c3};
    std::vector<uint32_t> a(4 * n), b(4 * n);
    simd::philox4x32_10_scalar(key, ctr, a);
    simd::philox4x32_10_avx2(key, ctr, b);
    CHECK(a == b);
    for (uint32_t dirs : {2u, 4u, 6u, 8u, 12u}) {
      std::vector<uint8_t> da(a.size()), db(a.size());
      simd::decode_directions_scalar(a, dirs, da);
      simd::decode_directions_avx2(a, dirs, db);
      CHECK(da == db);
    }
  }
}

TEST_CASE("dispatch switch leaves walks unchanged") {
  const SeedSpec seed{99, "dispatch"};
  auto codes = [&] {
    WalkStream w(seed, Point{2, -3}, 4);
    std::vector<int> v;
    for (int k = 1; k <= 300; ++k) v.push_back(w.direction(static_cast<uint64_t>(k)));
    return v;
  };
  const auto before = simd::active_isa();
  simd::set_active_isa(simd::Isa::kScalar);
  const auto scalar = codes();
  if (simd::detected_isa() == simd::Isa::kAvx2) {
    simd::set_active_isa(simd::Isa::kAvx2);
    CHECK(codes() == scalar);
  }
  simd::set_active_isa(before);
}
#endif

TEST_CASE("decoder edge words") {
  const std::vector<uint32_t> w{0u, 0x3fffffffu, 0x40000000u, 0x7fffffffu, 0x80000000u, 0xffffffffu};
  std::vector<uint8_t> out(w.size());
  simd::decode_directions(w, 4, out);
  CHECK(out == std::vector<uint8_t>{0, 0, 1, 1, 2, 3});
}

TEST_CASE("pinned direction vectors") {
  struct Case {
    uint64_t master;
    std::string tag;
    Point x;
    uint64_t ell;
    uint32_t k0, k1;
    uint64_t id;
    std::string codes;
  };
  const std::vector<Case> cases{
      {0, "", Point{0, 0}, 1, 0xa3fe960e, 0x8932c885, 0x09510b5155077376, "3301220111220103"},
      {1, "", Point{0, 0}, 1, 0xc0b31554, 0x51598c8a, 0x09510b5155077376, "0123312133322023"},
      {42, "frog", Point{0, 0}, 1, 0x12369585, 0x705e7f36, 0x09510b5155077376, "0300322011023332"},
      {42, "frog", Point{0, 0}, 2, 0x12369585, 0x705e7f36, 0x40dc85ee4b51709c, "1110122313212223"},
      {42, "frog", Point{3, -2}, 1, 0x12369585, 0x705e7f36, 0xb35ddda2a4f935fc, "1213330123131203"},
      {42, "frog", Point{0, 0, 0}, 1, 0x12369585, 0x705e7f36, 0x7754085f522a43cd, "0010420300201403"},
      {20260101, "accept", Point{-7, 11}, 3, 0x7cec4a2e, 0xefef1d12, 0x25509f6283b59132, "0101321231103010"},
      {0xFFFFFFFFFFFFFFFFull, "z", Point{1, 2, 3, 4}, 1, 0x934c9afc, 0x444bfa7d, 0xfb693be0f722d3ad,
       "3260746731317425"},
  };
  for (const auto& c : cases) {
    const SeedSpec seed{c.master, c.tag};
    const auto key = philox_key(seed);
    CHECK(key.k0 == c.k0);
    CHECK(key.k1 == c.k1);
    CHECK(walk_stream_id(c.x, c.ell) == c.id);
    WalkStream w(seed, c.x, c.ell);
    std::string got;
    for (int k = 1; k <= 16; ++k) got += static_cast<char>('0' + w.direction(static_cast<uint64_t>(k)));
    CHECK(got == c.codes);
  }
}

TEST_CASE("random access agrees with sequential cursor") {
  const SeedSpec seed{5, "walk"};
  const Point x{1, 1, -2};
  WalkStream w(seed, x, 3);
  StepCursor cur(philox_key(seed), walk_stream_id(x, 3), 3);
  Point pos = x;
  for (uint64_t k = 1; k <= 1000; ++k) {
    pos = step(pos, cur.next());
    CHECK(l1_dist(pos, x) <= static_cast<int64_t>(k));
    if (k % 97 == 0) CHECK(w.position(k) == pos);
  }
  CHECK(w.position(1000) == pos);
  CHECK(w.position(1) == step(x, w.direction(1)));
  WalkStream fresh(seed, x, 3);
  CHECK(fresh.position(500) == w.position(500));
}

TEST_CASE("streams are independent of query order and keyed by tag") {
  const SeedSpec a{11, "one"}, b{11, "two"};
  WalkStream w1(a, Point{0, 0}, 1), w2(a, Point{0, 0}, 1), w3(b, Point{0, 0}, 1);
  const Point late = w1.position(400);
  for (uint64_t k = 1; k <= 400; ++k) (void)w2.position(k);
  CHECK(w2.position(400) == late);
  int differ = 0;
  for (uint64_t k = 1; k <= 64; ++k) differ += w1.direction(k) != w3.direction(k);
  CHECK(differ > 20);
}

TEST_CASE("step directions are roughly uniform") {
  WalkStream w({3, "uniform"}, Point{0, 0, 0}, 1);
  std::map<int, int> hist;
  const int n = 60000;
  for (int k = 1; k <= n; ++k) ++hist[w.direction(static_cast<uint64_t>(k))];
  REQUIRE(hist.size() == 6);
  for (const auto& [c, m] : hist) CHECK(std::abs(m - n / 6) < 600);
}

TEST_CASE("replica seeds and uniforms") {
  const SeedSpec base{1, "rep"};
  CHECK(replica_seed(base, 0).experiment_tag == "rep");
  CHECK(replica_seed(base, 0).master_seed != replica_seed(base, 1).master_seed);
  CHECK(replica_seed(base, 3) == replica_seed(base, 3));
  const auto key = philox_key(base);
  double sum = 0;
  for (uint64_t i = 0; i < 20000; ++i) {
    const double u = keyed_uniform(key, i, StreamDomain::kSampling);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("walk cache cap") {
  WalkStream w({1, "cap"}, Point{0, 0}, 1, 1000);
  CHECK_NOTHROW(w.position(1000));
  CHECK_THROWS_AS(w.position(5000), Error);
  CHECK_THROWS_AS(WalkStream({1, "cap"}, Point{0, 0}, 0), Error);
}
