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

#include "frogpass/simd/philox.hpp"
#include "philox_constants.hpp"

namespace frogpass::simd {

namespace {

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

}  // namespace

std::array<uint32_t, 4> philox4x32_10_block(PhiloxKey key, std::array<uint32_t, 4> c) {
  uint32_t k0 = key.k0, k1 = key.k1;
  for (int r = 0; r < kPhiloxRounds; ++r) {
    if (r > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
  }
  return c;
}

void philox4x32_10_scalar(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out) {
  const size_t n = ctr.size();
  for (size_t j = 0; j < n; ++j) {
    const auto b = philox4x32_10_block(key, {ctr.c0[j], ctr.c1[j], ctr.c2[j], ctr.c3[j]});
    out[4 * j + 0] = b[0];
    out[4 * j + 1] = b[1];
    out[4 * j + 2] = b[2];
    out[4 * j + 3] = b[3];
  }
}

void decode_directions_scalar(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out) {
  for (size_t i = 0; i < words.size(); ++i)
    out[i] = static_cast<uint8_t>((static_cast<uint64_t>(words[i]) * num_dirs) >> 32);
}

}  // namespace frogpass::simd
