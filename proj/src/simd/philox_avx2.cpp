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

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include "frogpass/simd/philox.hpp"
#include "philox_constants.hpp"

#define FROGPASS_AVX2 __attribute__((target("avx2")))

namespace frogpass::simd {

namespace {

// 32x32 -> 64 products of all eight lanes, split into high and low words.
FROGPASS_AVX2 inline void mulhilo8(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

FROGPASS_AVX2 inline __m256i load8(const uint32_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

}  // namespace

FROGPASS_AVX2 void philox4x32_10_avx2(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out) {
  const size_t n = ctr.size();
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kPhiloxM1));
  size_t j = 0;
  alignas(32) uint32_t lanes[4][8];
  for (; j + 8 <= n; j += 8) {
    __m256i x0 = load8(&ctr.c0[j]);
    __m256i x1 = load8(&ctr.c1[j]);
    __m256i x2 = load8(&ctr.c2[j]);
    __m256i x3 = load8(&ctr.c3[j]);
    uint32_t k0 = key.k0, k1 = key.k1;
    for (int r = 0; r < kPhiloxRounds; ++r) {
      if (r > 0) {
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
      }
      __m256i hi0, lo0, hi1, lo1;
      mulhilo8(x0, m0, hi0, lo0);
      mulhilo8(x2, m1, hi1, lo1);
      const __m256i kk0 = _mm256_set1_epi32(static_cast<int>(k0));
      const __m256i kk1 = _mm256_set1_epi32(static_cast<int>(k1));
      x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), kk0);
      x1 = lo1;
      x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), kk1);
      x3 = lo0;
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[0]), x0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[1]), x1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[2]), x2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[3]), x3);
    uint32_t* o = &out[4 * j];
    for (int b = 0; b < 8; ++b) {
      o[4 * b + 0] = lanes[0][b];
      o[4 * b + 1] = lanes[1][b];
      o[4 * b + 2] = lanes[2][b];
      o[4 * b + 3] = lanes[3][b];
    }
  }
  if (j < n) {
    const PhiloxCounters tail{ctr.c0.subspan(j), ctr.c1.subspan(j), ctr.c2.subspan(j), ctr.c3.subspan(j)};
    philox4x32_10_scalar(key, tail, out.subspan(4 * j));
  }
}

FROGPASS_AVX2 void decode_directions_avx2(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out) {
  const size_t n = words.size();
  const __m256i m = _mm256_set1_epi32(static_cast<int>(num_dirs));
  // Low byte of each 32-bit lane to the front of its 128-bit half.
  const __m256i pick = _mm256_setr_epi8(0, 4, 8, 12, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  //
                                        0, 4, 8, 12, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i hi, lo;
    mulhilo8(load8(&words[i]), m, hi, lo);
    const __m256i bytes = _mm256_shuffle_epi8(hi, pick);
    const uint32_t first = static_cast<uint32_t>(_mm256_extract_epi32(bytes, 0));
    const uint32_t second = static_cast<uint32_t>(_mm256_extract_epi32(bytes, 4));
    const uint64_t packed = static_cast<uint64_t>(first) | (static_cast<uint64_t>(second) << 32);
    __builtin_memcpy(&out[i], &packed, 8);
  }
  if (i < n) decode_directions_scalar(words.subspan(i), num_dirs, out.subspan(i));
}

}  // namespace frogpass::simd

#endif
