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

// Philox4x32-10 counter-based generator and the direction decoder that turns
// its output words into lattice steps. Each kernel has a portable scalar
// reference and an AVX2 variant; the dispatching entry points pick one at
// runtime. All variants produce identical bits.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace frogpass::simd {

struct PhiloxKey {
  uint32_t k0 = 0;
  uint32_t k1 = 0;
};

/// Structure-of-arrays counters; all four spans have the same length n.
struct PhiloxCounters {
  std::span<const uint32_t> c0, c1, c2, c3;
  size_t size() const noexcept { return c0.size(); }
};

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
/// Best ISA supported by the running CPU.
Isa detected_isa();
Isa active_isa();
/// Throws if `isa` is not supported by the running CPU.
void set_active_isa(Isa isa);

// Reference kernels. `out` receives 4 words per block, block j at out[4j..4j+3].
void philox4x32_10_scalar(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out);
void decode_directions_scalar(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out);

#if defined(__x86_64__) || defined(__i386__)
void philox4x32_10_avx2(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out);
void decode_directions_avx2(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out);
#endif

// Dispatching entry points.
void philox4x32_10(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out);
/// out[i] = floor(words[i] * num_dirs / 2^32).
void decode_directions(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out);

/// One block, scalar.
std::array<uint32_t, 4> philox4x32_10_block(PhiloxKey key, std::array<uint32_t, 4> ctr);

/// Blocks with counters (first + j, c1, c2, c3) for j in [0, n); out has 4n words.
void philox_run(PhiloxKey key, uint32_t first, uint32_t c1, uint32_t c2, uint32_t c3, std::span<uint32_t> out);

}  // namespace frogpass::simd
