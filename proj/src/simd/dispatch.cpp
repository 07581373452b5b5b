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

#include <algorithm>
#include <atomic>
#include <vector>

#include "frogpass/error.hpp"
#include "frogpass/simd/philox.hpp"

namespace frogpass::simd {

namespace {

Isa probe_cpu() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(probe_cpu())};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = probe_cpu();
  return isa;
}

Isa active_isa() { return static_cast<Isa>(active_slot().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2)
    fail(ErrorKind::kInvalidArgument, "ISA avx2 is not supported on this CPU");
  active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void philox4x32_10(PhiloxKey key, const PhiloxCounters& ctr, std::span<uint32_t> out) {
#if defined(__x86_64__) || defined(__i386__)
  if (active_isa() == Isa::kAvx2) return philox4x32_10_avx2(key, ctr, out);
#endif
  philox4x32_10_scalar(key, ctr, out);
}

void decode_directions(std::span<const uint32_t> words, uint32_t num_dirs, std::span<uint8_t> out) {
#if defined(__x86_64__) || defined(__i386__)
  if (active_isa() == Isa::kAvx2) return decode_directions_avx2(words, num_dirs, out);
#endif
  decode_directions_scalar(words, num_dirs, out);
}

void philox_run(PhiloxKey key, uint32_t first, uint32_t c1, uint32_t c2, uint32_t c3, std::span<uint32_t> out) {
  const size_t n = out.size() / 4;
  constexpr size_t kChunk = 64;
  uint32_t b0[kChunk], b1[kChunk], b2[kChunk], b3[kChunk];
  for (size_t done = 0; done < n; done += kChunk) {
    const size_t m = std::min(kChunk, n - done);
    for (size_t j = 0; j < m; ++j) {
      b0[j] = first + static_cast<uint32_t>(done + j);
      b1[j] = c1;
      b2[j] = c2;
      b3[j] = c3;
    }
    philox4x32_10(key, PhiloxCounters{{b0, m}, {b1, m}, {b2, m}, {b3, m}}, out.subspan(4 * done, 4 * m));
  }
}

}  // namespace frogpass::simd
