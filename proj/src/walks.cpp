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

#include "frogpass/walks.hpp"

#include <algorithm>

#include "frogpass/error.hpp"

namespace frogpass {

namespace {

constexpr uint64_t kWalkSalt = 0x243F6A8885A308D3ULL;
constexpr uint64_t kSiteSalt = 0x13198A2E03707344ULL;
constexpr uint64_t kReplicaSalt = 0xA4093822299F31D0ULL;

uint64_t fold_point(uint64_t h, const Point& x) {
  h = mix64(h ^ static_cast<uint64_t>(x.dim()));
  for (int i = 0; i < x.dim(); ++i) h = mix64(h ^ static_cast<uint64_t>(x[i]));
  return h;
}

}  // namespace

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

simd::PhiloxKey philox_key(const SeedSpec& seed) {
  const uint64_t k = mix64(seed.master_seed ^ mix64(fnv1a64(seed.experiment_tag)));
  return {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
}

uint64_t walk_stream_id(const Point& x, uint64_t frog_index) {
  return mix64(fold_point(kWalkSalt, x) ^ frog_index);
}

uint64_t site_stream_id(const Point& x) { return fold_point(kSiteSalt, x); }

SeedSpec replica_seed(const SeedSpec& base, uint64_t index) {
  return {mix64(base.master_seed ^ mix64(index ^ kReplicaSalt)), base.experiment_tag};
}

double keyed_uniform(simd::PhiloxKey key, uint64_t stream_id, StreamDomain domain, uint32_t block) {
  const auto b = simd::philox4x32_10_block(
      key, {block, static_cast<uint32_t>(stream_id), static_cast<uint32_t>(stream_id >> 32),
            static_cast<uint32_t>(domain)});
  const uint64_t bits = (static_cast<uint64_t>(b[0]) << 32) | b[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

StepCursor::StepCursor(simd::PhiloxKey key, uint64_t stream_id, int dim)
    : key_(key),
      id_lo_(static_cast<uint32_t>(stream_id)),
      id_hi_(static_cast<uint32_t>(stream_id >> 32)),
      num_dirs_(static_cast<uint32_t>(2 * dim)) {}

void StepCursor::refill() {
  std::array<uint32_t, kBuffer> words;
  simd::philox_run(key_, next_block_, id_lo_, id_hi_, static_cast<uint32_t>(StreamDomain::kWalk), words);
  simd::decode_directions(words, num_dirs_, buf_);
  next_block_ += kBuffer / 4;
  pos_ = 0;
}

WalkStream::WalkStream(const SeedSpec& seed, const Point& origin, uint64_t frog_index, size_t max_cached_steps)
    : key_(philox_key(seed)),
      stream_id_(walk_stream_id(origin, frog_index)),
      origin_(origin),
      frog_index_(frog_index),
      max_steps_(max_cached_steps),
      last_pos_(origin) {
  require(frog_index >= 1, "frog index must be >= 1");
}

void WalkStream::ensure(uint64_t steps) {
  if (steps <= cache_.size()) return;
  if (steps > max_steps_)
    fail(ErrorKind::kCapExceeded, "walk stream cache cap of " + std::to_string(max_steps_) + " steps exceeded");
  size_t target = std::max<size_t>({static_cast<size_t>(steps), 2 * cache_.size(), 64});
  target = std::min(target, max_steps_);
  target = (target + 3) / 4 * 4;
  const size_t old = cache_.size();  // always a multiple of 4
  std::vector<uint32_t> words(target - old);
  simd::philox_run(key_, static_cast<uint32_t>(old / 4), static_cast<uint32_t>(stream_id_),
                   static_cast<uint32_t>(stream_id_ >> 32), static_cast<uint32_t>(StreamDomain::kWalk), words);
  cache_.resize(target);
  simd::decode_directions(words, static_cast<uint32_t>(2 * origin_.dim()),
                          std::span<uint8_t>(cache_).subspan(old));
}

int WalkStream::direction(uint64_t k) {
  require(k >= 1, "step index must be >= 1");
  ensure(k);
  return cache_[static_cast<size_t>(k - 1)];
}

Point WalkStream::position(uint64_t k) {
  ensure(k);
  if (k < last_k_) {
    last_k_ = 0;
    last_pos_ = origin_;
  }
  for (; last_k_ < k; ++last_k_) last_pos_ = step(last_pos_, cache_[static_cast<size_t>(last_k_)]);
  return last_pos_;
}

WalkStream derive_stream(const SeedSpec& seed, const Point& x, uint64_t frog_index) {
  require(frog_index >= 1, "frog index must be >= 1");
  return WalkStream(seed, x, frog_index);
}

}  // namespace frogpass
