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

// Seeded, counter-based simple random walks. Every frog trajectory
// S_k(x, l) is a pure function of (master seed, experiment tag, x, l), so
// any routine that asks for the same frog sees the same path regardless of
// query order or thread.
//
// Key layout (also documented in docs/rng.md):
//   philox key   = split64(mix64(master_seed ^ mix64(fnv1a64(tag))))
//   stream id    = fold of mix64 over [salt, d, x_1..x_d, (l)]
//   counter      = (block, lo32(stream id), hi32(stream id), domain)
// Step k >= 1 uses output word k-1 (block (k-1)/4, lane (k-1)%4) and has
// direction code floor(word * 2d / 2^32).

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "frogpass/lattice.hpp"
#include "frogpass/simd/philox.hpp"

namespace frogpass {

struct SeedSpec {
  uint64_t master_seed = 0;
  std::string experiment_tag;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Counter word c3: separates the uses of one key.
enum class StreamDomain : uint32_t {
  kWalk = 1,
  kSiteCount = 2,
  kOriginCondition = 3,
  kBernoulliField = 4,
  kBootstrap = 6,
  kSampling = 7,
};

uint64_t mix64(uint64_t z);
uint64_t fnv1a64(std::string_view s);

simd::PhiloxKey philox_key(const SeedSpec& seed);
uint64_t walk_stream_id(const Point& x, uint64_t frog_index);
uint64_t site_stream_id(const Point& x);

/// Seed of replica `index` of an experiment; the tag is kept.
SeedSpec replica_seed(const SeedSpec& base, uint64_t index);

/// Uniform double in [0, 1) from the first two words of block 0 of a keyed stream.
double keyed_uniform(simd::PhiloxKey key, uint64_t stream_id, StreamDomain domain, uint32_t block = 0);

/// Sequential reader of one frog's direction codes; keeps no history.
class StepCursor {
 public:
  StepCursor() = default;
  StepCursor(simd::PhiloxKey key, uint64_t stream_id, int dim);

  int next() {
    if (pos_ == kBuffer) refill();
    return buf_[pos_++];
  }

 private:
  static constexpr uint32_t kBuffer = 64;
  void refill();

  simd::PhiloxKey key_{};
  uint32_t id_lo_ = 0, id_hi_ = 0;
  uint32_t num_dirs_ = 0;
  uint32_t next_block_ = 0;
  uint32_t pos_ = kBuffer;
  std::array<uint8_t, kBuffer> buf_{};
};

/// Random-access trajectory of frog `frog_index` started at `origin`, with
/// a growable cache of direction codes.
class WalkStream {
 public:
  static constexpr size_t kDefaultMaxSteps = size_t{1} << 26;

  WalkStream(const SeedSpec& seed, const Point& origin, uint64_t frog_index,
             size_t max_cached_steps = kDefaultMaxSteps);

  const Point& origin() const noexcept { return origin_; }
  uint64_t frog_index() const noexcept { return frog_index_; }
  size_t cached_steps() const noexcept { return cache_.size(); }

  /// Direction code of step k (k >= 1).
  int direction(uint64_t k);
  /// S_k.
  Point position(uint64_t k);

 private:
  void ensure(uint64_t steps);

  simd::PhiloxKey key_;
  uint64_t stream_id_;
  Point origin_;
  uint64_t frog_index_;
  size_t max_steps_;
  std::vector<uint8_t> cache_;
  uint64_t last_k_ = 0;
  Point last_pos_;
};

WalkStream derive_stream(const SeedSpec& seed, const Point& x, uint64_t frog_index);
inline Point walk_position(WalkStream& w, uint64_t k) { return w.position(k); }

}  // namespace frogpass
