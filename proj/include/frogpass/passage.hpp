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

// The frog dynamics: hitting times of one site's frogs, the event-driven
// activation process, first passage times T and T*, relay genealogies and
// an independent shortest-path oracle over hitting times.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/lattice.hpp"

namespace frogpass {

/// A time that is either finite or known only to exceed the horizon
/// (which also stands in for an infinite time).
class HittingTime {
 public:
  static HittingTime finite(int64_t k) { return HittingTime(true, k); }
  static HittingTime censored(int64_t horizon) { return HittingTime(false, horizon); }

  bool is_finite() const noexcept { return finite_; }
  /// The time when finite, the horizon when censored.
  int64_t value() const noexcept { return value_; }
  std::string str() const { return finite_ ? std::to_string(value_) : ">" + std::to_string(value_); }

  friend bool operator==(const HittingTime&, const HittingTime&) = default;

 private:
  HittingTime(bool finite, int64_t v) : finite_(finite), value_(v) {}
  bool finite_;
  int64_t value_;
};

/// How the finite box relates to the infinite lattice.
enum class BoxPolicy {
  /// Require box_radius >= horizon + ||source||_1 before simulating.
  kExact,
  /// Simulate, and fail only if a first visit actually lands outside the box.
  /// Values reported are then exact as well.
  kOnDemand,
  /// Sites outside the box hold no frogs. Models the finite world itself.
  kTruncatedWorld,
};

struct SimulationOptions {
  BoxPolicy policy = BoxPolicy::kExact;
  /// Stop as soon as all of these (reachable) sites have been visited.
  std::vector<Point> stop_when_visited;
  bool record_awake_trace = false;
};

struct FrogRecord {
  Point origin;
  uint64_t frog_index;
  int64_t activation_time;
};

/// First visit times of active frogs, with the frog that made each visit.
class ActivationTable {
 public:
  const Point& source() const noexcept { return source_; }
  int64_t horizon() const noexcept { return horizon_; }
  /// Last time step fully simulated (< horizon after an early stop).
  int64_t explored_through() const noexcept { return explored_; }

  HittingTime visit_time(const Point& y) const;
  /// Origin site of the frog that first visited y; nullopt if unvisited.
  std::optional<Point> first_visitor_origin(const Point& y) const;
  /// Relay chain source = v_0, v_1, ..., v_m = y following first visitors.
  std::vector<Point> genealogy(const Point& y) const;
  /// Visited sites with their times, in grid order.
  std::vector<std::pair<Point, int64_t>> visited() const;
  const std::vector<FrogRecord>& frogs() const noexcept { return frogs_; }
  const std::vector<int64_t>& awake_trace() const noexcept { return awake_trace_; }

 private:
  friend ActivationTable simulate_frogs(const Environment&, const Point&, int64_t, const SimulationOptions&);
  Point source_;
  int64_t horizon_ = 0;
  int64_t explored_ = 0;
  CubeGrid grid_;
  std::vector<int32_t> visit_;
  std::vector<int32_t> first_visitor_;
  std::vector<FrogRecord> frogs_;
  std::vector<int64_t> awake_trace_;
};

/// Discrete-time activation process from `source` (omega(source) >= 1) up to `horizon`.
ActivationTable simulate_frogs(const Environment& env, const Point& source, int64_t horizon,
                               const SimulationOptions& options = {});

struct PassageOutcome {
  HittingTime value = HittingTime::censored(0);
  /// Relay sites x_0, ..., x_m with sum of tau(x_i, x_{i+1}) equal to value.
  std::optional<std::vector<Point>> witness;
  int64_t horizon = 0;
  int64_t box_radius = 0;
  Point source;
  Point target;
};

/// First time one of u's own frogs stands on v.
HittingTime tau(const Environment& env, const Point& u, const Point& v, int64_t horizon);

/// tau(u, .) for every site reached within `steps`, restricted to the cube of
/// l_inf radius `linf_radius` around u (negative: no restriction).
class HitTable {
 public:
  HitTable() = default;
  HitTable(const Point& center, int64_t radius);
  std::optional<int64_t> at(const Point& v) const;
  std::vector<std::pair<Point, int64_t>> entries() const;
  void record(const Point& v, int64_t k);

 private:
  CubeGrid grid_;
  std::vector<int32_t> time_;
};
HitTable hitting_times_from(const Environment& env, const Point& u, int64_t steps, int64_t linf_radius = -1);

/// T(source, x).
PassageOutcome passage_time_between(const Environment& env, const Point& source, const Point& x, int64_t horizon,
                                    BoxPolicy policy = BoxPolicy::kExact);
/// T(0, x); needs omega(0) >= 1.
PassageOutcome passage_time(const Environment& env, const Point& x, int64_t horizon,
                            BoxPolicy policy = BoxPolicy::kExact);

struct StarPassage {
  PassageOutcome outcome;
  Point source_star;
  Point target_star;
};
/// T*(y, x) = T(y*, x*).
StarPassage passage_time_star_between(const Environment& env, const Point& y, const Point& x, int64_t horizon,
                                      BoxPolicy policy = BoxPolicy::kExact);
inline StarPassage passage_time_star(const Environment& env, const Point& x, int64_t horizon,
                                     BoxPolicy policy = BoxPolicy::kExact) {
  return passage_time_star_between(env, Point(env.dim()), x, horizon, policy);
}

/// Dijkstra over the complete graph on I intersected with the box, with edge
/// weights tau(u, v) censored at the horizon. Sites outside the box hold no
/// frogs, as in BoxPolicy::kTruncatedWorld.
PassageOutcome oracle_passage_time(const Environment& env, const Point& source, const Point& x, int64_t horizon,
                                   size_t max_occupied = 300);

/// v(x): origin of the frog that first reaches x in the process started at 0*.
Point witness_last_relay(const Environment& env, const Point& x, int64_t horizon,
                         BoxPolicy policy = BoxPolicy::kExact);

/// Whether the relay chain from 0 to x contains consecutive relays at l1
/// distance >= t.
bool jump_witness_scan(const Environment& env, const Point& x, int64_t horizon, int64_t t,
                       BoxPolicy policy = BoxPolicy::kExact);

/// Debug dump: environment reference, visit times and genealogy edges.
nlohmann::json replica_dump(const Environment& env, const ActivationTable& table);

}  // namespace frogpass
