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

#include "frogpass/passage.hpp"

#include <algorithm>
#include <limits>
#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

// ---------------------------------------------------------------------------
// ActivationTable

HittingTime ActivationTable::visit_time(const Point& y) const {
  if (y.dim() == source_.dim() && grid_.contains(y)) {
    const int32_t v = visit_[grid_.index(y)];
    if (v >= 0) return HittingTime::finite(v);
  }
  return HittingTime::censored(explored_);
}

std::optional<Point> ActivationTable::first_visitor_origin(const Point& y) const {
  if (y.dim() != source_.dim() || !grid_.contains(y)) return std::nullopt;
  const size_t idx = grid_.index(y);
  if (visit_[idx] < 0) return std::nullopt;
  const int32_t f = first_visitor_[idx];
  if (f < 0) return source_;
  return frogs_[static_cast<size_t>(f)].origin;
}

std::vector<Point> ActivationTable::genealogy(const Point& y) const {
  if (!visit_time(y).is_finite()) return {};
  std::vector<Point> chain{y};
  Point cur = y;
  while (cur != source_) {
    cur = frogs_[static_cast<size_t>(first_visitor_[grid_.index(cur)])].origin;
    chain.push_back(cur);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<std::pair<Point, int64_t>> ActivationTable::visited() const {
  std::vector<std::pair<Point, int64_t>> out;
  for (size_t i = 0; i < visit_.size(); ++i)
    if (visit_[i] >= 0) out.emplace_back(grid_.point(i), visit_[i]);
  return out;
}

ActivationTable simulate_frogs(const Environment& env, const Point& source, int64_t horizon,
                               const SimulationOptions& options) {
  require(horizon >= 0, "simulate_frogs: horizon must be nonnegative");
  require(source.dim() == env.dim(), "simulate_frogs: dimension mismatch");
  require(horizon < std::numeric_limits<int32_t>::max(), "simulate_frogs: horizon too large");
  if (!env.in_box(source)) fail(ErrorKind::kGeometry, "simulate_frogs: source " + source.str() + " lies outside the box");
  require(env.omega(source) >= 1, "simulate_frogs: source " + source.str() + " holds no frog");
  if (options.policy == BoxPolicy::kExact && env.box_radius() < horizon + l1_norm(source)) {
    fail(ErrorKind::kGeometry, "simulate_frogs: box radius " + std::to_string(env.box_radius()) +
                                   " is below horizon + ||source||_1 = " + std::to_string(horizon + l1_norm(source)));
  }

  ActivationTable tab;
  tab.source_ = source;
  tab.horizon_ = horizon;
  tab.grid_ = CubeGrid(env.dim(), horizon, source);
  const CubeGrid& grid = tab.grid_;
  tab.visit_.assign(grid.size(), -1);
  tab.first_visitor_.assign(grid.size(), -1);

  const simd::PhiloxKey key = philox_key(env.seed());
  const int dim = env.dim();
  std::array<std::ptrdiff_t, 2 * kMaxDim> stride{};
  for (int c = 0; c < 2 * dim; ++c) stride[static_cast<size_t>(c)] = grid.stride(c);

  struct Live {
    std::ptrdiff_t pos;
    StepCursor cursor;
  };
  std::vector<Live> live;

  auto wake = [&](const Point& site, size_t idx, int64_t t) {
    uint32_t count = 0;
    switch (options.policy) {
      case BoxPolicy::kTruncatedWorld:
        count = env.omega_or_zero(site);
        break;
      case BoxPolicy::kOnDemand:
      case BoxPolicy::kExact:
        if (!env.in_box(site))
          fail(ErrorKind::kGeometry, "simulate_frogs: activation reached " + site.str() + " outside the box of radius " +
                                         std::to_string(env.box_radius()) + " at time " + std::to_string(t));
        count = env.omega_or_zero(site);
        break;
    }
    for (uint32_t ell = 1; ell <= count; ++ell) {
      tab.frogs_.push_back({site, ell, t});
      live.push_back({static_cast<std::ptrdiff_t>(idx), StepCursor(key, walk_stream_id(site, ell), dim)});
    }
  };

  std::vector<uint8_t> is_target;
  size_t remaining = 0;
  const bool early_stop = !options.stop_when_visited.empty();
  if (early_stop) {
    is_target.assign(grid.size(), 0);
    for (const Point& y : options.stop_when_visited) {
      require(y.dim() == dim, "simulate_frogs: target dimension mismatch");
      if (!grid.contains(y) || l1_dist(y, source) > horizon) continue;
      const size_t i = grid.index(y);
      if (!is_target[i]) {
        is_target[i] = 1;
        ++remaining;
      }
    }
  }

  const size_t src = grid.index(source);
  tab.visit_[src] = 0;
  if (early_stop && is_target[src]) {
    is_target[src] = 0;
    --remaining;
  }
  wake(source, src, 0);
  if (options.record_awake_trace) tab.awake_trace_.push_back(static_cast<int64_t>(live.size()));

  std::vector<size_t> fresh;
  int64_t t = 0;
  while (t < horizon && !(early_stop && remaining == 0)) {
    ++t;
    fresh.clear();
    const size_t n = live.size();
    for (size_t i = 0; i < n; ++i) {
      Live& f = live[i];
      f.pos += stride[static_cast<size_t>(f.cursor.next())];
      const auto idx = static_cast<size_t>(f.pos);
      if (tab.visit_[idx] < 0) {
        tab.visit_[idx] = static_cast<int32_t>(t);
        tab.first_visitor_[idx] = static_cast<int32_t>(i);
        fresh.push_back(idx);
        if (early_stop && is_target[idx]) --remaining;
      }
    }
    // Frogs woken at time t start moving at t + 1.
    for (size_t idx : fresh) wake(grid.point(idx), idx, t);
    if (options.record_awake_trace) tab.awake_trace_.push_back(static_cast<int64_t>(live.size()));
  }
  tab.explored_ = t;
  return tab;
}

// ---------------------------------------------------------------------------
// Hitting times of a single site's frogs

HitTable::HitTable(const Point& center, int64_t radius) : grid_(center.dim(), radius, center), time_(grid_.size(), -1) {}

std::optional<int64_t> HitTable::at(const Point& v) const {
  if (v.dim() != grid_.dim() || !grid_.contains(v)) return std::nullopt;
  const int32_t t = time_[grid_.index(v)];
  if (t < 0) return std::nullopt;
  return t;
}

void HitTable::record(const Point& v, int64_t k) {
  if (!grid_.contains(v)) return;
  int32_t& slot = time_[grid_.index(v)];
  if (slot < 0 || k < slot) slot = static_cast<int32_t>(k);
}

std::vector<std::pair<Point, int64_t>> HitTable::entries() const {
  std::vector<std::pair<Point, int64_t>> out;
  for (size_t i = 0; i < time_.size(); ++i)
    if (time_[i] >= 0) out.emplace_back(grid_.point(i), time_[i]);
  return out;
}

HitTable hitting_times_from(const Environment& env, const Point& u, int64_t steps, int64_t linf_radius) {
  require(steps >= 0, "hitting_times_from: negative step budget");
  const int64_t radius = linf_radius < 0 ? steps : std::min(steps, linf_radius);
  HitTable table(u, radius);
  const uint32_t count = env.omega(u);
  if (count == 0) return table;
  table.record(u, 0);
  const simd::PhiloxKey key = philox_key(env.seed());
  for (uint32_t ell = 1; ell <= count; ++ell) {
    StepCursor cursor(key, walk_stream_id(u, ell), env.dim());
    Point pos = u;
    for (int64_t k = 1; k <= steps; ++k) {
      pos = step(pos, cursor.next());
      table.record(pos, k);
    }
  }
  return table;
}

HittingTime tau(const Environment& env, const Point& u, const Point& v, int64_t horizon) {
  require(u.dim() == env.dim() && v.dim() == env.dim(), "tau: dimension mismatch");
  const uint32_t count = env.omega(u);
  if (count == 0) return HittingTime::censored(horizon);
  if (u == v) return HittingTime::finite(0);
  const int64_t dist = l1_dist(u, v);
  if (dist > horizon) return HittingTime::censored(horizon);
  const simd::PhiloxKey key = philox_key(env.seed());
  int64_t best = horizon + 1;
  for (uint32_t ell = 1; ell <= count; ++ell) {
    StepCursor cursor(key, walk_stream_id(u, ell), env.dim());
    Point pos = u;
    for (int64_t k = 1; k < best; ++k) {
      pos = step(pos, cursor.next());
      if (pos == v) {
        best = k;
        break;
      }
    }
  }
  return best <= horizon ? HittingTime::finite(best) : HittingTime::censored(horizon);
}

// ---------------------------------------------------------------------------
// Passage times

PassageOutcome passage_time_between(const Environment& env, const Point& source, const Point& x, int64_t horizon,
                                    BoxPolicy policy) {
  require(source.dim() == env.dim() && x.dim() == env.dim(), "passage_time: dimension mismatch");
  PassageOutcome out;
  out.horizon = horizon;
  out.box_radius = env.box_radius();
  out.source = source;
  out.target = x;
  out.value = HittingTime::censored(horizon);
  if (env.omega(source) == 0) return out;
  SimulationOptions opt;
  opt.policy = policy;
  opt.stop_when_visited = {x};
  const ActivationTable tab = simulate_frogs(env, source, horizon, opt);
  const HittingTime v = tab.visit_time(x);
  if (v.is_finite()) {
    out.value = v;
    out.witness = tab.genealogy(x);
  }
  return out;
}

PassageOutcome passage_time(const Environment& env, const Point& x, int64_t horizon, BoxPolicy policy) {
  const Point origin(env.dim());
  require(env.omega(origin) >= 1, "passage_time: origin must be occupied (condition the environment first)");
  return passage_time_between(env, origin, x, horizon, policy);
}

StarPassage passage_time_star_between(const Environment& env, const Point& y, const Point& x, int64_t horizon,
                                      BoxPolicy policy) {
  StarPassage out;
  out.source_star = star(env, y);
  out.target_star = star(env, x);
  out.outcome = passage_time_between(env, out.source_star, out.target_star, horizon, policy);
  return out;
}

PassageOutcome oracle_passage_time(const Environment& env, const Point& source, const Point& x, int64_t horizon,
                                   size_t max_occupied) {
  require(source.dim() == env.dim() && x.dim() == env.dim(), "oracle: dimension mismatch");
  PassageOutcome out;
  out.horizon = horizon;
  out.box_radius = env.box_radius();
  out.source = source;
  out.target = x;
  out.value = HittingTime::censored(horizon);
  if (env.omega(source) == 0) return out;

  std::vector<Point> nodes;
  for (const Point& p : env.sites())
    if (env.omega_or_zero(p) > 0) nodes.push_back(p);
  if (nodes.size() > max_occupied)
    fail(ErrorKind::kCapExceeded, "oracle: " + std::to_string(nodes.size()) + " occupied sites exceed the cap of " +
                                      std::to_string(max_occupied));
  const auto src_it = std::find(nodes.begin(), nodes.end(), source);
  const size_t src = static_cast<size_t>(src_it - nodes.begin());
  size_t dst = static_cast<size_t>(std::find(nodes.begin(), nodes.end(), x) - nodes.begin());
  const bool target_is_sink = dst == nodes.size();
  if (target_is_sink) nodes.push_back(x);

  const size_t n = nodes.size();
  std::vector<HitTable> hits;
  hits.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (target_is_sink && i == n - 1) {
      hits.emplace_back();
    } else {
      hits.push_back(hitting_times_from(env, nodes[i], horizon));
    }
  }

  constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> dist(n, kInf);
  std::vector<size_t> pred(n, n);
  std::vector<bool> done(n, false);
  dist[src] = 0;
  for (size_t round = 0; round < n; ++round) {
    size_t u = n;
    for (size_t i = 0; i < n; ++i)
      if (!done[i] && dist[i] < kInf && (u == n || dist[i] < dist[u])) u = i;
    if (u == n) break;
    done[u] = true;
    if (target_is_sink && u == n - 1) continue;
    for (size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      const auto w = hits[u].at(nodes[v]);
      if (w && dist[u] + *w < dist[v]) {
        dist[v] = dist[u] + *w;
        pred[v] = u;
      }
    }
  }
  if (dist[dst] <= horizon) {
    out.value = HittingTime::finite(dist[dst]);
    std::vector<Point> chain;
    for (size_t v = dst; v != n; v = pred[v]) chain.push_back(nodes[v]);
    std::reverse(chain.begin(), chain.end());
    out.witness = std::move(chain);
  }
  return out;
}

Point witness_last_relay(const Environment& env, const Point& x, int64_t horizon, BoxPolicy policy) {
  const Point source = star(env, Point(env.dim()));
  SimulationOptions opt;
  opt.policy = policy;
  opt.stop_when_visited = {x};
  const ActivationTable tab = simulate_frogs(env, source, horizon, opt);
  const auto origin = tab.first_visitor_origin(x);
  if (!origin) fail(ErrorKind::kInvalidArgument, "witness_last_relay: passage to " + x.str() + " is censored at " + std::to_string(horizon));
  return *origin;
}

bool jump_witness_scan(const Environment& env, const Point& x, int64_t horizon, int64_t t, BoxPolicy policy) {
  const PassageOutcome p = passage_time(env, x, horizon, policy);
  if (!p.value.is_finite()) fail(ErrorKind::kInvalidArgument, "jump_witness_scan: passage to " + x.str() + " is censored");
  const auto& chain = *p.witness;
  for (size_t i = 0; i + 1 < chain.size(); ++i)
    if (l1_dist(chain[i], chain[i + 1]) >= t) return true;
  return false;
}

nlohmann::json replica_dump(const Environment& env, const ActivationTable& table) {
  nlohmann::json visits = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  auto coords = [](const Point& p) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
    return a;
  };
  for (const auto& [p, t] : table.visited()) {
    visits.push_back({{"site", coords(p)}, {"time", t}});
    const auto origin = table.first_visitor_origin(p);
    if (origin && *origin != p) edges.push_back({{"from", coords(*origin)}, {"to", coords(p)}, {"time", t}});
  }
  return {
      {"environment", {{"law", env.law().str()},
                       {"box_radius", env.box_radius()},
                       {"seed", {{"master_seed", env.seed().master_seed}, {"experiment_tag", env.seed().experiment_tag}}}}},
      {"source", coords(table.source())},
      {"horizon", table.horizon()},
      {"explored_through", table.explored_through()},
      {"visit_times", visits},
      {"genealogy_edges", edges},
  };
}

}  // namespace frogpass
