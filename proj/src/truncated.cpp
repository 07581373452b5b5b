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

#include "frogpass/truncated.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/parallel.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

TruncationParams TruncationParams::make(int dim, int64_t t, double c4_hat, double gamma) {
  TruncationParams p;
  p.t = t;
  p.gamma = gamma;
  p.c4_hat = c4_hat;
  p.K = static_cast<int64_t>(std::ceil(dim * (c4_hat + gamma + 1.0))) + 1;
  p.validate(dim);
  return p;
}

void TruncationParams::validate(int dim) const {
  require(t >= 1, "truncation: t must be >= 1");
  require(gamma > 0, "truncation: gamma must be positive");
  require(c4_hat >= 0, "truncation: c4_hat must be nonnegative");
  require(static_cast<double>(K) > dim * (c4_hat + gamma + 1.0),
          "truncation: K = " + std::to_string(K) + " must exceed d (c4_hat + gamma + 1)");
  require(K <= (int64_t{1} << 20) && t <= (int64_t{1} << 20), "truncation: K or t too large");
}

int64_t sigma_t(const Environment& env, const Point& x, const Point& y, const TruncationParams& p) {
  const int64_t r = linf_dist(x, y);
  if (r > p.t) return p.jump_cost(r);
  const HittingTime h = tau(env, x, y, p.cap());
  return h.is_finite() ? h.value() : p.cap();
}

bool sigma_sandwich_holds(const Point& x, const Point& y, int64_t value, const TruncationParams& p) {
  return l1_dist(x, y) <= value && value <= p.jump_cost(linf_dist(x, y));
}

namespace {

int64_t ellipse_reach(const Point& x, const Point& y, int64_t bound) {
  return (bound + l1_norm(x) + l1_norm(y)) / 2;
}

void require_ellipse_in_box(const Environment& env, const Point& x, const Point& y, int64_t bound) {
  const int64_t reach = ellipse_reach(x, y, bound);
  if (reach > env.box_radius())
    fail(ErrorKind::kGeometry, "truncated_passage: search region reaches l1 radius " + std::to_string(reach) +
                                   " but the box radius is " + std::to_string(env.box_radius()));
}

void count_edges(TruncatedPath& out, const std::vector<bool>& via_jump, const TruncationParams& p) {
  for (size_t i = 0; i + 1 < out.witness.size(); ++i) {
    if (!via_jump[i + 1]) continue;
    if (linf_dist(out.witness[i], out.witness[i + 1]) > p.t) ++out.long_range_edges;
    else ++out.capped_edges;
  }
}

// All offsets with every coordinate in [-r, r], in lexicographic order.
std::vector<Point> cube_offsets(int dim, int64_t r) {
  const CubeGrid g(dim, r);
  std::vector<Point> out;
  out.reserve(g.size());
  for (size_t i = 0; i < g.size(); ++i) out.push_back(g.point(i));
  return out;
}

}  // namespace

TruncatedPath truncated_passage(const Environment& env, const Point& x, const Point& y, const TruncationParams& p,
                                int64_t value_cap) {
  require(x.dim() == env.dim() && y.dim() == env.dim(), "truncated_passage: dimension mismatch");
  p.validate(env.dim());
  TruncatedPath out;
  if (x == y) {
    out.value = HittingTime::finite(0);
    out.witness = {x};
    return out;
  }
  if (!env.in_box(x)) fail(ErrorKind::kGeometry, "truncated_passage: source " + x.str() + " lies outside the box");
  const int64_t direct = sigma_t(env, x, y, p);
  const int64_t bound = value_cap < 0 ? direct : std::min(direct, value_cap);
  require_ellipse_in_box(env, x, y, bound);

  const int dim = env.dim();
  const int64_t cap = p.cap();
  const int64_t king = 4 * p.K;
  const std::vector<Point> ball = cube_offsets(dim, p.t);
  std::vector<Point> kings = cube_offsets(dim, 1);
  kings.erase(std::find(kings.begin(), kings.end(), Point(dim)));

  // Node storage: real sites and their jump-layer copies.
  std::unordered_map<Point, int32_t, PointHash> real_id, jump_id;
  std::vector<Point> pos;
  std::vector<uint8_t> is_jump, settled, via_jump;
  std::vector<int64_t> g;
  std::vector<int32_t> link;  // real: predecessor relay; jump: originating relay

  auto node = [&](const Point& z, bool jump) -> int32_t {
    auto& m = jump ? jump_id : real_id;
    auto [it, fresh] = m.try_emplace(z, static_cast<int32_t>(pos.size()));
    if (fresh) {
      pos.push_back(z);
      is_jump.push_back(jump);
      settled.push_back(0);
      via_jump.push_back(0);
      g.push_back(std::numeric_limits<int64_t>::max());
      link.push_back(-1);
    }
    return it->second;
  };

  using Entry = std::tuple<int64_t, int64_t, uint8_t, Point, int32_t>;  // f, h, jump, site, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  auto h = [&](const Point& z) { return l1_dist(z, y); };
  auto relax = [&](const Point& z, bool jump, int64_t ng, int32_t from, bool through_jump) {
    const int64_t hz = h(z);
    if (ng + hz > bound) return;
    const int32_t id = node(z, jump);
    if (settled[static_cast<size_t>(id)] || ng >= g[static_cast<size_t>(id)]) return;
    g[static_cast<size_t>(id)] = ng;
    link[static_cast<size_t>(id)] = from;
    via_jump[static_cast<size_t>(id)] = through_jump;
    open.emplace(ng + hz, hz, static_cast<uint8_t>(jump), z, id);
  };

  relax(x, false, 0, -1, false);
  int32_t target = -1;
  while (!open.empty()) {
    const auto [f, hz, jump, z, id] = open.top();
    open.pop();
    const auto uid = static_cast<size_t>(id);
    if (settled[uid] || f != g[uid] + hz) continue;
    settled[uid] = 1;
    const int64_t gu = g[uid];
    if (jump) {
      relax(z, false, gu, link[uid], true);
      for (const Point& k : kings) relax(z + k, true, gu + king, link[uid], true);
      continue;
    }
    ++out.settled_nodes;
    if (z == y) {
      target = id;
      break;
    }
    if (!env.in_box(z)) fail(ErrorKind::kGeometry, "truncated_passage: relay " + z.str() + " lies outside the box");
    const int64_t slack = bound - gu;
    if (env.omega(z) > 0) {
      const HitTable hits = hitting_times_from(env, z, std::min(cap, slack), p.t);
      for (const auto& [v, k] : hits.entries())
        if (v != z) relax(v, false, gu + k, id, false);
    }
    if (gu + cap <= bound)
      for (const Point& off : ball) relax(z + off, true, gu + cap, id, true);
  }

  if (target < 0) {
    out.value = HittingTime::censored(bound);
    return out;
  }
  out.value = HittingTime::finite(g[static_cast<size_t>(target)]);
  std::vector<bool> jumps;
  for (int32_t v = target; v >= 0; v = link[static_cast<size_t>(v)]) {
    out.witness.push_back(pos[static_cast<size_t>(v)]);
    jumps.push_back(via_jump[static_cast<size_t>(v)]);
  }
  std::reverse(out.witness.begin(), out.witness.end());
  std::reverse(jumps.begin(), jumps.end());
  count_edges(out, jumps, p);
  return out;
}

TruncatedPath truncated_passage_oracle(const Environment& env, const Point& x, const Point& y,
                                       const TruncationParams& p, size_t max_sites) {
  require(x.dim() == env.dim() && y.dim() == env.dim(), "oracle: dimension mismatch");
  p.validate(env.dim());
  TruncatedPath out;
  if (x == y) {
    out.value = HittingTime::finite(0);
    out.witness = {x};
    return out;
  }
  const int64_t bound = sigma_t(env, x, y, p);
  require_ellipse_in_box(env, x, y, bound);
  std::vector<Point> sites;
  const CubeGrid window(env.dim(), bound, x);
  for (size_t i = 0; i < window.size(); ++i) {
    const Point z = window.point(i);
    if (l1_dist(z, x) + l1_dist(z, y) <= bound) sites.push_back(z);
  }
  if (sites.size() > max_sites)
    fail(ErrorKind::kCapExceeded, "oracle: " + std::to_string(sites.size()) + " candidate sites exceed the cap of " +
                                      std::to_string(max_sites));
  const size_t n = sites.size();
  std::vector<HitTable> hits(n);
  for (size_t i = 0; i < n; ++i) hits[i] = hitting_times_from(env, sites[i], p.cap(), p.t);
  auto sigma = [&](size_t u, size_t v) {
    const int64_t r = linf_dist(sites[u], sites[v]);
    if (r > p.t) return p.jump_cost(r);
    const auto k = hits[u].at(sites[v]);
    return k ? *k : p.cap();
  };
  const size_t src = static_cast<size_t>(std::find(sites.begin(), sites.end(), x) - sites.begin());
  const size_t dst = static_cast<size_t>(std::find(sites.begin(), sites.end(), y) - sites.begin());
  constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> dist(n, kInf);
  std::vector<size_t> pred(n, n);
  std::vector<bool> done(n, false);
  dist[src] = 0;
  for (size_t round = 0; round < n; ++round) {
    size_t u = n;
    for (size_t i = 0; i < n; ++i)
      if (!done[i] && dist[i] < kInf && (u == n || dist[i] < dist[u])) u = i;
    if (u == n || u == dst) break;
    done[u] = true;
    for (size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      const int64_t nd = dist[u] + sigma(u, v);
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = u;
      }
    }
  }
  out.value = HittingTime::finite(dist[dst]);
  out.settled_nodes = static_cast<int64_t>(n);
  std::vector<bool> jumps;
  for (size_t v = dst; v != n; v = pred[v]) {
    out.witness.push_back(sites[v]);
    const size_t u = pred[v];
    jumps.push_back(u != n && !(linf_dist(sites[u], sites[v]) <= p.t && hits[u].at(sites[v])));
  }
  std::reverse(out.witness.begin(), out.witness.end());
  std::reverse(jumps.begin(), jumps.end());
  count_edges(out, jumps, p);
  return out;
}

// ---------------------------------------------------------------------------
// Tiling

Tiling::Tiling(int dim, int64_t t) : dim_(dim), t_(t) {
  require(dim >= 1 && dim <= kMaxDim, "tiling: bad dimension");
  require(t >= 1, "tiling: scale must be >= 1");
}

Point Tiling::box_of(const Point& z) const {
  require(z.dim() == dim_, "tiling: dimension mismatch");
  Point q(dim_);
  const int64_t shift = (t_ + 1) / 2 - 1;
  for (int i = 0; i < dim_; ++i) {
    const int64_t a = z[i] + shift;
    q.set(i, a >= 0 ? a / t_ : -((-a + t_ - 1) / t_));
  }
  return q;
}

int64_t geodesic_box_count(const std::vector<Point>& witness, const Tiling& tiling) {
  std::vector<Point> boxes;
  for (const Point& w : witness) boxes.push_back(tiling.box_of(w));
  std::sort(boxes.begin(), boxes.end());
  return static_cast<int64_t>(std::unique(boxes.begin(), boxes.end()) - boxes.begin());
}

double geodesic_box_bound(int dim, const TruncationParams& p, const Point& x) {
  const double ratio = std::max(1.0, static_cast<double>(linf_norm(x)) / static_cast<double>(p.t));
  return std::pow(3.0, dim) * (4.0 * static_cast<double>(p.K) * ratio + 1.0);
}

// ---------------------------------------------------------------------------
// Agreement experiment

namespace {

struct ReplicaAgreement {
  bool star_censored = false;
  std::vector<int8_t> verdict;  // -1 undecided, 0 agree, 1 disagree
  std::vector<int64_t> long_range, capped, box_count, sigma_evals, sigma_bad, sum_bad;
  std::vector<uint8_t> has_geodesic;
};

}  // namespace

AgreementResult agreement_experiment(const AgreementConfig& cfg) {
  require(cfg.x.dim() == cfg.dim, "agreement: target dimension mismatch");
  require(!cfg.t_ladder.empty(), "agreement: empty t ladder");
  require(cfg.replicas >= 1, "agreement: replicas must be positive");
  require(cfg.horizon >= l1_norm(cfg.x), "agreement: horizon below ||x||_1");
  std::vector<TruncationParams> params;
  for (int64_t t : cfg.t_ladder) params.push_back(TruncationParams::make(cfg.dim, t, cfg.c4_hat, cfg.gamma));

  AgreementResult result;
  result.box_radius = cfg.horizon + l1_norm(cfg.x) + 16;
  const size_t nt = params.size();
  std::vector<ReplicaAgreement> per(static_cast<size_t>(cfg.replicas));

  parallel_for(per.size(), cfg.threads, [&](size_t r) {
    ReplicaAgreement& out = per[r];
    out.verdict.assign(nt, -1);
    out.long_range.assign(nt, 0);
    out.capped.assign(nt, 0);
    out.box_count.assign(nt, 0);
    out.sigma_evals.assign(nt, 0);
    out.sigma_bad.assign(nt, 0);
    out.sum_bad.assign(nt, 0);
    out.has_geodesic.assign(nt, 0);
    const SeedSpec seed = replica_seed(cfg.seed, cfg.first_replica + r);
    const Environment env = sample_environment(cfg.law, cfg.dim, result.box_radius, seed);
    const Point o = star(env, Point(cfg.dim));
    const Point xs = star(env, cfg.x);
    const HittingTime ts = passage_time_between(env, o, xs, cfg.horizon, BoxPolicy::kOnDemand).value;
    out.star_censored = !ts.is_finite();
    const auto key = philox_key(seed);
    for (size_t i = 0; i < nt; ++i) {
      const TruncationParams& p = params[i];
      const TruncatedPath tp = truncated_passage(env, o, xs, p, cfg.horizon);
      const bool a = ts.is_finite(), b = tp.value.is_finite();
      if (a || b) out.verdict[i] = !(a && b && ts.value() == tp.value.value());
      auto audit = [&](const Point& u, const Point& v) -> int64_t {
        const int64_t s = sigma_t(env, u, v, p);
        ++out.sigma_evals[i];
        if (!sigma_sandwich_holds(u, v, s, p)) ++out.sigma_bad[i];
        return s;
      };
      if (b) {
        out.has_geodesic[i] = 1;
        int64_t sum = 0;
        for (size_t j = 0; j + 1 < tp.witness.size(); ++j) sum += audit(tp.witness[j], tp.witness[j + 1]);
        if (sum != tp.value.value()) ++out.sum_bad[i];
        out.long_range[i] = tp.long_range_edges;
        out.capped[i] = tp.capped_edges;
        out.box_count[i] = geodesic_box_count(tp.witness, Tiling(cfg.dim, p.t));
      }
      const int64_t spread = l1_norm(cfg.x);
      for (int64_t j = 0; j < cfg.sigma_probes; ++j) {
        const uint64_t id = mix64((static_cast<uint64_t>(i) << 32) ^ static_cast<uint64_t>(j));
        Point u(cfg.dim), v(cfg.dim);
        for (int c = 0; c < cfg.dim; ++c) {
          const double a1 = keyed_uniform(key, id, StreamDomain::kSampling, static_cast<uint32_t>(2 * c));
          const double a2 = keyed_uniform(key, id, StreamDomain::kSampling, static_cast<uint32_t>(2 * c + 1));
          u.set(c, static_cast<int64_t>(std::floor(a1 * static_cast<double>(2 * spread + 1))) - spread);
          v.set(c, static_cast<int64_t>(std::floor(a2 * static_cast<double>(4 * p.t + 1))) - 2 * p.t);
        }
        if (!env.in_box(u)) continue;
        audit(u, u + v);
      }
    }
  });

  for (const auto& r : per) result.censored_star += r.star_censored;
  for (size_t i = 0; i < nt; ++i) {
    AgreementRow row;
    row.t = params[i].t;
    row.K = params[i].K;
    row.replicas = cfg.replicas;
    row.box_bound = geodesic_box_bound(cfg.dim, params[i], cfg.x);
    for (const auto& r : per) {
      if (r.verdict[i] < 0) ++row.undecided;
      else row.disagreements += r.verdict[i];
      row.long_range_edges += r.long_range[i];
      row.capped_edges += r.capped[i];
      row.sigma_evaluations += r.sigma_evals[i];
      row.sigma_violations += r.sigma_bad[i];
      row.witness_sum_mismatches += r.sum_bad[i];
      if (r.has_geodesic[i]) {
        ++row.geodesics;
        row.box_count_max = std::max(row.box_count_max, r.box_count[i]);
        if (static_cast<double>(r.box_count[i]) > row.box_bound) ++row.box_violations;
      }
    }
    row.fraction = wilson_interval(row.disagreements, row.replicas - row.undecided);
    result.rows.push_back(row);
  }
  return result;
}

std::string agreement_csv(const AgreementResult& r) {
  std::ostringstream os;
  os << "t,replicas,disagreements,phat,ci_lo,ci_hi\n";
  for (const auto& row : r.rows)
    os << row.t << ',' << row.fraction.trials << ',' << row.disagreements << ',' << fmt12(row.fraction.phat) << ','
       << fmt12(row.fraction.ci_lo) << ',' << fmt12(row.fraction.ci_hi) << '\n';
  return os.str();
}

nlohmann::json to_json(const AgreementRow& row) {
  return {{"t", row.t},
          {"K", row.K},
          {"replicas", row.replicas},
          {"undecided", row.undecided},
          {"disagreements", row.disagreements},
          {"fraction", to_json(row.fraction)},
          {"long_range_edges", row.long_range_edges},
          {"capped_edges", row.capped_edges},
          {"geodesics", row.geodesics},
          {"box_count_max", row.box_count_max},
          {"box_bound", json_number(row.box_bound)},
          {"box_violations", row.box_violations},
          {"sigma_evaluations", row.sigma_evaluations},
          {"sigma_violations", row.sigma_violations},
          {"witness_sum_mismatches", row.witness_sum_mismatches}};
}

nlohmann::json to_json(const AgreementResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  return {{"rows", rows}, {"box_radius", r.box_radius}, {"censored_star", r.censored_star}};
}

}  // namespace frogpass
