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

#include "frogpass/percolation.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/parallel.hpp"
#include "frogpass/passage.hpp"

namespace frogpass {

SiteField::SiteField(int dim, int64_t radius, std::string provenance, std::vector<uint8_t> bits)
    : grid_(dim, radius), provenance_(std::move(provenance)), bits_(std::move(bits)) {
  require(bits_.size() == grid_.size(), "site field: bit count does not match the cube");
}

size_t SiteField::open_count() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), uint8_t{1}));
}

SiteField sample_bernoulli_field(double p, int dim, int64_t radius, const SeedSpec& seed) {
  require(p >= 0 && p <= 1, "bernoulli field: p must lie in [0,1]");
  require(radius >= 0, "bernoulli field: radius must be nonnegative");
  const CubeGrid grid(dim, radius);
  const auto key = philox_key(seed);
  std::vector<uint8_t> bits(grid.size());
  for (size_t i = 0; i < grid.size(); ++i)
    bits[i] = keyed_uniform(key, site_stream_id(grid.point(i)), StreamDomain::kBernoulliField) < p;
  return SiteField(dim, radius, "bernoulli(" + fmt12(p) + ")", std::move(bits));
}

namespace {

struct UnionFind {
  std::vector<int32_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int32_t find(int32_t a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[static_cast<size_t>(a)] = b;
  }
};

// Grid indices of the in-cube neighbors of index i.
template <typename F>
void for_each_neighbor(const CubeGrid& grid, size_t i, F&& f) {
  const Point p = grid.point(i);
  for (int c = 0; c < 2 * grid.dim(); ++c) {
    const Point q = step(p, c);
    if (grid.contains(q)) f(grid.index(q));
  }
}

int64_t isqrt(int64_t n) {
  auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

int64_t iroot4(int64_t n) { return isqrt(isqrt(n)); }

}  // namespace

ClusterLabels label_clusters(const SiteField& f) {
  const CubeGrid& grid = f.grid();
  const auto& bits = f.bits();
  UnionFind uf(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!bits[i]) continue;
    const Point p = grid.point(i);
    for (int c = 0; c < 2 * grid.dim(); c += 2) {
      const Point q = step(p, c);
      if (grid.contains(q)) {
        const size_t j = grid.index(q);
        if (bits[j]) uf.unite(static_cast<int32_t>(i), static_cast<int32_t>(j));
      }
    }
  }
  ClusterLabels out;
  out.label.assign(grid.size(), -1);
  std::vector<int32_t> id_of_root(grid.size(), -1);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!bits[i]) continue;
    const auto root = static_cast<size_t>(uf.find(static_cast<int32_t>(i)));
    if (id_of_root[root] < 0) {
      id_of_root[root] = static_cast<int32_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.label[i] = id_of_root[root];
    ++out.sizes[static_cast<size_t>(id_of_root[root])];
  }
  for (size_t k = 0; k < out.sizes.size(); ++k)
    if (out.largest_id < 0 || out.sizes[k] > out.sizes[static_cast<size_t>(out.largest_id)])
      out.largest_id = static_cast<int32_t>(k);
  return out;
}

std::vector<int64_t> chemical_distances_from(const SiteField& f, const Point& a) {
  const CubeGrid& grid = f.grid();
  std::vector<int64_t> dist(grid.size(), -1);
  if (!f.at(a)) return dist;
  std::deque<size_t> queue{grid.index(a)};
  dist[grid.index(a)] = 0;
  while (!queue.empty()) {
    const size_t i = queue.front();
    queue.pop_front();
    for_each_neighbor(grid, i, [&](size_t j) {
      if (f.bits()[j] && dist[j] < 0) {
        dist[j] = dist[i] + 1;
        queue.push_back(j);
      }
    });
  }
  return dist;
}

std::optional<int64_t> chemical_distance(const SiteField& f, const Point& a, const Point& b) {
  if (!f.at(a) || !f.at(b)) return std::nullopt;
  if (a == b) return 0;
  const auto dist = chemical_distances_from(f, a);
  const int64_t d = dist[f.grid().index(b)];
  if (d < 0) return std::nullopt;
  return d;
}

int64_t hole_radius(const SiteField& f, const ClusterLabels& labels, int64_t inner_radius) {
  require(labels.label.size() == f.grid().size(), "hole_radius: labels do not match the field");
  if (labels.largest_id < 0) fail(ErrorKind::kInvalidArgument, "hole_radius: the field has no open site");
  int64_t best = -1;
  for (size_t i = 0; i < labels.label.size(); ++i) {
    if (labels.label[i] != labels.largest_id) continue;
    const Point p = f.grid().point(i);
    if (inner_radius >= 0 && linf_norm(p) > inner_radius) continue;
    const int64_t r = l1_norm(p);
    if (best < 0 || r < best) best = r;
  }
  if (best < 0) fail(ErrorKind::kInvalidArgument, "hole_radius: the largest cluster misses the inner region");
  return best;
}

// ---------------------------------------------------------------------------
// White sites

int64_t white_subbox_half_side(int64_t N, int dim) {
  require(N >= 1, "white: N must be >= 1");
  // floor(N^{1/4} / (4d)) = floor(iroot4(N) / (4d)) since the divisor is an integer.
  return std::max<int64_t>(1, iroot4(N) / (4 * dim));
}

int64_t white_required_radius(const Point& v, int64_t N) { return N * l1_norm(v) + v.dim() * N + N; }

namespace {

// Calls f(q) for every integer vector with lo[i] <= q[i] <= hi[i].
template <typename F>
void for_each_in_range(const std::vector<int64_t>& lo, const std::vector<int64_t>& hi, F&& f) {
  const int dim = static_cast<int>(lo.size());
  for (int i = 0; i < dim; ++i)
    if (lo[static_cast<size_t>(i)] > hi[static_cast<size_t>(i)]) return;
  Point q(dim);
  for (int i = 0; i < dim; ++i) q.set(i, lo[static_cast<size_t>(i)]);
  for (;;) {
    if (!f(q)) return;
    int i = dim - 1;
    while (i >= 0 && q[i] == hi[static_cast<size_t>(i)]) {
      q.set(i, lo[static_cast<size_t>(i)]);
      --i;
    }
    if (i < 0) return;
    q.set(i, q[i] + 1);
  }
}

int64_t floor_div(int64_t a, int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

}  // namespace

WhiteDetail white_site_detail(const Environment& env, const Point& v, int64_t N) {
  require(v.dim() == env.dim(), "white: dimension mismatch");
  require(N >= 1, "white: N must be >= 1");
  const int dim = env.dim();
  if (env.box_radius() < white_required_radius(v, N))
    fail(ErrorKind::kGeometry, "white: box radius " + std::to_string(env.box_radius()) + " below the required " +
                                   std::to_string(white_required_radius(v, N)));
  WhiteDetail out;
  const Point center = N * v;
  const int64_t h = white_subbox_half_side(N, dim);

  // Tiles 2h q + (-h, h]^d lying inside the window center + [-N, N]^d.
  std::vector<int64_t> lo(static_cast<size_t>(dim)), hi(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    lo[static_cast<size_t>(i)] = ceil_div(center[i] - N + h - 1, 2 * h);
    hi[static_cast<size_t>(i)] = floor_div(center[i] + N - h, 2 * h);
  }
  bool all_occupied = true;
  for_each_in_range(lo, hi, [&](const Point& q) {
    ++out.tiles;
    const Point c = (2 * h) * q;
    std::vector<int64_t> a(static_cast<size_t>(dim)), b(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      a[static_cast<size_t>(i)] = c[i] - h + 1;
      b[static_cast<size_t>(i)] = c[i] + h;
    }
    bool hit = false;
    for_each_in_range(a, b, [&](const Point& z) {
      hit = env.omega(z) > 0;
      return !hit;
    });
    all_occupied = hit;
    return hit;
  });
  out.tiles_occupied = all_occupied;
  if (!all_occupied) return out;

  const int64_t reach = iroot4(N);
  std::vector<int64_t> wlo(static_cast<size_t>(dim)), whi(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    wlo[static_cast<size_t>(i)] = center[i] - N;
    whi[static_cast<size_t>(i)] = center[i] + N;
  }
  std::vector<Point> occupied;
  for_each_in_range(wlo, whi, [&](const Point& z) {
    if (env.omega(z) > 0) occupied.push_back(z);
    return true;
  });
  const CubeGrid window(dim, N, center);
  std::vector<uint8_t> occ(window.size(), 0);
  for (const Point& z : occupied) occ[window.index(z)] = 1;
  const std::vector<Point> offsets = [&] {
    std::vector<Point> o;
    for (int64_t r = 1; r <= reach; ++r)
      for (const Point& z : l1_sphere(dim, r)) o.push_back(z);
    return o;
  }();

  out.passages_fast = true;
  for (const Point& x : occupied) {
    SimulationOptions opt;
    for (const Point& off : offsets) {
      const Point y = x + off;
      if (window.contains(y) && occ[window.index(y)]) opt.stop_when_visited.push_back(y);
    }
    if (opt.stop_when_visited.empty()) continue;
    out.pairs_checked += static_cast<int64_t>(opt.stop_when_visited.size());
    const ActivationTable tab = simulate_frogs(env, x, N, opt);
    for (const Point& y : opt.stop_when_visited) {
      if (!tab.visit_time(y).is_finite()) {
        out.passages_fast = false;
        return out;
      }
    }
  }
  out.white = true;
  return out;
}

// ---------------------------------------------------------------------------
// Good sites

int64_t good_required_radius(const Point& v, int64_t N, int64_t M, double delta, double mu_max) {
  const auto horizon = static_cast<int64_t>(std::floor(static_cast<double>(M * N) * mu_max * (1 + delta)));
  return N * M * (l1_norm(v) + 1) + isqrt(N) + horizon + 1;
}

GoodDetail good_site_detail(const Environment& env, const Point& v, int64_t N, int64_t M, double delta,
                            const DirectionalMu& mu_hat) {
  require(v.dim() == env.dim(), "good: dimension mismatch");
  require(N >= 1 && M >= 1, "good: N and M must be >= 1");
  require(delta >= 0, "good: delta must be nonnegative");
  require(static_cast<bool>(mu_hat), "good: missing mu_hat");
  const int dim = env.dim();
  const int64_t near = isqrt(N);
  const auto probes = default_probe_directions(dim);
  GoodDetail out;
  out.stars_close = true;
  out.passages_fast = true;

  auto anchored_star = [&](const Point& a) -> std::optional<Point> {
    if (l1_norm(a) + near > env.box_radius())
      fail(ErrorKind::kGeometry, "good: anchor " + a.str() + " is too close to the box boundary");
    for (int64_t r = 0; r <= near; ++r)
      for (const Point& z : l1_sphere(dim, r))
        if (env.omega(a + z) > 0) return a + z;
    return std::nullopt;
  };

  for (const Point& z : l1_sphere(dim, M)) {
    ++out.directions;
    const double mu = mu_hat(z);
    if (!(std::isfinite(mu) && mu > 0))
      fail(ErrorKind::kInvalidArgument, "good: mu_hat missing or invalid for direction " + z.str());
    const AdaptedBasis basis = find_adapted_basis(z, probes);
    const auto horizon = static_cast<int64_t>(std::floor(static_cast<double>(M * N) * mu * (1 + delta)));
    const auto s0 = anchored_star(N * apply_adapted_map(basis, v));
    if (!s0) {
      out.stars_close = false;
      return out;
    }
    for (const Point& e : neighbors(Point(dim))) {
      const auto s1 = anchored_star(N * apply_adapted_map(basis, v + e));
      if (!s1) {
        out.stars_close = false;
        return out;
      }
      ++out.passages;
      if (!passage_time_between(env, *s0, *s1, horizon, BoxPolicy::kExact).value.is_finite()) {
        out.passages_fast = false;
        return out;
      }
    }
  }
  out.good = true;
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

PercolationResult percolation_experiment(const PercolationConfig& cfg) {
  require(cfg.replicas >= 1, "percolation: replicas must be positive");
  require(cfg.radius >= 10, "percolation: radius must be >= 10");
  require(cfg.ratio_min_norm >= 1 && cfg.ratio_min_norm <= cfg.ratio_max_norm, "percolation: bad ratio window");
  PercolationResult result;
  result.margin = cfg.radius / 10;
  const int64_t inner = cfg.radius - result.margin;
  require(cfg.ratio_max_norm <= inner, "percolation: ratio window exceeds the inner region");
  const auto nbins = static_cast<size_t>(cfg.ratio_max_norm - cfg.ratio_min_norm + 1);

  struct Replica {
    int64_t hole = -1;
    std::vector<int64_t> pairs;
    std::vector<double> sum, max;
    int64_t violations = 0;
  };
  std::vector<Replica> per(static_cast<size_t>(cfg.replicas));
  parallel_for(per.size(), cfg.threads, [&](size_t r) {
    Replica& out = per[r];
    out.pairs.assign(nbins, 0);
    out.sum.assign(nbins, 0.0);
    out.max.assign(nbins, 0.0);
    const SiteField f = sample_bernoulli_field(cfg.p, cfg.dim, cfg.radius,
                                               replica_seed(cfg.seed, cfg.first_replica + r));
    const ClusterLabels labels = label_clusters(f);
    if (labels.largest_id >= 0) {
      try {
        out.hole = hole_radius(f, labels, inner);
      } catch (const Error&) {
        out.hole = -1;
      }
    }
    const Point origin(cfg.dim);
    if (!f.at(origin)) return;
    const auto dist = chemical_distances_from(f, origin);
    const CubeGrid& grid = f.grid();
    for (size_t i = 0; i < grid.size(); ++i) {
      if (dist[i] < 0) continue;
      const Point p = grid.point(i);
      const int64_t n1 = l1_norm(p);
      if (n1 < cfg.ratio_min_norm || n1 > cfg.ratio_max_norm || linf_norm(p) > inner) continue;
      if (dist[i] < n1) ++out.violations;
      const double ratio = static_cast<double>(dist[i]) / static_cast<double>(n1);
      const auto b = static_cast<size_t>(n1 - cfg.ratio_min_norm);
      ++out.pairs[b];
      out.sum[b] += ratio;
      out.max[b] = std::max(out.max[b], ratio);
    }
  });

  int64_t max_hole = 0, valid = 0;
  for (const auto& r : per) {
    if (r.hole >= 0) {
      ++valid;
      max_hole = std::max(max_hole, r.hole);
    }
  }
  std::vector<double> xs, ys;
  for (int64_t t = 0; t <= max_hole + 1; ++t) {
    int64_t hits = 0;
    for (const auto& r : per) hits += r.hole >= t;
    HoleTailRow row{t, wilson_interval(hits, valid)};
    if (hits > 0) {
      xs.push_back(static_cast<double>(t));
      ys.push_back(std::log(row.tail.phat));
    }
    result.hole_tail.push_back(row);
  }
  result.hole_fit = least_squares(xs, ys);

  for (size_t b = 0; b < nbins; ++b) {
    RatioRow row;
    row.norm = cfg.ratio_min_norm + static_cast<int64_t>(b);
    double sum = 0;
    for (const auto& r : per) {
      row.pairs += r.pairs[b];
      sum += r.sum[b];
      row.max_ratio = std::max(row.max_ratio, r.max[b]);
    }
    row.mean_ratio = row.pairs ? sum / static_cast<double>(row.pairs) : 0.0;
    result.connected_pairs += row.pairs;
    result.max_ratio = std::max(result.max_ratio, row.max_ratio);
    result.ratios.push_back(row);
  }
  for (const auto& r : per) result.distance_violations += r.violations;
  return result;
}

std::vector<MarginalRow> marginal_curve(const MarginalConfig& cfg) {
  require(cfg.replicas >= 1, "marginal: replicas must be positive");
  require(!cfg.n_ladder.empty(), "marginal: empty N ladder");
  const Point origin(cfg.dim);
  std::vector<MarginalRow> rows;
  for (size_t k = 0; k < cfg.n_ladder.size(); ++k) {
    const int64_t N = cfg.n_ladder[k];
    MarginalRow row;
    row.N = N;
    row.box_radius = cfg.kind == MarginalKind::kWhite
                         ? white_required_radius(origin, N)
                         : good_required_radius(origin, N, cfg.M, cfg.delta, cfg.mu_hat);
    std::vector<uint8_t> hit(static_cast<size_t>(cfg.replicas), 0);
    parallel_for(hit.size(), cfg.threads, [&](size_t r) {
      const SeedSpec seed = replica_seed(cfg.seed, cfg.first_replica + r);
      const Environment env = sample_environment(cfg.law, cfg.dim, row.box_radius, seed);
      if (cfg.kind == MarginalKind::kWhite) {
        hit[r] = white_site_indicator(env, origin, N);
      } else {
        const double mu = cfg.mu_hat;
        hit[r] = good_site_indicator(env, origin, N, cfg.M, cfg.delta, [mu](const Point&) { return mu; });
      }
    });
    int64_t hits = 0;
    for (uint8_t h : hit) hits += h;
    row.marginal = wilson_interval(hits, cfg.replicas);
    rows.push_back(row);
  }
  return rows;
}

std::string hole_tail_csv(const PercolationResult& r) {
  std::ostringstream os;
  os << "t,replicas,hits,phat,ci_lo,ci_hi\n";
  for (const auto& row : r.hole_tail)
    os << row.t << ',' << row.tail.trials << ',' << row.tail.hits << ',' << fmt12(row.tail.phat) << ','
       << fmt12(row.tail.ci_lo) << ',' << fmt12(row.tail.ci_hi) << '\n';
  return os.str();
}

std::string ratio_csv(const PercolationResult& r) {
  std::ostringstream os;
  os << "l1_norm,pairs,mean_ratio,max_ratio\n";
  for (const auto& row : r.ratios)
    os << row.norm << ',' << row.pairs << ',' << fmt12(row.mean_ratio) << ',' << fmt12(row.max_ratio) << '\n';
  return os.str();
}

std::string marginal_csv(const std::vector<MarginalRow>& rows) {
  std::ostringstream os;
  os << "N,box_radius,replicas,hits,phat,ci_lo,ci_hi\n";
  for (const auto& row : rows)
    os << row.N << ',' << row.box_radius << ',' << row.marginal.trials << ',' << row.marginal.hits << ','
       << fmt12(row.marginal.phat) << ',' << fmt12(row.marginal.ci_lo) << ',' << fmt12(row.marginal.ci_hi) << '\n';
  return os.str();
}

nlohmann::json to_json(const PercolationResult& r) {
  nlohmann::json tail = nlohmann::json::array();
  for (const auto& row : r.hole_tail) tail.push_back({{"t", row.t}, {"tail", to_json(row.tail)}});
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& row : r.ratios)
    ratios.push_back({{"l1_norm", row.norm},
                      {"pairs", row.pairs},
                      {"mean_ratio", json_number(row.mean_ratio)},
                      {"max_ratio", json_number(row.max_ratio)}});
  return {{"margin", r.margin},
          {"hole_tail", tail},
          {"hole_fit", to_json(r.hole_fit)},
          {"ratios", ratios},
          {"max_ratio", json_number(r.max_ratio)},
          {"connected_pairs", r.connected_pairs},
          {"distance_violations", r.distance_violations}};
}

nlohmann::json to_json(const MarginalRow& row) {
  return {{"N", row.N}, {"box_radius", row.box_radius}, {"marginal", to_json(row.marginal)}};
}

}  // namespace frogpass
