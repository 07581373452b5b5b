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

#include "frogpass/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/parallel.hpp"
#include "frogpass/passage.hpp"

namespace frogpass {

namespace {

constexpr int64_t kStarMargin = 16;

std::vector<HittingTime> visits_from(const Environment& env, const Point& source, const std::vector<Point>& targets,
                                     int64_t horizon, BoxPolicy policy) {
  SimulationOptions opt;
  opt.policy = policy;
  opt.stop_when_visited = targets;
  const ActivationTable tab = simulate_frogs(env, source, horizon, opt);
  std::vector<HittingTime> out;
  out.reserve(targets.size());
  for (const Point& y : targets) {
    const HittingTime v = tab.visit_time(y);
    out.push_back(v.is_finite() ? v : HittingTime::censored(horizon));
  }
  return out;
}

void check_censoring(int64_t censored, int64_t total, double budget, int64_t horizon, const std::string& what) {
  if (total > 0 && static_cast<double>(censored) > budget * static_cast<double>(total))
    fail(ErrorKind::kCensoringBudget, what + ": " + std::to_string(censored) + " of " + std::to_string(total) +
                                          " runs censored at horizon " + std::to_string(horizon) +
                                          "; raise the horizon factor or mu_ref");
}

std::vector<Point> scaled(const Point& x, const std::vector<int64_t>& ks) {
  std::vector<Point> out;
  for (int64_t k : ks) out.push_back(k * x);
  return out;
}

}  // namespace

int64_t auto_horizon(double factor, double mu_ref, int64_t l1) {
  require(factor > 0 && mu_ref > 0, "horizon: factor and mu_ref must be positive");
  return static_cast<int64_t>(std::ceil(factor * mu_ref * static_cast<double>(l1) - 1e-9));
}

// ---------------------------------------------------------------------------

TimeConstantEstimate estimate_time_constant(const TimeConstantConfig& cfg) {
  require(cfg.direction.dim() == cfg.dim, "mu: direction dimension mismatch");
  require(l1_norm(cfg.direction) > 0, "mu: direction must be nonzero");
  require(!cfg.k_ladder.empty(), "mu: empty k ladder");
  require(cfg.k_ladder.front() >= 1 && std::is_sorted(cfg.k_ladder.begin(), cfg.k_ladder.end()) &&
              std::adjacent_find(cfg.k_ladder.begin(), cfg.k_ladder.end()) == cfg.k_ladder.end(),
          "mu: k ladder must be positive and strictly increasing");
  require(cfg.replicas >= 2, "mu: need at least 2 replicas");
  const std::vector<Point> targets = scaled(cfg.direction, cfg.k_ladder);
  const int64_t horizon = auto_horizon(cfg.horizon_factor, cfg.mu_ref, l1_norm(targets.back()));

  TimeConstantEstimate est;
  est.direction = cfg.direction;
  est.box_radius = horizon + l1_norm(targets.back()) + kStarMargin;
  const size_t nk = targets.size();
  std::vector<std::vector<HittingTime>> values(static_cast<size_t>(cfg.replicas));
  std::vector<BoundAudit> audits(values.size());
  parallel_for(values.size(), cfg.threads, [&](size_t r) {
    const Environment env = sample_environment(cfg.law, cfg.dim, est.box_radius,
                                               replica_seed(cfg.seed, cfg.first_replica + r));
    const Point o = star(env, Point(cfg.dim));
    std::vector<Point> stars;
    for (const Point& x : targets) stars.push_back(star(env, x));
    values[r] = visits_from(env, o, stars, horizon, BoxPolicy::kOnDemand);
    for (size_t i = 0; i < nk; ++i)
      if (values[r][i].is_finite()) audits[r].record(values[r][i].value(), l1_dist(o, stars[i]));
  });
  for (const auto& a : audits) est.bounds += a;

  est.mu_hat = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nk; ++i) {
    std::vector<double> ratios;
    int64_t censored = 0;
    for (const auto& v : values) {
      if (v[i].is_finite())
        ratios.push_back(static_cast<double>(v[i].value()) / static_cast<double>(cfg.k_ladder[i]));
      else ++censored;
    }
    check_censoring(censored, cfg.replicas, cfg.max_censored_fraction, horizon, "mu");
    PerK row{cfg.k_ladder[i], horizon, summarize(ratios, censored)};
    est.mu_hat = std::min(est.mu_hat, row.ratio.ci_hi / static_cast<double>(l1_norm(cfg.direction)));
    if (!est.per_k.empty()) {
      const SummaryStats& prev = est.per_k.back().ratio;
      if (!(row.ratio.mean <= prev.mean || row.ratio.ci_lo <= prev.ci_hi)) est.non_increasing_within_ci = false;
    }
    est.per_k.push_back(row);
  }
  return est;
}

// ---------------------------------------------------------------------------

void fit_tail(TailCurve& curve) {
  std::vector<double> xs, ys;
  for (const auto& p : curve.points) {
    if (p.censored) continue;
    xs.push_back(static_cast<double>(p.norm));
    ys.push_back(std::log(p.estimate.phat));
  }
  curve.log_fit = least_squares(xs, ys);
  curve.best_alpha = 0;
  curve.alpha_fit = LinearFit{};
  for (int a = 1; a <= 10; ++a) {
    const double alpha = a / 10.0;
    std::vector<double> xa;
    for (double x : xs) xa.push_back(std::pow(x, alpha));
    const LinearFit f = least_squares(xa, ys);
    if (f.valid && (!curve.alpha_fit.valid || f.r2 > curve.alpha_fit.r2)) {
      curve.alpha_fit = f;
      curve.best_alpha = alpha;
    }
  }
}

TailResult deviation_tail_experiment(const TailConfig& cfg) {
  require(cfg.epsilon >= 0, "tails: epsilon must be nonnegative");
  require(cfg.epsilon < 1, "tails: epsilon must be below 1 for the lower tail");
  require(cfg.mu_hat > 0, "tails: mu_hat must be positive");
  require(!cfg.x_ladder.empty(), "tails: empty x ladder");
  require(cfg.replicas >= 1, "tails: replicas must be positive");
  int64_t max_norm = 0;
  for (const Point& x : cfg.x_ladder) {
    require(x.dim() == cfg.dim, "tails: target dimension mismatch");
    max_norm = std::max(max_norm, l1_norm(x));
  }
  TailResult result;
  result.horizon = static_cast<int64_t>(std::ceil((1 + cfg.epsilon) * cfg.mu_hat * static_cast<double>(max_norm)));
  result.box_radius = result.horizon;
  const size_t nx = cfg.x_ladder.size();
  std::vector<std::vector<HittingTime>> values(static_cast<size_t>(cfg.replicas));
  std::vector<BoundAudit> audits(values.size());
  parallel_for(values.size(), cfg.threads, [&](size_t r) {
    const Environment env = condition_origin(sample_environment(cfg.law, cfg.dim, result.box_radius,
                                                                replica_seed(cfg.seed, cfg.first_replica + r)));
    values[r] = visits_from(env, Point(cfg.dim), cfg.x_ladder, result.horizon, BoxPolicy::kExact);
    for (size_t i = 0; i < nx; ++i)
      if (values[r][i].is_finite()) audits[r].record(values[r][i].value(), l1_norm(cfg.x_ladder[i]));
  });
  for (const auto& a : audits) result.bounds += a;

  result.upper.side = TailSide::kUpper;
  result.lower.side = TailSide::kLower;
  result.upper.epsilon = result.lower.epsilon = cfg.epsilon;
  for (size_t i = 0; i < nx; ++i) {
    const int64_t norm = l1_norm(cfg.x_ladder[i]);
    const double up = (1 + cfg.epsilon) * cfg.mu_hat * static_cast<double>(norm);
    const double lo = (1 - cfg.epsilon) * cfg.mu_hat * static_cast<double>(norm);
    int64_t up_hits = 0, lo_hits = 0;
    for (const auto& v : values) {
      const HittingTime& h = v[i];
      if (!h.is_finite()) ++result.censored_runs;
      if (!h.is_finite() || static_cast<double>(h.value()) >= up) ++up_hits;
      if (h.is_finite() && static_cast<double>(h.value()) <= lo) ++lo_hits;
    }
    TailPoint pu{cfg.x_ladder[i], norm, up, wilson_interval(up_hits, cfg.replicas), up_hits == 0};
    TailPoint pl{cfg.x_ladder[i], norm, lo, wilson_interval(lo_hits, cfg.replicas), lo_hits == 0};
    result.upper.points.push_back(pu);
    result.lower.points.push_back(pl);
  }
  fit_tail(result.upper);
  fit_tail(result.lower);
  return result;
}

// ---------------------------------------------------------------------------

ConcentrationResult concentration_experiment(const ConcentrationConfig& cfg) {
  require(!cfg.x_ladder.empty(), "concentration: empty x ladder");
  require(cfg.replicas >= 2, "concentration: need at least 2 replicas");
  require(cfg.bootstrap_resamples >= 1, "concentration: bootstrap resamples must be positive");
  int64_t max_norm = 0;
  for (const Point& x : cfg.x_ladder) {
    require(x.dim() == cfg.dim, "concentration: target dimension mismatch");
    require(l1_norm(x) > 0, "concentration: targets must be nonzero");
    max_norm = std::max(max_norm, l1_norm(x));
  }
  ConcentrationResult result;
  result.horizon = auto_horizon(cfg.horizon_factor, cfg.mu_ref, max_norm);
  result.box_radius = result.horizon + max_norm + kStarMargin;
  const size_t nx = cfg.x_ladder.size();
  std::vector<std::vector<HittingTime>> values(static_cast<size_t>(cfg.replicas));
  std::vector<BoundAudit> audits(values.size());
  parallel_for(values.size(), cfg.threads, [&](size_t r) {
    const Environment env = sample_environment(cfg.law, cfg.dim, result.box_radius,
                                               replica_seed(cfg.seed, cfg.first_replica + r));
    const Point o = star(env, Point(cfg.dim));
    std::vector<Point> stars;
    for (const Point& x : cfg.x_ladder) stars.push_back(star(env, x));
    values[r] = visits_from(env, o, stars, result.horizon, BoxPolicy::kOnDemand);
    for (size_t i = 0; i < nx; ++i)
      if (values[r][i].is_finite()) audits[r].record(values[r][i].value(), l1_dist(o, stars[i]));
  });
  for (const auto& a : audits) result.bounds += a;

  const auto key = philox_key(cfg.seed);
  std::vector<double> lx, ls;
  for (size_t i = 0; i < nx; ++i) {
    std::vector<double> sample;
    int64_t censored = 0;
    for (const auto& v : values) {
      if (v[i].is_finite()) sample.push_back(static_cast<double>(v[i].value()));
      else ++censored;
    }
    check_censoring(censored, cfg.replicas, cfg.max_censored_fraction, result.horizon, "concentration");
    ConcentrationRow row;
    row.x = cfg.x_ladder[i];
    row.norm = l1_norm(row.x);
    row.stats = summarize(sample, censored);
    std::tie(row.std_lo, row.std_hi) = bootstrap_std_interval(sample, cfg.bootstrap_resamples, key, i);
    row.ratio = row.stats.std / std::sqrt(static_cast<double>(row.norm));
    if (row.stats.std > 0) {
      lx.push_back(std::log(static_cast<double>(row.norm)));
      ls.push_back(std::log(row.stats.std));
    }
    result.rows.push_back(row);
  }
  result.log_fit = least_squares(lx, ls);
  return result;
}

// ---------------------------------------------------------------------------

AnalyticBounds analytic_lower_bounds(const ConfigLaw& law, double epsilon, double mu_hat_xi1, int dim) {
  require(dim >= 1, "analytic: dimension must be >= 1");
  require(epsilon > 0, "analytic: epsilon must be positive");
  require(mu_hat_xi1 > 0, "analytic: mu_hat must be positive");
  AnalyticBounds b;
  b.mean = law.mean();
  require(std::isfinite(b.mean), "analytic: the law must have a finite mean");
  b.ceil_term = static_cast<int64_t>(std::ceil((1 + epsilon) * mu_hat_xi1 - 1e-12));
  const double log2d = std::log(2.0 * dim);
  b.upper_tail_rate_lb = -b.mean * static_cast<double>(b.ceil_term) * log2d;
  b.lower_tail_rate_lb = -log2d;
  return b;
}

DirectPathResult direct_path_event_check(int dim, int64_t n, int64_t trials, const SeedSpec& seed, unsigned threads) {
  require(dim >= 1 && dim <= kMaxDim, "direct path: bad dimension");
  require(n >= 0 && n <= 6, "direct path: n must lie in [0, 6]");
  require(trials >= 1, "direct path: trials must be positive");
  DirectPathResult r;
  r.dim = dim;
  r.n = n;
  r.target = std::pow(2.0 * dim, -static_cast<double>(n));
  std::vector<uint8_t> hit(static_cast<size_t>(trials), 0);
  const Point origin(dim);
  parallel_for(hit.size(), threads, [&](size_t i) {
    StepCursor cursor(philox_key(replica_seed(seed, i)), walk_stream_id(origin, 1), dim);
    bool ok = true;
    for (int64_t k = 0; k < n && ok; ++k) ok = cursor.next() == 0;
    hit[i] = ok;
  });
  int64_t hits = 0;
  for (uint8_t h : hit) hits += h;
  r.estimate = wilson_interval(hits, trials);
  r.sigma = std::sqrt(r.target * (1 - r.target) / static_cast<double>(trials));
  r.within_3_sigma = std::abs(r.estimate.phat - r.target) <= 3 * r.sigma + 1e-15;
  return r;
}

// ---------------------------------------------------------------------------

SubadditivityResult subadditivity_audit(const SubadditivityConfig& cfg) {
  require(cfg.triples >= 1, "subadditivity: triples must be positive");
  require(cfg.spread >= 0, "subadditivity: spread must be nonnegative");
  struct Outcome {
    int counted = 0, violated = 0, counted_star = 0, violated_star = 0;
    BoundAudit bounds;
  };
  std::vector<Outcome> per(static_cast<size_t>(cfg.triples));
  parallel_for(per.size(), cfg.threads, [&](size_t i) {
    Outcome& out = per[i];
    const SeedSpec seed = replica_seed(cfg.seed, cfg.first_replica + i);
    const auto key = philox_key(seed);
    std::array<Point, 3> pts{Point(cfg.dim), Point(cfg.dim), Point(cfg.dim)};
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < cfg.dim; ++c) {
        const double u = keyed_uniform(key, static_cast<uint64_t>(j), StreamDomain::kSampling, static_cast<uint32_t>(c));
        pts[static_cast<size_t>(j)].set(
            c, static_cast<int64_t>(std::floor(u * static_cast<double>(2 * cfg.spread + 1))) - cfg.spread);
      }
    const int64_t span = l1_dist(pts[0], pts[1]) + l1_dist(pts[1], pts[2]) + l1_dist(pts[0], pts[2]);
    const int64_t horizon = 4 * span + 24;
    const int64_t radius = horizon + cfg.dim * cfg.spread + kStarMargin;
    const Environment env = sample_environment(cfg.law, cfg.dim, radius, seed);

    // Returns {counted, violated} for T(a,c) <= T(a,b) + T(b,c).
    auto check = [&](const Point& a, const Point& b, const Point& c) -> std::pair<int, int> {
      if (env.omega(a) == 0) return {0, 0};
      const auto from_a = visits_from(env, a, {b, c}, horizon, BoxPolicy::kExact);
      if (!from_a[0].is_finite() || env.omega(b) == 0) return {0, 0};
      const HittingTime bc = visits_from(env, b, {c}, horizon, BoxPolicy::kExact)[0];
      for (const auto& [h, src, dst] : {std::tuple{from_a[0], a, b}, std::tuple{from_a[1], a, c}, std::tuple{bc, b, c}})
        if (h.is_finite()) out.bounds.record(h.value(), l1_dist(src, dst));
      if (!bc.is_finite()) return {0, 0};
      const int64_t sum = from_a[0].value() + bc.value();
      if (from_a[1].is_finite()) return {1, from_a[1].value() > sum};
      // T(a,c) exceeds the horizon: decidable only when the sum does not.
      if (sum <= horizon) return {1, 1};
      return {0, 0};
    };
    const auto [c1, v1] = check(pts[0], pts[1], pts[2]);
    out.counted = c1;
    out.violated = v1;
    const auto [c2, v2] = check(star(env, pts[0]), star(env, pts[1]), star(env, pts[2]));
    out.counted_star = c2;
    out.violated_star = v2;
  });
  SubadditivityResult r;
  r.triples = cfg.triples;
  for (const auto& o : per) {
    r.counted += o.counted;
    r.violations += o.violated;
    r.counted_star += o.counted_star;
    r.violations_star += o.violated_star;
    r.bounds += o.bounds;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json point_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

nlohmann::json to_json(const BoundAudit& a) { return {{"checks", a.checks}, {"violations", a.violations}}; }

nlohmann::json to_json(const TimeConstantEstimate& e) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : e.per_k) rows.push_back({{"k", r.k}, {"horizon", r.horizon}, {"ratio", to_json(r.ratio)}});
  return {{"direction", point_json(e.direction)},
          {"per_k", rows},
          {"mu_hat", json_number(e.mu_hat)},
          {"mu_lower", json_number(e.mu_lower)},
          {"non_increasing_within_ci", e.non_increasing_within_ci},
          {"box_radius", e.box_radius},
          {"pathwise_bounds", to_json(e.bounds)}};
}

nlohmann::json to_json(const TailCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points)
    pts.push_back({{"x", point_json(p.x)},
                   {"l1_norm", p.norm},
                   {"threshold", json_number(p.threshold)},
                   {"estimate", to_json(p.estimate)},
                   {"censored", p.censored}});
  return {{"side", c.side == TailSide::kUpper ? "upper" : "lower"},
          {"epsilon", json_number(c.epsilon)},
          {"points", pts},
          {"log_fit", to_json(c.log_fit)},
          {"best_alpha", json_number(c.best_alpha)},
          {"alpha_fit", to_json(c.alpha_fit)}};
}

nlohmann::json to_json(const TailResult& r) {
  return {{"upper", to_json(r.upper)},
          {"lower", to_json(r.lower)},
          {"horizon", r.horizon},
          {"box_radius", r.box_radius},
          {"censored_runs", r.censored_runs},
          {"pathwise_bounds", to_json(r.bounds)}};
}

nlohmann::json to_json(const ConcentrationResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"x", point_json(row.x)},
                    {"l1_norm", row.norm},
                    {"stats", to_json(row.stats)},
                    {"std_ci_lo", json_number(row.std_lo)},
                    {"std_ci_hi", json_number(row.std_hi)},
                    {"std_over_sqrt_norm", json_number(row.ratio)}});
  return {{"rows", rows},
          {"log_fit", to_json(r.log_fit)},
          {"horizon", r.horizon},
          {"box_radius", r.box_radius},
          {"pathwise_bounds", to_json(r.bounds)}};
}

nlohmann::json to_json(const AnalyticBounds& b) {
  return {{"mean_omega", json_number(b.mean)},
          {"ceil_term", b.ceil_term},
          {"upper_tail_rate_lb", json_number(b.upper_tail_rate_lb)},
          {"lower_tail_rate_lb", json_number(b.lower_tail_rate_lb)}};
}

nlohmann::json to_json(const DirectPathResult& r) {
  return {{"dim", r.dim},
          {"n", r.n},
          {"target", json_number(r.target)},
          {"estimate", to_json(r.estimate)},
          {"sigma", json_number(r.sigma)},
          {"within_3_sigma", r.within_3_sigma}};
}

nlohmann::json to_json(const SubadditivityResult& r) {
  return {{"triples", r.triples},
          {"counted", r.counted},
          {"violations", r.violations},
          {"counted_star", r.counted_star},
          {"violations_star", r.violations_star},
          {"pathwise_bounds", to_json(r.bounds)}};
}

std::string time_constant_csv(const TimeConstantEstimate& e) {
  std::ostringstream os;
  os << "k,horizon,n,mean,std,ci_lo,ci_hi,censored\n";
  for (const auto& r : e.per_k)
    os << r.k << ',' << r.horizon << ',' << r.ratio.n << ',' << fmt12(r.ratio.mean) << ',' << fmt12(r.ratio.std) << ','
       << fmt12(r.ratio.ci_lo) << ',' << fmt12(r.ratio.ci_hi) << ',' << r.ratio.censored_count << '\n';
  return os.str();
}

std::string tail_csv(const TailResult& r) {
  std::ostringstream os;
  os << "side,l1_norm,threshold,replicas,hits,phat,ci_lo,ci_hi,censored\n";
  for (const TailCurve* c : {&r.upper, &r.lower})
    for (const auto& p : c->points)
      os << (c->side == TailSide::kUpper ? "upper" : "lower") << ',' << p.norm << ',' << fmt12(p.threshold) << ','
         << p.estimate.trials << ',' << p.estimate.hits << ',' << fmt12(p.estimate.phat) << ','
         << fmt12(p.estimate.ci_lo) << ',' << fmt12(p.estimate.ci_hi) << ',' << (p.censored ? 1 : 0) << '\n';
  return os.str();
}

std::string concentration_csv(const ConcentrationResult& r) {
  std::ostringstream os;
  os << "l1_norm,n,mean,std,std_ci_lo,std_ci_hi,std_over_sqrt_norm,censored\n";
  for (const auto& row : r.rows)
    os << row.norm << ',' << row.stats.n << ',' << fmt12(row.stats.mean) << ',' << fmt12(row.stats.std) << ','
       << fmt12(row.std_lo) << ',' << fmt12(row.std_hi) << ',' << fmt12(row.ratio) << ','
       << row.stats.censored_count << '\n';
  return os.str();
}

}  // namespace frogpass
