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

#include "frogpass/environment.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"

namespace frogpass {

namespace {

constexpr double kMaxPoissonMean = 500.0;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_double(std::string_view s, std::string_view what) {
  try {
    size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidArgument, "law: cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ConfigLaw

ConfigLaw ConfigLaw::bernoulli(double p) {
  require(p > 0.0 && p <= 1.0, "law bernoulli: p must be in (0, 1], got " + fmt_double(p));
  return ConfigLaw(Kind::kBernoulli, p);
}

ConfigLaw ConfigLaw::poisson(double lambda) {
  require(lambda > 0.0 && lambda <= kMaxPoissonMean,
          "law poisson: lambda must be in (0, 500], got " + fmt_double(lambda));
  return ConfigLaw(Kind::kPoisson, lambda);
}

ConfigLaw ConfigLaw::geometric(double q) {
  require(q > 0.0 && q < 1.0, "law geometric: q must be in (0, 1), got " + fmt_double(q));
  return ConfigLaw(Kind::kGeometric, q);
}

ConfigLaw ConfigLaw::constant(uint32_t k) {
  require(k >= 1, "law constant: k must be >= 1");
  return ConfigLaw(Kind::kConstant, static_cast<double>(k));
}

ConfigLaw ConfigLaw::explicit_pmf(std::vector<double> table) {
  require(!table.empty(), "law pmf: empty table");
  double sum = 0.0;
  for (double v : table) {
    require(v >= 0.0 && std::isfinite(v), "law pmf: entries must be finite and nonnegative");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "law pmf: entries must sum to 1 within 1e-12");
  double head = 0.0;
  for (size_t i = 0; i + 1 < table.size(); ++i) head += table[i];
  table.back() = std::max(0.0, 1.0 - head);
  require(table[0] < 1.0, "law pmf: law is concentrated at zero");
  return ConfigLaw(Kind::kExplicitPmf, 0.0, std::move(table));
}

ConfigLaw ConfigLaw::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  require(colon != std::string_view::npos, "law: expected '<name>:<params>', got '" + std::string(spec) + "'");
  const std::string_view name = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  if (name == "bernoulli") return bernoulli(parse_double(rest, "bernoulli p"));
  if (name == "poisson") return poisson(parse_double(rest, "poisson lambda"));
  if (name == "geometric") return geometric(parse_double(rest, "geometric q"));
  if (name == "constant") {
    const double k = parse_double(rest, "constant k");
    require(k >= 1 && k == std::floor(k) && k <= 1e6, "law constant: k must be a positive integer");
    return constant(static_cast<uint32_t>(k));
  }
  if (name == "pmf") {
    std::vector<double> t;
    size_t start = 0;
    while (start <= rest.size()) {
      const size_t comma = rest.find(',', start);
      const size_t end = comma == std::string_view::npos ? rest.size() : comma;
      t.push_back(parse_double(rest.substr(start, end - start), "pmf entry"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return explicit_pmf(std::move(t));
  }
  fail(ErrorKind::kInvalidArgument, "law: unknown law '" + std::string(name) + "'");
}

std::string ConfigLaw::str() const {
  switch (kind_) {
    case Kind::kBernoulli:
      return "bernoulli:" + fmt_double(param_);
    case Kind::kPoisson:
      return "poisson:" + fmt_double(param_);
    case Kind::kGeometric:
      return "geometric:" + fmt_double(param_);
    case Kind::kConstant:
      return "constant:" + fmt_double(param_);
    case Kind::kExplicitPmf: {
      std::string s = "pmf:";
      for (size_t i = 0; i < table_.size(); ++i) s += (i ? "," : "") + fmt_double(table_[i]);
      return s;
    }
  }
  return "?";
}

double ConfigLaw::pmf(uint64_t k) const {
  switch (kind_) {
    case Kind::kBernoulli:
      return k == 0 ? 1.0 - param_ : (k == 1 ? param_ : 0.0);
    case Kind::kPoisson:
      return std::exp(-param_ + static_cast<double>(k) * std::log(param_) - std::lgamma(static_cast<double>(k) + 1.0));
    case Kind::kGeometric:
      return param_ * std::pow(1.0 - param_, static_cast<double>(k));
    case Kind::kConstant:
      return static_cast<double>(k) == param_ ? 1.0 : 0.0;
    case Kind::kExplicitPmf:
      return k < table_.size() ? table_[k] : 0.0;
  }
  return 0.0;
}

double ConfigLaw::mean() const {
  switch (kind_) {
    case Kind::kBernoulli:
    case Kind::kPoisson:
    case Kind::kConstant:
      return param_;
    case Kind::kGeometric:
      return (1.0 - param_) / param_;
    case Kind::kExplicitPmf: {
      double m = 0.0;
      for (size_t i = 0; i < table_.size(); ++i) m += static_cast<double>(i) * table_[i];
      return m;
    }
  }
  return std::numeric_limits<double>::infinity();
}

uint32_t ConfigLaw::inverse_cdf(double u) const {
  switch (kind_) {
    case Kind::kBernoulli:
      return u < 1.0 - param_ ? 0u : 1u;
    case Kind::kConstant:
      return static_cast<uint32_t>(param_);
    case Kind::kPoisson: {
      double p = std::exp(-param_);
      double cdf = p;
      uint32_t k = 0;
      while (u >= cdf && k < 100000) {
        ++k;
        p *= param_ / static_cast<double>(k);
        const double next = cdf + p;
        if (next == cdf) break;  // tail exhausted in double precision
        cdf = next;
      }
      return k;
    }
    case Kind::kGeometric: {
      double p = param_;
      double cdf = p;
      uint32_t k = 0;
      while (u >= cdf && k < 100000000) {
        ++k;
        p *= 1.0 - param_;
        const double next = cdf + p;
        if (next == cdf) break;
        cdf = next;
      }
      return k;
    }
    case Kind::kExplicitPmf: {
      double cdf = 0.0;
      for (size_t k = 0; k < table_.size(); ++k) {
        cdf += table_[k];
        if (u < cdf) return static_cast<uint32_t>(k);
      }
      // u beyond the rounded total: largest supported value.
      for (size_t k = table_.size(); k-- > 0;)
        if (table_[k] > 0.0) return static_cast<uint32_t>(k);
      return 0;
    }
  }
  return 0;
}

uint32_t ConfigLaw::sample(double u) const { return inverse_cdf(u); }

uint32_t ConfigLaw::sample_positive(double u) const {
  const double p0 = p_zero();
  return std::max<uint32_t>(1u, inverse_cdf(p0 + u * (1.0 - p0)));
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(int dim, int64_t box_radius, ConfigLaw law, SeedSpec seed, bool conditioned_origin,
                         std::vector<uint32_t> cube_counts)
    : grid_(dim, box_radius), law_(std::move(law)), seed_(std::move(seed)), conditioned_(conditioned_origin),
      counts_(std::move(cube_counts)) {
  require(counts_.size() == grid_.size(), "environment: count array does not match the box");
  if (conditioned_) require(counts_[grid_.index(Point(dim))] >= 1, "environment: conditioned origin is empty");
}

uint32_t Environment::omega(const Point& p) const {
  if (!in_box(p)) fail(ErrorKind::kGeometry, "site " + p.str() + " lies outside the box of radius " + std::to_string(box_radius()));
  return counts_[grid_.index(p)];
}

Environment Environment::with_site(const Point& p, uint32_t count) const {
  if (!in_box(p)) fail(ErrorKind::kGeometry, "site " + p.str() + " lies outside the box");
  Environment copy = *this;
  copy.counts_[grid_.index(p)] = count;
  if (copy.conditioned_ && copy.counts_[grid_.index(Point(dim()))] == 0) copy.conditioned_ = false;
  return copy;
}

Environment Environment::with_conditioned_flag(bool flag) const {
  Environment copy = *this;
  copy.conditioned_ = flag;
  if (flag) require(omega(Point(dim())) >= 1, "environment: conditioned origin is empty");
  return copy;
}

std::vector<Point> Environment::sites() const {
  std::vector<Point> out;
  for (size_t i = 0; i < grid_.size(); ++i) {
    Point p = grid_.point(i);
    if (l1_norm(p) <= box_radius()) out.push_back(p);
  }
  return out;
}

std::vector<uint32_t> Environment::counts_in_order() const {
  std::vector<uint32_t> out;
  for (size_t i = 0; i < grid_.size(); ++i)
    if (l1_norm(grid_.point(i)) <= box_radius()) out.push_back(counts_[i]);
  return out;
}

size_t Environment::occupied_count() const {
  size_t n = 0;
  for (uint32_t c : counts_) n += c > 0;
  return n;
}

Environment make_environment(int dim, int64_t box_radius, const ConfigLaw& law, const SeedSpec& seed,
                             const std::vector<std::pair<Point, uint32_t>>& counts, uint32_t fill) {
  CubeGrid grid(dim, box_radius);
  std::vector<uint32_t> cube(grid.size(), 0);
  for (size_t i = 0; i < grid.size(); ++i)
    if (l1_norm(grid.point(i)) <= box_radius) cube[i] = fill;
  for (const auto& [p, c] : counts) {
    if (p.dim() != dim || l1_norm(p) > box_radius) fail(ErrorKind::kGeometry, "site " + p.str() + " lies outside the box");
    cube[grid.index(p)] = c;
  }
  return Environment(dim, box_radius, law, seed, false, std::move(cube));
}

Environment sample_environment(const ConfigLaw& law, int dim, int64_t box_radius, const SeedSpec& seed) {
  require(box_radius >= 0, "box radius must be nonnegative");
  CubeGrid grid(dim, box_radius);
  std::vector<uint32_t> cube(grid.size(), 0);
  if (law.kind() == ConfigLaw::Kind::kConstant) {
    for (size_t i = 0; i < grid.size(); ++i)
      if (l1_norm(grid.point(i)) <= box_radius) cube[i] = static_cast<uint32_t>(law.parameter());
    return Environment(dim, box_radius, law, seed, false, std::move(cube));
  }

  // One Philox block per site, batched so the SIMD kernel sees long runs.
  const simd::PhiloxKey key = philox_key(seed);
  constexpr size_t kBatch = 256;
  std::vector<uint32_t> c0(kBatch, 0), c1(kBatch), c2(kBatch), c3(kBatch, static_cast<uint32_t>(StreamDomain::kSiteCount));
  std::vector<uint32_t> out(4 * kBatch);
  std::vector<size_t> slot(kBatch);
  size_t filled = 0;
  auto flush = [&] {
    simd::philox4x32_10(key, simd::PhiloxCounters{{c0.data(), filled}, {c1.data(), filled}, {c2.data(), filled}, {c3.data(), filled}},
                        std::span<uint32_t>(out.data(), 4 * filled));
    for (size_t j = 0; j < filled; ++j) {
      const uint64_t bits = (static_cast<uint64_t>(out[4 * j]) << 32) | out[4 * j + 1];
      cube[slot[j]] = law.sample(static_cast<double>(bits >> 11) * 0x1.0p-53);
    }
    filled = 0;
  };
  for (size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    if (l1_norm(p) > box_radius) continue;
    const uint64_t id = site_stream_id(p);
    c1[filled] = static_cast<uint32_t>(id);
    c2[filled] = static_cast<uint32_t>(id >> 32);
    slot[filled] = i;
    if (++filled == kBatch) flush();
  }
  if (filled) flush();
  return Environment(dim, box_radius, law, seed, false, std::move(cube));
}

Environment condition_origin(const Environment& env) {
  const Point origin(env.dim());
  if (env.omega(origin) >= 1) return env.with_conditioned_flag(true);
  // omega(0) = 0: redraw from the law given {>= 1}. Together with keeping
  // positive values this gives exactly P(omega(0) = k | omega(0) >= 1).
  const double u = keyed_uniform(philox_key(env.seed()), site_stream_id(origin), StreamDomain::kOriginCondition);
  return env.with_site(origin, env.law().sample_positive(u)).with_conditioned_flag(true);
}

Point star(const Environment& env, const Point& x, int64_t search_cap) {
  require(x.dim() == env.dim(), "star: dimension mismatch");
  if (!env.in_box(x)) fail(ErrorKind::kGeometry, "star: point " + x.str() + " lies outside the box");
  const int64_t cap = search_cap < 0 ? env.box_radius() : search_cap;
  for (int64_t r = 0; r <= cap; ++r) {
    for (const Point& z : l1_sphere(env.dim(), r)) {
      const Point p = x + z;
      if (!env.in_box(p))
        fail(ErrorKind::kGeometry, "star: search around " + x.str() + " left the box at radius " + std::to_string(r));
      // Offsets come in lexicographic order, so the first hit is the tie-break winner.
      if (env.omega_or_zero(p) > 0) return p;
    }
  }
  fail(ErrorKind::kGeometry, "star: no occupied site within l1 distance " + std::to_string(cap) + " of " + x.str());
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json environment_to_json(const Environment& env) {
  nlohmann::json rle = nlohmann::json::array();
  const auto counts = env.counts_in_order();
  for (size_t i = 0; i < counts.size();) {
    size_t j = i;
    while (j < counts.size() && counts[j] == counts[i]) ++j;
    rle.push_back({counts[i], j - i});
    i = j;
  }
  return {
      {"version", 1},
      {"dim", env.dim()},
      {"box_radius", env.box_radius()},
      {"law", env.law().str()},
      {"seed", {{"master_seed", env.seed().master_seed}, {"experiment_tag", env.seed().experiment_tag}}},
      {"conditioned_origin", env.conditioned_origin()},
      {"rle_counts", rle},
  };
}

Environment environment_from_json(const nlohmann::json& j) {
  try {
    require(j.at("version").get<int>() == 1, "environment json: unsupported version");
    const int dim = j.at("dim").get<int>();
    const int64_t radius = j.at("box_radius").get<int64_t>();
    const ConfigLaw law = ConfigLaw::parse(j.at("law").get<std::string>());
    const SeedSpec seed{j.at("seed").at("master_seed").get<uint64_t>(), j.at("seed").at("experiment_tag").get<std::string>()};
    CubeGrid grid(dim, radius);
    std::vector<uint32_t> cube(grid.size(), 0);
    std::vector<size_t> order;
    for (size_t i = 0; i < grid.size(); ++i)
      if (l1_norm(grid.point(i)) <= radius) order.push_back(i);
    size_t pos = 0;
    for (const auto& run : j.at("rle_counts")) {
      const auto count = run.at(0).get<uint32_t>();
      const auto len = run.at(1).get<size_t>();
      require(pos + len <= order.size(), "environment json: run-length data exceeds the box");
      for (size_t k = 0; k < len; ++k) cube[order[pos++]] = count;
    }
    require(pos == order.size(), "environment json: run-length data does not cover the box");
    return Environment(dim, radius, law, seed, j.at("conditioned_origin").get<bool>(), std::move(cube));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("environment json: ") + e.what());
  }
}

}  // namespace frogpass
