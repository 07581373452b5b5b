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

// Truncated passage times. sigma_t keeps short-range hitting times up to
// the cap 4Kt and prices every jump at 4K(t v ||u - v||_inf); T_t is the
// shortest-path value under sigma_t over relays anywhere in Z^d. Also the
// tiling by boxes of side t and the geodesic box counts.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/lattice.hpp"
#include "frogpass/passage.hpp"
#include "frogpass/stats.hpp"

namespace frogpass {

struct TruncationParams {
  int64_t t = 1;
  double gamma = 1.0;
  /// Estimate of the linear-tail constant; the default choice is 5 * mu_hat(e_1).
  double c4_hat = 0.0;
  int64_t K = 1;

  /// K = ceil(d (c4_hat + gamma + 1)) + 1.
  static TruncationParams make(int dim, int64_t t, double c4_hat, double gamma = 1.0);
  /// Throws unless t >= 1, gamma > 0, c4_hat >= 0 and K > d (c4_hat + gamma + 1).
  void validate(int dim) const;
  int64_t cap() const { return 4 * K * t; }
  /// 4K (t v r).
  int64_t jump_cost(int64_t linf) const { return 4 * K * std::max(t, linf); }
};

/// sigma_t(x, y).
int64_t sigma_t(const Environment& env, const Point& x, const Point& y, const TruncationParams& p);

/// ||x - y||_1 <= value <= 4K (t v ||x - y||_inf).
bool sigma_sandwich_holds(const Point& x, const Point& y, int64_t value, const TruncationParams& p);

struct TruncatedPath {
  /// Finite T_t, or censored at the value cap when T_t exceeds it.
  HittingTime value = HittingTime::censored(0);
  /// Relays x = w_0, ..., w_m = y; consecutive sigma_t values sum to value.
  std::vector<Point> witness;
  /// Witness edges priced by the jump term with ||.||_inf > t.
  int64_t long_range_edges = 0;
  /// Witness edges with ||.||_inf <= t priced at the cap 4Kt.
  int64_t capped_edges = 0;
  int64_t settled_nodes = 0;
};

/// Label-setting search for T_t(x, y) with the l1 distance to y as potential.
/// Only values <= value_cap are resolved (value_cap < 0: no cap beyond the
/// direct edge). Fails with a geometry error if the search ellipse
/// {z : |z - x|_1 + |z - y|_1 <= bound} is not inside the box.
TruncatedPath truncated_passage(const Environment& env, const Point& x, const Point& y, const TruncationParams& p,
                                int64_t value_cap = -1);

/// Dijkstra over every site of the search ellipse with sigma_t evaluated
/// pairwise. Quadratic; for cross-checking on small instances.
TruncatedPath truncated_passage_oracle(const Environment& env, const Point& x, const Point& y,
                                       const TruncationParams& p, size_t max_sites = 5000);

/// Boxes center_q + (-t/2, t/2]^d with center_q = t q.
class Tiling {
 public:
  Tiling(int dim, int64_t t);
  int dim() const noexcept { return dim_; }
  int64_t scale() const noexcept { return t_; }
  Point box_of(const Point& z) const;
  Point center(const Point& q) const { return t_ * q; }
  bool contains(const Point& q, const Point& z) const { return box_of(z) == q; }

 private:
  int dim_;
  int64_t t_;
};

inline Point tiling_box_of(const Tiling& tiling, const Point& z) { return tiling.box_of(z); }

/// Number of distinct tiles containing a witness site.
int64_t geodesic_box_count(const std::vector<Point>& witness, const Tiling& tiling);
/// 3^d (4K (1 v ||x||_inf / t) + 1).
double geodesic_box_bound(int dim, const TruncationParams& p, const Point& x);

struct AgreementRow {
  int64_t t = 0;
  int64_t K = 0;
  int64_t replicas = 0;
  /// Replicas where both values are censored; excluded from the fraction.
  int64_t undecided = 0;
  int64_t disagreements = 0;
  BinomialEstimate fraction;
  int64_t long_range_edges = 0;
  int64_t capped_edges = 0;
  int64_t geodesics = 0;
  int64_t box_count_max = 0;
  double box_bound = 0;
  int64_t box_violations = 0;
  int64_t sigma_evaluations = 0;
  int64_t sigma_violations = 0;
  int64_t witness_sum_mismatches = 0;
};

struct AgreementConfig {
  ConfigLaw law = ConfigLaw::poisson(1.0);
  int dim = 2;
  Point x;
  std::vector<int64_t> t_ladder;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  double c4_hat = 0.0;
  double gamma = 1.0;
  int64_t horizon = 0;
  /// Random sigma_t pairs audited per replica and t, besides the witness edges.
  int64_t sigma_probes = 16;
  unsigned threads = 1;
};

struct AgreementResult {
  std::vector<AgreementRow> rows;
  int64_t box_radius = 0;
  int64_t censored_star = 0;
};

/// Per t, the fraction of replicas with T_t(0*, x*) != T*(0, x), with the
/// sigma_t sandwich and geodesic box-count audits.
AgreementResult agreement_experiment(const AgreementConfig& cfg);

std::string agreement_csv(const AgreementResult& r);
nlohmann::json to_json(const AgreementRow& row);
nlohmann::json to_json(const AgreementResult& r);

}  // namespace frogpass
