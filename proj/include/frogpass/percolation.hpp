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

// Site percolation on a finite cube and the renormalized site fields:
// Bernoulli fields, cluster labels, chemical distances, hole radii, and the
// white and good indicators built from the frog environment.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/lattice.hpp"
#include "frogpass/stats.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

/// A 0/1 field on the cube [-R, R]^d.
class SiteField {
 public:
  SiteField() = default;
  SiteField(int dim, int64_t radius, std::string provenance, std::vector<uint8_t> bits);

  int dim() const noexcept { return grid_.dim(); }
  int64_t radius() const noexcept { return grid_.radius(); }
  const CubeGrid& grid() const noexcept { return grid_; }
  const std::string& provenance() const noexcept { return provenance_; }
  bool contains(const Point& v) const { return v.dim() == dim() && grid_.contains(v); }
  /// 0 outside the cube.
  uint8_t at(const Point& v) const { return contains(v) ? bits_[grid_.index(v)] : 0; }
  const std::vector<uint8_t>& bits() const noexcept { return bits_; }
  size_t open_count() const;

 private:
  CubeGrid grid_;
  std::string provenance_;
  std::vector<uint8_t> bits_;
};

SiteField sample_bernoulli_field(double p, int dim, int64_t radius, const SeedSpec& seed);

struct ClusterLabels {
  /// Per grid index: cluster id, or -1 for closed sites. Ids follow first
  /// appearance in grid order.
  std::vector<int32_t> label;
  std::vector<int64_t> sizes;
  /// Largest cluster (smallest id among equals); -1 if the field is closed.
  int32_t largest_id = -1;
};

ClusterLabels label_clusters(const SiteField& f);

/// Graph distance inside the open sites; nullopt when unreachable (including
/// closed endpoints).
std::optional<int64_t> chemical_distance(const SiteField& f, const Point& a, const Point& b);
/// Distances from `a` to every site of the cube; -1 where unreachable.
std::vector<int64_t> chemical_distances_from(const SiteField& f, const Point& a);

/// Smallest l1 norm of a site of the largest cluster whose l_inf norm is at
/// most `inner_radius` (negative: the whole cube). Throws if there is none.
int64_t hole_radius(const SiteField& f, const ClusterLabels& labels, int64_t inner_radius = -1);

/// Sub-box half side of the white tiling, floor(N^{1/4} / (4d)) clamped to >= 1.
int64_t white_subbox_half_side(int64_t N, int dim);

struct WhiteDetail {
  bool white = false;
  bool tiles_occupied = false;
  bool passages_fast = false;
  int64_t tiles = 0;
  int64_t pairs_checked = 0;
};

/// Whether v is white at scale N: every sub-box inside B_inf(Nv, N) meets I,
/// and T(x, y) <= N for occupied x, y in that window with ||x - y||_1 <= N^{1/4}.
WhiteDetail white_site_detail(const Environment& env, const Point& v, int64_t N);
inline bool white_site_indicator(const Environment& env, const Point& v, int64_t N) {
  return white_site_detail(env, v, N).white;
}
/// Box radius needed to evaluate the white indicator at v exactly.
int64_t white_required_radius(const Point& v, int64_t N);

/// mu_hat(z) for a direction z with ||z||_1 = M, per unit l1 length.
using DirectionalMu = std::function<double(const Point&)>;

struct GoodDetail {
  bool good = false;
  bool passages_fast = false;
  bool stars_close = false;
  int64_t directions = 0;
  int64_t passages = 0;
};

/// Whether v is good at scales (N, M): for every z with ||z||_1 = M and every
/// unit e, T*(N L_z(v), N L_z(v + e)) <= M N mu_hat(z) (1 + delta) and both
/// stars lie within sqrt(N) of their anchors.
GoodDetail good_site_detail(const Environment& env, const Point& v, int64_t N, int64_t M, double delta,
                            const DirectionalMu& mu_hat);
inline bool good_site_indicator(const Environment& env, const Point& v, int64_t N, int64_t M, double delta,
                                const DirectionalMu& mu_hat) {
  return good_site_detail(env, v, N, M, delta, mu_hat).good;
}
int64_t good_required_radius(const Point& v, int64_t N, int64_t M, double delta, double mu_max);

// ---------------------------------------------------------------------------
// Experiments

struct PercolationConfig {
  double p = 0.8;
  int dim = 2;
  int64_t radius = 100;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  int64_t ratio_min_norm = 20;
  int64_t ratio_max_norm = 60;
  unsigned threads = 1;
};

struct HoleTailRow {
  int64_t t = 0;
  BinomialEstimate tail;  // P(hole >= t)
};

struct RatioRow {
  int64_t norm = 0;
  int64_t pairs = 0;
  double mean_ratio = 0;
  double max_ratio = 0;
};

struct PercolationResult {
  int64_t margin = 0;
  std::vector<HoleTailRow> hole_tail;
  LinearFit hole_fit;  // log P(hole >= t) against t over rows with hits
  std::vector<RatioRow> ratios;
  double max_ratio = 0;
  int64_t connected_pairs = 0;
  int64_t distance_violations = 0;  // chemical distance below the l1 distance
};

/// Hole radii of the largest cluster and chemical-distance ratios
/// d(0, v) / ||v||_1 for v in the ratio window connected to 0, excluding a
/// boundary margin of radius / 10.
PercolationResult percolation_experiment(const PercolationConfig& cfg);

enum class MarginalKind { kWhite, kGood };

struct MarginalConfig {
  MarginalKind kind = MarginalKind::kWhite;
  ConfigLaw law = ConfigLaw::poisson(1.0);
  int dim = 2;
  std::vector<int64_t> n_ladder;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  int64_t M = 1;
  double delta = 0.5;
  double mu_hat = 1.5;  // isotropic value used for every direction
  unsigned threads = 1;
};

struct MarginalRow {
  int64_t N = 0;
  int64_t box_radius = 0;
  BinomialEstimate marginal;
};

/// P(origin white / good) per N.
std::vector<MarginalRow> marginal_curve(const MarginalConfig& cfg);

std::string hole_tail_csv(const PercolationResult& r);
std::string ratio_csv(const PercolationResult& r);
std::string marginal_csv(const std::vector<MarginalRow>& rows);
nlohmann::json to_json(const PercolationResult& r);
nlohmann::json to_json(const MarginalRow& row);

}  // namespace frogpass
