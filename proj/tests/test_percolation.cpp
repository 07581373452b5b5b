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

#include <doctest.h>

#include <cmath>

#include "frogpass/environment.hpp"
#include "frogpass/error.hpp"
#include "frogpass/percolation.hpp"

using namespace frogpass;

namespace {

SiteField from_rows(const std::vector<std::string>& rows) {
  // rows[0] is the top row (y = R); columns run x = -R..R.
  const auto R = static_cast<int64_t>(rows.size() / 2);
  const CubeGrid g(2, R);
  std::vector<uint8_t> bits(g.size(), 0);
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      if (rows[r][c] == '#') bits[g.index(Point{static_cast<int64_t>(c) - R, R - static_cast<int64_t>(r)})] = 1;
  return SiteField(2, R, "fixture", bits);
}

}  // namespace

TEST_CASE("bernoulli fields") {
  CHECK(sample_bernoulli_field(1.0, 2, 5, {1, "f"}).open_count() == 121);
  CHECK(sample_bernoulli_field(0.0, 2, 5, {1, "f"}).open_count() == 0);
  const SiteField f = sample_bernoulli_field(0.7, 2, 100, {1, "f"});
  const double freq = static_cast<double>(f.open_count()) / static_cast<double>(f.bits().size());
  CHECK(std::abs(freq - 0.7) < 5 * std::sqrt(0.21 / static_cast<double>(f.bits().size())));
  CHECK_THROWS_AS(sample_bernoulli_field(1.5, 2, 5, {1, "f"}), Error);
}

TEST_CASE("cluster labels") {
  const ClusterLabels all = label_clusters(sample_bernoulli_field(1.0, 2, 3, {1, "c"}));
  CHECK(all.sizes == std::vector<int64_t>{49});
  CHECK(all.largest_id == 0);
  const ClusterLabels none = label_clusters(sample_bernoulli_field(0.0, 2, 3, {1, "c"}));
  CHECK(none.sizes.empty());
  CHECK(none.largest_id == -1);
  const SiteField f = from_rows({
      "##...",
      "#..##",
      "...#.",
      "####.",
      ".....",
  });
  const ClusterLabels two = label_clusters(f);
  CHECK(two.sizes == std::vector<int64_t>{7, 3});
  CHECK(two.largest_id == 0);
}

TEST_CASE("chemical distance") {
  const SiteField ones = sample_bernoulli_field(1.0, 2, 10, {1, "d"});
  CHECK(chemical_distance(ones, Point{2, 3}, Point{2, 3}) == 0);
  CHECK(chemical_distance(ones, Point{-4, 3}, Point{5, -2}) == 14);
  const SiteField f = from_rows({
      "#####",
      "#...#",
      "#.#.#",
      "#...#",
      "##.##",
  });
  CHECK(chemical_distance(f, Point{-2, -2}, Point{2, -2}) == 12);
  CHECK_FALSE(chemical_distance(f, Point{0, 0}, Point{2, -2}).has_value());
  CHECK_FALSE(chemical_distance(f, Point{0, -2}, Point{2, -2}).has_value());
}

TEST_CASE("hole radius") {
  const SiteField ones = sample_bernoulli_field(1.0, 2, 6, {1, "h"});
  CHECK(hole_radius(ones, label_clusters(ones)) == 0);
  const SiteField f = from_rows({
      ".......",
      "...#...",
      ".......",
      ".......",
      ".......",
      "#######",
      ".......",
  });
  CHECK(hole_radius(f, label_clusters(f)) == 2);
  const SiteField g = from_rows({
      "#######",
      ".......",
      ".......",
      "...#...",
      ".......",
      ".......",
      ".......",
  });
  CHECK(hole_radius(g, label_clusters(g)) == 3);
  CHECK_THROWS_AS(hole_radius(sample_bernoulli_field(0.0, 2, 3, {1, "h"}),
                              label_clusters(sample_bernoulli_field(0.0, 2, 3, {1, "h"}))),
                  Error);
}

TEST_CASE("white sites") {
  CHECK(white_subbox_half_side(16, 2) == 1);
  CHECK(white_subbox_half_side(65536, 2) == 2);
  CHECK(white_subbox_half_side(4096 * 4096, 2) == 8);
  const int64_t N = 16;
  const Point origin{0, 0};
  const int64_t R = white_required_radius(origin, N);
  const Environment dense = sample_environment(ConfigLaw::constant(3), 2, R, {1, "white"});
  const WhiteDetail d = white_site_detail(dense, origin, N);
  CHECK(d.tiles_occupied);
  CHECK(d.tiles == 256);
  CHECK(d.white == d.passages_fast);
  const Environment holed = dense.with_site(Point{0, 0}, 0).with_site(Point{0, 1}, 0).with_site(Point{1, 0}, 0).with_site(Point{1, 1}, 0);
  CHECK_FALSE(white_site_indicator(holed, origin, N));
  CHECK_THROWS_AS(white_site_indicator(sample_environment(ConfigLaw::constant(1), 2, R - 1, {1, "w"}), origin, N),
                  Error);
}

TEST_CASE("white indicator depends only on B_inf(Nv, 2N)") {
  const int64_t N = 12;
  const Point v{1, 0};
  const int64_t R = white_required_radius(v, N) + 6;
  int whites = 0;
  for (uint64_t s = 0; s < 6; ++s) {
    const Environment env = sample_environment(ConfigLaw::poisson(3.0), 2, R, {s, "local"});
    const Environment other = sample_environment(ConfigLaw::poisson(3.0), 2, R, {s + 100, "local"});
    Environment mixed = env;
    for (const Point& p : env.sites())
      if (linf_dist(p, N * v) > 2 * N) mixed = mixed.with_site(p, other.omega(p));
    const bool w = white_site_indicator(env, v, N);
    whites += w;
    CHECK(white_site_indicator(mixed, v, N) == w);
  }
  CHECK(whites > 0);
  CHECK(whites < 6);
}

TEST_CASE("good sites") {
  const auto mu = [](const Point&) { return 2.0; };
  const Point origin{0, 0};
  const int64_t N = 4, M = 1;
  const int64_t R = good_required_radius(origin, N, M, 1.0, 2.0);
  const Environment ones = sample_environment(ConfigLaw::constant(1), 2, R, {7, "good"});
  const GoodDetail d = good_site_detail(ones, origin, N, M, 1.0, mu);
  CHECK(d.stars_close);
  CHECK(d.good);
  CHECK(d.directions == 4);
  CHECK(d.passages == 16);
  // Large delta: only the star condition matters.
  const int64_t Rbig = good_required_radius(origin, N, M, 20.0, 2.0);
  const Environment sparse = sample_environment(ConfigLaw::bernoulli(0.3), 2, Rbig, {8, "good"});
  const GoodDetail s = good_site_detail(sparse, origin, N, M, 20.0, mu);
  CHECK(s.good == s.stars_close);
  Environment emptied = ones;
  for (const Point& p : ones.sites())
    if (l1_dist(p, Point{4, 0}) <= 2) emptied = emptied.with_site(p, 0);
  const GoodDetail far = good_site_detail(emptied, origin, N, M, 1.0, mu);
  CHECK_FALSE(far.stars_close);
  CHECK_FALSE(far.good);
  CHECK_THROWS_AS(good_site_indicator(ones, origin, N, M, 1.0, [](const Point&) { return std::nan(""); }), Error);
}

TEST_CASE("percolation experiment") {
  PercolationConfig cfg;
  cfg.p = 0.8;
  cfg.radius = 40;
  cfg.replicas = 30;
  cfg.seed = {3, "perc"};
  cfg.ratio_min_norm = 5;
  cfg.ratio_max_norm = 20;
  cfg.threads = 2;
  const PercolationResult r = percolation_experiment(cfg);
  CHECK(r.margin == 4);
  CHECK(r.distance_violations == 0);
  CHECK(r.connected_pairs > 0);
  CHECK(r.max_ratio >= 1.0);
  CHECK(r.hole_tail.front().tail.phat == 1.0);
  cfg.threads = 1;
  CHECK(hole_tail_csv(percolation_experiment(cfg)) == hole_tail_csv(r));
  CHECK(ratio_csv(r).rfind("l1_norm,pairs,mean_ratio,max_ratio\n", 0) == 0);
}

TEST_CASE("marginal curves") {
  MarginalConfig cfg;
  cfg.law = ConfigLaw::constant(1);
  cfg.n_ladder = {2, 4};
  cfg.replicas = 3;
  cfg.seed = {1, "marg"};
  cfg.kind = MarginalKind::kWhite;
  const auto rows = marginal_curve(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) CHECK(row.marginal.trials == 3);
  CHECK(marginal_csv(rows).rfind("N,box_radius,replicas,hits,phat,ci_lo,ci_hi\n", 0) == 0);
}
