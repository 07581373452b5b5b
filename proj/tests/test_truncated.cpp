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

#include <nlohmann/json.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/error.hpp"
#include "frogpass/truncated.hpp"
#include "frogpass/walks.hpp"

using namespace frogpass;

TEST_CASE("truncation parameters") {
  const auto p = TruncationParams::make(2, 3, 0.5, 1.0);
  CHECK(p.K == 6);
  CHECK(p.cap() == 72);
  CHECK(p.jump_cost(5) == 120);
  CHECK(p.jump_cost(1) == 72);
  TruncationParams bad = p;
  bad.K = 5;
  CHECK_THROWS_AS(bad.validate(2), Error);
  CHECK_THROWS_AS(TruncationParams::make(2, 0, 0.5), Error);
}

TEST_CASE("sigma_t cases") {
  const auto p = TruncationParams::make(2, 2, 0.0);
  const Environment env = make_environment(2, 20, ConfigLaw::bernoulli(0.5), {3, "sigma"}, {{Point{0, 0}, 1}});
  CHECK(sigma_t(env, Point{0, 0}, Point{3, 0}, p) == 4 * p.K * 3);
  CHECK(sigma_t(env, Point{0, 0}, Point{0, 0}, p) == 0);
  CHECK(sigma_t(env, Point{1, 0}, Point{2, 1}, p) == p.cap());
  const HittingTime h = tau(env, Point{0, 0}, Point{1, 1}, p.cap());
  CHECK(sigma_t(env, Point{0, 0}, Point{1, 1}, p) == (h.is_finite() ? h.value() : p.cap()));
}

TEST_CASE("sigma_t sandwich on random pairs") {
  const Environment env = sample_environment(ConfigLaw::poisson(1.0), 2, 40, {8, "sandwich"});
  const auto key = philox_key(env.seed());
  for (int64_t t : {1, 2, 5}) {
    const auto p = TruncationParams::make(2, t, 1.0);
    for (uint64_t i = 0; i < 300; ++i) {
      Point u{static_cast<int64_t>(keyed_uniform(key, i, StreamDomain::kSampling, 0) * 21) - 10,
              static_cast<int64_t>(keyed_uniform(key, i, StreamDomain::kSampling, 1) * 21) - 10};
      Point v{u[0] + static_cast<int64_t>(keyed_uniform(key, i, StreamDomain::kSampling, 2) * 13) - 6,
              u[1] + static_cast<int64_t>(keyed_uniform(key, i, StreamDomain::kSampling, 3) * 13) - 6};
      const int64_t s = sigma_t(env, u, v, p);
      REQUIRE(sigma_sandwich_holds(u, v, s, p));
    }
  }
}

TEST_CASE("search agrees with the pairwise oracle") {
  int nontrivial = 0;
  for (uint64_t s = 0; s < 12; ++s) {
    const Environment env = sample_environment(ConfigLaw::poisson(1.0), 2, 60, {s, "trunc-oracle"});
    const Point x = star(env, Point{0, 0});
    const Point y = star(env, Point{3, 1});
    for (int64_t t : {1, 2, 3}) {
      const auto p = TruncationParams::make(2, t, 0.0);
      const TruncatedPath fast = truncated_passage(env, x, y, p);
      const TruncatedPath slow = truncated_passage_oracle(env, x, y, p);
      REQUIRE(fast.value.is_finite());
      CHECK(fast.value == slow.value);
      CHECK(fast.value.value() >= l1_dist(x, y));
      CHECK(fast.value.value() <= p.jump_cost(linf_dist(x, y)));
      for (const TruncatedPath* tp : {&fast, &slow}) {
        int64_t sum = 0;
        for (size_t i = 0; i + 1 < tp->witness.size(); ++i) sum += sigma_t(env, tp->witness[i], tp->witness[i + 1], p);
        CHECK(sum == tp->value.value());
        CHECK(tp->witness.front() == x);
        CHECK(tp->witness.back() == y);
      }
      nontrivial += fast.witness.size() > 2;
      const TruncatedPath again = truncated_passage(env, x, y, p);
      CHECK(again.witness == fast.witness);
    }
  }
  CHECK(nontrivial > 0);
}

TEST_CASE("long-range and capped edges appear when the cheap option") {
  // No frogs anywhere but the source: every path must use priced edges.
  const Environment env = make_environment(2, 60, ConfigLaw::bernoulli(0.5), {1, "bare"}, {{Point{0, 0}, 1}});
  const auto p = TruncationParams::make(2, 1, 0.0);
  const TruncatedPath tp = truncated_passage(env, Point{0, 0}, Point{3, 0}, p);
  const TruncatedPath slow = truncated_passage_oracle(env, Point{0, 0}, Point{3, 0}, p);
  CHECK(tp.value == slow.value);
  CHECK(tp.long_range_edges + tp.capped_edges >= 1);
}

TEST_CASE("more frogs never increase T_t") {
  const Environment env = sample_environment(ConfigLaw::bernoulli(0.5), 2, 100, {4, "mono"});
  const Point x = star(env, Point{0, 0});
  const Point y = star(env, Point{5, 0});
  const auto p = TruncationParams::make(2, 3, 0.5);
  const int64_t base = truncated_passage(env, x, y, p).value.value();
  Environment richer = env;
  for (const Point& z : {Point{1, 0}, Point{2, 0}, Point{3, 1}, Point{4, -1}})
    richer = richer.with_site(z, richer.omega(z) + 2);
  CHECK(truncated_passage(richer, x, y, p).value.value() <= base);
}

TEST_CASE("trivial and censored searches") {
  const Environment env = sample_environment(ConfigLaw::poisson(1.0), 2, 30, {2, "triv"});
  const auto p = TruncationParams::make(2, 2, 0.5);
  CHECK(truncated_passage(env, Point{1, 1}, Point{1, 1}, p).value == HittingTime::finite(0));
  const TruncatedPath capped = truncated_passage(env, Point{0, 0}, Point{10, 0}, p, 5);
  CHECK_FALSE(capped.value.is_finite());
  const Environment tiny = sample_environment(ConfigLaw::poisson(1.0), 2, 8, {2, "triv"});
  CHECK_THROWS_AS(truncated_passage(tiny, Point{0, 0}, Point{6, 0}, p), Error);
}

TEST_CASE("tiling") {
  const Tiling even(2, 4), odd(1, 3);
  CHECK(even.box_of(Point{0, 0}) == Point{0, 0});
  CHECK(even.box_of(Point{8, -4}) == Point{2, -1});
  CHECK(even.box_of(Point{2, 0}) == Point{0, 0});
  CHECK(even.box_of(Point{-2, 0}) == Point{-1, 0});
  CHECK(even.box_of(Point{3, 0}) == Point{1, 0});
  CHECK(odd.box_of(Point{1}) == Point{0});
  CHECK(odd.box_of(Point{2}) == Point{1});
  CHECK(odd.box_of(Point{-1}) == Point{0});
  CHECK(odd.box_of(Point{-2}) == Point{-1});
  for (int64_t t : {1, 2, 3, 4, 7}) {
    const Tiling tl(2, t);
    const CubeGrid window(2, 15);
    for (size_t i = 0; i < window.size(); ++i) {
      const Point z = window.point(i);
      const Point c = tl.center(tl.box_of(z));
      for (int k = 0; k < 2; ++k) {
        REQUIRE(2 * (z[k] - c[k]) > -t);
        REQUIRE(2 * (z[k] - c[k]) <= t);
      }
    }
  }
  CHECK(geodesic_box_count({Point{0, 0}}, even) == 1);
  CHECK(geodesic_box_count({Point{0, 0}, Point{1, 1}, Point{-1, 2}}, even) == 1);
  CHECK(geodesic_box_count({Point{0, 0}, Point{3, 0}}, even) == 2);
  const auto p = TruncationParams::make(2, 4, 0.0);
  CHECK(geodesic_box_bound(2, p, Point{8, 0}) == doctest::Approx(9 * (4 * 5 * 2 + 1)));
  CHECK(geodesic_box_bound(2, p, Point{2, 0}) == doctest::Approx(9 * (4 * 5 + 1)));
}

TEST_CASE("agreement experiment") {
  AgreementConfig cfg;
  cfg.law = ConfigLaw::poisson(1.0);
  cfg.x = Point{4, 0};
  cfg.t_ladder = {1, 4, 16};
  cfg.replicas = 24;
  cfg.seed = {5, "agree"};
  cfg.c4_hat = 5.0;
  cfg.horizon = 40;
  cfg.threads = 2;
  const AgreementResult r = agreement_experiment(cfg);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.sigma_violations == 0);
    CHECK(row.witness_sum_mismatches == 0);
    CHECK(row.box_violations == 0);
    CHECK(row.sigma_evaluations > 0);
  }
  CHECK(r.rows.front().fraction.phat >= r.rows.back().fraction.phat);
  cfg.threads = 1;
  const AgreementResult again = agreement_experiment(cfg);
  CHECK(agreement_csv(again) == agreement_csv(r));
  CHECK(agreement_csv(r).rfind("t,replicas,disagreements,phat,ci_lo,ci_hi\n", 0) == 0);
  CHECK(to_json(r.rows[0]).at("t") == 1);
}
