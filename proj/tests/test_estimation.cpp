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

#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/estimation.hpp"

using namespace frogpass;

TEST_CASE("horizon sizing") {
  CHECK(auto_horizon(3.0, 2.0, 8) == 48);
  CHECK(auto_horizon(3.0, 2.1, 10) == 63);
  CHECK_THROWS_AS(auto_horizon(0.0, 2.0, 8), Error);
}

TEST_CASE("analytic bounds") {
  const auto b = analytic_lower_bounds(ConfigLaw::constant(1), 0.5, 2.0, 2);
  CHECK(b.ceil_term == 3);
  CHECK(b.upper_tail_rate_lb == -3 * std::log(4.0));
  CHECK(b.lower_tail_rate_lb == -std::log(4.0));
  const auto p = analytic_lower_bounds(ConfigLaw::poisson(2.0), 1.0, 1.5, 3);
  CHECK(p.ceil_term == 3);
  CHECK(p.upper_tail_rate_lb == doctest::Approx(-2.0 * 3 * std::log(6.0)));
  CHECK_THROWS_AS(analytic_lower_bounds(ConfigLaw::constant(1), 0.0, 2.0, 2), Error);
}

TEST_CASE("direct path event") {
  const auto r = direct_path_event_check(2, 3, 20000, {5, "direct"}, 2);
  CHECK(r.target == 1.0 / 64);
  CHECK(r.estimate.trials == 20000);
  CHECK(r.within_3_sigma);
  const auto zero = direct_path_event_check(3, 0, 100, {5, "direct"});
  CHECK(zero.target == 1.0);
  CHECK(zero.estimate.hits == 100);
  CHECK(direct_path_event_check(3, 2, 10, {5, "direct"}).target == 1.0 / 36);
  CHECK(direct_path_event_check(2, 3, 5000, {5, "direct"}, 1).estimate.hits ==
        direct_path_event_check(2, 3, 5000, {5, "direct"}, 3).estimate.hits);
}

TEST_CASE("time constant estimate") {
  TimeConstantConfig c;
  c.law = ConfigLaw::poisson(1.0);
  c.direction = Point{1, 0};
  c.k_ladder = {2, 4, 8};
  c.replicas = 40;
  c.seed = {3, "mu"};
  const auto e = estimate_time_constant(c);
  REQUIRE(e.per_k.size() == 3);
  CHECK(e.mu_hat >= e.mu_lower);
  CHECK(e.bounds.checks > 0);
  CHECK(e.bounds.violations == 0);
  double best = 1e300;
  for (const auto& r : e.per_k) {
    CHECK(r.ratio.n + r.ratio.censored_count == 40);
    CHECK(r.ratio.mean >= 1.0);
    best = std::min(best, r.ratio.ci_hi);
  }
  CHECK(e.mu_hat == best);
  c.threads = 3;
  CHECK(to_json(estimate_time_constant(c)).dump() == to_json(e).dump());
  CHECK(time_constant_csv(e).rfind("k,horizon,n,mean,std,ci_lo,ci_hi,censored\n", 0) == 0);

  c.law = ConfigLaw::constant(50);
  c.seed = {11, "pin"};
  c.replicas = 20;
  CHECK(estimate_time_constant(c).mu_hat == 1.0);
}

TEST_CASE("time constant validation and censoring") {
  TimeConstantConfig c;
  c.direction = Point{1, 0};
  c.k_ladder = {4, 2};
  c.replicas = 10;
  CHECK_THROWS_AS(estimate_time_constant(c), Error);
  c.k_ladder = {8};
  c.law = ConfigLaw::poisson(0.2);
  c.horizon_factor = 0.55;
  c.mu_ref = 2.0;
  c.seed = {4, "cens"};
  try {
    estimate_time_constant(c);
    FAIL("expected a censoring budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCensoringBudget);
  }
}

TEST_CASE("deviation tails") {
  TailConfig c;
  c.law = ConfigLaw::poisson(0.5);
  for (int k = 1; k <= 8; ++k) c.x_ladder.push_back(Point{k, 0});
  c.replicas = 600;
  c.seed = {8, "tails"};
  c.mu_hat = 3.0;
  const auto r = deviation_tail_experiment(c);
  REQUIRE(r.upper.points.size() == 8);
  CHECK(r.horizon == 36);
  CHECK(r.bounds.violations == 0);
  CHECK(r.upper.log_fit.valid);
  CHECK(r.upper.log_fit.slope < 0);
  CHECK(r.lower.log_fit.slope < 0);
  CHECK(r.upper.best_alpha > 0);
  for (const auto& p : r.lower.points) CHECK(p.censored == (p.estimate.hits == 0));
  c.threads = 4;
  CHECK(tail_csv(deviation_tail_experiment(c)) == tail_csv(r));

  c.epsilon = 0.0;
  c.mu_hat = 1.0 - 1e-9;
  c.replicas = 100;
  const auto trivial = deviation_tail_experiment(c);
  for (const auto& p : trivial.lower.points) CHECK(p.estimate.hits == 0);
}

TEST_CASE("concentration") {
  ConcentrationConfig c;
  c.law = ConfigLaw::constant(1);
  c.x_ladder = {Point{4, 0}, Point{8, 0}, Point{12, 0}};
  c.replicas = 60;
  c.bootstrap_resamples = 100;
  c.seed = {9, "conc"};
  const auto r = concentration_experiment(c);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.bounds.violations == 0);
  for (const auto& row : r.rows) {
    CHECK(row.std_lo <= row.stats.std + 1e-9);
    CHECK(row.stats.std <= row.std_hi + 1e-9);
    CHECK(row.ratio == doctest::Approx(row.stats.std / std::sqrt(static_cast<double>(row.norm))));
  }
  CHECK(r.log_fit.valid);
  c.threads = 2;
  CHECK(concentration_csv(concentration_experiment(c)) == concentration_csv(r));
}

TEST_CASE("subadditivity audit") {
  SubadditivityConfig c;
  c.triples = 40;
  c.seed = {10, "sub"};
  const auto r = subadditivity_audit(c);
  CHECK(r.triples == 40);
  CHECK(r.counted > 0);
  CHECK(r.counted_star > 0);
  CHECK(r.violations == 0);
  CHECK(r.violations_star == 0);
  CHECK(r.bounds.violations == 0);
  c.threads = 3;
  CHECK(to_json(subadditivity_audit(c)).dump() == to_json(r).dump());
}
