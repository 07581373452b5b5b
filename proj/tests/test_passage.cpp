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
#include "frogpass/passage.hpp"
#include "frogpass/walks.hpp"

using namespace frogpass;

namespace {

int64_t witness_sum(const Environment& env, const std::vector<Point>& chain, int64_t horizon) {
  int64_t s = 0;
  for (size_t i = 0; i + 1 < chain.size(); ++i) {
    const HittingTime t = tau(env, chain[i], chain[i + 1], horizon);
    REQUIRE(t.is_finite());
    s += t.value();
  }
  return s;
}

}  // namespace

TEST_CASE("tau basics") {
  const ConfigLaw law = ConfigLaw::bernoulli(0.5);
  const Environment env = make_environment(2, 10, law, {4, "tau"}, {{Point{0, 0}, 1}});
  CHECK(tau(env, Point{0, 0}, Point{0, 0}, 5) == HittingTime::finite(0));
  CHECK(tau(env, Point{1, 0}, Point{0, 0}, 5) == HittingTime::censored(5));
  CHECK(tau(env, Point{0, 0}, Point{9, 0}, 5) == HittingTime::censored(5));
  WalkStream w(env.seed(), Point{0, 0}, 1);
  const Point target = w.position(37);
  int64_t first = -1;
  for (uint64_t k = 1; k <= 37; ++k)
    if (w.position(k) == target) {
      first = static_cast<int64_t>(k);
      break;
    }
  CHECK(tau(env, Point{0, 0}, target, 100) == HittingTime::finite(first));
  const HitTable table = hitting_times_from(env, Point{0, 0}, 100);
  CHECK(table.at(target) == first);
  CHECK(table.at(Point{0, 0}) == 0);
}

TEST_CASE("single frog passage equals its hitting time") {
  const Environment env = make_environment(2, 60, ConfigLaw::bernoulli(0.5), {8, "single"}, {{Point{0, 0}, 1}});
  for (const Point& x : {Point{1, 0}, Point{0, -2}, Point{2, 2}}) {
    const PassageOutcome p = passage_time(env, x, 50);
    CHECK(p.value == tau(env, Point{0, 0}, x, 50));
  }
}

TEST_CASE("simulation agrees with the shortest-path oracle") {
  int finite = 0;
  for (uint64_t s = 0; s < 60; ++s) {
    const ConfigLaw law = s % 2 ? ConfigLaw::bernoulli(0.35) : ConfigLaw::poisson(0.6);
    const Environment env = condition_origin(sample_environment(law, 2, 6, {s, "oracle"}));
    for (const Point& x : {Point{3, 1}, Point{-2, -2}, Point{0, 5}}) {
      const auto fast = passage_time_between(env, Point{0, 0}, x, 40, BoxPolicy::kTruncatedWorld);
      const auto slow = oracle_passage_time(env, Point{0, 0}, x, 40);
      REQUIRE(fast.value == slow.value);
      if (fast.value.is_finite()) {
        ++finite;
        CHECK(fast.value.value() >= l1_norm(x));
        REQUIRE(fast.witness);
        CHECK(fast.witness->front() == Point{0, 0});
        CHECK(fast.witness->back() == x);
        CHECK(witness_sum(env, *fast.witness, 40) == fast.value.value());
        CHECK(witness_sum(env, *slow.witness, 40) == slow.value.value());
      }
    }
  }
  CHECK(finite > 60);
}

TEST_CASE("early stop does not change visit times") {
  const Environment env = condition_origin(sample_environment(ConfigLaw::bernoulli(0.5), 2, 80, {3, "early"}));
  const ActivationTable full = simulate_frogs(env, Point{0, 0}, 40);
  SimulationOptions opt;
  opt.stop_when_visited = {Point{4, 3}, Point{-5, 0}};
  const ActivationTable part = simulate_frogs(env, Point{0, 0}, 40, opt);
  for (const Point& y : opt.stop_when_visited) CHECK(part.visit_time(y) == full.visit_time(y));
  CHECK(part.explored_through() <= full.explored_through());
  CHECK(full.explored_through() == 40);
  for (const auto& [p, t] : part.visited()) CHECK(full.visit_time(p) == HittingTime::finite(t));
}

TEST_CASE("activation invariants") {
  const Environment env = condition_origin(sample_environment(ConfigLaw::geometric(0.5), 3, 40, {21, "inv"}));
  SimulationOptions opt;
  opt.record_awake_trace = true;
  const ActivationTable tab = simulate_frogs(env, Point{0, 0, 0}, 25, opt);
  CHECK(tab.awake_trace().size() == 26);
  for (size_t i = 1; i < tab.awake_trace().size(); ++i) CHECK(tab.awake_trace()[i] >= tab.awake_trace()[i - 1]);
  for (const auto& f : tab.frogs()) {
    CHECK(tab.visit_time(f.origin) == HittingTime::finite(f.activation_time));
    CHECK(f.frog_index >= 1);
    CHECK(f.frog_index <= env.omega(f.origin));
  }
  for (const auto& [p, t] : tab.visited()) {
    CHECK(t >= l1_norm(p));
    const auto g = tab.genealogy(p);
    REQUIRE(!g.empty());
    CHECK(g.front() == Point{0, 0, 0});
    CHECK(g.back() == p);
  }
  CHECK(tab.visit_time(Point{30, 0, 0}) == HittingTime::censored(25));
}

TEST_CASE("box policies") {
  const Environment env = condition_origin(sample_environment(ConfigLaw::bernoulli(0.6), 2, 10, {2, "box"}));
  CHECK_THROWS_AS(passage_time(env, Point{2, 0}, 20, BoxPolicy::kExact), Error);
  try {
    (void)passage_time(env, Point{2, 0}, 20, BoxPolicy::kExact);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kGeometry);
  }
  CHECK_NOTHROW(passage_time(env, Point{2, 0}, 10, BoxPolicy::kExact));
  CHECK_NOTHROW(passage_time(env, Point{2, 0}, 40, BoxPolicy::kTruncatedWorld));
  CHECK_THROWS_AS(simulate_frogs(env, Point{0, 0}, 400, {BoxPolicy::kOnDemand, {}, false}), Error);
  const Environment wide = sample_environment(ConfigLaw::bernoulli(0.6), 2, 120, {2, "box"});
  const Environment wc = condition_origin(wide);
  const auto exact = passage_time(wc, Point{3, 3}, 100, BoxPolicy::kExact);
  const auto lazy = passage_time(wc, Point{3, 3}, 100, BoxPolicy::kOnDemand);
  CHECK(exact.value == lazy.value);
}

TEST_CASE("star passage and relays") {
  const Environment env = sample_environment(ConfigLaw::bernoulli(0.4), 2, 60, {9, "starpass"});
  const StarPassage sp = passage_time_star(env, Point{6, -3}, 50);
  CHECK(sp.source_star == star(env, Point{0, 0}));
  CHECK(sp.target_star == star(env, Point{6, -3}));
  if (sp.outcome.value.is_finite()) {
    const auto& w = *sp.outcome.witness;
    const Point relay = witness_last_relay(env, sp.target_star, 50);
    CHECK(relay == w[w.size() - 2]);
    CHECK(jump_witness_scan(condition_origin(env), sp.target_star, 50, 1) ==
          (passage_time(condition_origin(env), sp.target_star, 50).witness->size() > 1));
  }
  const Environment empty_origin = make_environment(2, 4, ConfigLaw::bernoulli(0.4), {1, "e"}, {{Point{1, 0}, 1}});
  CHECK_FALSE(passage_time_between(empty_origin, Point{0, 0}, Point{1, 0}, 5).value.is_finite());
  CHECK_THROWS_AS(passage_time(empty_origin, Point{1, 0}, 3), Error);
}

TEST_CASE("subadditivity on occupied relays") {
  const Environment env = condition_origin(sample_environment(ConfigLaw::bernoulli(0.5), 2, 120, {31, "sub"}));
  const Point y = star(env, Point{4, 0});
  const Point z{8, 2};
  const auto a = passage_time(env, y, 60);
  const auto b = passage_time_between(env, y, z, 60);
  const auto c = passage_time(env, z, 60);
  if (a.value.is_finite() && b.value.is_finite()) {
    REQUIRE(c.value.is_finite());
    CHECK(c.value.value() <= a.value.value() + b.value.value());
  }
}

TEST_CASE("replica dump") {
  const Environment env = condition_origin(sample_environment(ConfigLaw::bernoulli(0.5), 2, 20, {5, "dump"}));
  const ActivationTable tab = simulate_frogs(env, Point{0, 0}, 8);
  const nlohmann::json j = replica_dump(env, tab);
  CHECK(j.at("visit_times").size() == tab.visited().size());
  CHECK(j.at("genealogy_edges").size() + 1 == tab.visited().size());
  CHECK(j.at("horizon") == 8);
}
