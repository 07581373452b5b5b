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

#include <algorithm>
#include <set>

#include "frogpass/error.hpp"
#include "frogpass/lattice.hpp"

using namespace frogpass;

TEST_CASE("norms and neighbors") {
  const Point x{3, -4, 1};
  CHECK(l1_norm(x) == 8);
  CHECK(linf_norm(x) == 4);
  CHECK(l1_dist(x, Point{0, 0, 0}) == 8);
  const auto nb = neighbors(Point{0, 0});
  REQUIRE(nb.size() == 4);
  CHECK(nb[0] == Point{1, 0});
  CHECK(nb[1] == Point{-1, 0});
  CHECK(nb[2] == Point{0, 1});
  CHECK(nb[3] == Point{0, -1});
  for (int c = 0; c < 4; ++c) CHECK(step(Point{0, 0}, c) == nb[static_cast<size_t>(c)]);
}

TEST_CASE("closest_in_set breaks ties lexicographically") {
  const std::vector<Point> s{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {3, 3}};
  CHECK(closest_in_set(Point{0, 0}, s) == Point{-1, 0});
  CHECK(closest_in_set(Point{3, 2}, s) == Point{3, 3});
  CHECK_THROWS_AS(closest_in_set(Point{0, 0}, std::span<const Point>{}), Error);
}

TEST_CASE("l1 sphere sizes") {
  CHECK(l1_sphere(2, 0).size() == 1);
  CHECK(l1_sphere(2, 3).size() == 12);
  CHECK(l1_sphere(3, 2).size() == 18);
  const auto s = l1_sphere(2, 4);
  CHECK(std::is_sorted(s.begin(), s.end()));
  for (const auto& p : s) CHECK(l1_norm(p) == 4);
}

TEST_CASE("cube grid round trip and strides") {
  const CubeGrid g(3, 2, Point{1, -1, 5});
  CHECK(g.size() == 125);
  for (size_t i = 0; i < g.size(); ++i) CHECK(g.index(g.point(i)) == i);
  const Point p{1, -1, 5};
  for (int c = 0; c < 6; ++c) {
    const Point q = step(p, c);
    CHECK(static_cast<std::ptrdiff_t>(g.index(q)) - static_cast<std::ptrdiff_t>(g.index(p)) == g.stride(c));
  }
  CHECK(g.contains(Point{3, 1, 7}));
  CHECK_FALSE(g.contains(Point{4, 1, 7}));
}

TEST_CASE("signed permutations form a group") {
  const auto all = SignedPermutation::all(3);
  CHECK(all.size() == 48);
  CHECK(all.front() == SignedPermutation::identity(3));
  std::set<std::string> seen;
  for (const auto& g : all) seen.insert(g.str());
  CHECK(seen.size() == 48);
  const Point x{2, -5, 7};
  for (const auto& a : all) {
    CHECK(l1_norm(a.apply(x)) == l1_norm(x));
    CHECK(a.inverse().apply(a.apply(x)) == x);
    for (size_t j = 0; j < all.size(); j += 7) {
      const auto& b = all[j];
      CHECK((a * b).apply(x) == a.apply(b.apply(x)));
    }
  }
  CHECK_THROWS_AS(SignedPermutation({0, 0}, {1, 1}), Error);
  CHECK_THROWS_AS(SignedPermutation({0, 1}, {1, 2}), Error);
}

TEST_CASE("adapted basis: axis direction is perfect") {
  const auto probes = default_probe_directions(2);
  const auto b = find_adapted_basis(Point{1, 0}, probes);
  CHECK(b.quality_num == b.quality_den);
  CHECK(b.g.front() == SignedPermutation::identity(2));
}

TEST_CASE("adapted basis: diagonal in d=2 has quality 1/2") {
  const auto probes = default_probe_directions(2);
  const auto b = find_adapted_basis(Point{1, 1}, probes);
  CHECK(b.quality_num == 1);
  CHECK(b.quality_den == 2);
  for (const auto& y : probes) {
    const Point l = apply_adapted_map(b, y);
    CHECK(2 * l1_norm(l) >= l1_norm(Point{1, 1}) * l1_norm(y));
  }
}

TEST_CASE("adapted basis quality is attained and bounded") {
  const auto probes = default_probe_directions(3, 2);
  const Point x{2, 1, 0};
  const auto b = find_adapted_basis(x, probes);
  CHECK(b.quality() > 0.0);
  CHECK(b.quality() <= 1.0);
  int64_t worst_num = 1, worst_den = 0;
  for (const auto& y : probes) {
    const int64_t num = l1_norm(apply_adapted_map(b, y));
    const int64_t den = l1_norm(x) * l1_norm(y);
    if (worst_den == 0 || num * worst_den < worst_num * den) {
      worst_num = num;
      worst_den = den;
    }
  }
  CHECK(worst_num * b.quality_den == b.quality_num * worst_den);
  CHECK_THROWS_AS(find_adapted_basis(Point{0, 0}, probes), Error);
}

TEST_CASE("worked examples") {
  CHECK(closest_in_set(Point{0, 0}, std::vector<Point>{{1, 0}, {0, -1}}) == Point{0, -1});
  CHECK(closest_in_set(Point{2, 0}, std::vector<Point>{{0, 0}, {3, 1}}) == Point{0, 0});
  CHECK(closest_in_set(Point{2, 0}, std::vector<Point>{{3, 1}, {0, 0}}) == Point{0, 0});
  CHECK(SignedPermutation({1, 0}, {1, -1}).apply(Point{3, 5}) == Point{5, -3});
  CHECK(neighbors(Point{5}) == std::vector<Point>{Point{6}, Point{4}});
  AdaptedBasis b;
  b.base_point = Point{2, 1};
  b.g = {SignedPermutation::identity(2), SignedPermutation({1, 0}, {1, 1})};
  CHECK(apply_adapted_map(b, Point{1, 1}) == Point{3, 3});
  CHECK(apply_adapted_map(b, Point{1, 0}) == Point{2, 1});
  CHECK(apply_adapted_map(b, Point{0, 0}) == Point{0, 0});
}
