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

// Initial frog configurations: the per-site law, sampling on a finite
// l1 box, conditioning on an occupied origin, and nearest occupied sites.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/lattice.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

/// A law on {0, 1, 2, ...} with P(0) < 1.
class ConfigLaw {
 public:
  enum class Kind { kBernoulli, kPoisson, kGeometric, kConstant, kExplicitPmf };

  static ConfigLaw bernoulli(double p);
  static ConfigLaw poisson(double lambda);
  /// P(k) = q (1 - q)^k, mean (1 - q) / q.
  static ConfigLaw geometric(double q);
  static ConfigLaw constant(uint32_t k);
  /// Entries must sum to 1 within 1e-12; the last entry absorbs the rounding.
  static ConfigLaw explicit_pmf(std::vector<double> table);
  /// "bernoulli:0.7", "poisson:1", "geometric:0.5", "constant:1", "pmf:0.2,0.5,0.3".
  static ConfigLaw parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  const std::vector<double>& table() const noexcept { return table_; }
  std::string str() const;

  double pmf(uint64_t k) const;
  double p_zero() const { return pmf(0); }
  double mean() const;
  /// Inverse CDF at u in [0, 1).
  uint32_t sample(double u) const;
  /// Inverse CDF of the law conditioned on {>= 1}.
  uint32_t sample_positive(double u) const;

  friend bool operator==(const ConfigLaw&, const ConfigLaw&) = default;

 private:
  ConfigLaw(Kind kind, double param, std::vector<double> table = {})
      : kind_(kind), param_(param), table_(std::move(table)) {}
  uint32_t inverse_cdf(double u) const;

  Kind kind_;
  double param_;
  std::vector<double> table_;
};

/// omega on the l1 ball B_1(0, R). Immutable once built.
class Environment {
 public:
  Environment(int dim, int64_t box_radius, ConfigLaw law, SeedSpec seed, bool conditioned_origin,
              std::vector<uint32_t> cube_counts);

  int dim() const noexcept { return grid_.dim(); }
  int64_t box_radius() const noexcept { return grid_.radius(); }
  const ConfigLaw& law() const noexcept { return law_; }
  const SeedSpec& seed() const noexcept { return seed_; }
  bool conditioned_origin() const noexcept { return conditioned_; }
  const CubeGrid& grid() const noexcept { return grid_; }

  bool in_box(const Point& p) const { return p.dim() == dim() && l1_norm(p) <= box_radius(); }
  /// Throws kGeometry outside the box.
  uint32_t omega(const Point& p) const;
  /// 0 outside the box.
  uint32_t omega_or_zero(const Point& p) const { return in_box(p) ? counts_[grid_.index(p)] : 0; }
  bool occupied(const Point& p) const { return omega_or_zero(p) > 0; }

  /// Copy with one site's count replaced.
  Environment with_site(const Point& p, uint32_t count) const;
  Environment with_conditioned_flag(bool flag) const;

  /// Sites of the box in canonical (lexicographic) order.
  std::vector<Point> sites() const;
  /// Counts in canonical site order.
  std::vector<uint32_t> counts_in_order() const;
  size_t occupied_count() const;

 private:
  CubeGrid grid_;
  ConfigLaw law_;
  SeedSpec seed_;
  bool conditioned_;
  std::vector<uint32_t> counts_;  // over the cube; zero outside the ball
};

/// Builds an environment from an explicit map; unlisted sites get `fill`.
Environment make_environment(int dim, int64_t box_radius, const ConfigLaw& law, const SeedSpec& seed,
                             const std::vector<std::pair<Point, uint32_t>>& counts, uint32_t fill = 0);

Environment sample_environment(const ConfigLaw& law, int dim, int64_t box_radius, const SeedSpec& seed);
Environment condition_origin(const Environment& env);

/// Closest occupied site to x in l1 (lexicographic tie-break). search_cap < 0
/// means the box radius.
Point star(const Environment& env, const Point& x, int64_t search_cap = -1);

nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

}  // namespace frogpass
