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

// Monte Carlo experiments on passage times: time constant estimates,
// deviation tails on both sides, fluctuations of T*, the closed-form lower
// bounds on tail rates, the direct-path event and triangle-inequality audits.
// Every experiment is a pure function of its configuration.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/lattice.hpp"
#include "frogpass/stats.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

/// Counts of the path-wise check T(a, b) >= ||a - b||_1 on finite values.
struct BoundAudit {
  int64_t checks = 0;
  int64_t violations = 0;
  void record(int64_t value, int64_t l1) {
    ++checks;
    violations += value < l1;
  }
  BoundAudit& operator+=(const BoundAudit& o) {
    checks += o.checks;
    violations += o.violations;
    return *this;
  }
};

/// ceil(factor * mu_ref * l1).
int64_t auto_horizon(double factor, double mu_ref, int64_t l1);

// ---------------------------------------------------------------------------

struct TimeConstantConfig {
  ConfigLaw law = ConfigLaw::poisson(1.0);
  int dim = 2;
  Point direction;
  std::vector<int64_t> k_ladder;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  double horizon_factor = 3.0;
  double mu_ref = 2.0;
  double max_censored_fraction = 0.05;
  unsigned threads = 1;
};

struct PerK {
  int64_t k = 0;
  int64_t horizon = 0;
  SummaryStats ratio;  // T*(0, k x) / k
};

struct TimeConstantEstimate {
  Point direction;
  std::vector<PerK> per_k;
  double mu_hat = 0;
  double mu_lower = 1.0;
  /// Consecutive means either decrease or have overlapping intervals.
  bool non_increasing_within_ci = true;
  int64_t box_radius = 0;
  BoundAudit bounds;
};

TimeConstantEstimate estimate_time_constant(const TimeConstantConfig& cfg);

// ---------------------------------------------------------------------------

enum class TailSide { kUpper, kLower };

struct TailConfig {
  ConfigLaw law = ConfigLaw::poisson(1.0);
  int dim = 2;
  double epsilon = 0.5;
  std::vector<Point> x_ladder;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  double mu_hat = 0;
  unsigned threads = 1;
};

struct TailPoint {
  Point x;
  int64_t norm = 0;
  double threshold = 0;
  BinomialEstimate estimate;
  /// No hits: excluded from the fits.
  bool censored = false;
};

struct TailCurve {
  TailSide side = TailSide::kUpper;
  double epsilon = 0;
  std::vector<TailPoint> points;
  /// log phat against ||x||_1.
  LinearFit log_fit;
  /// log phat against ||x||_1^alpha for the best alpha in {0.1, ..., 1.0}.
  double best_alpha = 0;
  LinearFit alpha_fit;
};

struct TailResult {
  TailCurve upper;
  TailCurve lower;
  int64_t horizon = 0;
  int64_t box_radius = 0;
  int64_t censored_runs = 0;
  BoundAudit bounds;
};

/// Upper hits T(0,x) >= (1+eps) mu_hat ||x||_1 (censored runs count as hits),
/// lower hits T(0,x) <= (1-eps) mu_hat ||x||_1, both from one ensemble of
/// origin-conditioned environments.
TailResult deviation_tail_experiment(const TailConfig& cfg);

/// Fits for one curve's non-censored points.
void fit_tail(TailCurve& curve);

// ---------------------------------------------------------------------------

struct ConcentrationConfig {
  ConfigLaw law = ConfigLaw::constant(1);
  int dim = 2;
  std::vector<Point> x_ladder;
  int64_t replicas = 0;
  uint64_t first_replica = 0;
  SeedSpec seed;
  double horizon_factor = 3.0;
  double mu_ref = 2.0;
  int bootstrap_resamples = 200;
  double max_censored_fraction = 0.05;
  unsigned threads = 1;
};

struct ConcentrationRow {
  Point x;
  int64_t norm = 0;
  SummaryStats stats;
  double std_lo = 0;
  double std_hi = 0;
  double ratio = 0;  // std / sqrt(||x||_1)
};

struct ConcentrationResult {
  std::vector<ConcentrationRow> rows;
  LinearFit log_fit;  // log std against log ||x||_1
  int64_t horizon = 0;
  int64_t box_radius = 0;
  BoundAudit bounds;
};

ConcentrationResult concentration_experiment(const ConcentrationConfig& cfg);

// ---------------------------------------------------------------------------

struct AnalyticBounds {
  double mean = 0;
  int64_t ceil_term = 0;  // ceil((1 + eps) mu_hat)
  double upper_tail_rate_lb = 0;
  double lower_tail_rate_lb = 0;
};

/// -E[omega(0)] ceil((1+eps) mu_hat) log(2d) and -log(2d), per unit ||x||_1.
AnalyticBounds analytic_lower_bounds(const ConfigLaw& law, double epsilon, double mu_hat_xi1, int dim);

struct DirectPathResult {
  int dim = 0;
  int64_t n = 0;
  double target = 0;
  BinomialEstimate estimate;
  double sigma = 0;  // binomial standard deviation of phat at the target
  bool within_3_sigma = false;
};

/// Frequency with which frog 1 at the origin takes the path of n steps
/// along +e_1 first; target (2d)^{-n}.
DirectPathResult direct_path_event_check(int dim, int64_t n, int64_t trials, const SeedSpec& seed,
                                         unsigned threads = 1);

// ---------------------------------------------------------------------------

struct SubadditivityConfig {
  ConfigLaw law = ConfigLaw::bernoulli(0.8);
  int dim = 2;
  int64_t triples = 0;
  int64_t spread = 8;  // points drawn from [-spread, spread]^d
  uint64_t first_replica = 0;
  SeedSpec seed;
  unsigned threads = 1;
};

struct SubadditivityResult {
  int64_t triples = 0;
  int64_t counted = 0;
  int64_t violations = 0;
  int64_t counted_star = 0;
  int64_t violations_star = 0;
  BoundAudit bounds;
};

SubadditivityResult subadditivity_audit(const SubadditivityConfig& cfg);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const BoundAudit& a);
nlohmann::json to_json(const TimeConstantEstimate& e);
nlohmann::json to_json(const TailCurve& c);
nlohmann::json to_json(const TailResult& r);
nlohmann::json to_json(const ConcentrationResult& r);
nlohmann::json to_json(const AnalyticBounds& b);
nlohmann::json to_json(const DirectPathResult& r);
nlohmann::json to_json(const SubadditivityResult& r);
nlohmann::json point_json(const Point& p);

std::string time_constant_csv(const TimeConstantEstimate& e);
std::string tail_csv(const TailResult& r);
std::string concentration_csv(const ConcentrationResult& r);

}  // namespace frogpass
