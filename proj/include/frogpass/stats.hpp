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

// Small statistics toolkit shared by the experiments: summaries with normal
// confidence intervals, Wilson binomial intervals, least squares, a seeded
// bootstrap and the fixed 12-significant-digit number format.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frogpass/simd/philox.hpp"

namespace frogpass {

inline constexpr double kZ95 = 1.959963984540054;

struct SummaryStats {
  int64_t n = 0;
  double mean = 0;
  double std = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  int64_t censored_count = 0;
};

/// Mean, sample standard deviation and the 95% normal interval of the mean,
/// over the uncensored values only.
SummaryStats summarize(std::span<const double> values, int64_t censored_count = 0);

struct BinomialEstimate {
  int64_t trials = 0;
  int64_t hits = 0;
  double phat = 0;
  double ci_lo = 0;
  double ci_hi = 0;
};
BinomialEstimate wilson_interval(int64_t hits, int64_t trials, double z = kZ95);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int64_t n = 0;
  bool valid = false;
};
/// Ordinary least squares y = intercept + slope * x; invalid with < 2 distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Percentile bootstrap interval of the sample standard deviation, resampling
/// with Philox draws from (key, stream_id) in the bootstrap domain.
std::pair<double, double> bootstrap_std_interval(std::span<const double> values, int resamples, simd::PhiloxKey key,
                                                 uint64_t stream_id, double level = 0.95);

double sample_std(std::span<const double> values);

/// "%.12g", with "nan"/"inf" spelled out.
std::string fmt12(double v);

/// Rounds to 12 significant digits; non-finite values become strings.
nlohmann::json json_number(double v);

nlohmann::json to_json(const SummaryStats& s);
nlohmann::json to_json(const BinomialEstimate& b);
nlohmann::json to_json(const LinearFit& f);

}  // namespace frogpass
