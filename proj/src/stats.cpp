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

#include "frogpass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "frogpass/error.hpp"
#include "frogpass/walks.hpp"

namespace frogpass {

SummaryStats summarize(std::span<const double> values, int64_t censored_count) {
  SummaryStats s;
  s.n = static_cast<int64_t>(values.size());
  s.censored_count = censored_count;
  if (values.empty()) {
    s.mean = s.std = s.ci_lo = s.ci_hi = std::nan("");
    return s;
  }
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  s.std = sample_std(values);
  const double half = s.n > 1 ? kZ95 * s.std / std::sqrt(static_cast<double>(s.n)) : 0.0;
  s.ci_lo = s.mean - half;
  s.ci_hi = s.mean + half;
  return s;
}

double sample_std(std::span<const double> values) {
  const size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

BinomialEstimate wilson_interval(int64_t hits, int64_t trials, double z) {
  require(trials >= 0 && hits >= 0 && hits <= trials, "wilson_interval: need 0 <= hits <= trials");
  BinomialEstimate b;
  b.trials = trials;
  b.hits = hits;
  if (trials == 0) {
    b.phat = std::nan("");
    b.ci_lo = 0;
    b.ci_hi = 1;
    return b;
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  b.phat = p;
  b.ci_lo = std::max(0.0, center - half);
  b.ci_hi = std::min(1.0, center + half);
  if (hits == 0) b.ci_lo = 0;
  if (hits == trials) b.ci_hi = 1;
  return b;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "least_squares: size mismatch");
  LinearFit f;
  f.n = static_cast<int64_t>(x.size());
  if (x.size() < 2) return f;
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.valid = true;
  return f;
}

std::pair<double, double> bootstrap_std_interval(std::span<const double> values, int resamples, simd::PhiloxKey key,
                                                 uint64_t stream_id, double level) {
  require(resamples >= 1, "bootstrap: resamples must be positive");
  require(level > 0 && level < 1, "bootstrap: level must lie in (0,1)");
  const size_t n = values.size();
  if (n < 2) return {0.0, 0.0};
  const size_t blocks = (n + 3) / 4;
  std::vector<uint32_t> words(4 * blocks);
  std::vector<double> sample(n), stds;
  stds.reserve(static_cast<size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    simd::philox_run(key, static_cast<uint32_t>(static_cast<size_t>(b) * blocks), static_cast<uint32_t>(stream_id),
                     static_cast<uint32_t>(stream_id >> 32), static_cast<uint32_t>(StreamDomain::kBootstrap), words);
    for (size_t i = 0; i < n; ++i)
      sample[i] = values[static_cast<size_t>((static_cast<uint64_t>(words[i]) * n) >> 32)];
    stds.push_back(sample_std(sample));
  }
  std::sort(stds.begin(), stds.end());
  const double alpha = (1 - level) / 2;
  auto pick = [&](double q) {
    const auto idx = static_cast<size_t>(std::clamp(std::floor(q * static_cast<double>(stds.size())), 0.0,
                                                    static_cast<double>(stds.size() - 1)));
    return stds[idx];
  };
  return {pick(alpha), pick(1 - alpha)};
}

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return std::stod(fmt12(v));
  return fmt12(v);
}

nlohmann::json to_json(const SummaryStats& s) {
  return {{"n", s.n},         {"mean", json_number(s.mean)},   {"std", json_number(s.std)},
          {"ci_lo", json_number(s.ci_lo)}, {"ci_hi", json_number(s.ci_hi)}, {"censored_count", s.censored_count}};
}

nlohmann::json to_json(const BinomialEstimate& b) {
  return {{"trials", b.trials}, {"hits", b.hits}, {"phat", json_number(b.phat)}, {"ci_lo", json_number(b.ci_lo)}, {"ci_hi", json_number(b.ci_hi)}};
}

nlohmann::json to_json(const LinearFit& f) {
  return {{"slope", json_number(f.slope)}, {"intercept", json_number(f.intercept)}, {"r2", json_number(f.r2)}, {"n", f.n}, {"valid", f.valid}};
}

}  // namespace frogpass
