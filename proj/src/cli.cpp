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

#include "frogpass/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "frogpass/environment.hpp"
#include "frogpass/error.hpp"
#include "frogpass/estimation.hpp"
#include "frogpass/parallel.hpp"
#include "frogpass/passage.hpp"
#include "frogpass/percolation.hpp"
#include "frogpass/stats.hpp"
#include "frogpass/truncated.hpp"

namespace frogpass::cli {

using nlohmann::json;

namespace {

constexpr int64_t kStarMargin = 16;

// ---------------------------------------------------------------------------
// Plan helpers

json seeds_block(bool calibration) {
  json s = {{"master", nullptr}, {"tag", ""}, {"first_replica", 0}};
  if (calibration) s["calibration"] = {{"first_replica", 1000000}, {"replicas", 200}};
  return s;
}

json auto_horizon_block() { return {{"factor", 3.0}, {"mu_ref", 2.0}, {"max_censored_fraction", 0.05}}; }

Point point_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<size_t>(kMaxDim))
    fail(ErrorKind::kInvalidArgument, what + ": expected a point with 1.." + std::to_string(kMaxDim) + " coordinates");
  Point p(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) fail(ErrorKind::kInvalidArgument, what + ": coordinates must be integers");
    p.set(static_cast<int>(i), j[i].get<int64_t>());
  }
  return p;
}

std::vector<int64_t> ints_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kInvalidArgument, what + ": expected a nonempty integer list");
  std::vector<int64_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(ErrorKind::kInvalidArgument, what + ": entries must be integers");
    out.push_back(v.get<int64_t>());
  }
  return out;
}

template <class T>
T get(const json& plan, const std::string& pointer) {
  const json::json_pointer ptr(pointer);
  const std::string name = pointer.substr(1);
  if (!plan.contains(ptr) || plan.at(ptr).is_null()) fail(ErrorKind::kInvalidArgument, name + ": missing value");
  try {
    return plan.at(ptr).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::kInvalidArgument, name + ": wrong type");
  }
}

bool is_set(const json& plan, const std::string& pointer) {
  const json::json_pointer ptr(pointer);
  return plan.contains(ptr) && !plan.at(ptr).is_null();
}

SeedSpec seed_of(const json& plan) {
  return {get<uint64_t>(plan, "/seeds/master"), get<std::string>(plan, "/seeds/tag")};
}

void merge_into(json& base, const json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

void check_keys(const json& have, const json& allowed, const std::string& prefix) {
  for (auto it = have.begin(); it != have.end(); ++it) {
    const std::string name = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!allowed.contains(it.key())) fail(ErrorKind::kInvalidArgument, name + ": unknown plan key");
    const json& a = allowed[it.key()];
    if (a.is_object() && !a.empty() && it.value().is_object()) check_keys(it.value(), a, name);
  }
}

std::vector<std::string> csv_tables(const json& plan) {
  const std::string cmd = plan.at("command").get<std::string>();
  if (cmd == "sample-env") return {"sites"};
  if (cmd == "passage") return {"passage"};
  if (cmd == "mu") return {"mu"};
  if (cmd == "tails") return {"tails"};
  if (cmd == "concentration") return {"concentration"};
  if (cmd == "truncation") return {"agreement"};
  if (cmd == "percolation") {
    if (plan.at("params").at("field").get<std::string>() == "bernoulli") return {"hole_tail", "ratio"};
    return {"marginal"};
  }
  return {"audit", "direct_path"};
}

json outputs_for(const json& plan, const std::string& prefix) {
  json out = {{"json", prefix + ".json"}, {"csv", json::object()}};
  for (const auto& t : csv_tables(plan)) out["csv"][t] = prefix + "." + t + ".csv";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed: " + path);
}

json load_json_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::kInvalidArgument, std::string("plan: ") + e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, path + ": not valid JSON (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Execution

struct Calibration {
  double mu_hat = 0;
  json report;
};

Calibration calibrate(const json& plan, const Point& direction, unsigned threads) {
  Calibration cal;
  if (is_set(plan, "/params/mu_hat")) {
    cal.mu_hat = get<double>(plan, "/params/mu_hat");
    return cal;
  }
  TimeConstantConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.direction = direction;
  c.k_ladder = ints_from(plan.at("ladders").at("calibration_k"), "ladders.calibration_k");
  c.replicas = get<int64_t>(plan, "/seeds/calibration/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/calibration/first_replica");
  c.seed = seed_of(plan);
  c.horizon_factor = get<double>(plan, "/horizon/factor");
  c.mu_ref = get<double>(plan, "/horizon/mu_ref");
  c.max_censored_fraction = get<double>(plan, "/horizon/max_censored_fraction");
  c.threads = threads;
  const TimeConstantEstimate e = estimate_time_constant(c);
  cal.mu_hat = e.mu_hat;
  cal.report = to_json(e);
  return cal;
}

std::string point_csv(const Point& p) {
  std::string s;
  for (int i = 0; i < p.dim(); ++i) s += (i ? ";" : "") + std::to_string(p[i]);
  return s;
}

Reports run_sample_env(const json& plan) {
  const int dim = get<int>(plan, "/dim");
  const ConfigLaw law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  const int64_t radius = get<int64_t>(plan, "/params/radius");
  require(radius >= 0, "params.radius: must be nonnegative");
  Environment env = sample_environment(law, dim, radius, replica_seed(seed_of(plan), get<uint64_t>(plan, "/seeds/first_replica")));
  if (get<bool>(plan, "/params/condition_origin")) env = condition_origin(env);
  Reports r;
  std::ostringstream csv;
  for (int i = 0; i < dim; ++i) csv << 'x' << i + 1 << ',';
  csv << "omega\n";
  int64_t total = 0;
  for (const Point& p : env.sites()) {
    const uint32_t w = env.omega(p);
    total += w;
    if (w == 0) continue;
    for (int i = 0; i < dim; ++i) csv << p[i] << ',';
    csv << w << '\n';
  }
  const double sites = static_cast<double>(env.sites().size());
  r.json["result"] = {{"environment", environment_to_json(env)},
                      {"sites", env.sites().size()},
                      {"occupied", env.occupied_count()},
                      {"frogs", total},
                      {"mean_omega", json_number(static_cast<double>(total) / sites)},
                      {"law_mean", json_number(law.mean())}};
  r.csv = {{"sites", csv.str()}};
  r.summary = "sample-env: " + std::to_string(env.occupied_count()) + " occupied of " +
              std::to_string(env.sites().size()) + " sites, " + std::to_string(total) + " frogs";
  return r;
}

BoxPolicy policy_from(const std::string& s) {
  if (s == "exact") return BoxPolicy::kExact;
  if (s == "on-demand") return BoxPolicy::kOnDemand;
  if (s == "truncated-world") return BoxPolicy::kTruncatedWorld;
  fail(ErrorKind::kInvalidArgument, "params.policy: expected exact, on-demand or truncated-world");
}

Reports run_passage(const json& plan, unsigned threads) {
  const int dim = get<int>(plan, "/dim");
  const ConfigLaw law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  const Point source = point_from(plan.at("params").at("source"), "params.source");
  std::vector<Point> targets;
  for (const auto& t : plan.at("ladders").at("targets")) targets.push_back(point_from(t, "ladders.targets"));
  require(!targets.empty(), "ladders.targets: at least one target required");
  int64_t reach = 0, far = l1_norm(source);
  for (const Point& x : targets) {
    reach = std::max(reach, l1_dist(source, x));
    far = std::max(far, l1_norm(x));
  }
  const int64_t horizon = is_set(plan, "/horizon/value")
                              ? get<int64_t>(plan, "/horizon/value")
                              : auto_horizon(get<double>(plan, "/horizon/factor"), get<double>(plan, "/horizon/mu_ref"),
                                             std::max<int64_t>(reach, 1));
  require(horizon >= 0, "horizon.value: must be nonnegative");
  const int64_t box = is_set(plan, "/params/box_radius") ? get<int64_t>(plan, "/params/box_radius")
                                                          : horizon + far + kStarMargin;
  const BoxPolicy policy = policy_from(get<std::string>(plan, "/params/policy"));
  const bool use_star = get<bool>(plan, "/params/star");
  const bool cond = get<bool>(plan, "/params/condition_origin");
  const int64_t replicas = get<int64_t>(plan, "/replicas");
  require(replicas >= 1, "replicas: must be positive");
  const uint64_t first = get<uint64_t>(plan, "/seeds/first_replica");
  const SeedSpec seed = seed_of(plan);

  struct Row {
    Point from, to;
    HittingTime value = HittingTime::censored(0);
  };
  std::vector<std::vector<Row>> rows(static_cast<size_t>(replicas));
  BoundAudit audit;
  std::vector<BoundAudit> audits(rows.size());
  json dump;
  parallel_for(rows.size(), threads, [&](size_t r) {
    Environment env = sample_environment(law, dim, box, replica_seed(seed, first + r));
    if (cond) env = condition_origin(env);
    for (const Point& x : targets) {
      Row row;
      if (use_star) {
        const StarPassage sp = passage_time_star_between(env, source, x, horizon, policy);
        row = {sp.source_star, sp.target_star, sp.outcome.value};
      } else {
        row = {source, x, passage_time_between(env, source, x, horizon, policy).value};
      }
      if (row.value.is_finite()) audits[r].record(row.value.value(), l1_dist(row.from, row.to));
      rows[r].push_back(row);
    }
  });
  for (const auto& a : audits) audit += a;
  if (get<bool>(plan, "/params/dump")) {
    Environment env = sample_environment(law, dim, box, replica_seed(seed, first));
    if (cond) env = condition_origin(env);
    const Point s = use_star ? star(env, source) : source;
    if (env.omega(s) > 0) {
      SimulationOptions opt;
      opt.policy = policy;
      dump = replica_dump(env, simulate_frogs(env, s, horizon, opt));
    }
  }

  Reports rep;
  std::ostringstream csv;
  csv << "replica,target,from,to,value,censored\n";
  json per_target = json::array();
  int64_t censored_total = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    std::vector<double> vals;
    int64_t censored = 0;
    for (size_t r = 0; r < rows.size(); ++r) {
      const Row& row = rows[r][i];
      csv << first + r << ',' << point_csv(targets[i]) << ',' << point_csv(row.from) << ',' << point_csv(row.to) << ',';
      if (row.value.is_finite()) {
        vals.push_back(static_cast<double>(row.value.value()));
        csv << row.value.value() << ",0\n";
      } else {
        ++censored;
        csv << ",1\n";
      }
    }
    censored_total += censored;
    per_target.push_back({{"target", point_json(targets[i])}, {"stats", to_json(summarize(vals, censored))}});
  }
  rep.json["result"] = {{"horizon", horizon},
                        {"box_radius", box},
                        {"targets", per_target},
                        {"pathwise_bounds", to_json(audit)}};
  if (!dump.is_null()) rep.json["result"]["replica_dump"] = dump;
  rep.json["censoring"] = {{"horizon", horizon},
                           {"censored", censored_total},
                           {"runs", replicas * static_cast<int64_t>(targets.size())}};
  rep.csv = {{"passage", csv.str()}};
  rep.summary = "passage: " + std::to_string(replicas) + " replicas x " + std::to_string(targets.size()) +
                " targets, " + std::to_string(censored_total) + " censored at horizon " + std::to_string(horizon);
  return rep;
}

Point direction_of(const json& plan) {
  const int dim = get<int>(plan, "/dim");
  const Point d = point_from(plan.at("params").at("direction"), "params.direction");
  require(d.dim() == dim, "params.direction: dimension differs from dim");
  return d;
}

Reports run_mu(const json& plan, unsigned threads) {
  TimeConstantConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.direction = direction_of(plan);
  c.k_ladder = ints_from(plan.at("ladders").at("k"), "ladders.k");
  c.replicas = get<int64_t>(plan, "/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.horizon_factor = get<double>(plan, "/horizon/factor");
  c.mu_ref = get<double>(plan, "/horizon/mu_ref");
  c.max_censored_fraction = get<double>(plan, "/horizon/max_censored_fraction");
  c.threads = threads;
  const TimeConstantEstimate e = estimate_time_constant(c);
  Reports r;
  r.json["result"] = to_json(e);
  json cens = json::array();
  for (const auto& row : e.per_k)
    cens.push_back({{"k", row.k},
                    {"censored", row.ratio.censored_count},
                    {"rate", json_number(static_cast<double>(row.ratio.censored_count) / static_cast<double>(c.replicas))}});
  r.json["censoring"] = {{"horizon", e.per_k.empty() ? 0 : e.per_k.back().horizon}, {"per_k", cens}};
  r.csv = {{"mu", time_constant_csv(e)}};
  r.summary = "mu: mu_hat=" + fmt12(e.mu_hat) + " over " + std::to_string(e.per_k.size()) + " k values, " +
              std::to_string(c.replicas) + " replicas, non_increasing_within_ci=" +
              (e.non_increasing_within_ci ? "true" : "false");
  return r;
}

Reports run_tails(const json& plan, unsigned threads) {
  const Point dir = direction_of(plan);
  const Calibration cal = calibrate(plan, dir, threads);
  TailConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.epsilon = get<double>(plan, "/params/epsilon");
  for (int64_t k : ints_from(plan.at("ladders").at("k"), "ladders.k")) c.x_ladder.push_back(k * dir);
  c.replicas = get<int64_t>(plan, "/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.mu_hat = cal.mu_hat;
  c.threads = threads;
  TailResult t = deviation_tail_experiment(c);
  const std::string side = get<std::string>(plan, "/params/side");
  json tails = to_json(t);
  if (side == "upper") {
    tails.erase("lower");
    t.lower.points.clear();
  } else if (side == "lower") {
    tails.erase("upper");
    t.upper.points.clear();
  }
  Reports r;
  r.json["result"] = {{"mu_hat", json_number(cal.mu_hat)},
                      {"calibration", cal.report},
                      {"tails", tails},
                      {"analytic", to_json(analytic_lower_bounds(c.law, c.epsilon, cal.mu_hat, c.dim))}};
  r.json["censoring"] = {{"horizon", t.horizon},
                         {"censored", t.censored_runs},
                         {"runs", c.replicas * static_cast<int64_t>(c.x_ladder.size())}};
  r.csv = {{"tails", tail_csv(t)}};
  std::string s = "tails: eps=" + fmt12(c.epsilon) + " mu_hat=" + fmt12(cal.mu_hat);
  if (side != "lower") s += " upper_slope=" + fmt12(t.upper.log_fit.slope);
  if (side != "upper") s += " lower_slope=" + fmt12(t.lower.log_fit.slope);
  r.summary = s;
  return r;
}

Reports run_concentration(const json& plan, unsigned threads) {
  const Point dir = direction_of(plan);
  ConcentrationConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  for (int64_t k : ints_from(plan.at("ladders").at("k"), "ladders.k")) c.x_ladder.push_back(k * dir);
  c.replicas = get<int64_t>(plan, "/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.horizon_factor = get<double>(plan, "/horizon/factor");
  c.mu_ref = get<double>(plan, "/horizon/mu_ref");
  c.max_censored_fraction = get<double>(plan, "/horizon/max_censored_fraction");
  c.bootstrap_resamples = get<int>(plan, "/params/bootstrap_resamples");
  c.threads = threads;
  const ConcentrationResult res = concentration_experiment(c);
  Reports r;
  r.json["result"] = to_json(res);
  int64_t censored = 0;
  for (const auto& row : res.rows) censored += row.stats.censored_count;
  r.json["censoring"] = {{"horizon", res.horizon},
                         {"censored", censored},
                         {"runs", c.replicas * static_cast<int64_t>(c.x_ladder.size())}};
  r.csv = {{"concentration", concentration_csv(res)}};
  r.summary = "concentration: log std vs log |x|_1 slope=" + fmt12(res.log_fit.slope) + " over " +
              std::to_string(res.rows.size()) + " points";
  return r;
}

Reports run_truncation(const json& plan, unsigned threads) {
  AgreementConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.x = point_from(plan.at("params").at("x"), "params.x");
  require(c.x.dim() == c.dim, "params.x: dimension differs from dim");
  c.t_ladder = ints_from(plan.at("ladders").at("t"), "ladders.t");
  c.replicas = get<int64_t>(plan, "/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.gamma = get<double>(plan, "/params/gamma");
  c.sigma_probes = get<int64_t>(plan, "/params/sigma_probes");
  c.threads = threads;
  Calibration cal;
  if (is_set(plan, "/params/c4_hat")) {
    c.c4_hat = get<double>(plan, "/params/c4_hat");
  } else {
    cal = calibrate(plan, Point::unit(c.dim, 0), threads);
    c.c4_hat = 5.0 * cal.mu_hat;
  }
  c.horizon = is_set(plan, "/horizon/value")
                  ? get<int64_t>(plan, "/horizon/value")
                  : auto_horizon(get<double>(plan, "/horizon/factor"), get<double>(plan, "/horizon/mu_ref"),
                                 std::max<int64_t>(l1_norm(c.x), 1));
  const AgreementResult res = agreement_experiment(c);
  Reports r;
  json result = {{"c4_hat", json_number(c.c4_hat)},
                 {"gamma", json_number(c.gamma)},
                 {"horizon", c.horizon},
                 {"agreement", to_json(res)}};
  if (cal.mu_hat > 0) result["mu_hat"] = json_number(cal.mu_hat);
  if (!cal.report.is_null()) result["calibration"] = cal.report;
  r.json["result"] = result;
  int64_t undecided = 0;
  for (const auto& row : res.rows) undecided += row.undecided;
  r.json["censoring"] = {{"horizon", c.horizon}, {"censored_star", res.censored_star}, {"undecided", undecided}};
  r.csv = {{"agreement", agreement_csv(res)}};
  std::string fr;
  for (const auto& row : res.rows) fr += (fr.empty() ? "" : ",") + fmt12(row.fraction.phat);
  r.summary = "truncation: K=" + std::to_string(res.rows.empty() ? 0 : res.rows.front().K) +
              " disagreement fractions [" + fr + "]";
  return r;
}

Reports run_percolation(const json& plan, unsigned threads) {
  const std::string field = get<std::string>(plan, "/params/field");
  Reports r;
  if (field == "bernoulli") {
    PercolationConfig c;
    c.p = get<double>(plan, "/params/p");
    c.dim = get<int>(plan, "/dim");
    c.radius = get<int64_t>(plan, "/params/radius");
    c.replicas = get<int64_t>(plan, "/replicas");
    c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
    c.seed = seed_of(plan);
    c.ratio_min_norm = get<int64_t>(plan, "/params/ratio_min");
    c.ratio_max_norm = get<int64_t>(plan, "/params/ratio_max");
    c.threads = threads;
    const PercolationResult res = percolation_experiment(c);
    r.json["result"] = to_json(res);
    r.csv = {{"hole_tail", hole_tail_csv(res)}, {"ratio", ratio_csv(res)}};
    r.summary = "percolation: hole tail slope=" + fmt12(res.hole_fit.slope) + " max chemical ratio=" +
                fmt12(res.max_ratio) + " over " + std::to_string(res.connected_pairs) + " pairs";
    return r;
  }
  MarginalConfig c;
  if (field == "white") c.kind = MarginalKind::kWhite;
  else if (field == "good") c.kind = MarginalKind::kGood;
  else fail(ErrorKind::kInvalidArgument, "params.field: expected bernoulli, white or good");
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.n_ladder = ints_from(plan.at("ladders").at("N"), "ladders.N");
  c.replicas = get<int64_t>(plan, "/replicas");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.M = get<int64_t>(plan, "/params/M");
  c.delta = get<double>(plan, "/params/delta");
  c.mu_hat = is_set(plan, "/params/mu_hat") ? get<double>(plan, "/params/mu_hat") : 1.5;
  c.threads = threads;
  const auto rows = marginal_curve(c);
  json arr = json::array();
  std::string s;
  for (const auto& row : rows) {
    arr.push_back(to_json(row));
    s += (s.empty() ? "" : ",") + fmt12(row.marginal.phat);
  }
  r.json["result"] = {{"field", field}, {"rows", arr}};
  r.csv = {{"marginal", marginal_csv(rows)}};
  r.summary = "percolation: " + field + " marginals [" + s + "]";
  return r;
}

Reports run_audit(const json& plan, unsigned threads) {
  SubadditivityConfig c;
  c.law = ConfigLaw::parse(get<std::string>(plan, "/law"));
  c.dim = get<int>(plan, "/dim");
  c.triples = get<int64_t>(plan, "/params/triples");
  c.spread = get<int64_t>(plan, "/params/spread");
  c.first_replica = get<uint64_t>(plan, "/seeds/first_replica");
  c.seed = seed_of(plan);
  c.threads = threads;
  const SubadditivityResult sub = subadditivity_audit(c);
  const DirectPathResult dp = direct_path_event_check(c.dim, get<int64_t>(plan, "/params/direct_n"),
                                                      get<int64_t>(plan, "/params/direct_trials"), c.seed, threads);
  const AnalyticBounds ab =
      analytic_lower_bounds(c.law, get<double>(plan, "/params/epsilon"), get<double>(plan, "/params/mu_hat"), c.dim);
  Reports r;
  r.json["result"] = {{"subadditivity", to_json(sub)}, {"direct_path", to_json(dp)}, {"analytic", to_json(ab)}};
  std::ostringstream a;
  a << "check,counted,violations\n"
    << "subadditivity," << sub.counted << ',' << sub.violations << '\n'
    << "subadditivity_star," << sub.counted_star << ',' << sub.violations_star << '\n'
    << "pathwise_bound," << sub.bounds.checks << ',' << sub.bounds.violations << '\n';
  std::ostringstream d;
  d << "dim,n,trials,hits,phat,target,sigma,within_3_sigma\n"
    << dp.dim << ',' << dp.n << ',' << dp.estimate.trials << ',' << dp.estimate.hits << ',' << fmt12(dp.estimate.phat)
    << ',' << fmt12(dp.target) << ',' << fmt12(dp.sigma) << ',' << (dp.within_3_sigma ? 1 : 0) << '\n';
  r.csv = {{"audit", a.str()}, {"direct_path", d.str()}};
  r.summary = "audit: subadditivity violations " + std::to_string(sub.violations) + "/" +
              std::to_string(sub.counted) + ", star " + std::to_string(sub.violations_star) + "/" +
              std::to_string(sub.counted_star) + "; direct path phat=" + fmt12(dp.estimate.phat) +
              " target=" + fmt12(dp.target);
  return r;
}

// ---------------------------------------------------------------------------
// Flags

enum class FlagKind { kInt, kUInt, kDouble, kString, kBool, kIntList, kPoint, kPointList };

struct FlagSpec {
  const char* name;
  const char* pointer;
  FlagKind kind;
  const char* help;
};

const std::vector<FlagSpec>& flag_specs() {
  static const std::vector<FlagSpec> specs = {
      {"--law", "/law", FlagKind::kString, "occupation law, e.g. poisson:1, bernoulli:0.7, constant:2, pmf:0.2,0.8"},
      {"--dim", "/dim", FlagKind::kInt, "lattice dimension"},
      {"--seed", "/seeds/master", FlagKind::kUInt, "master seed"},
      {"--tag", "/seeds/tag", FlagKind::kString, "experiment tag mixed into the key"},
      {"--first-replica", "/seeds/first_replica", FlagKind::kUInt, "first replica index of the test range"},
      {"--replicas", "/replicas", FlagKind::kInt, "number of replicas"},
      {"--calibration-first", "/seeds/calibration/first_replica", FlagKind::kUInt, "first calibration replica"},
      {"--calibration-replicas", "/seeds/calibration/replicas", FlagKind::kInt, "calibration replicas"},
      {"--calibration-k", "/ladders/calibration_k", FlagKind::kIntList, "calibration k ladder"},
      {"--direction", "/params/direction", FlagKind::kPoint, "direction, e.g. 1,0"},
      {"--k", "/ladders/k", FlagKind::kIntList, "k ladder, e.g. 4,8,16"},
      {"--t", "/ladders/t", FlagKind::kIntList, "truncation ladder"},
      {"--N", "/ladders/N", FlagKind::kIntList, "block scale ladder"},
      {"--targets", "/ladders/targets", FlagKind::kPointList, "targets, e.g. 8,0;4,4"},
      {"--source", "/params/source", FlagKind::kPoint, "source site"},
      {"--x", "/params/x", FlagKind::kPoint, "target site"},
      {"--horizon", "/horizon/value", FlagKind::kInt, "fixed horizon (default: auto)"},
      {"--horizon-factor", "/horizon/factor", FlagKind::kDouble, "auto horizon factor"},
      {"--mu-ref", "/horizon/mu_ref", FlagKind::kDouble, "reference time constant for the auto horizon"},
      {"--max-censored", "/horizon/max_censored_fraction", FlagKind::kDouble, "censoring budget"},
      {"--epsilon", "/params/epsilon", FlagKind::kDouble, "relative deviation"},
      {"--side", "/params/side", FlagKind::kString, "upper, lower or both"},
      {"--mu-hat", "/params/mu_hat", FlagKind::kDouble, "time constant estimate (default: calibrate)"},
      {"--bootstrap", "/params/bootstrap_resamples", FlagKind::kInt, "bootstrap resamples"},
      {"--c4", "/params/c4_hat", FlagKind::kDouble, "tail constant estimate (default: 5 mu_hat)"},
      {"--gamma", "/params/gamma", FlagKind::kDouble, "truncation gamma"},
      {"--sigma-probes", "/params/sigma_probes", FlagKind::kInt, "random two-point probes per replica"},
      {"--policy", "/params/policy", FlagKind::kString, "exact, on-demand or truncated-world"},
      {"--star", "/params/star", FlagKind::kBool, "use nearest occupied sites"},
      {"--box-radius", "/params/box_radius", FlagKind::kInt, "environment box radius (default: auto)"},
      {"--dump", "/params/dump", FlagKind::kBool, "embed the first replica's activation dump"},
      {"--condition-origin", "/params/condition_origin", FlagKind::kBool, "condition on an occupied origin"},
      {"--radius", "/params/radius", FlagKind::kInt, "box radius"},
      {"--field", "/params/field", FlagKind::kString, "bernoulli, white or good"},
      {"--p", "/params/p", FlagKind::kDouble, "Bernoulli site density"},
      {"--ratio-min", "/params/ratio_min", FlagKind::kInt, "smallest l1 norm in the ratio window"},
      {"--ratio-max", "/params/ratio_max", FlagKind::kInt, "largest l1 norm in the ratio window"},
      {"--M", "/params/M", FlagKind::kInt, "good-site direction resolution"},
      {"--delta", "/params/delta", FlagKind::kDouble, "good-site slack"},
      {"--triples", "/params/triples", FlagKind::kInt, "subadditivity triples"},
      {"--spread", "/params/spread", FlagKind::kInt, "triples drawn from [-spread, spread]^d"},
      {"--direct-n", "/params/direct_n", FlagKind::kInt, "direct path length"},
      {"--direct-trials", "/params/direct_trials", FlagKind::kInt, "direct path trials"},
  };
  return specs;
}

int64_t parse_int(const std::string& flag, const std::string& s) {
  size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail(ErrorKind::kInvalidArgument, flag + ": expected an integer, got '" + s + "'");
  return v;
}

json parse_int_list(const std::string& flag, const std::string& s) {
  json out = json::array();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(flag, item));
  if (out.empty()) fail(ErrorKind::kInvalidArgument, flag + ": empty list");
  return out;
}

json flag_value(const FlagSpec& f, const std::string& s) {
  switch (f.kind) {
    case FlagKind::kInt:
      return parse_int(f.name, s);
    case FlagKind::kUInt: {
      size_t used = 0;
      uint64_t v = 0;
      try {
        v = std::stoull(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size() || s.front() == '-')
        fail(ErrorKind::kInvalidArgument, std::string(f.name) + ": expected an unsigned integer, got '" + s + "'");
      return v;
    }
    case FlagKind::kDouble: {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size())
        fail(ErrorKind::kInvalidArgument, std::string(f.name) + ": expected a number, got '" + s + "'");
      return v;
    }
    case FlagKind::kString:
      return s;
    case FlagKind::kIntList:
    case FlagKind::kPoint:
      return parse_int_list(f.name, s);
    case FlagKind::kPointList: {
      json out = json::array();
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ';')) out.push_back(parse_int_list(f.name, item));
      if (out.empty()) fail(ErrorKind::kInvalidArgument, std::string(f.name) + ": empty list");
      return out;
    }
    case FlagKind::kBool:
      break;
  }
  return nullptr;
}

struct BoundFlag {
  const FlagSpec* spec;
  CLI::Option* option;
  std::string text;
  bool flag = false;
};

struct Invocation {
  std::string command;
  CLI::App* app = nullptr;
  std::vector<std::unique_ptr<BoundFlag>> flags;
  std::string plan_file;
  std::string out_prefix;
  std::string write_plan;
};

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kGeometry:
      return kPlanError;
    case ErrorKind::kCensoringBudget:
      return kCensoringBreach;
    default:
      return kFailure;
  }
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return "parameter error";
    case ErrorKind::kGeometry: return "geometry error";
    case ErrorKind::kCensoringBudget: return "censoring budget exceeded";
    case ErrorKind::kCapExceeded: return "size cap exceeded";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"sample-env", "passage",     "mu",    "tails", "concentration",
                                             "truncation", "percolation", "audit", "replay"};
  return c;
}

json default_plan(const std::string& command) {
  json p = {{"schema", kPlanSchema},
            {"command", command},
            {"law", "poisson:1"},
            {"dim", 2},
            {"seeds", seeds_block(false)},
            {"outputs", {{"json", nullptr}, {"csv", json::object()}}}};
  p["seeds"]["tag"] = command;
  if (command == "sample-env") {
    p["params"] = {{"radius", 10}, {"condition_origin", false}};
  } else if (command == "passage") {
    p["replicas"] = 100;
    p["horizon"] = auto_horizon_block();
    p["horizon"]["value"] = nullptr;
    p["horizon"].erase("max_censored_fraction");
    p["ladders"] = {{"targets", json::array({json::array({8, 0})})}};
    p["params"] = {{"source", json::array({0, 0})}, {"policy", "exact"},         {"star", false},
                   {"box_radius", nullptr},         {"condition_origin", true}, {"dump", false}};
  } else if (command == "mu") {
    p["replicas"] = 200;
    p["horizon"] = auto_horizon_block();
    p["ladders"] = {{"k", {4, 8, 16, 32}}};
    p["params"] = {{"direction", nullptr}};
  } else if (command == "tails") {
    p["seeds"] = seeds_block(true);
    p["seeds"]["tag"] = command;
    p["replicas"] = 1000;
    p["horizon"] = auto_horizon_block();
    p["ladders"] = {{"k", {1, 2, 3, 4, 5, 6, 7, 8}}, {"calibration_k", {4, 8, 16, 32}}};
    p["params"] = {{"direction", nullptr}, {"epsilon", 0.5}, {"side", "both"}, {"mu_hat", nullptr}};
  } else if (command == "concentration") {
    p["law"] = "constant:1";
    p["replicas"] = 500;
    p["horizon"] = auto_horizon_block();
    p["ladders"] = {{"k", {10, 20, 30, 40, 50, 60}}};
    p["params"] = {{"direction", nullptr}, {"bootstrap_resamples", 200}};
  } else if (command == "truncation") {
    p["seeds"] = seeds_block(true);
    p["seeds"]["tag"] = command;
    p["replicas"] = 300;
    p["horizon"] = auto_horizon_block();
    p["horizon"]["value"] = nullptr;
    p["ladders"] = {{"t", {1, 2, 4, 8, 16}}, {"calibration_k", {4, 8, 16, 32}}};
    p["params"] = {{"x", json::array({8, 0})}, {"c4_hat", nullptr}, {"mu_hat", nullptr},
                   {"gamma", 1.0},            {"sigma_probes", 16}};
  } else if (command == "percolation") {
    p["replicas"] = 500;
    p["ladders"] = {{"N", {4, 8, 12, 16}}};
    p["params"] = {{"field", "bernoulli"}, {"p", 0.8},       {"radius", 100},   {"ratio_min", 20},
                   {"ratio_max", 60},      {"M", 1},         {"delta", 0.5},    {"mu_hat", nullptr}};
  } else if (command == "audit") {
    p["law"] = "bernoulli:0.8";
    p["params"] = {{"triples", 500}, {"spread", 8}, {"direct_n", 3}, {"direct_trials", 100000},
                   {"epsilon", 0.5}, {"mu_hat", 2.0}};
  } else {
    fail(ErrorKind::kInvalidArgument, "command: unknown command '" + command + "'");
  }
  return p;
}

json resolve_plan(const json& overrides) {
  if (!overrides.is_object()) fail(ErrorKind::kInvalidArgument, "plan: expected a JSON object");
  if (!overrides.contains("command") || !overrides["command"].is_string())
    fail(ErrorKind::kInvalidArgument, "command: missing");
  const std::string cmd = overrides["command"].get<std::string>();
  if (cmd == "replay") fail(ErrorKind::kInvalidArgument, "command: replay is not a plan command");
  json plan = default_plan(cmd);
  json allowed = plan;
  allowed["outputs"]["csv"] = nullptr;
  check_keys(overrides, allowed, "");
  merge_into(plan, overrides);
  if (plan["schema"] != kPlanSchema)
    fail(ErrorKind::kInvalidArgument, std::string("schema: expected ") + kPlanSchema);

  const int dim = get<int>(plan, "/dim");
  require(dim >= 1 && dim <= kMaxDim, "dim: must lie in [1, " + std::to_string(kMaxDim) + "]");
  try {
    plan["law"] = ConfigLaw::parse(get<std::string>(plan, "/law")).str();
  } catch (const Error& e) {
    fail(ErrorKind::kInvalidArgument, std::string("law: ") + e.what());
  }
  if (!is_set(plan, "/seeds/master"))
    fail(ErrorKind::kInvalidArgument, "seeds.master: an explicit master seed is required (--seed)");
  get<uint64_t>(plan, "/seeds/master");
  get<uint64_t>(plan, "/seeds/first_replica");
  if (plan.contains("replicas")) require(get<int64_t>(plan, "/replicas") >= 1, "replicas: must be positive");
  if (plan.contains("params") && plan["params"].contains("direction") && plan["params"]["direction"].is_null())
    plan["params"]["direction"] = point_json(Point::unit(dim, 0));
  if (plan.contains("horizon")) {
    require(get<double>(plan, "/horizon/factor") > 0, "horizon.factor: must be positive");
    require(get<double>(plan, "/horizon/mu_ref") > 0, "horizon.mu_ref: must be positive");
    if (plan["horizon"].contains("max_censored_fraction")) {
      const double f = get<double>(plan, "/horizon/max_censored_fraction");
      require(f >= 0 && f <= 1, "horizon.max_censored_fraction: must lie in [0, 1]");
    }
  }
  for (const char* ladder : {"k", "t", "N", "calibration_k"}) {
    if (!plan.contains("ladders") || !plan["ladders"].contains(ladder)) continue;
    for (int64_t v : ints_from(plan["ladders"][ladder], std::string("ladders.") + ladder))
      require(v >= 1, std::string("ladders.") + ladder + ": entries must be positive");
  }
  if (cmd == "tails") {
    const double eps = get<double>(plan, "/params/epsilon");
    require(eps > 0, "params.epsilon: must be positive");
    require(eps < 1, "params.epsilon: must be below 1");
    const std::string side = get<std::string>(plan, "/params/side");
    require(side == "upper" || side == "lower" || side == "both", "params.side: expected upper, lower or both");
  }
  if (cmd == "tails" || cmd == "truncation") {
    const bool need_cal = !is_set(plan, "/params/mu_hat") && !(cmd == "truncation" && is_set(plan, "/params/c4_hat"));
    if (is_set(plan, "/params/mu_hat")) require(get<double>(plan, "/params/mu_hat") > 0, "params.mu_hat: must be positive");
    if (need_cal) {
      const uint64_t a0 = get<uint64_t>(plan, "/seeds/first_replica");
      const uint64_t a1 = a0 + static_cast<uint64_t>(get<int64_t>(plan, "/replicas"));
      const int64_t cr = get<int64_t>(plan, "/seeds/calibration/replicas");
      require(cr >= 2, "seeds.calibration.replicas: need at least 2");
      const uint64_t b0 = get<uint64_t>(plan, "/seeds/calibration/first_replica");
      const uint64_t b1 = b0 + static_cast<uint64_t>(cr);
      require(a1 <= b0 || b1 <= a0, "seeds.calibration: calibration and test replica ranges overlap");
    }
  }
  if (cmd == "passage") policy_from(get<std::string>(plan, "/params/policy"));
  if (cmd == "percolation") {
    const std::string field = get<std::string>(plan, "/params/field");
    require(field == "bernoulli" || field == "white" || field == "good", "params.field: expected bernoulli, white or good");
  }
  const json& out = plan["outputs"];
  if (!out["json"].is_null() && !out["json"].is_string()) fail(ErrorKind::kInvalidArgument, "outputs.json: expected a path");
  if (!out["csv"].is_object()) fail(ErrorKind::kInvalidArgument, "outputs.csv: expected a table -> path object");
  const auto tables = csv_tables(plan);
  for (auto it = out["csv"].begin(); it != out["csv"].end(); ++it)
    if (std::find(tables.begin(), tables.end(), it.key()) == tables.end())
      fail(ErrorKind::kInvalidArgument, "outputs.csv." + it.key() + ": no such table for " + cmd);
  return plan;
}

Reports execute_plan(const json& plan, unsigned threads) {
  const std::string cmd = plan.at("command").get<std::string>();
  Reports r;
  if (cmd == "sample-env") r = run_sample_env(plan);
  else if (cmd == "passage") r = run_passage(plan, threads);
  else if (cmd == "mu") r = run_mu(plan, threads);
  else if (cmd == "tails") r = run_tails(plan, threads);
  else if (cmd == "concentration") r = run_concentration(plan, threads);
  else if (cmd == "truncation") r = run_truncation(plan, threads);
  else if (cmd == "percolation") r = run_percolation(plan, threads);
  else if (cmd == "audit") r = run_audit(plan, threads);
  else fail(ErrorKind::kInvalidArgument, "command: unknown command '" + cmd + "'");
  json embedded = plan;
  embedded.erase("outputs");
  r.json["schema"] = kReportSchema;
  r.json["software_version"] = kSoftwareVersion;
  r.json["command"] = cmd;
  r.json["plan"] = embedded;
  r.json["seeds"] = plan.at("seeds");
  r.json["law"] = plan.at("law");
  if (!r.json.contains("censoring")) r.json["censoring"] = nullptr;
  return r;
}

std::string report_text(const Reports& r) { return r.json.dump(2) + "\n"; }

bool write_reports(const json& plan, const Reports& r) {
  const json& out = plan.at("outputs");
  bool wrote = false;
  if (out.contains("json") && out["json"].is_string()) {
    write_file(out["json"].get<std::string>(), report_text(r));
    wrote = true;
  }
  if (out.contains("csv")) {
    for (const auto& [name, text] : r.csv) {
      if (!out["csv"].contains(name)) continue;
      write_file(out["csv"][name].get<std::string>(), text);
      wrote = true;
    }
  }
  return wrote;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"frogpass: frog model passage times, truncation and renormalization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kSoftwareVersion);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::unique_ptr<Invocation>> invocations;
  for (const auto& cmd : commands()) {
    auto inv = std::make_unique<Invocation>();
    inv->command = cmd;
    inv->app = app.add_subcommand(cmd, cmd == "replay" ? "rerun a plan or report file" : "run the " + cmd + " experiment");
    inv->app->add_option("--threads", threads, "worker threads (outputs do not depend on it)")->check(CLI::Range(1u, 4096u));
    inv->app->add_option("--out", inv->out_prefix, "write PREFIX.json and PREFIX.<table>.csv");
    if (cmd == "replay") {
      inv->app->add_option("file", inv->plan_file, "plan or report JSON")->required();
    } else {
      inv->app->add_option("--plan", inv->plan_file, "plan JSON; flags override its values");
      inv->app->add_option("--write-plan", inv->write_plan, "also write the resolved plan here");
      const json defaults = default_plan(cmd);
      for (const auto& spec : flag_specs()) {
        if (!defaults.contains(json::json_pointer(spec.pointer))) continue;
        auto b = std::make_unique<BoundFlag>();
        b->spec = &spec;
        if (spec.kind == FlagKind::kBool) b->option = inv->app->add_flag(spec.name, b->flag, spec.help);
        else b->option = inv->app->add_option(spec.name, b->text, spec.help);
        inv->flags.push_back(std::move(b));
      }
    }
    invocations.push_back(std::move(inv));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kPlanError;
  }

  try {
    const Invocation* inv = nullptr;
    for (const auto& i : invocations)
      if (i->app->parsed()) inv = i.get();
    json plan;
    if (inv->command == "replay") {
      json j = load_json_file(inv->plan_file);
      if (j.is_object() && j.value("schema", "") == kReportSchema) j = j.at("plan");
      plan = resolve_plan(j);
    } else {
      json overrides = json::object();
      if (!inv->plan_file.empty()) overrides = load_json_file(inv->plan_file);
      if (!overrides.is_object()) fail(ErrorKind::kInvalidArgument, "plan: expected a JSON object");
      if (overrides.contains("command") && overrides["command"] != inv->command)
        fail(ErrorKind::kInvalidArgument, "command: plan file is for '" + overrides["command"].dump() + "'");
      overrides["command"] = inv->command;
      for (const auto& b : inv->flags) {
        if (b->option->count() == 0) continue;
        overrides[json::json_pointer(b->spec->pointer)] =
            b->spec->kind == FlagKind::kBool ? json(b->flag) : flag_value(*b->spec, b->text);
      }
      plan = resolve_plan(overrides);
    }
    if (!inv->out_prefix.empty()) plan["outputs"] = outputs_for(plan, inv->out_prefix);
    if (!inv->write_plan.empty()) write_file(inv->write_plan, plan.dump(2) + "\n");
    const Reports reports = execute_plan(plan, threads);
    if (write_reports(plan, reports)) {
      out << reports.summary << '\n';
    } else {
      out << report_text(reports);
      err << reports.summary << '\n';
    }
    return kOk;
  } catch (const Error& e) {
    err << "frogpass: " << kind_name(e.kind()) << ": " << e.what() << '\n';
    return exit_for(e);
  } catch (const json::exception& e) {
    err << "frogpass: plan error: " << e.what() << '\n';
    return kPlanError;
  } catch (const std::exception& e) {
    err << "frogpass: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace frogpass::cli
