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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frogpass/cli.hpp"
#include "frogpass/error.hpp"

using namespace frogpass;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "frogpass");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("frogpass_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("plan resolution") {
  const json p = cli::resolve_plan({{"command", "mu"}, {"seeds", {{"master", 7}}}});
  CHECK(p["schema"] == cli::kPlanSchema);
  CHECK(p["law"] == "poisson:1");
  CHECK(p["params"]["direction"] == json::array({1, 0}));
  CHECK(p["seeds"]["tag"] == "mu");
  CHECK(cli::resolve_plan(p) == p);

  CHECK_THROWS_AS(cli::resolve_plan({{"command", "mu"}}), Error);
  CHECK_THROWS_AS(cli::resolve_plan({{"command", "nope"}, {"seeds", {{"master", 1}}}}), Error);
  CHECK_THROWS_WITH_AS(cli::resolve_plan({{"command", "mu"}, {"seeds", {{"master", 1}}}, {"params", {{"sdie", 1}}}}),
                       "params.sdie: unknown plan key", Error);
  CHECK_THROWS_AS(cli::resolve_plan({{"command", "mu"}, {"seeds", {{"master", 1}}}, {"law", "poisson:-1"}}), Error);
  CHECK_THROWS_AS(cli::resolve_plan({{"command", "mu"}, {"seeds", {{"master", 1}}}, {"ladders", {{"k", {4, 0}}}}}),
                  Error);
  CHECK_THROWS_WITH_AS(cli::resolve_plan({{"command", "tails"},
                                          {"seeds", {{"master", 1}, {"calibration", {{"first_replica", 10}}}}},
                                          {"replicas", 100}}),
                       "seeds.calibration: calibration and test replica ranges overlap", Error);
  CHECK_NOTHROW(cli::resolve_plan({{"command", "tails"},
                                   {"seeds", {{"master", 1}, {"calibration", {{"first_replica", 10}}}}},
                                   {"replicas", 100},
                                   {"params", {{"mu_hat", 2.0}}}}));
}

TEST_CASE("exit codes") {
  const Run eps = invoke({"tails", "--side", "upper", "--epsilon", "0", "--seed", "1"});
  CHECK(eps.code == cli::kPlanError);
  CHECK(eps.err.find("params.epsilon") != std::string::npos);
  CHECK(invoke({"mu", "--seed", "1", "--unknown-flag", "2"}).code == cli::kPlanError);
  CHECK(invoke({"mu", "--seed", "1", "--k", "4,x"}).code == cli::kPlanError);
  CHECK(invoke({"mu", "--replicas", "5"}).code == cli::kPlanError);
  CHECK(invoke({"passage", "--seed", "1", "--replicas", "2", "--box-radius", "3"}).code == cli::kPlanError);
  const Run cens = invoke({"mu", "--seed", "1", "--k", "32", "--replicas", "10", "--horizon-factor", "0.3"});
  CHECK(cens.code == cli::kCensoringBreach);
  CHECK(invoke({"replay", "/nonexistent/plan.json"}).code == cli::kPlanError);
  CHECK(invoke({"sample-env", "--seed", "1", "--out", "/nonexistent/dir/r"}).code == cli::kFailure);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("flags override the plan file") {
  const fs::path d = scratch("override");
  {
    std::ofstream(d / "plan.json") << json{{"command", "mu"}, {"seeds", {{"master", 3}}}, {"replicas", 30},
                                           {"ladders", {{"k", {2, 4}}}}}
                                              .dump();
  }
  const Run r = invoke({"mu", "--plan", (d / "plan.json").string(), "--replicas", "12", "--out", (d / "r").string(),
                        "--write-plan", (d / "resolved.json").string(), "--threads", "2"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.rfind("mu: mu_hat=", 0) == 0);
  const json report = json::parse(slurp(d / "r.json"));
  CHECK(report["plan"]["replicas"] == 12);
  CHECK(report["plan"]["ladders"]["k"] == json::array({2, 4}));
  CHECK(!report["plan"].contains("outputs"));
  CHECK(report["software_version"] == cli::kSoftwareVersion);
  CHECK(report["result"]["per_k"].size() == 2);
  const json resolved = json::parse(slurp(d / "resolved.json"));
  CHECK(resolved["outputs"]["csv"]["mu"] == (d / "r.mu.csv").string());
  CHECK(fs::exists(d / "r.mu.csv"));
  CHECK(invoke({"truncation", "--plan", (d / "plan.json").string()}).code == cli::kPlanError);
}

TEST_CASE("replay is byte identical across thread counts") {
  const fs::path d = scratch("replay");
  const std::vector<std::vector<std::string>> runs = {
      {"passage", "--seed", "9", "--replicas", "6", "--targets", "5,0;3,2", "--star"},
      {"concentration", "--seed", "9", "--replicas", "20", "--k", "3,6", "--bootstrap", "30"},
      {"audit", "--seed", "9", "--triples", "12", "--direct-trials", "500"},
      {"sample-env", "--seed", "9", "--radius", "4", "--condition-origin"},
  };
  int i = 0;
  for (auto args : runs) {
    const std::string a = (d / ("a" + std::to_string(i))).string();
    const std::string b = (d / ("b" + std::to_string(i))).string();
    auto first = args;
    first.insert(first.end(), {"--threads", "1", "--out", a});
    REQUIRE(invoke(first).code == cli::kOk);
    REQUIRE(invoke({"replay", a + ".json", "--threads", "3", "--out", b}).code == cli::kOk);
    CHECK(slurp(a + ".json") == slurp(b + ".json"));
    for (const auto& entry : fs::directory_iterator(d)) {
      const std::string name = entry.path().filename().string();
      const std::string stem = "a" + std::to_string(i) + ".";
      if (name.rfind(stem, 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
        const fs::path other = d / ("b" + name.substr(1));
        CHECK(slurp(entry.path()) == slurp(other));
      }
    }
    ++i;
  }
}

TEST_CASE("report to stdout without outputs") {
  const Run r = invoke({"sample-env", "--seed", "2", "--radius", "2"});
  REQUIRE(r.code == cli::kOk);
  const json j = json::parse(r.out);
  CHECK(j["schema"] == cli::kReportSchema);
  CHECK(j["result"]["sites"] == 13);
  CHECK(r.err.rfind("sample-env:", 0) == 0);
}
