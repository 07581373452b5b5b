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

// Command-line front end: experiment plans, execution and report emission.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace frogpass::cli {

inline constexpr const char* kPlanSchema = "frogpass.plan/1";
inline constexpr const char* kReportSchema = "frogpass.report/1";
inline constexpr const char* kSoftwareVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kPlanError = 2, kCensoringBreach = 3 };

const std::vector<std::string>& commands();

/// Defaults for a command; a plan file and flags are merged over these.
nlohmann::json default_plan(const std::string& command);

/// Merges `overrides` over the defaults, canonicalizes and validates.
/// Throws Error(kInvalidArgument) naming the offending parameter.
nlohmann::json resolve_plan(const nlohmann::json& overrides);

struct Reports {
  nlohmann::json json;
  /// (table name, CSV text) in a fixed order.
  std::vector<std::pair<std::string, std::string>> csv;
  std::string summary;
};

/// Runs a resolved plan. Outputs do not depend on `threads`.
Reports execute_plan(const nlohmann::json& plan, unsigned threads);

/// Serialized report text, byte-stable.
std::string report_text(const Reports& r);

/// Writes the reports to the plan's declared output paths. Returns false if
/// the plan declares none.
bool write_reports(const nlohmann::json& plan, const Reports& r);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frogpass::cli
