// Copyright 2026 The resilsim Authors
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

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace resilsim {

/// One logged request. `status` is empty for a socket-level error.
struct RequestRecord {
    double timestamp = 0.0;
    std::optional<int> status;
    std::string endpoint;

    bool socket_error() const noexcept { return !status.has_value(); }
};

/// Half-open [start, end) in epoch seconds.
struct TimeWindow {
    double start = 0.0;
    double end = 0.0;
};

struct LiveOptions {
    std::optional<TimeWindow> window;
    /// Remove 4xx responses from the denominator instead of counting them
    /// as successes.
    bool drop_4xx = false;
};

struct LiveResilience {
    std::uint64_t total = 0;
    std::uint64_t failed = 0;
    double r_live = 1.0;
};

/// Reads `timestamp,outcome[,endpoint]` lines. Outcome is an integer status
/// in [100, 599] or the literal `socket_error`. Blank lines and lines
/// starting with '#' are skipped. Throws ParseError with the line number.
std::vector<RequestRecord> parse_request_log(std::istream& in);

/// 5xx and socket errors count as failures; r_live = 1 - failed / total.
/// Throws std::invalid_argument if no records fall in the window.
LiveResilience analyze_request_log(std::span<const RequestRecord> records,
                                   const LiveOptions& options = {});

nlohmann::json live_to_json(const LiveResilience& live);

enum class Denominator { model, live };

enum class Verdict { pass, fail, indeterminate };

inline constexpr double kRelativeErrorThreshold = 0.15;

struct ComparisonRow {
    std::string scenario;
    std::uint64_t runs = 0;
    double model_mean = 0.0;
    double model_sd = 0.0;
    double live_mean = 0.0;
    double live_sd = 0.0;
    /// live_mean - model_mean
    double delta = 0.0;
    /// sqrt(model_sd^2 + live_sd^2)
    double delta_sd = 0.0;
    std::optional<double> relative_error;
    Denominator denominator = Denominator::model;
    Verdict verdict = Verdict::indeterminate;
    std::vector<double> model_values;
    std::vector<double> live_values;
};

/// Throws std::invalid_argument if either series is empty.
ComparisonRow compare(std::span<const double> model_rounds, std::span<const double> live_rounds,
                      std::string scenario, Denominator denominator = Denominator::model);

std::string to_string(Denominator d);
std::string to_string(Verdict v);
Denominator parse_denominator(const std::string& s);

nlohmann::json comparison_to_json(const ComparisonRow& row);
ComparisonRow comparison_from_json(const nlohmann::json& doc);

/// scenario,runs,model_mean,...,verdict with a header line.
std::string comparison_csv(std::span<const ComparisonRow> rows);

}  // namespace resilsim
