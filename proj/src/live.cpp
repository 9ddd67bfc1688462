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

#include "resilsim/live.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "resilsim/errors.hpp"
#include "resilsim/sim.hpp"

namespace resilsim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

std::vector<RequestRecord> parse_request_log(std::istream& in) {
    std::vector<RequestRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        auto fail = [&](const std::string& why) {
            return ParseError("request log line " + std::to_string(line_no) + ": " + why);
        };

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            auto comma = text.find(',', start);
            fields.push_back(trim(text.substr(start, comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2 || fields.size() > 3) {
            throw fail("expected timestamp,outcome[,endpoint]");
        }

        RequestRecord rec;
        auto ts = fields[0];
        auto [tp, tec] = std::from_chars(ts.data(), ts.data() + ts.size(), rec.timestamp);
        if (tec != std::errc{} || tp != ts.data() + ts.size() || !std::isfinite(rec.timestamp)) {
            throw fail("bad timestamp '" + std::string(ts) + "'");
        }

        auto outcome = fields[1];
        if (outcome != "socket_error") {
            int status = 0;
            auto [sp, sec] = std::from_chars(outcome.data(), outcome.data() + outcome.size(), status);
            if (sec != std::errc{} || sp != outcome.data() + outcome.size()) {
                throw fail("bad outcome '" + std::string(outcome) + "'");
            }
            if (status < 100 || status > 599) {
                throw fail("status " + std::to_string(status) + " outside [100, 599]");
            }
            rec.status = status;
        }
        if (fields.size() == 3) rec.endpoint = std::string(fields[2]);
        out.push_back(std::move(rec));
    }
    return out;
}

LiveResilience analyze_request_log(std::span<const RequestRecord> records,
                                   const LiveOptions& options) {
    LiveResilience out;
    for (const auto& r : records) {
        if (options.window &&
            (r.timestamp < options.window->start || r.timestamp >= options.window->end)) {
            continue;
        }
        const bool client_error = r.status && *r.status >= 400 && *r.status < 500;
        if (client_error && options.drop_4xx) continue;
        ++out.total;
        if (r.socket_error() || (*r.status >= 500 && *r.status <= 599)) ++out.failed;
    }
    if (out.total == 0) throw std::invalid_argument("no requests in the analysis window");
    out.r_live = 1.0 - static_cast<double>(out.failed) / static_cast<double>(out.total);
    return out;
}

nlohmann::json live_to_json(const LiveResilience& live) {
    return {{"total", live.total}, {"failed", live.failed}, {"r_live", live.r_live}};
}

std::string to_string(Denominator d) { return d == Denominator::model ? "model" : "live"; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass:
            return "pass";
        case Verdict::fail:
            return "fail";
        case Verdict::indeterminate:
            break;
    }
    return "indeterminate";
}

Denominator parse_denominator(const std::string& s) {
    if (s == "model") return Denominator::model;
    if (s == "live") return Denominator::live;
    throw std::invalid_argument("denominator must be 'model' or 'live', got '" + s + "'");
}

ComparisonRow compare(std::span<const double> model_rounds, std::span<const double> live_rounds,
                      std::string scenario, Denominator denominator) {
    if (model_rounds.empty() || live_rounds.empty()) {
        throw std::invalid_argument("compare: both series need at least one value");
    }
    const auto model = aggregate_rounds(model_rounds);
    const auto live = aggregate_rounds(live_rounds);

    ComparisonRow row;
    row.scenario = std::move(scenario);
    row.runs = std::max(model_rounds.size(), live_rounds.size());
    row.model_mean = model.mean;
    row.model_sd = model.sd;
    row.live_mean = live.mean;
    row.live_sd = live.sd;
    row.delta = live.mean - model.mean;
    row.delta_sd = std::hypot(model.sd, live.sd);
    row.denominator = denominator;
    row.model_values.assign(model_rounds.begin(), model_rounds.end());
    row.live_values.assign(live_rounds.begin(), live_rounds.end());

    const double denom = denominator == Denominator::model ? model.mean : live.mean;
    if (denom == 0.0) {
        row.verdict = Verdict::indeterminate;
    } else {
        row.relative_error = std::abs(row.delta) / std::abs(denom);
        row.verdict = *row.relative_error <= kRelativeErrorThreshold ? Verdict::pass : Verdict::fail;
    }
    return row;
}

nlohmann::json comparison_to_json(const ComparisonRow& row) {
    return {{"scenario", row.scenario},
            {"runs", row.runs},
            {"model_mean", row.model_mean},
            {"model_sd", row.model_sd},
            {"live_mean", row.live_mean},
            {"live_sd", row.live_sd},
            {"delta", row.delta},
            {"delta_sd", row.delta_sd},
            {"relative_error",
             row.relative_error ? nlohmann::json(*row.relative_error) : nlohmann::json(nullptr)},
            {"denominator", to_string(row.denominator)},
            {"threshold", kRelativeErrorThreshold},
            {"verdict", to_string(row.verdict)},
            {"model_values", row.model_values},
            {"live_values", row.live_values}};
}

ComparisonRow comparison_from_json(const nlohmann::json& doc) {
    try {
        ComparisonRow row;
        row.scenario = doc.at("scenario").get<std::string>();
        row.runs = doc.at("runs").get<std::uint64_t>();
        row.model_mean = doc.at("model_mean").get<double>();
        row.model_sd = doc.at("model_sd").get<double>();
        row.live_mean = doc.at("live_mean").get<double>();
        row.live_sd = doc.at("live_sd").get<double>();
        row.delta = doc.at("delta").get<double>();
        row.delta_sd = doc.value("delta_sd", 0.0);
        if (const auto& re = doc.at("relative_error"); !re.is_null()) {
            row.relative_error = re.get<double>();
        }
        row.denominator = parse_denominator(doc.at("denominator").get<std::string>());
        const auto v = doc.at("verdict").get<std::string>();
        row.verdict = v == "pass" ? Verdict::pass : v == "fail" ? Verdict::fail : Verdict::indeterminate;
        row.model_values = doc.value("model_values", std::vector<double>{});
        row.live_values = doc.value("live_values", std::vector<double>{});
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("comparison row: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("comparison row: ") + e.what());
    }
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "scenario,runs,model_mean,model_sd,live_mean,live_sd,delta,delta_sd,relative_error,"
          "denominator,verdict\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.runs << ',' << r.model_mean << ',' << r.model_sd << ','
           << r.live_mean << ',' << r.live_sd << ',' << r.delta << ',' << r.delta_sd << ',';
        if (r.relative_error) os << *r.relative_error;
        os << ',' << to_string(r.denominator) << ',' << to_string(r.verdict) << '\n';
    }
    return os.str();
}

}  // namespace resilsim
