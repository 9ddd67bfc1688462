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

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "resilsim/errors.hpp"
#include "resilsim/live.hpp"

using namespace resilsim;

namespace {

// 1000 requests: 100 x 5xx, 20 x socket errors, 30 x 4xx, 850 x 200.
std::string synthetic_log() {
    std::ostringstream os;
    os << "# timestamp,outcome,endpoint\n";
    for (int i = 0; i < 1000; ++i) {
        os << 1700000000 + i << ',';
        if (i < 100) {
            os << (i % 2 ? 500 : 503);
        } else if (i < 120) {
            os << "socket_error";
        } else if (i < 150) {
            os << 404;
        } else {
            os << 200;
        }
        os << ",/wrk2-api/home-timeline/read\n";
    }
    return os.str();
}

std::vector<RequestRecord> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_request_log(in);
}

}  // namespace

TEST(ParseRequestLog, ReadsAllForms) {
    auto recs = parse("# comment\n\n1.5,200\n2,socket_error,/x\n 3 , 503 , /y \n");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].status, 200);
    EXPECT_TRUE(recs[1].socket_error());
    EXPECT_EQ(recs[1].endpoint, "/x");
    EXPECT_EQ(recs[2].status, 503);
    EXPECT_EQ(recs[2].endpoint, "/y");
    EXPECT_DOUBLE_EQ(recs[0].timestamp, 1.5);
}

TEST(ParseRequestLog, ErrorsCarryLineNumber) {
    auto message = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("1,200\n2,700\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("1,200\n#\nabc,200\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("1,oops\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("1\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("1,200,a,b\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("1,99\n").find("line 1"), std::string::npos);
}

TEST(AnalyzeRequestLog, SyntheticThousand) {
    auto live = analyze_request_log(parse(synthetic_log()));
    EXPECT_EQ(live.total, 1000u);
    EXPECT_EQ(live.failed, 120u);
    EXPECT_DOUBLE_EQ(live.r_live, 0.88);
}

TEST(AnalyzeRequestLog, Drop4xxShrinksDenominator) {
    LiveOptions opts;
    opts.drop_4xx = true;
    auto live = analyze_request_log(parse(synthetic_log()), opts);
    EXPECT_EQ(live.total, 970u);
    EXPECT_EQ(live.failed, 120u);
}

TEST(AnalyzeRequestLog, HealthyAndDeadRuns) {
    EXPECT_EQ(analyze_request_log(parse("1,200\n2,201\n3,302\n")).r_live, 1.0);
    EXPECT_EQ(analyze_request_log(parse("1,socket_error\n2,socket_error\n")).r_live, 0.0);
}

TEST(AnalyzeRequestLog, WindowIsHalfOpen) {
    auto recs = parse("1,200\n2,500\n3,500\n4,200\n");
    LiveOptions opts;
    opts.window = TimeWindow{2, 4};
    auto live = analyze_request_log(recs, opts);
    EXPECT_EQ(live.total, 2u);
    EXPECT_EQ(live.failed, 2u);

    opts.window = TimeWindow{10, 20};
    EXPECT_THROW(analyze_request_log(recs, opts), std::invalid_argument);
    EXPECT_THROW(analyze_request_log({}), std::invalid_argument);
}

TEST(AnalyzeRequestLog, OrderAndSplitInvariance) {
    auto recs = parse(synthetic_log());
    const auto whole = analyze_request_log(recs);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::shuffle(recs.begin(), recs.end(), rng);
        const auto cut = static_cast<std::ptrdiff_t>(1 + rng() % (recs.size() - 1));
        auto a = analyze_request_log(std::span(recs.begin(), recs.begin() + cut));
        auto b = analyze_request_log(std::span(recs.begin() + cut, recs.end()));
        EXPECT_EQ(a.total + b.total, whole.total);
        EXPECT_EQ(a.failed + b.failed, whole.failed);
        EXPECT_EQ(analyze_request_log(recs).r_live, whole.r_live);
    }
}

TEST(AnalyzeRequestLog, RemovingA5xxNeverLowersRLive) {
    auto recs = parse(synthetic_log());
    double prev = analyze_request_log(recs).r_live;
    while (true) {
        auto it = std::find_if(recs.begin(), recs.end(),
                               [](const RequestRecord& r) { return r.status && *r.status >= 500; });
        if (it == recs.end()) break;
        recs.erase(it);
        const double now = analyze_request_log(recs).r_live;
        EXPECT_GE(now, prev);
        EXPECT_LE(now, 1.0);
        prev = now;
    }
}

TEST(Compare, NoReplicationRow) {
    std::vector<double> model{0.16100}, live{0.18609};
    auto row = compare(model, live, "norepl");
    EXPECT_NEAR(row.delta, 0.02509, 1e-12);
    ASSERT_TRUE(row.relative_error.has_value());
    // 0.02509 / 0.16100 exceeds the 15% threshold when normalised by the model.
    EXPECT_NEAR(*row.relative_error, 0.155838509, 1e-6);
    EXPECT_EQ(row.verdict, Verdict::fail);

    auto by_live = compare(model, live, "norepl", Denominator::live);
    EXPECT_NEAR(*by_live.relative_error, 0.02509 / 0.18609, 1e-12);
    EXPECT_EQ(by_live.verdict, Verdict::pass);
}

TEST(Compare, ReplicationRow) {
    std::vector<double> model{0.30519}, live{0.30479};
    auto row = compare(model, live, "repl");
    EXPECT_NEAR(row.delta, -0.00040, 1e-12);
    EXPECT_EQ(row.verdict, Verdict::pass);
}

TEST(Compare, DeltaSdCombinesSeriesSd) {
    std::vector<double> model{0.1, 0.3}, live{0.2, 0.2, 0.5};
    auto row = compare(model, live, "x");
    EXPECT_NEAR(row.delta_sd, std::hypot(row.model_sd, row.live_sd), 1e-15);
    EXPECT_NEAR(row.delta, row.live_mean - row.model_mean, 1e-12);
    EXPECT_EQ(row.runs, 3u);
}

TEST(Compare, IdenticalSeriesIsPerfect) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(1 + rng() % 20);
        for (auto& v : x) v = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        auto row = compare(x, x, "same");
        EXPECT_EQ(row.delta, 0.0);
        EXPECT_EQ(*row.relative_error, 0.0);
        EXPECT_EQ(row.verdict, Verdict::pass);
    }
}

TEST(Compare, ZeroDenominatorIsIndeterminate) {
    std::vector<double> zero{0.0}, some{0.2};
    auto row = compare(zero, some, "dead");
    EXPECT_FALSE(row.relative_error.has_value());
    EXPECT_EQ(row.verdict, Verdict::indeterminate);
    EXPECT_THROW(compare({}, some, "x"), std::invalid_argument);
}

TEST(Compare, JsonAndCsv) {
    std::vector<double> model{0.16100, 0.16110}, live{0.18609, 0.18500};
    auto row = compare(model, live, "norepl");
    auto back = comparison_from_json(comparison_to_json(row));
    EXPECT_EQ(comparison_to_json(back), comparison_to_json(row));

    std::vector<ComparisonRow> rows{row};
    auto csv = comparison_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "scenario,runs,model_mean,model_sd,live_mean,live_sd,delta,delta_sd,relative_error,"
              "denominator,verdict");
    EXPECT_NE(csv.find("norepl,2,"), std::string::npos);
}
