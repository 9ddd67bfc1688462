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

#include <map>
#include <queue>
#include <random>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "resilsim/errors.hpp"
#include "resilsim/graph.hpp"

using namespace resilsim;
using nlohmann::json;

TEST(ParseDependencies, SingleRecord) {
    auto g = parse_dependencies(
        json::parse(R"([{"parent":"nginx-web-server","child":"home-timeline-service","callCount":10}])"));
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_TRUE(g.has_edge("nginx-web-server", "home-timeline-service"));
    EXPECT_EQ(g.call_count({"nginx-web-server", "home-timeline-service"}), 10u);
}

TEST(ParseDependencies, EmptyDocument) {
    auto g = parse_dependencies(json::array());
    EXPECT_EQ(g.node_count(), 0u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(ParseDependencies, DuplicatesMergeAndSumCounts) {
    auto g = parse_dependencies(json::parse(
        R"([{"parent":"a","child":"b","callCount":3},{"parent":"a","child":"b","callCount":4}])"));
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.call_count({"a", "b"}), 7u);
}

TEST(ParseDependencies, CallCountIsOptional) {
    auto g = parse_dependencies(json::parse(R"([{"parent":"a","child":"b"}])"));
    EXPECT_FALSE(g.call_count({"a", "b"}).has_value());
}

TEST(ParseDependencies, ErrorsNameTheRecordIndex) {
    auto message_of = [](const char* text) {
        try {
            parse_dependencies(json::parse(text));
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message_of(R"([{"parent":"a","child":"b"},{"parent":"a"}])").find("record 1"),
              std::string::npos);
    EXPECT_NE(message_of(R"([{"parent":"","child":"b"}])").find("record 0"), std::string::npos);
    EXPECT_NE(message_of(R"([{"parent":"  ","child":"b"}])").find("record 0"), std::string::npos);
    EXPECT_NE(message_of(R"([{"parent":"a","child":"a"}])").find("self-loop"), std::string::npos);
    EXPECT_NE(message_of(R"([{"parent":"a","child":"b","callCount":-1}])").find("callCount"),
              std::string::npos);
    EXPECT_NE(message_of(R"({"parent":"a"})").find("array"), std::string::npos);
    EXPECT_NE(message_of(R"([42])").find("record 0"), std::string::npos);
}

TEST(DependencyGraph, ConstructorRejectsBadInput) {
    EXPECT_THROW(DependencyGraph({"a"}, {{"a", "a"}}), std::invalid_argument);
    EXPECT_THROW(DependencyGraph({"a"}, {{"a", "b"}}), std::invalid_argument);
    EXPECT_THROW(DependencyGraph({""}, {}), std::invalid_argument);
}

TEST(DependencyGraph, IsolatedNodesAreKept) {
    DependencyGraph g({"c", "a", "b"}, {{"a", "b"}});
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.nodes().front(), "a");
    EXPECT_TRUE(g.successors(*g.index_of("c")).empty());
}

TEST(DependencyGraph, SerializeParseIsIdempotent) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        json doc = json::array();
        const int n = 2 + static_cast<int>(rng() % 8);
        const int m = static_cast<int>(rng() % 20);
        for (int i = 0; i < m; ++i) {
            int a = static_cast<int>(rng() % n);
            int b = static_cast<int>(rng() % n);
            if (a == b) continue;
            json rec{{"parent", "s" + std::to_string(a)}, {"child", "s" + std::to_string(b)}};
            if (rng() % 2) rec["callCount"] = rng() % 100;
            doc.push_back(rec);
        }
        auto once = parse_dependencies(doc);
        auto twice = parse_dependencies(serialize_dependencies(once));
        EXPECT_EQ(once, twice);
    }
}

namespace {

// Reachability straight off the edge list, no graph class involved.
std::set<std::string> bfs(const std::multimap<std::string, std::string>& edges,
                          const std::string& from) {
    std::set<std::string> seen{from};
    std::queue<std::string> q;
    q.push(from);
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        auto [lo, hi] = edges.equal_range(u);
        for (auto it = lo; it != hi; ++it) {
            if (seen.insert(it->second).second) q.push(it->second);
        }
    }
    return seen;
}

}  // namespace

TEST(BuiltinGraph, TwelveServicesAllReachableAndAcyclic) {
    const auto& g = builtin_socialnetwork_graph();
    EXPECT_EQ(g.node_count(), 12u);

    std::multimap<std::string, std::string> edges;
    for (const auto& e : g.edges()) edges.emplace(e.caller, e.callee);
    EXPECT_EQ(bfs(edges, "nginx-web-server").size(), 12u);

    auto d = validate_graph(g, "nginx-web-server");
    EXPECT_FALSE(d.missing_entry);
    EXPECT_TRUE(d.unreachable_nodes.empty());
    EXPECT_FALSE(d.cycles_present);
}

TEST(BuiltinGraph, ContainsNarratedCalls) {
    const auto& g = builtin_socialnetwork_graph();
    EXPECT_TRUE(g.has_edge("nginx-web-server", "compose-post-service"));
    EXPECT_TRUE(g.has_edge("home-timeline-service", "post-storage-service"));
    EXPECT_TRUE(g.has_edge("home-timeline-service", "social-graph-service"));
    EXPECT_TRUE(g.has_edge("text-service", "url-shorten-service"));
    EXPECT_TRUE(g.has_edge("text-service", "user-mention-service"));
    EXPECT_FALSE(g.has_edge("post-storage-service", "nginx-web-server"));
}

TEST(ValidateGraph, MissingEntry) {
    auto g = DependencyGraph::from_edges({{"A", "B"}});
    auto d = validate_graph(g, "C");
    EXPECT_TRUE(d.missing_entry);
    EXPECT_EQ(d.unreachable_nodes, (std::set<std::string>{"A", "B"}));
}

TEST(ValidateGraph, TwoCycle) {
    auto g = DependencyGraph::from_edges({{"A", "B"}, {"B", "A"}});
    auto d = validate_graph(g, "A");
    EXPECT_TRUE(d.cycles_present);
    EXPECT_TRUE(d.unreachable_nodes.empty());
}

TEST(ValidateGraph, UnreachablePartitionsNodes) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 9);
        std::vector<Edge> edges;
        std::vector<std::string> nodes;
        for (int i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
        for (int i = 0; i < 2 * n; ++i) {
            int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
            if (a != b) edges.push_back({nodes[a], nodes[b]});
        }
        DependencyGraph g(nodes, edges);
        std::multimap<std::string, std::string> em;
        for (const auto& e : g.edges()) em.emplace(e.caller, e.callee);
        auto reached = bfs(em, "n0");
        auto d = validate_graph(g, "n0");
        for (const auto& node : g.nodes()) {
            EXPECT_NE(reached.contains(node), d.unreachable_nodes.contains(node)) << node;
        }
    }
}

class FetchDependencies : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Get("/api/dependencies", [this](const httplib::Request& req, httplib::Response& res) {
            last_query_ = req.get_param_value("endTs") + "/" + req.get_param_value("lookback");
            res.set_content(
                R"([{"parent":"a","child":"b","callCount":1},{"parent":"b","child":"c","callCount":2},{"parent":"a","child":"c","callCount":3}])",
                "application/json");
        });
        server_.Get("/jaeger/api/dependencies", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"data":[{"parent":"x","child":"y"}]})", "application/json");
        });
        server_.Get("/broken/api/dependencies", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
        server_.Get("/garbage/api/dependencies", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json", "text/plain");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    void TearDown() override {
        server_.stop();
        thread_.join();
    }

    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string last_query_;
};

TEST_F(FetchDependencies, ReturnsDocumentAndSendsMillis) {
    auto doc = fetch_dependencies(base(), 60'000, 1'700'000'000'000);
    ASSERT_TRUE(doc.is_array());
    EXPECT_EQ(doc.size(), 3u);
    EXPECT_EQ(last_query_, "1700000000000/60000");
    EXPECT_EQ(parse_dependencies(doc).edge_count(), 3u);
}

TEST_F(FetchDependencies, PathPrefixAndDataEnvelope) {
    auto doc = fetch_dependencies(base() + "/jaeger/", 1000, 1);
    ASSERT_EQ(doc.size(), 1u);
    EXPECT_EQ(doc[0]["parent"], "x");
}

TEST_F(FetchDependencies, ServerErrorCarriesStatus) {
    try {
        fetch_dependencies(base() + "/broken", 1000, 1);
        FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
        EXPECT_EQ(e.status(), 500);
        EXPECT_NE(e.url().find("/broken/api/dependencies"), std::string::npos);
    }
}

TEST_F(FetchDependencies, NonJsonBody) {
    EXPECT_THROW(fetch_dependencies(base() + "/garbage", 1000, 1), TransportError);
}

TEST_F(FetchDependencies, RejectsNonPositiveLookback) {
    EXPECT_THROW(fetch_dependencies(base(), 0, 1), std::invalid_argument);
}

TEST(FetchDependenciesOffline, UnreachableHost) {
    // Nothing listens on port 1 here, so the connection is refused.
    try {
        fetch_dependencies("http://127.0.0.1:1", 1000, 1);
        FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
        EXPECT_EQ(e.status(), 0);
    }
}
