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
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "resilsim/errors.hpp"
#include "resilsim/scenario.hpp"

using namespace resilsim;
using nlohmann::json;

namespace {

std::string config_error(const json& doc) {
    try {
        load_scenario(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "no error";
}

json small_config() {
    return json::parse(R"({
        "graph": [{"parent":"gw","child":"a"},{"parent":"a","child":"b"}],
        "entry": "gw",
        "replicas": {"a": 2},
        "endpoints": [
            {"name":"read","targets":["a"],"weight":0.5},
            {"name":"write","targets":["a","b"],"conditional":[{"service":"b","p":0.25}],"weight":0.5}
        ],
        "failure": {"p_fail": 0.25, "samples": 100, "rounds": 2, "seed": 9}
    })");
}

}  // namespace

TEST(BuiltinProfiles, MatchPublishedTargets) {
    auto p = builtin_profiles();
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].name, "home-timeline");
    EXPECT_EQ(p[0].base_targets,
              (std::set<std::string>{"home-timeline-service", "post-storage-service",
                                     "social-graph-service"}));
    EXPECT_TRUE(p[1].conditional_targets.empty());
    EXPECT_EQ(p[1].base_targets,
              (std::set<std::string>{"user-timeline-service", "post-storage-service"}));
    EXPECT_EQ(p[2].base_targets.size(), 8u);
    ASSERT_EQ(p[2].conditional_targets.size(), 3u);
    EXPECT_EQ(p[2].conditional_targets[0].service, "media-service");
    EXPECT_DOUBLE_EQ(p[2].conditional_targets[0].inclusion_probability, 4.0 / 5.0);
    EXPECT_DOUBLE_EQ(p[2].conditional_targets[1].inclusion_probability, 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(p[2].conditional_targets[2].inclusion_probability, 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(p[0].weight, 0.6);
    EXPECT_DOUBLE_EQ(p[1].weight, 0.3);
    EXPECT_DOUBLE_EQ(p[2].weight, 0.1);
    EXPECT_NEAR(p[0].weight + p[1].weight + p[2].weight, 1.0, kWeightSumTolerance);
}

TEST(LoadScenario, BuiltinNoRepl) {
    auto c = load_scenario(json{{"scenario", "norepl"}});
    EXPECT_EQ(c.scenario.replicas.size(), 12u);
    for (const auto& [name, n] : c.scenario.replicas) EXPECT_EQ(n, 1u) << name;
    EXPECT_EQ(c.scenario.entry, "nginx-web-server");
    EXPECT_EQ(c.profiles, builtin_profiles());
}

TEST(LoadScenario, BuiltinRepl) {
    auto c = load_scenario(json{{"scenario", "repl"}});
    const std::set<std::string> tripled = {"compose-post-service", "home-timeline-service",
                                           "user-timeline-service", "text-service",
                                           "media-service"};
    for (const auto& [name, n] : c.scenario.replicas) {
        EXPECT_EQ(n, tripled.contains(name) ? 3u : 1u) << name;
    }
}

TEST(LoadScenario, UnspecifiedReplicasDefaultToOne) {
    auto c = load_scenario(small_config());
    EXPECT_EQ(c.scenario.replicas.at("gw"), 1u);
    EXPECT_EQ(c.scenario.replicas.at("a"), 2u);
    EXPECT_EQ(c.scenario.replicas.at("b"), 1u);
    EXPECT_EQ(c.failure.master_seed, 9u);
    EXPECT_EQ(c.failure.samples_per_round, 100u);
}

TEST(LoadScenario, RejectsWeightSumOtherThanOne) {
    auto doc = json{{"scenario", "norepl"}};
    doc["endpoints"] = json::array();
    for (auto [name, w] : {std::pair{"a", 0.6}, {"b", 0.3}, {"c", 0.2}}) {
        doc["endpoints"].push_back({{"name", name}, {"targets", {"user-service"}}, {"weight", w}});
    }
    EXPECT_NE(config_error(doc).find("weights sum"), std::string::npos);
}

TEST(LoadScenario, ErrorsNameFieldOrService) {
    auto doc = small_config();
    doc["endpoints"][0]["targets"] = {"ghost"};
    EXPECT_NE(config_error(doc).find("ghost"), std::string::npos);

    doc = small_config();
    doc["replicas"]["phantom"] = 2;
    EXPECT_NE(config_error(doc).find("phantom"), std::string::npos);

    doc = small_config();
    doc["replicas"]["a"] = 0;
    EXPECT_NE(config_error(doc).find("replicas.a"), std::string::npos);

    doc = small_config();
    doc["endpoints"][1]["conditional"][0]["p"] = 1.5;
    EXPECT_NE(config_error(doc).find("conditional.p"), std::string::npos);

    doc = small_config();
    doc["failure"]["p_fail"] = -0.1;
    EXPECT_NE(config_error(doc).find("failure.p_fail"), std::string::npos);

    doc = small_config();
    doc["failure"]["samples"] = 0;
    EXPECT_NE(config_error(doc).find("failure.samples"), std::string::npos);

    doc = small_config();
    doc["entry"] = "nowhere";
    EXPECT_NE(config_error(doc).find("entry"), std::string::npos);

    doc = small_config();
    doc.erase("endpoints");
    EXPECT_NE(config_error(doc).find("endpoints"), std::string::npos);

    doc = small_config();
    doc["surprise"] = 1;
    EXPECT_NE(config_error(doc).find("surprise"), std::string::npos);

    EXPECT_NE(config_error(json{{"scenario", "triple"}}).find("scenario"), std::string::npos);
}

TEST(LoadScenario, GraphPathIsRelativeToBaseDir) {
    auto dir = std::filesystem::temp_directory_path() / "resilsim_scenario_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "deps.json");
        out << R"([{"parent":"gw","child":"a"}])";
    }
    json doc{{"graph", "deps.json"},
             {"entry", "gw"},
             {"endpoints", {{{"name", "e"}, {"targets", {"a"}}, {"weight", 1.0}}}}};
    auto c = load_scenario(doc, dir);
    EXPECT_EQ(c.graph.node_count(), 2u);
    EXPECT_THROW(load_scenario(doc, dir / "elsewhere"), ConfigError);
}

TEST(LoadScenario, SerializeRoundTrips) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto c = load_scenario(small_config());
        c.scenario.replicas["a"] = 1 + static_cast<std::uint32_t>(rng() % 4);
        c.scenario.replicas["b"] = 1 + static_cast<std::uint32_t>(rng() % 4);
        c.profiles[1].conditional_targets[0].inclusion_probability =
            std::uniform_real_distribution<double>(0, 1)(rng);
        const double w = std::uniform_real_distribution<double>(0, 1)(rng);
        c.profiles[0].weight = w;
        c.profiles[1].weight = 1.0 - w;
        c.failure.master_seed = rng();
        c.failure.p_fail = std::uniform_real_distribution<double>(0, 1)(rng);
        if (rng() % 2) c.scenario.excluded.insert("gw");
        EXPECT_EQ(load_scenario(serialize_scenario(c)), c);
    }
    auto builtin = builtin_config("repl");
    EXPECT_EQ(load_scenario(serialize_scenario(builtin)), builtin);
}

TEST(ContainerFleet, BuiltinSizes) {
    EXPECT_EQ(container_fleet(builtin_norepl_scenario()).size(), 12u);
    EXPECT_EQ(container_fleet(builtin_repl_scenario()).size(), 22u);
}

TEST(ContainerFleet, SingleServiceOrdering) {
    DeploymentScenario s{{{"A", 2}}, "A", {}};
    auto fleet = container_fleet(s);
    ASSERT_EQ(fleet.size(), 2u);
    EXPECT_EQ(fleet[0], (ContainerInstance{"A", 0}));
    EXPECT_EQ(fleet[1], (ContainerInstance{"A", 1}));
}

TEST(ContainerFleet, SortedByNameThenReplica) {
    auto fleet = container_fleet(builtin_repl_scenario());
    EXPECT_TRUE(std::is_sorted(fleet.begin(), fleet.end()));
    EXPECT_EQ(fleet.front().service, "compose-post-service");
    EXPECT_EQ(fleet.back().service, "user-timeline-service");
    EXPECT_EQ(fleet.back().replica_index, 2u);
}

TEST(ContainerFleet, ExcludedServicesLeaveTheFleet) {
    auto s = builtin_norepl_scenario();
    s.excluded.insert("nginx-web-server");
    auto fleet = container_fleet(s);
    EXPECT_EQ(fleet.size(), 11u);
    for (const auto& c : fleet) EXPECT_NE(c.service, "nginx-web-server");
}

TEST(KillCount, Examples) {
    EXPECT_EQ(kill_count(12, 0.30), 4u);
    EXPECT_EQ(kill_count(22, 0.30), 7u);
    EXPECT_EQ(kill_count(10, 0.0), 0u);
    EXPECT_EQ(kill_count(10, 1.0), 10u);
}

TEST(KillCount, TiesRoundToEven) {
    EXPECT_EQ(kill_count(5, 0.5), 2u);    // 2.5
    EXPECT_EQ(kill_count(14, 0.25), 4u);  // 3.5
    EXPECT_EQ(kill_count(10, 0.25), 2u);  // 2.5
    EXPECT_EQ(kill_count(2, 0.25), 0u);   // 0.5
}

TEST(KillCount, MonotoneAndBounded) {
    for (std::size_t n = 1; n <= 60; ++n) {
        std::size_t prev = 0;
        for (int i = 0; i <= 100; ++i) {
            const double p = i / 100.0;
            const auto k = kill_count(n, p);
            EXPECT_LE(k, n);
            EXPECT_GE(k, prev);
            EXPECT_GE(kill_count(n + 1, p), k);
            prev = k;
        }
    }
}
