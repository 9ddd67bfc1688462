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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "resilsim/graph.hpp"

namespace resilsim {

/// Replica counts per service plus the request entry point.
/// Services listed in `excluded` stay in the graph but are never killed.
struct DeploymentScenario {
    std::map<ServiceName, std::uint32_t> replicas;
    ServiceName entry;
    std::set<ServiceName> excluded;

    bool operator==(const DeploymentScenario&) const = default;
};

struct ContainerInstance {
    ServiceName service;
    std::uint32_t replica_index = 0;

    auto operator<=>(const ContainerInstance&) const = default;
};

struct ConditionalTarget {
    ServiceName service;
    double inclusion_probability = 0.0;

    bool operator==(const ConditionalTarget&) const = default;
};

struct EndpointProfile {
    std::string name;
    std::set<ServiceName> base_targets;
    /// Drawn in declared order, one uniform each.
    std::vector<ConditionalTarget> conditional_targets;
    double weight = 0.0;

    bool operator==(const EndpointProfile&) const = default;
};

struct FailureConfig {
    double p_fail = 0.30;
    std::uint64_t samples_per_round = 4'500'000;
    std::uint32_t rounds = 16;
    std::uint64_t master_seed = 0;

    bool operator==(const FailureConfig&) const = default;
};

/// A fully validated simulation input.
struct ScenarioConfig {
    std::string name;
    DependencyGraph graph;
    DeploymentScenario scenario;
    std::vector<EndpointProfile> profiles;
    FailureConfig failure;

    bool operator==(const ScenarioConfig&) const = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;

/// home-timeline (0.6), user-timeline (0.3), compose-post (0.1).
std::vector<EndpointProfile> builtin_profiles();

/// Every built-in service with one replica.
DeploymentScenario builtin_norepl_scenario();

/// compose-post, home-timeline, user-timeline, text and media services at
/// three replicas; everything else at one.
DeploymentScenario builtin_repl_scenario();

/// "norepl" or "repl" on the built-in graph with built-in profiles and the
/// default FailureConfig. Throws ConfigError for other names.
ScenarioConfig builtin_config(std::string_view scenario);

/// Parses and validates a config document. A string-valued "graph" other
/// than "builtin" is resolved relative to `base_dir`. Throws ConfigError
/// naming the offending field or service, or ParseError from the graph file.
ScenarioConfig load_scenario(const nlohmann::json& document,
                             const std::filesystem::path& base_dir = {});

/// Self-contained config document (graph embedded inline) that
/// load_scenario accepts and maps back to an equal ScenarioConfig.
nlohmann::json serialize_scenario(const ScenarioConfig& config);

/// Throws ConfigError if the pieces are inconsistent with each other.
void validate_scenario(const DependencyGraph& graph, const DeploymentScenario& scenario,
                       const std::vector<EndpointProfile>& profiles,
                       const FailureConfig& failure);

/// Killable containers, services in ascending name order, replicas ascending.
std::vector<ContainerInstance> container_fleet(const DeploymentScenario& scenario);

/// round-half-to-even(p_fail * fleet_size), clamped to [0, fleet_size].
std::size_t kill_count(std::size_t fleet_size, double p_fail);

}  // namespace resilsim
