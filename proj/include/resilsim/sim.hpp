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

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "resilsim/graph.hpp"
#include "resilsim/rng.hpp"
#include "resilsim/scenario.hpp"

namespace resilsim {

struct FailureSample {
    std::vector<ContainerInstance> failed_containers;
    /// Services with no surviving replica.
    std::set<ServiceName> failed_services;
};

/// Partial Fisher-Yates over [0, fleet_size): after the call the first k
/// entries of `positions` are the victims, uniformly without replacement.
/// `positions` is resized and reset to the identity permutation first.
void select_victims(std::size_t fleet_size, std::size_t k, SampleStream& rng,
                    std::vector<std::uint32_t>& positions);

/// Kills exactly k containers. Throws std::invalid_argument if k > |fleet|.
FailureSample sample_failures(std::span<const ContainerInstance> fleet, std::size_t k,
                              SampleStream& rng);

/// Base targets plus each conditional target whose uniform draw falls below
/// its inclusion probability. Draws one uniform per conditional, in order.
std::set<ServiceName> resolve_targets(const EndpointProfile& profile, SampleStream& rng);

/// True iff the entry is alive and every target is reachable from it through
/// alive services.
bool endpoint_success(const DependencyGraph& g, const std::set<ServiceName>& alive,
                      std::string_view entry, const std::set<ServiceName>& targets);

struct EndpointAvailability {
    std::string endpoint;
    std::uint64_t successes = 0;
    std::uint64_t samples = 0;
    double availability = 0.0;
    double weight = 0.0;
};

struct ResilienceReport {
    /// Pooled over all rounds.
    std::vector<EndpointAvailability> per_endpoint;
    double r_model = 0.0;
    /// r_model of each round.
    std::vector<double> round_values;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t fleet_size = 0;
    std::size_t kill_count = 0;
};

/// Runs `rounds` x `samples_per_round` samples. Each sample draws from a
/// SampleStream keyed by (master_seed, round, sample), so the report is
/// identical for any `workers` value.
ResilienceReport run_monte_carlo(const DependencyGraph& g, const DeploymentScenario& scenario,
                                 const std::vector<EndpointProfile>& profiles,
                                 const FailureConfig& failure, unsigned workers = 1);

struct RoundStats {
    double mean = 0.0;
    double sd = 0.0;
};

/// Arithmetic mean and n-1 sample SD (0 for a single value).
RoundStats aggregate_rounds(std::span<const double> values);

/// Sum of availability x weight over endpoints.
double weighted_resilience(std::span<const EndpointAvailability> endpoints);

nlohmann::json report_to_json(const ResilienceReport& report);
ResilienceReport report_from_json(const nlohmann::json& doc);

}  // namespace resilsim
