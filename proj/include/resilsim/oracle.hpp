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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "resilsim/graph.hpp"
#include "resilsim/scenario.hpp"
#include "resilsim/sim.hpp"

namespace resilsim {

inline constexpr std::uint64_t kDefaultStateLimit = 100'000'000;
inline constexpr double kAgreementSigmas = 4.0;

struct ExactEndpoint {
    std::string endpoint;
    double availability = 0.0;
    double weight = 0.0;
};

struct ExactResult {
    std::vector<ExactEndpoint> per_endpoint;
    double r_model_exact = 0.0;
    /// Kill sets times conditional combinations actually evaluated.
    std::uint64_t enumerated_states = 0;
    std::uint64_t kill_sets = 0;
    std::size_t fleet_size = 0;
    std::size_t kill_count = 0;
};

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Exhaustive counterpart of run_monte_carlo: every K-subset of the fleet,
/// and for each endpoint every subset of its conditional targets weighted by
/// its inclusion probability. No randomness is involved.
///
/// Refuses with StateLimitError when C(fleet, K) * 2^(max conditionals)
/// exceeds `state_limit`. Results do not depend on `workers`.
ExactResult exact_resilience(const DependencyGraph& g, const DeploymentScenario& scenario,
                             const std::vector<EndpointProfile>& profiles, double p_fail,
                             std::uint64_t state_limit = kDefaultStateLimit, unsigned workers = 1);

nlohmann::json exact_to_json(const ExactResult& result);
ExactResult exact_from_json(const nlohmann::json& doc);

struct EndpointDeviation {
    std::string endpoint;
    double exact = 0.0;
    double estimate = 0.0;
    double deviation = 0.0;
    std::uint64_t samples = 0;
    /// |deviation| / sqrt(p(1-p)/N); 0 when both are degenerate and equal,
    /// +inf when the exact value is degenerate and the estimate differs.
    double z = 0.0;
    bool pass = false;
};

struct OracleComparison {
    std::vector<EndpointDeviation> endpoints;
    bool all_pass = true;
};

/// Throws std::invalid_argument if the endpoint lists differ.
OracleComparison exact_vs_mc_report(const ExactResult& exact, const ResilienceReport& mc);

nlohmann::json oracle_comparison_to_json(const OracleComparison& cmp);

}  // namespace resilsim
