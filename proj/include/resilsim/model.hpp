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
#include <span>
#include <vector>

#include "resilsim/graph.hpp"
#include "resilsim/scenario.hpp"

namespace resilsim {

/// Index-based form of (graph, scenario, profiles) shared by the sampler and
/// the exact enumerator. Holds a reference to the graph, which must outlive it.
struct CompiledModel {
    struct Endpoint {
        std::vector<std::uint32_t> base;
        std::vector<std::uint32_t> conditional;
        std::vector<double> probability;
        double weight = 0.0;
    };

    const DependencyGraph* graph = nullptr;
    std::uint32_t entry = 0;
    /// Service index of each killable container, in container_fleet order.
    std::vector<std::uint32_t> fleet_service;
    /// Live replica count per service before any kill. Excluded services get
    /// a count that no kill set can exhaust.
    std::vector<std::uint32_t> initial_replicas;
    std::vector<Endpoint> endpoints;

    std::size_t fleet_size() const noexcept { return fleet_service.size(); }
};

/// Throws ConfigError if the inputs do not validate.
CompiledModel compile_model(const DependencyGraph& graph, const DeploymentScenario& scenario,
                            const std::vector<EndpointProfile>& profiles);

/// Per-worker scratch for evaluating one failure state.
class StateEvaluator {
public:
    explicit StateEvaluator(const CompiledModel& model);

    /// Marks the given fleet positions dead and recomputes the set of
    /// services reachable from the entry through alive services.
    void load(std::span<const std::uint32_t> killed_positions);

    bool reached(std::uint32_t service) const noexcept { return reached_[service] != 0; }

    bool all_reached(std::span<const std::uint32_t> services) const noexcept {
        for (auto s : services) {
            if (!reached_[s]) return false;
        }
        return true;
    }

    bool service_alive(std::uint32_t service) const noexcept { return alive_[service] != 0; }

private:
    const CompiledModel* model_;
    std::vector<std::uint32_t> remaining_;
    std::vector<std::uint8_t> alive_;
    std::vector<std::uint8_t> reached_;
    std::vector<std::uint32_t> stack_;
};

}  // namespace resilsim
