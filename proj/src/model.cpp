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

#include "resilsim/model.hpp"

#include <algorithm>
#include <limits>

#include "resilsim/errors.hpp"

namespace resilsim {

CompiledModel compile_model(const DependencyGraph& graph, const DeploymentScenario& scenario,
                            const std::vector<EndpointProfile>& profiles) {
    validate_scenario(graph, scenario, profiles, FailureConfig{});

    auto index = [&](const ServiceName& s) { return static_cast<std::uint32_t>(*graph.index_of(s)); };

    for (const auto& n : graph.nodes()) {
        if (!scenario.replicas.contains(n)) {
            throw ConfigError("replicas: service '" + n + "' has no replica count");
        }
    }

    CompiledModel m;
    m.graph = &graph;
    m.entry = index(scenario.entry);
    m.initial_replicas.assign(graph.node_count(), 1);
    for (const auto& [name, count] : scenario.replicas) m.initial_replicas[index(name)] = count;
    for (const auto& name : scenario.excluded) {
        m.initial_replicas[index(name)] = std::numeric_limits<std::uint32_t>::max();
    }
    for (const auto& c : container_fleet(scenario)) m.fleet_service.push_back(index(c.service));

    for (const auto& p : profiles) {
        CompiledModel::Endpoint e;
        for (const auto& t : p.base_targets) e.base.push_back(index(t));
        for (const auto& c : p.conditional_targets) {
            e.conditional.push_back(index(c.service));
            e.probability.push_back(c.inclusion_probability);
        }
        e.weight = p.weight;
        m.endpoints.push_back(std::move(e));
    }
    return m;
}

StateEvaluator::StateEvaluator(const CompiledModel& model)
    : model_(&model),
      remaining_(model.initial_replicas.size()),
      alive_(model.initial_replicas.size()),
      reached_(model.initial_replicas.size()) {
    stack_.reserve(model.initial_replicas.size());
}

void StateEvaluator::load(std::span<const std::uint32_t> killed_positions) {
    const auto& m = *model_;
    const std::size_t n = m.initial_replicas.size();
    std::copy(m.initial_replicas.begin(), m.initial_replicas.end(), remaining_.begin());
    for (auto pos : killed_positions) --remaining_[m.fleet_service[pos]];
    for (std::size_t i = 0; i < n; ++i) {
        alive_[i] = remaining_[i] != 0;
        reached_[i] = 0;
    }

    if (!alive_[m.entry]) return;
    stack_.clear();
    stack_.push_back(m.entry);
    reached_[m.entry] = 1;
    while (!stack_.empty()) {
        auto u = stack_.back();
        stack_.pop_back();
        for (auto v : m.graph->successors(u)) {
            if (alive_[v] && !reached_[v]) {
                reached_[v] = 1;
                stack_.push_back(static_cast<std::uint32_t>(v));
            }
        }
    }
}

}  // namespace resilsim
