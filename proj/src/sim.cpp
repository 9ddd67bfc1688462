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

#include "resilsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "resilsim/errors.hpp"
#include "resilsim/model.hpp"

namespace resilsim {

void select_victims(std::size_t fleet_size, std::size_t k, SampleStream& rng,
                    std::vector<std::uint32_t>& positions) {
    if (k > fleet_size) throw std::invalid_argument("kill count exceeds fleet size");
    positions.resize(fleet_size);
    std::iota(positions.begin(), positions.end(), 0U);
    for (std::size_t i = 0; i < k; ++i) {
        auto j = i + static_cast<std::size_t>(rng.below(fleet_size - i));
        std::swap(positions[i], positions[j]);
    }
}

FailureSample sample_failures(std::span<const ContainerInstance> fleet, std::size_t k,
                              SampleStream& rng) {
    std::vector<std::uint32_t> positions;
    select_victims(fleet.size(), k, rng, positions);

    FailureSample out;
    std::map<ServiceName, std::uint32_t> remaining;
    for (const auto& c : fleet) ++remaining[c.service];
    for (std::size_t i = 0; i < k; ++i) {
        const auto& victim = fleet[positions[i]];
        out.failed_containers.push_back(victim);
        if (--remaining[victim.service] == 0) out.failed_services.insert(victim.service);
    }
    return out;
}

std::set<ServiceName> resolve_targets(const EndpointProfile& profile, SampleStream& rng) {
    auto targets = profile.base_targets;
    for (const auto& c : profile.conditional_targets) {
        if (rng.uniform() < c.inclusion_probability) targets.insert(c.service);
    }
    return targets;
}

bool endpoint_success(const DependencyGraph& g, const std::set<ServiceName>& alive,
                      std::string_view entry, const std::set<ServiceName>& targets) {
    auto entry_idx = g.index_of(entry);
    if (!entry_idx) throw std::invalid_argument("entry '" + std::string(entry) + "' not in graph");
    std::vector<bool> allowed(g.node_count(), false);
    for (const auto& s : alive) {
        if (auto i = g.index_of(s)) allowed[*i] = true;
    }
    if (!allowed[*entry_idx]) return false;
    const auto reached = reachable_from(g, *entry_idx, allowed);
    for (const auto& t : targets) {
        auto i = g.index_of(t);
        if (!i) throw std::invalid_argument("target '" + t + "' not in graph");
        if (!reached[*i]) return false;
    }
    return true;
}

namespace {

// Successes per endpoint over samples [begin, end) of one round.
void simulate_range(const CompiledModel& model, std::size_t k, std::uint64_t seed,
                    std::uint64_t round, std::uint64_t begin, std::uint64_t end,
                    std::vector<std::uint64_t>& successes) {
    StateEvaluator eval(model);
    std::vector<std::uint32_t> positions;
    const auto& endpoints = model.endpoints;
    for (std::uint64_t i = begin; i < end; ++i) {
        SampleStream rng(seed, round, i);
        select_victims(model.fleet_size(), k, rng, positions);
        eval.load(std::span(positions.data(), k));
        for (std::size_t e = 0; e < endpoints.size(); ++e) {
            const auto& ep = endpoints[e];
            bool ok = eval.all_reached(ep.base);
            // Every conditional draw is consumed even after a failure.
            for (std::size_t c = 0; c < ep.conditional.size(); ++c) {
                if (rng.uniform() < ep.probability[c]) ok = ok && eval.reached(ep.conditional[c]);
            }
            ok = ok && eval.reached(model.entry);
            successes[e] += ok ? 1 : 0;
        }
    }
}

}  // namespace

ResilienceReport run_monte_carlo(const DependencyGraph& g, const DeploymentScenario& scenario,
                                 const std::vector<EndpointProfile>& profiles,
                                 const FailureConfig& failure, unsigned workers) {
    if (failure.samples_per_round == 0) throw std::invalid_argument("samples must be positive");
    if (failure.rounds == 0) throw std::invalid_argument("rounds must be positive");
    if (!g.contains(scenario.entry)) {
        throw ConfigError("entry: service '" + scenario.entry + "' is not in the graph");
    }
    validate_scenario(g, scenario, profiles, failure);
    const auto model = compile_model(g, scenario, profiles);
    const std::size_t k = kill_count(model.fleet_size(), failure.p_fail);
    const std::size_t n_endpoints = profiles.size();
    const std::uint64_t n = failure.samples_per_round;
    workers = std::max(1U, workers);

    ResilienceReport report;
    report.fleet_size = model.fleet_size();
    report.kill_count = k;
    std::vector<std::uint64_t> pooled(n_endpoints, 0);

    for (std::uint32_t round = 0; round < failure.rounds; ++round) {
        std::vector<std::vector<std::uint64_t>> partial(workers,
                                                        std::vector<std::uint64_t>(n_endpoints, 0));
        auto range = [&](unsigned w) {
            return std::pair{n * w / workers, n * (w + 1) / workers};
        };
        if (workers == 1) {
            simulate_range(model, k, failure.master_seed, round, 0, n, partial[0]);
        } else {
            std::vector<std::jthread> threads;
            for (unsigned w = 0; w < workers; ++w) {
                threads.emplace_back([&, w] {
                    auto [b, e] = range(w);
                    simulate_range(model, k, failure.master_seed, round, b, e, partial[w]);
                });
            }
        }

        double r = 0.0;
        for (std::size_t e = 0; e < n_endpoints; ++e) {
            std::uint64_t s = 0;
            for (const auto& p : partial) s += p[e];
            pooled[e] += s;
            r += static_cast<double>(s) / static_cast<double>(n) * profiles[e].weight;
        }
        report.round_values.push_back(r);
    }

    const auto total = n * failure.rounds;
    for (std::size_t e = 0; e < n_endpoints; ++e) {
        report.per_endpoint.push_back({profiles[e].name, pooled[e], total,
                                       static_cast<double>(pooled[e]) / static_cast<double>(total),
                                       profiles[e].weight});
    }
    report.r_model = weighted_resilience(report.per_endpoint);
    auto stats = aggregate_rounds(report.round_values);
    report.mean = stats.mean;
    report.sd = stats.sd;
    return report;
}

RoundStats aggregate_rounds(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("aggregate_rounds: no values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

double weighted_resilience(std::span<const EndpointAvailability> endpoints) {
    double r = 0.0;
    for (const auto& e : endpoints) r += e.availability * e.weight;
    return r;
}

nlohmann::json report_to_json(const ResilienceReport& report) {
    auto endpoints = nlohmann::json::array();
    for (const auto& e : report.per_endpoint) {
        endpoints.push_back({{"endpoint", e.endpoint},
                             {"successes", e.successes},
                             {"samples", e.samples},
                             {"availability", e.availability},
                             {"weight", e.weight}});
    }
    return {{"per_endpoint", endpoints},
            {"r_model", report.r_model},
            {"round_values", report.round_values},
            {"mean", report.mean},
            {"sd", report.sd},
            {"fleet_size", report.fleet_size},
            {"kill_count", report.kill_count}};
}

ResilienceReport report_from_json(const nlohmann::json& doc) {
    try {
        ResilienceReport r;
        for (const auto& e : doc.at("per_endpoint")) {
            r.per_endpoint.push_back({e.at("endpoint").get<std::string>(),
                                      e.at("successes").get<std::uint64_t>(),
                                      e.at("samples").get<std::uint64_t>(),
                                      e.at("availability").get<double>(),
                                      e.at("weight").get<double>()});
        }
        r.r_model = doc.at("r_model").get<double>();
        r.round_values = doc.at("round_values").get<std::vector<double>>();
        r.mean = doc.at("mean").get<double>();
        r.sd = doc.at("sd").get<double>();
        r.fleet_size = doc.value("fleet_size", std::size_t{0});
        r.kill_count = doc.value("kill_count", std::size_t{0});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("resilience report: ") + e.what());
    }
}

}  // namespace resilsim
