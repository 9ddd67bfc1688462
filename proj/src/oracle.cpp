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

#include "resilsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "resilsim/errors.hpp"
#include "resilsim/model.hpp"

namespace resilsim {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();
// Fixed partition of the kill-set space. Keeping it independent of the
// worker count keeps the floating-point merge order fixed.
constexpr std::uint64_t kChunks = 64;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    return p > kSaturated ? kSaturated : static_cast<std::uint64_t>(p);
}

// Lexicographic combination of rank `rank` among C(n, k).
std::vector<std::uint32_t> unrank_combination(std::uint64_t rank, std::uint32_t n,
                                              std::uint32_t k) {
    std::vector<std::uint32_t> out;
    out.reserve(k);
    std::uint32_t next = 0;
    for (std::uint32_t slot = 0; slot < k; ++slot) {
        for (;; ++next) {
            auto below = binomial(n - next - 1, k - slot - 1);
            if (rank < below) break;
            rank -= below;
        }
        out.push_back(next++);
    }
    return out;
}

bool next_combination(std::vector<std::uint32_t>& c, std::uint32_t n) {
    const auto k = static_cast<std::uint32_t>(c.size());
    for (std::uint32_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (auto j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Probability of each conditional subset, indexed by inclusion bitmask.
std::vector<double> subset_weights(const std::vector<double>& p) {
    std::vector<double> w(std::size_t{1} << p.size(), 1.0);
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            w[mask] *= (mask >> i & 1U) ? p[i] : 1.0 - p[i];
        }
    }
    return w;
}

struct ChunkSums {
    std::vector<double> weighted_successes;
};

ChunkSums enumerate_chunk(const CompiledModel& model, std::uint32_t k, std::uint64_t first,
                          std::uint64_t last, const std::vector<std::vector<double>>& weights) {
    ChunkSums out{std::vector<double>(model.endpoints.size(), 0.0)};
    if (first >= last) return out;
    const auto n = static_cast<std::uint32_t>(model.fleet_size());
    StateEvaluator eval(model);
    auto combo = unrank_combination(first, n, k);
    for (std::uint64_t rank = first; rank < last; ++rank) {
        eval.load(combo);
        for (std::size_t e = 0; e < model.endpoints.size(); ++e) {
            const auto& ep = model.endpoints[e];
            const auto& w = weights[e];
            if (!eval.reached(model.entry)) continue;
            const bool base_ok = eval.all_reached(ep.base);
            double sum = 0.0;
            for (std::size_t mask = 0; mask < w.size(); ++mask) {
                bool ok = base_ok;
                for (std::size_t i = 0; ok && i < ep.conditional.size(); ++i) {
                    if (mask >> i & 1U) ok = eval.reached(ep.conditional[i]);
                }
                if (ok) sum += w[mask];
            }
            out.weighted_successes[e] += sum;
        }
        if (rank + 1 < last) next_combination(combo, n);
    }
    return out;
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        c = c * (n - i) / (i + 1);
        if (c > kSaturated) return kSaturated;
    }
    return static_cast<std::uint64_t>(c);
}

ExactResult exact_resilience(const DependencyGraph& g, const DeploymentScenario& scenario,
                             const std::vector<EndpointProfile>& profiles, double p_fail,
                             std::uint64_t state_limit, unsigned workers) {
    if (!(p_fail >= 0.0 && p_fail <= 1.0)) throw std::invalid_argument("p_fail outside [0, 1]");
    const auto model = compile_model(g, scenario, profiles);
    const std::size_t fleet = model.fleet_size();
    const std::size_t k = kill_count(fleet, p_fail);
    if (k > fleet) throw std::invalid_argument("kill count exceeds fleet size");

    std::size_t max_conditionals = 0;
    for (const auto& e : model.endpoints) {
        max_conditionals = std::max(max_conditionals, e.conditional.size());
    }
    const auto kill_sets = binomial(fleet, k);
    const auto states = max_conditionals >= 63
                            ? kSaturated
                            : saturating_mul(kill_sets, std::uint64_t{1} << max_conditionals);
    if (states > state_limit) {
        throw StateLimitError("exact enumeration needs " + std::to_string(states) +
                                  " states, limit is " + std::to_string(state_limit),
                              states);
    }

    std::vector<std::vector<double>> weights;
    std::uint64_t combos_per_kill_set = 0;
    for (const auto& e : model.endpoints) {
        weights.push_back(subset_weights(e.probability));
        combos_per_kill_set += weights.back().size();
    }

    const std::uint64_t chunks = std::min(kChunks, kill_sets);
    std::vector<ChunkSums> partial(chunks);
    auto bounds = [&](std::uint64_t c) {
        return std::pair{kill_sets * c / chunks, kill_sets * (c + 1) / chunks};
    };
    workers = std::max(1U, workers);
    auto run = [&](unsigned w) {
        for (std::uint64_t c = w; c < chunks; c += workers) {
            auto [first, last] = bounds(c);
            partial[c] = enumerate_chunk(model, static_cast<std::uint32_t>(k), first, last, weights);
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
    }

    ExactResult result;
    result.fleet_size = fleet;
    result.kill_count = k;
    result.kill_sets = kill_sets;
    result.enumerated_states = saturating_mul(kill_sets, combos_per_kill_set);
    for (std::size_t e = 0; e < profiles.size(); ++e) {
        double sum = 0.0;
        for (const auto& p : partial) sum += p.weighted_successes[e];
        const double availability = sum / static_cast<double>(kill_sets);
        result.per_endpoint.push_back({profiles[e].name, availability, profiles[e].weight});
        result.r_model_exact += availability * profiles[e].weight;
    }
    return result;
}

nlohmann::json exact_to_json(const ExactResult& r) {
    auto endpoints = nlohmann::json::array();
    for (const auto& e : r.per_endpoint) {
        endpoints.push_back(
            {{"endpoint", e.endpoint}, {"availability", e.availability}, {"weight", e.weight}});
    }
    return {{"per_endpoint", endpoints},
            {"r_model_exact", r.r_model_exact},
            {"enumerated_states", r.enumerated_states},
            {"kill_sets", r.kill_sets},
            {"fleet_size", r.fleet_size},
            {"kill_count", r.kill_count}};
}

ExactResult exact_from_json(const nlohmann::json& doc) {
    try {
        ExactResult r;
        for (const auto& e : doc.at("per_endpoint")) {
            r.per_endpoint.push_back({e.at("endpoint").get<std::string>(),
                                      e.at("availability").get<double>(),
                                      e.at("weight").get<double>()});
        }
        r.r_model_exact = doc.at("r_model_exact").get<double>();
        r.enumerated_states = doc.value("enumerated_states", std::uint64_t{0});
        r.kill_sets = doc.value("kill_sets", std::uint64_t{0});
        r.fleet_size = doc.value("fleet_size", std::size_t{0});
        r.kill_count = doc.value("kill_count", std::size_t{0});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("exact result: ") + e.what());
    }
}

OracleComparison exact_vs_mc_report(const ExactResult& exact, const ResilienceReport& mc) {
    if (exact.per_endpoint.size() != mc.per_endpoint.size()) {
        throw std::invalid_argument("exact and Monte-Carlo results cover different endpoints");
    }
    if (exact.fleet_size != mc.fleet_size || exact.kill_count != mc.kill_count) {
        throw std::invalid_argument("exact and Monte-Carlo results use different fleets (" +
                                    std::to_string(exact.fleet_size) + "/" +
                                    std::to_string(exact.kill_count) + " vs " +
                                    std::to_string(mc.fleet_size) + "/" +
                                    std::to_string(mc.kill_count) + ")");
    }
    OracleComparison out;
    for (std::size_t i = 0; i < exact.per_endpoint.size(); ++i) {
        const auto& x = exact.per_endpoint[i];
        const auto& m = mc.per_endpoint[i];
        if (x.endpoint != m.endpoint) {
            throw std::invalid_argument("endpoint mismatch: '" + x.endpoint + "' vs '" +
                                        m.endpoint + "'");
        }
        EndpointDeviation d;
        d.endpoint = x.endpoint;
        d.exact = x.availability;
        d.estimate = m.availability;
        d.deviation = m.availability - x.availability;
        d.samples = m.samples;
        const double variance = x.availability * (1.0 - x.availability);
        if (variance <= 0.0 || m.samples == 0) {
            d.z = d.deviation == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            d.z = std::abs(d.deviation) / std::sqrt(variance / static_cast<double>(m.samples));
        }
        d.pass = d.z <= kAgreementSigmas;
        out.all_pass = out.all_pass && d.pass;
        out.endpoints.push_back(d);
    }
    return out;
}

nlohmann::json oracle_comparison_to_json(const OracleComparison& cmp) {
    auto endpoints = nlohmann::json::array();
    for (const auto& d : cmp.endpoints) {
        endpoints.push_back({{"endpoint", d.endpoint},
                             {"exact", d.exact},
                             {"estimate", d.estimate},
                             {"deviation", d.deviation},
                             {"samples", d.samples},
                             {"z", std::isfinite(d.z) ? nlohmann::json(d.z) : nlohmann::json("inf")},
                             {"pass", d.pass}});
    }
    return {{"endpoints", endpoints}, {"sigma_bound", kAgreementSigmas}, {"all_pass", cmp.all_pass}};
}

}  // namespace resilsim
