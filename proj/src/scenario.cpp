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

#include "resilsim/scenario.hpp"

#include <cfenv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resilsim/errors.hpp"

namespace resilsim {

namespace {

using nlohmann::json;

const std::vector<std::string>& replicated_services() {
    static const std::vector<std::string> names = {
        "compose-post-service", "home-timeline-service", "user-timeline-service",
        "text-service", "media-service"};
    return names;
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing field '" + key + "'");
    return *it;
}

double probability(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
    double p = v.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(field + ": must be within [0, 1]");
    return p;
}

std::uint64_t positive_integer(const json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw ConfigError(field + ": expected a positive integer");
    }
    return v.get<std::uint64_t>();
}

std::string service_string(const json& v, const std::string& field) {
    if (!v.is_string() || v.get<std::string>().empty()) {
        throw ConfigError(field + ": expected a non-empty service name");
    }
    return v.get<std::string>();
}

DependencyGraph load_graph(const json& source, const std::filesystem::path& base_dir) {
    if (source.is_array()) return parse_dependencies(source);
    if (!source.is_string()) throw ConfigError("graph: expected 'builtin', a path, or an array");
    const auto value = source.get<std::string>();
    if (value == "builtin") return builtin_socialnetwork_graph();

    std::filesystem::path path(value);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw ConfigError("graph: cannot open '" + path.string() + "'");
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("graph: '" + path.string() + "' is not valid JSON");
    return parse_dependencies(doc);
}

}  // namespace

std::vector<EndpointProfile> builtin_profiles() {
    return {
        {"home-timeline",
         {"home-timeline-service", "post-storage-service", "social-graph-service"},
         {},
         0.6},
        {"user-timeline", {"user-timeline-service", "post-storage-service"}, {}, 0.3},
        {"compose-post",
         {"compose-post-service", "user-service", "unique-id-service", "post-storage-service",
          "user-timeline-service", "home-timeline-service", "text-service",
          "social-graph-service"},
         {{"media-service", 4.0 / 5.0},
          {"url-shorten-service", 5.0 / 6.0},
          {"user-mention-service", 5.0 / 6.0}},
         0.1},
    };
}

DeploymentScenario builtin_norepl_scenario() {
    DeploymentScenario s;
    s.entry = std::string(kSocialNetworkEntry);
    for (const auto& n : builtin_socialnetwork_graph().nodes()) s.replicas[n] = 1;
    return s;
}

DeploymentScenario builtin_repl_scenario() {
    auto s = builtin_norepl_scenario();
    for (const auto& n : replicated_services()) s.replicas[n] = 3;
    return s;
}

ScenarioConfig builtin_config(std::string_view scenario) {
    ScenarioConfig c;
    if (scenario == "norepl") {
        c.scenario = builtin_norepl_scenario();
    } else if (scenario == "repl") {
        c.scenario = builtin_repl_scenario();
    } else {
        throw ConfigError("scenario: unknown built-in '" + std::string(scenario) + "'");
    }
    c.name = std::string(scenario);
    c.graph = builtin_socialnetwork_graph();
    c.profiles = builtin_profiles();
    validate_scenario(c.graph, c.scenario, c.profiles, c.failure);
    return c;
}

void validate_scenario(const DependencyGraph& graph, const DeploymentScenario& scenario,
                       const std::vector<EndpointProfile>& profiles,
                       const FailureConfig& failure) {
    if (!graph.contains(scenario.entry)) {
        throw ConfigError("entry: service '" + scenario.entry + "' is not in the graph");
    }
    for (const auto& [name, count] : scenario.replicas) {
        if (!graph.contains(name)) {
            throw ConfigError("replicas: service '" + name + "' is not in the graph");
        }
        if (count < 1) throw ConfigError("replicas." + name + ": must be at least 1");
    }
    if (!scenario.replicas.contains(scenario.entry)) {
        throw ConfigError("replicas: entry '" + scenario.entry + "' has no replica count");
    }
    for (const auto& name : scenario.excluded) {
        if (!scenario.replicas.contains(name)) {
            throw ConfigError("exclude: service '" + name + "' is not in the scenario");
        }
    }

    if (profiles.empty()) throw ConfigError("endpoints: at least one endpoint is required");
    std::set<std::string> names;
    double weight_sum = 0.0;
    for (const auto& p : profiles) {
        const std::string where = "endpoints." + p.name;
        if (p.name.empty()) throw ConfigError("endpoints: endpoint name must be non-empty");
        if (!names.insert(p.name).second) throw ConfigError(where + ": duplicate endpoint name");
        for (const auto& t : p.base_targets) {
            if (!graph.contains(t)) {
                throw ConfigError(where + ".targets: service '" + t + "' is not in the graph");
            }
        }
        for (const auto& c : p.conditional_targets) {
            if (!graph.contains(c.service)) {
                throw ConfigError(where + ".conditional: service '" + c.service +
                                  "' is not in the graph");
            }
            if (!(c.inclusion_probability >= 0.0 && c.inclusion_probability <= 1.0)) {
                throw ConfigError(where + ".conditional." + c.service + ".p: must be within [0, 1]");
            }
        }
        if (!(p.weight >= 0.0 && p.weight <= 1.0)) {
            throw ConfigError(where + ".weight: must be within [0, 1]");
        }
        weight_sum += p.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "endpoints: weights sum to " << weight_sum << ", expected 1";
        throw ConfigError(os.str());
    }

    if (!(failure.p_fail >= 0.0 && failure.p_fail <= 1.0)) {
        throw ConfigError("failure.p_fail: must be within [0, 1]");
    }
    if (failure.samples_per_round < 1) throw ConfigError("failure.samples: must be at least 1");
    if (failure.rounds < 1) throw ConfigError("failure.rounds: must be at least 1");
}

ScenarioConfig load_scenario(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::set<std::string> known = {"name",     "graph",     "scenario", "entry",
                                                "replicas", "endpoints", "failure",  "exclude"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) throw ConfigError("config: unknown field '" + key + "'");
    }

    ScenarioConfig c;
    std::optional<DeploymentScenario> preset;
    if (auto it = doc.find("scenario"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("scenario: expected \"norepl\" or \"repl\"");
        const auto s = it->get<std::string>();
        if (s == "norepl") {
            preset = builtin_norepl_scenario();
        } else if (s == "repl") {
            preset = builtin_repl_scenario();
        } else {
            throw ConfigError("scenario: expected \"norepl\" or \"repl\", got '" + s + "'");
        }
        c.name = s;
    }

    c.graph = doc.contains("graph") ? load_graph(doc["graph"], base_dir)
              : preset              ? builtin_socialnetwork_graph()
                                    : throw ConfigError("config: missing field 'graph'");

    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("name: expected a string");
        c.name = it->get<std::string>();
    }

    if (auto it = doc.find("entry"); it != doc.end()) {
        c.scenario.entry = service_string(*it, "entry");
    } else if (preset) {
        c.scenario.entry = preset->entry;
    } else {
        throw ConfigError("config: missing field 'entry'");
    }

    for (const auto& n : c.graph.nodes()) c.scenario.replicas[n] = 1;
    if (preset) {
        for (const auto& [name, count] : preset->replicas) {
            if (!c.graph.contains(name)) {
                throw ConfigError("scenario: built-in service '" + name + "' is not in the graph");
            }
            c.scenario.replicas[name] = count;
        }
    }
    if (auto it = doc.find("replicas"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("replicas: expected an object");
        for (const auto& [name, count] : it->items()) {
            if (!c.graph.contains(name)) {
                throw ConfigError("replicas: service '" + name + "' is not in the graph");
            }
            c.scenario.replicas[name] =
                static_cast<std::uint32_t>(positive_integer(count, "replicas." + name));
        }
    }
    if (auto it = doc.find("exclude"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("exclude: expected an array of service names");
        for (const auto& v : *it) c.scenario.excluded.insert(service_string(v, "exclude"));
    }

    if (auto it = doc.find("endpoints"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("endpoints: expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& e = (*it)[i];
            const std::string where = "endpoints[" + std::to_string(i) + "]";
            if (!e.is_object()) throw ConfigError(where + ": expected an object");
            EndpointProfile p;
            const auto& name = require(e, "name", where);
            if (!name.is_string()) throw ConfigError(where + ".name: expected a string");
            p.name = name.get<std::string>();
            const auto& targets = require(e, "targets", where);
            if (!targets.is_array()) throw ConfigError(where + ".targets: expected an array");
            for (const auto& t : targets) p.base_targets.insert(service_string(t, where + ".targets"));
            if (auto ct = e.find("conditional"); ct != e.end()) {
                if (!ct->is_array()) throw ConfigError(where + ".conditional: expected an array");
                for (const auto& c_item : *ct) {
                    if (!c_item.is_object()) {
                        throw ConfigError(where + ".conditional: expected objects");
                    }
                    p.conditional_targets.push_back(
                        {service_string(require(c_item, "service", where + ".conditional"),
                                        where + ".conditional.service"),
                         probability(require(c_item, "p", where + ".conditional"),
                                     where + ".conditional.p")});
                }
            }
            p.weight = probability(require(e, "weight", where), where + ".weight");
            c.profiles.push_back(std::move(p));
        }
    } else if (preset) {
        c.profiles = builtin_profiles();
    } else {
        throw ConfigError("config: missing field 'endpoints'");
    }

    if (auto it = doc.find("failure"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("failure: expected an object");
        static const std::set<std::string> failure_keys = {"p_fail", "samples", "rounds", "seed"};
        for (const auto& [key, _] : it->items()) {
            if (!failure_keys.contains(key)) {
                throw ConfigError("failure: unknown field '" + key + "'");
            }
        }
        if (it->contains("p_fail")) c.failure.p_fail = probability((*it)["p_fail"], "failure.p_fail");
        if (it->contains("samples")) {
            c.failure.samples_per_round = positive_integer((*it)["samples"], "failure.samples");
        }
        if (it->contains("rounds")) {
            auto r = positive_integer((*it)["rounds"], "failure.rounds");
            if (r > UINT32_MAX) throw ConfigError("failure.rounds: too large");
            c.failure.rounds = static_cast<std::uint32_t>(r);
        }
        if (it->contains("seed")) {
            const auto& s = (*it)["seed"];
            if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
                throw ConfigError("failure.seed: expected a non-negative integer");
            }
            c.failure.master_seed = s.get<std::uint64_t>();
        }
    }

    validate_scenario(c.graph, c.scenario, c.profiles, c.failure);
    return c;
}

json serialize_scenario(const ScenarioConfig& c) {
    json doc;
    doc["name"] = c.name;
    // Isolated nodes cannot be expressed as dependency records.
    for (const auto& n : c.graph.nodes()) {
        auto idx = *c.graph.index_of(n);
        bool has_in = false;
        for (const auto& e : c.graph.edges()) has_in = has_in || e.callee == n;
        if (c.graph.successors(idx).empty() && !has_in) {
            throw ConfigError("graph: isolated service '" + n + "' cannot be serialized");
        }
    }
    doc["graph"] = serialize_dependencies(c.graph);
    doc["entry"] = c.scenario.entry;
    doc["replicas"] = c.scenario.replicas;
    if (!c.scenario.excluded.empty()) doc["exclude"] = c.scenario.excluded;
    auto endpoints = json::array();
    for (const auto& p : c.profiles) {
        auto cond = json::array();
        for (const auto& ct : p.conditional_targets) {
            cond.push_back({{"service", ct.service}, {"p", ct.inclusion_probability}});
        }
        endpoints.push_back(
            {{"name", p.name}, {"targets", p.base_targets}, {"conditional", cond}, {"weight", p.weight}});
    }
    doc["endpoints"] = endpoints;
    doc["failure"] = {{"p_fail", c.failure.p_fail},
                      {"samples", c.failure.samples_per_round},
                      {"rounds", c.failure.rounds},
                      {"seed", c.failure.master_seed}};
    return doc;
}

std::vector<ContainerInstance> container_fleet(const DeploymentScenario& scenario) {
    std::vector<ContainerInstance> fleet;
    // std::map iterates keys in ascending order.
    for (const auto& [name, count] : scenario.replicas) {
        if (scenario.excluded.contains(name)) continue;
        for (std::uint32_t i = 0; i < count; ++i) fleet.push_back({name, i});
    }
    return fleet;
}

std::size_t kill_count(std::size_t fleet_size, double p_fail) {
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double k = std::nearbyint(p_fail * static_cast<double>(fleet_size));
    std::fesetround(saved);
    if (!(k > 0.0)) return 0;
    if (k >= static_cast<double>(fleet_size)) return fleet_size;
    return static_cast<std::size_t>(k);
}

}  // namespace resilsim
