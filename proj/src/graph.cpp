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

#include "resilsim/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include <httplib.h>

#include "resilsim/errors.hpp"

namespace resilsim {

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

void check_name(std::string_view s) {
    if (s.empty() || blank(s)) {
        throw std::invalid_argument("service name must be non-empty");
    }
}

}  // namespace

DependencyGraph::DependencyGraph(std::vector<ServiceName> nodes, std::vector<Edge> edges,
                                 std::map<Edge, std::uint64_t> call_counts)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), call_counts_(std::move(call_counts)) {
    for (const auto& n : nodes_) check_name(n);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    offsets_.assign(nodes_.size() + 1, 0);
    targets_.reserve(edges_.size());
    for (const auto& e : edges_) {
        if (e.caller == e.callee) {
            throw std::invalid_argument("self-loop on '" + e.caller + "'");
        }
        auto from = index_of(e.caller);
        auto to = index_of(e.callee);
        if (!from || !to) {
            throw std::invalid_argument("edge " + e.caller + " -> " + e.callee +
                                        " references an unknown service");
        }
        ++offsets_[*from + 1];
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) offsets_[i + 1] += offsets_[i];
    // edges_ is sorted by (caller, callee) and nodes_ by name, so appending in
    // edge order fills each caller's slice with ascending callee indices.
    for (const auto& e : edges_) targets_.push_back(*index_of(e.callee));

    for (const auto& [edge, count] : call_counts_) {
        if (!std::binary_search(edges_.begin(), edges_.end(), edge)) {
            throw std::invalid_argument("call count given for absent edge " + edge.caller +
                                        " -> " + edge.callee);
        }
        (void)count;
    }
}

DependencyGraph DependencyGraph::from_edges(std::vector<Edge> edges,
                                            std::map<Edge, std::uint64_t> call_counts) {
    std::vector<ServiceName> nodes;
    nodes.reserve(edges.size() * 2);
    for (const auto& e : edges) {
        nodes.push_back(e.caller);
        nodes.push_back(e.callee);
    }
    return DependencyGraph(std::move(nodes), std::move(edges), std::move(call_counts));
}

std::optional<std::size_t> DependencyGraph::index_of(std::string_view name) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), name,
                               [](const ServiceName& a, std::string_view b) { return a < b; });
    if (it == nodes_.end() || *it != name) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

bool DependencyGraph::has_edge(std::string_view caller, std::string_view callee) const {
    auto from = index_of(caller);
    auto to = index_of(callee);
    if (!from || !to) return false;
    auto succ = successors(*from);
    return std::binary_search(succ.begin(), succ.end(), *to);
}

std::span<const std::size_t> DependencyGraph::successors(std::size_t idx) const {
    if (idx >= nodes_.size()) throw std::out_of_range("node index out of range");
    return {targets_.data() + offsets_[idx], offsets_[idx + 1] - offsets_[idx]};
}

std::optional<std::uint64_t> DependencyGraph::call_count(const Edge& e) const {
    auto it = call_counts_.find(e);
    if (it == call_counts_.end()) return std::nullopt;
    return it->second;
}

DependencyGraph parse_dependencies(const nlohmann::json& document) {
    if (!document.is_array()) {
        throw ParseError("dependencies document must be a JSON array");
    }
    std::vector<Edge> edges;
    std::map<Edge, std::uint64_t> counts;
    for (std::size_t i = 0; i < document.size(); ++i) {
        const auto& rec = document[i];
        const std::string where = "dependency record " + std::to_string(i);
        if (!rec.is_object()) throw ParseError(where + ": not an object");
        auto field = [&](const char* key) -> std::string {
            auto it = rec.find(key);
            if (it == rec.end() || !it->is_string()) {
                throw ParseError(where + ": missing string field '" + key + "'");
            }
            auto s = it->get<std::string>();
            if (s.empty() || blank(s)) throw ParseError(where + ": empty '" + key + "'");
            return s;
        };
        Edge e{field("parent"), field("child")};
        if (e.caller == e.callee) {
            throw ParseError(where + ": self-loop on '" + e.caller + "'");
        }
        if (auto it = rec.find("callCount"); it != rec.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
                throw ParseError(where + ": callCount must be a non-negative integer");
            }
            counts[e] += it->get<std::uint64_t>();
        }
        edges.push_back(std::move(e));
    }
    return DependencyGraph::from_edges(std::move(edges), std::move(counts));
}

nlohmann::json serialize_dependencies(const DependencyGraph& g) {
    auto out = nlohmann::json::array();
    for (const auto& e : g.edges()) {
        nlohmann::json rec{{"parent", e.caller}, {"child", e.callee}};
        if (auto c = g.call_count(e)) rec["callCount"] = *c;
        out.push_back(std::move(rec));
    }
    return out;
}

nlohmann::json fetch_dependencies(const std::string& base_url, std::int64_t lookback_ms,
                                  std::int64_t end_ts_ms) {
    if (lookback_ms <= 0) throw std::invalid_argument("lookback must be positive");

    // Split "scheme://host[:port][/prefix]" so a path prefix survives.
    std::string origin = base_url;
    std::string prefix;
    auto scheme_end = base_url.find("://");
    auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        origin = base_url.substr(0, path_start);
        prefix = base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
    const std::string path = prefix + "/api/dependencies?endTs=" + std::to_string(end_ts_ms) +
                             "&lookback=" + std::to_string(lookback_ms);
    const std::string url = origin + path;

    httplib::Client client(origin);
    if (!client.is_valid()) throw TransportError("invalid base URL: " + base_url, url, 0);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);

    auto res = client.Get(path);
    if (!res) {
        throw TransportError("GET " + url + " failed: " + httplib::to_string(res.error()), url, 0);
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("GET " + url + " returned status " + std::to_string(res->status), url,
                             res->status);
    }
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) {
        throw TransportError("GET " + url + " returned a non-JSON body", url, res->status);
    }
    // Jaeger's query service wraps the array as {"data": [...]}.
    if (body.is_object() && body.contains("data")) return body["data"];
    return body;
}

const DependencyGraph& builtin_socialnetwork_graph() {
    static const DependencyGraph g = [] {
        const std::vector<std::pair<std::string, std::vector<std::string>>> calls = {
            {"nginx-web-server",
             {"compose-post-service", "home-timeline-service", "user-timeline-service",
              "user-service", "social-graph-service"}},
            {"compose-post-service",
             {"user-service", "media-service", "text-service", "unique-id-service",
              "post-storage-service", "user-timeline-service", "home-timeline-service"}},
            {"text-service", {"url-shorten-service", "user-mention-service"}},
            {"home-timeline-service", {"post-storage-service", "social-graph-service"}},
            {"user-timeline-service", {"post-storage-service"}},
        };
        std::vector<Edge> edges;
        for (const auto& [caller, callees] : calls) {
            for (const auto& callee : callees) edges.push_back({caller, callee});
        }
        return DependencyGraph::from_edges(std::move(edges));
    }();
    return g;
}

std::vector<bool> reachable_from(const DependencyGraph& g, std::size_t start,
                                 const std::vector<bool>& allowed) {
    std::vector<bool> seen(g.node_count(), false);
    if (start >= g.node_count() || !allowed[start]) return seen;
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto v : g.successors(u)) {
            if (allowed[v] && !seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

GraphDiagnostics validate_graph(const DependencyGraph& g, std::string_view entry) {
    GraphDiagnostics d;
    const std::size_t n = g.node_count();

    auto entry_idx = g.index_of(entry);
    d.missing_entry = !entry_idx.has_value();
    std::vector<bool> reached(n, false);
    if (entry_idx) reached = reachable_from(g, *entry_idx, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i) {
        if (!reached[i]) d.unreachable_nodes.insert(g.nodes()[i]);
    }

    // Kahn: any node left with nonzero in-degree sits on or behind a cycle.
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : g.successors(u)) ++indegree[v];
    }
    std::vector<std::size_t> ready;
    for (std::size_t u = 0; u < n; ++u) {
        if (indegree[u] == 0) ready.push_back(u);
    }
    std::size_t removed = 0;
    while (!ready.empty()) {
        auto u = ready.back();
        ready.pop_back();
        ++removed;
        for (auto v : g.successors(u)) {
            if (--indegree[v] == 0) ready.push_back(v);
        }
    }
    d.cycles_present = removed != n;
    return d;
}

}  // namespace resilsim
