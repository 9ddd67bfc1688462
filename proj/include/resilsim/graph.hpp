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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace resilsim {

using ServiceName = std::string;

/// Directed call edge: caller invokes callee.
struct Edge {
    ServiceName caller;
    ServiceName callee;

    auto operator<=>(const Edge&) const = default;
};

/**
 * Immutable service-dependency graph.
 *
 * Nodes are kept in ascending name order and addressed by dense index, which
 * the simulation and oracle use for their compiled representations. Edges are
 * unweighted; call counts are carried along for reporting only.
 */
class DependencyGraph {
public:
    DependencyGraph() = default;

    /// Throws std::invalid_argument on empty names, self-loops, or edges that
    /// reference a node outside `nodes`. Duplicate nodes and edges collapse.
    DependencyGraph(std::vector<ServiceName> nodes, std::vector<Edge> edges,
                    std::map<Edge, std::uint64_t> call_counts = {});

    /// Node set is the union of edge endpoints.
    static DependencyGraph from_edges(std::vector<Edge> edges,
                                      std::map<Edge, std::uint64_t> call_counts = {});

    const std::vector<ServiceName>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::optional<std::size_t> index_of(std::string_view name) const;
    bool contains(std::string_view name) const { return index_of(name).has_value(); }
    bool has_edge(std::string_view caller, std::string_view callee) const;

    /// Successor indices of node `idx`, ascending.
    std::span<const std::size_t> successors(std::size_t idx) const;

    std::optional<std::uint64_t> call_count(const Edge& e) const;
    const std::map<Edge, std::uint64_t>& call_counts() const noexcept { return call_counts_; }

    friend bool operator==(const DependencyGraph& a, const DependencyGraph& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.call_counts_ == b.call_counts_;
    }

private:
    std::vector<ServiceName> nodes_;
    std::vector<Edge> edges_;
    std::map<Edge, std::uint64_t> call_counts_;
    // CSR adjacency
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> targets_;
};

struct GraphDiagnostics {
    std::set<ServiceName> unreachable_nodes;
    bool cycles_present = false;
    bool missing_entry = false;
};

/// Parses a Jaeger-style dependencies document: an array of
/// `{parent, child, callCount?}` records. Duplicate edges merge by summing
/// callCount. Throws ParseError naming the offending record index.
DependencyGraph parse_dependencies(const nlohmann::json& document);

/// Inverse of parse_dependencies; records sorted by (parent, child).
/// Isolated nodes have no representation in this shape and are dropped.
nlohmann::json serialize_dependencies(const DependencyGraph& g);

/// GET `<base_url>/api/dependencies?endTs=<end_ts_ms>&lookback=<lookback_ms>`.
/// Returns the body parsed as JSON without interpreting it. Any failure
/// (connect, non-2xx, unparsable body) raises TransportError.
nlohmann::json fetch_dependencies(const std::string& base_url, std::int64_t lookback_ms,
                                  std::int64_t end_ts_ms);

inline constexpr std::string_view kSocialNetworkEntry = "nginx-web-server";

/// 12-service Social Network topology with entry nginx-web-server.
/// Databases are not modeled as nodes.
const DependencyGraph& builtin_socialnetwork_graph();

GraphDiagnostics validate_graph(const DependencyGraph& g, std::string_view entry);

/// Indices reachable from `start` by directed paths, restricted to nodes
/// where `allowed[i]` is true. `start` itself must be allowed to be reached.
std::vector<bool> reachable_from(const DependencyGraph& g, std::size_t start,
                                 const std::vector<bool>& allowed);

}  // namespace resilsim
