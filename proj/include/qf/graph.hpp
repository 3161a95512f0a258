#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qf/matrix.hpp"

namespace qf {

using Qubit = std::size_t;

struct Edge {
    Qubit u = 0;
    Qubit v = 0;
    auto operator<=>(const Edge&) const = default;
};

/**
 * Undirected, connected qubit coupling graph with a canonical edge order.
 *
 * Edges are stored as (min, max) and sorted lexicographically; every per-edge
 * quantity in the project is indexed by position in this order. Construction
 * goes through canonicalize_edges(), which enforces the invariants.
 */
class CouplingGraph {
public:
    CouplingGraph() = default;

    [[nodiscard]] std::size_t num_nodes() const noexcept { return adjacency_.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const Edge& edge(std::size_t e) const { return edges_.at(e); }

    /// Neighbors of v in ascending order.
    [[nodiscard]] std::span<const Qubit> neighbors(Qubit v) const { return adjacency_.at(v); }
    /// Canonical indices of edges incident to v, aligned with neighbors(v).
    [[nodiscard]] std::span<const std::size_t> incident_edges(Qubit v) const { return incident_.at(v); }
    [[nodiscard]] std::size_t degree(Qubit v) const { return adjacency_.at(v).size(); }

    /// Canonical index of the coupling {a,b}, in either orientation.
    [[nodiscard]] std::optional<std::size_t> edge_index(Qubit a, Qubit b) const;
    [[nodiscard]] bool adjacent(Qubit a, Qubit b) const { return edge_index(a, b).has_value(); }

    bool operator==(const CouplingGraph& o) const { return edges_ == o.edges_ && num_nodes() == o.num_nodes(); }

private:
    friend CouplingGraph canonicalize_edges(std::span<const std::pair<Qubit, Qubit>>, std::size_t);
    std::vector<Edge> edges_;
    std::vector<std::vector<Qubit>> adjacency_;
    std::vector<std::vector<std::size_t>> incident_;
};

/// Orients pairs as (min,max), merges duplicates, sorts, and verifies connectivity.
/// Throws std::invalid_argument on self-loops, out-of-range endpoints, or a disconnected result.
CouplingGraph canonicalize_edges(std::span<const std::pair<Qubit, Qubit>> raw, std::size_t n);

/// Unweighted hop distances from src; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const CouplingGraph& g, Qubit src);

/// True when the graph stays connected after dropping the edge with canonical index `skip`.
bool connected_without_edge(const CouplingGraph& g, std::size_t skip);

// ---------------------------------------------------------------------------
// Topology generators
// ---------------------------------------------------------------------------

enum class TopologyKind { path, ring, grid, heavyhex };

std::string to_string(TopologyKind k);
TopologyKind topology_kind_from_string(const std::string& s);

/// Generator parameters. `n` drives path/ring/heavyhex; rows x cols drive grid.
/// For heavyhex, `rows` chains share the n qubits and `couplers` vertical links join
/// each neighbouring pair of rows (0 selects the default of max(1, cols/4)).
struct TopologyParams {
    std::size_t n = 27;
    std::size_t rows = 3;
    std::size_t cols = 0;
    std::size_t couplers = 0;
    bool operator==(const TopologyParams&) const = default;
};

struct Topology {
    TopologyKind kind = TopologyKind::heavyhex;
    TopologyParams params;
    std::uint64_t seed = 0;
    CouplingGraph graph;
};

/// Deterministic in (kind, params, seed). Throws std::invalid_argument if n < 2.
Topology gen_topology(TopologyKind kind, const TopologyParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Static descriptors
// ---------------------------------------------------------------------------

namespace node_col {
inline constexpr std::size_t deg_norm = 0, betweenness = 1, clustering = 2, harmonic = 3, kcore_norm = 4;
inline constexpr std::size_t count = 5;
}  // namespace node_col

namespace edge_col {
inline constexpr std::size_t betweenness = 0, sumdeg_norm = 1, proddeg_norm = 2, bridge = 3;
inline constexpr std::size_t count = 4;
}  // namespace edge_col

/// Shortest-path betweenness (Brandes) with equal splitting over ties.
/// Node values are divided by (n-1)(n-2)/2, edge values by n(n-1)/2.
struct Betweenness {
    std::vector<double> nodes;
    std::vector<double> edges;
};
Betweenness betweenness(const CouplingGraph& g);

std::vector<double> clustering_coefficients(const CouplingGraph& g);
std::vector<double> harmonic_centrality(const CouplingGraph& g);
std::vector<std::size_t> core_numbers(const CouplingGraph& g);
/// Per canonical edge: 1 if it is a bridge (Tarjan low-link), else 0.
std::vector<std::uint8_t> bridge_flags(const CouplingGraph& g);

/// Min-max normalization; a constant input maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> a);

/// n x 5: deg_norm, betweenness, clustering, harmonic, kcore_norm.
Matrix node_static_features(const CouplingGraph& g);
/// |E| x 4: edge_betweenness, sumdeg_norm, proddeg_norm, bridge.
Matrix edge_static_features(const CouplingGraph& g);

}  // namespace qf
