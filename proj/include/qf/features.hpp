#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qf/backend.hpp"
#include "qf/matrix.hpp"
#include "qf/transpiler.hpp"

namespace qf {

inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr std::size_t kNodeFeatures = 8;  // 5 static + 3 dynamic
inline constexpr std::size_t kEdgeFeatures = 6;  // 4 static + 2 dynamic

namespace dyn_node_col {
inline constexpr std::size_t coverage = 0, share_1q = 1, relative_share_1q = 2;
inline constexpr std::size_t count = 3;
}  // namespace dyn_node_col

namespace dyn_edge_col {
inline constexpr std::size_t coverage = 0, share_2q = 1;
inline constexpr std::size_t count = 2;
}  // namespace dyn_edge_col

/// Per-circuit node usage row block (n x 3) before pool averaging.
Matrix circuit_node_usage(const TranspiledCircuit& tc, std::size_t n);
/// Per-circuit edge usage row block (|E| x 2). Throws std::invalid_argument on a CX off the coupling map.
Matrix circuit_edge_usage(const TranspiledCircuit& tc, const CouplingGraph& graph);

/// Pool means of the per-circuit blocks, accumulated in ascending circuit order.
Matrix dynamic_node_features(std::span<const TranspiledCircuit> pool, std::size_t n);
Matrix dynamic_edge_features(std::span<const TranspiledCircuit> pool, const CouplingGraph& graph);

/// Single-threaded references for the two kernels above.
Matrix dynamic_node_features_serial(std::span<const TranspiledCircuit> pool, std::size_t n);
Matrix dynamic_edge_features_serial(std::span<const TranspiledCircuit> pool, const CouplingGraph& graph);

/// One supervised (or inference) unit: a backend graph under one transpiled pool.
struct GraphSample {
    std::string backend_id;
    std::size_t pool_index = 0;
    std::shared_ptr<const CouplingGraph> graph;
    Matrix x_nodes;  // n x 8
    Matrix x_edges;  // |E| x 6
    std::vector<std::uint8_t> mask_nodes;
    std::vector<std::uint8_t> mask_edges;
    std::optional<ErrorMap> labels;
    bool standardized = false;

    [[nodiscard]] std::size_t num_nodes() const { return x_nodes.rows(); }
    [[nodiscard]] std::size_t num_edges() const { return x_edges.rows(); }
};

/// Concatenates [static | dynamic] blocks. Without labels every mask is 1.
/// Throws std::invalid_argument on any shape disagreement.
GraphSample assemble_sample(std::string backend_id, std::size_t pool_index, std::shared_ptr<const CouplingGraph> graph,
                            const Matrix& node_static, const Matrix& edge_static, const Matrix& node_dynamic,
                            const Matrix& edge_dynamic, std::optional<ErrorMap> labels);

/// Full feature path for one pool: static descriptors, usage statistics, assembly.
GraphSample build_sample(const BackendSpec& backend, std::shared_ptr<const CouplingGraph> graph,
                         std::size_t pool_index, std::span<const TranspiledCircuit> tpool, bool with_labels);

/// Per-column z-scoring with population statistics, fit on training backends only.
struct Standardizer {
    std::vector<double> node_mean, node_scale;
    std::vector<double> edge_mean, edge_scale;
    std::vector<std::string> fit_backends;

    [[nodiscard]] GraphSample apply(const GraphSample& s) const;
    bool operator==(const Standardizer&) const = default;
};

/// Throws LeakageError if any sample belongs to `holdout_id`, std::invalid_argument if empty.
Standardizer fit_standardizer(std::span<const GraphSample> samples, const std::string& holdout_id);

}  // namespace qf
