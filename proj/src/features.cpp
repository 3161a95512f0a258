#include "qf/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qf/errors.hpp"
#include "qf/parallel.hpp"

namespace qf {

Matrix circuit_node_usage(const TranspiledCircuit& tc, std::size_t n) {
    std::vector<double> g1(n, 0.0);
    std::vector<char> touched(n, 0);
    for (const auto& pg : tc.gates) {
        const Gate& g = pg.gate;
        if (g.q0 >= n || g.q1 >= n) throw std::invalid_argument("usage: physical qubit out of range");
        touched[g.q0] = 1;
        if (g.kind == GateKind::rot) {
            g1[g.q0] += 1.0;
        } else {
            touched[g.q1] = 1;
        }
    }
    double total = 0.0, active_total = 0.0;
    std::size_t active = 0;
    for (Qubit v = 0; v < n; ++v) {
        total += g1[v];
        if (touched[v]) {
            active_total += g1[v];
            ++active;
        }
    }
    const double mu = active > 0 ? active_total / static_cast<double>(active) : 0.0;
    const double share_div = std::max(1.0, total);
    const double rel_div = std::max(1.0, mu);
    Matrix out(n, dyn_node_col::count);
    for (Qubit v = 0; v < n; ++v) {
        out(v, dyn_node_col::coverage) = touched[v] ? 1.0 : 0.0;
        out(v, dyn_node_col::share_1q) = g1[v] / share_div;
        out(v, dyn_node_col::relative_share_1q) = g1[v] / rel_div;
    }
    return out;
}

Matrix circuit_edge_usage(const TranspiledCircuit& tc, const CouplingGraph& graph) {
    const std::size_t m = graph.num_edges();
    std::vector<double> g2(m, 0.0);
    for (const auto& pg : tc.gates) {
        if (pg.gate.kind != GateKind::cx) continue;
        const auto e = graph.edge_index(pg.gate.q0, pg.gate.q1);
        if (!e) {
            throw std::invalid_argument("usage: CX on (" + std::to_string(pg.gate.q0) + "," +
                                        std::to_string(pg.gate.q1) + ") which is not a coupling");
        }
        g2[*e] += 1.0;
    }
    double total = 0.0;
    for (double x : g2) total += x;
    const double div = std::max(1.0, total);
    Matrix out(m, dyn_edge_col::count);
    for (std::size_t e = 0; e < m; ++e) {
        out(e, dyn_edge_col::coverage) = g2[e] > 0.0 ? 1.0 : 0.0;
        out(e, dyn_edge_col::share_2q) = g2[e] / div;
    }
    return out;
}

namespace {

Matrix mean_in_order(std::span<const Matrix> blocks, std::size_t rows, std::size_t cols) {
    Matrix acc(rows, cols);
    for (const Matrix& b : blocks) {
        auto dst = acc.values();
        auto src = b.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(blocks.size());
    for (auto& x : acc.values()) x *= inv;
    return acc;
}

template <class PerCircuit>
Matrix pooled_parallel(std::span<const TranspiledCircuit> pool, std::size_t rows, std::size_t cols, PerCircuit f) {
    if (pool.empty()) throw std::invalid_argument("dynamic features: empty pool");
    std::vector<Matrix> blocks(pool.size());
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static) if (parallel::enabled())
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            blocks[static_cast<std::size_t>(i)] = f(pool[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical(qf_features_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    // The reduction stays serial and ordered so results are bit-identical to the reference.
    return mean_in_order(blocks, rows, cols);
}

template <class PerCircuit>
Matrix pooled_serial(std::span<const TranspiledCircuit> pool, std::size_t rows, std::size_t cols, PerCircuit f) {
    if (pool.empty()) throw std::invalid_argument("dynamic features: empty pool");
    Matrix acc(rows, cols);
    for (const auto& tc : pool) {
        const Matrix b = f(tc);
        auto dst = acc.values();
        auto src = b.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(pool.size());
    for (auto& x : acc.values()) x *= inv;
    return acc;
}

}  // namespace

Matrix dynamic_node_features(std::span<const TranspiledCircuit> pool, std::size_t n) {
    return pooled_parallel(pool, n, dyn_node_col::count, [n](const TranspiledCircuit& tc) { return circuit_node_usage(tc, n); });
}

Matrix dynamic_edge_features(std::span<const TranspiledCircuit> pool, const CouplingGraph& graph) {
    return pooled_parallel(pool, graph.num_edges(), dyn_edge_col::count,
                           [&graph](const TranspiledCircuit& tc) { return circuit_edge_usage(tc, graph); });
}

Matrix dynamic_node_features_serial(std::span<const TranspiledCircuit> pool, std::size_t n) {
    return pooled_serial(pool, n, dyn_node_col::count, [n](const TranspiledCircuit& tc) { return circuit_node_usage(tc, n); });
}

Matrix dynamic_edge_features_serial(std::span<const TranspiledCircuit> pool, const CouplingGraph& graph) {
    return pooled_serial(pool, graph.num_edges(), dyn_edge_col::count,
                         [&graph](const TranspiledCircuit& tc) { return circuit_edge_usage(tc, graph); });
}

GraphSample assemble_sample(std::string backend_id, std::size_t pool_index, std::shared_ptr<const CouplingGraph> graph,
                            const Matrix& node_static, const Matrix& edge_static, const Matrix& node_dynamic,
                            const Matrix& edge_dynamic, std::optional<ErrorMap> labels) {
    if (!graph) throw std::invalid_argument("assemble_sample: missing graph");
    const std::size_t n = graph->num_nodes(), m = graph->num_edges();
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("assemble_sample: " + what);
    };
    require(node_static.rows() == n && node_static.cols() == 5, "node static block must be n x 5");
    require(edge_static.rows() == m && edge_static.cols() == 4, "edge static block must be |E| x 4");
    require(node_dynamic.rows() == n && node_dynamic.cols() == 3, "node dynamic block must be n x 3");
    require(edge_dynamic.rows() == m && edge_dynamic.cols() == 2, "edge dynamic block must be |E| x 2");
    if (labels) {
        require(labels->num_nodes() == n && labels->num_edges() == m, "label shape does not match graph");
        labels->validate();
    }
    GraphSample s;
    s.backend_id = std::move(backend_id);
    s.pool_index = pool_index;
    s.graph = std::move(graph);
    s.x_nodes = hconcat(node_static, node_dynamic);
    s.x_edges = hconcat(edge_static, edge_dynamic);
    if (labels) {
        s.mask_nodes = labels->mask_nodes;
        s.mask_edges = labels->mask_edges;
    } else {
        s.mask_nodes.assign(n, 1);
        s.mask_edges.assign(m, 1);
    }
    s.labels = std::move(labels);
    return s;
}

GraphSample build_sample(const BackendSpec& backend, std::shared_ptr<const CouplingGraph> graph,
                         std::size_t pool_index, std::span<const TranspiledCircuit> tpool, bool with_labels) {
    const Matrix ns = node_static_features(*graph);
    const Matrix es = edge_static_features(*graph);
    const Matrix nd = dynamic_node_features(tpool, graph->num_nodes());
    const Matrix ed = dynamic_edge_features(tpool, *graph);
    std::optional<ErrorMap> labels;
    if (with_labels) labels = backend.errors;
    return assemble_sample(backend.id, pool_index, std::move(graph), ns, es, nd, ed, std::move(labels));
}

namespace {

void column_stats(const std::vector<const Matrix*>& blocks, std::size_t cols, std::vector<double>& mean,
                  std::vector<double>& scale) {
    mean.assign(cols, 0.0);
    scale.assign(cols, 1.0);
    std::size_t rows = 0;
    for (const Matrix* b : blocks) {
        rows += b->rows();
        for (std::size_t r = 0; r < b->rows(); ++r)
            for (std::size_t c = 0; c < cols; ++c) mean[c] += (*b)(r, c);
    }
    if (rows == 0) return;
    for (auto& x : mean) x /= static_cast<double>(rows);
    std::vector<double> var(cols, 0.0);
    for (const Matrix* b : blocks)
        for (std::size_t r = 0; r < b->rows(); ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const double d = (*b)(r, c) - mean[c];
                var[c] += d * d;
            }
    for (std::size_t c = 0; c < cols; ++c) {
        const double sd = std::sqrt(var[c] / static_cast<double>(rows));
        // Constant columns (up to rounding of the mean) keep unit scale.
        scale[c] = sd > 1e-12 * std::max(1.0, std::abs(mean[c])) ? sd : 1.0;
    }
}

}  // namespace

Standardizer fit_standardizer(std::span<const GraphSample> samples, const std::string& holdout_id) {
    if (samples.empty()) throw std::invalid_argument("fit_standardizer: empty fit set");
    std::set<std::string> ids;
    std::vector<const Matrix*> nodes, edges;
    for (const auto& s : samples) {
        if (s.backend_id == holdout_id) {
            throw LeakageError("fit_standardizer: sample from holdout backend '" + holdout_id + "' in fit set");
        }
        if (s.standardized) throw std::invalid_argument("fit_standardizer: sample already standardized");
        ids.insert(s.backend_id);
        nodes.push_back(&s.x_nodes);
        edges.push_back(&s.x_edges);
    }
    Standardizer st;
    column_stats(nodes, kNodeFeatures, st.node_mean, st.node_scale);
    column_stats(edges, kEdgeFeatures, st.edge_mean, st.edge_scale);
    st.fit_backends.assign(ids.begin(), ids.end());
    return st;
}

GraphSample Standardizer::apply(const GraphSample& s) const {
    if (s.standardized) throw std::invalid_argument("Standardizer::apply: sample already standardized");
    if (s.x_nodes.cols() != node_mean.size() || s.x_edges.cols() != edge_mean.size()) {
        throw SchemaError("Standardizer::apply: feature width does not match the fitted schema");
    }
    GraphSample out = s;
    for (std::size_t r = 0; r < out.x_nodes.rows(); ++r)
        for (std::size_t c = 0; c < node_mean.size(); ++c)
            out.x_nodes(r, c) = (out.x_nodes(r, c) - node_mean[c]) / node_scale[c];
    for (std::size_t r = 0; r < out.x_edges.rows(); ++r)
        for (std::size_t c = 0; c < edge_mean.size(); ++c)
            out.x_edges(r, c) = (out.x_edges(r, c) - edge_mean[c]) / edge_scale[c];
    out.standardized = true;
    return out;
}

}  // namespace qf
