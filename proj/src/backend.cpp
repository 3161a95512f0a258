#include "qf/backend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qf/rng.hpp"

namespace qf {

double standard_normal(Rng& rng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

ErrorMap ErrorMap::unmasked(std::vector<double> nodes, std::vector<double> edges) {
    ErrorMap m;
    m.mask_nodes.assign(nodes.size(), 1);
    m.mask_edges.assign(edges.size(), 1);
    m.y_nodes = std::move(nodes);
    m.y_edges = std::move(edges);
    return m;
}

void ErrorMap::validate() const {
    if (y_nodes.size() != mask_nodes.size() || y_edges.size() != mask_edges.size()) {
        throw std::invalid_argument("error map: value/mask length mismatch");
    }
    auto check = [](const std::vector<double>& y, const std::vector<std::uint8_t>& m, const char* what) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (m[i] && (!std::isfinite(y[i]) || y[i] < 0.0)) {
                throw std::invalid_argument(std::string("error map: ") + what + " entry " + std::to_string(i) +
                                            " is masked in but not a finite non-negative rate");
            }
        }
    };
    check(y_nodes, mask_nodes, "node");
    check(y_edges, mask_edges, "edge");
}

bool ErrorMap::operator==(const ErrorMap& o) const {
    if (mask_nodes != o.mask_nodes || mask_edges != o.mask_edges) return false;
    // NaN sentinels compare equal to each other here.
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::isnan(a[i]) && std::isnan(b[i])) continue;
            if (a[i] != b[i]) return false;
        }
        return true;
    };
    return same(y_nodes, o.y_nodes) && same(y_edges, o.y_edges);
}

BackendSpec sample_backend(std::string id, const Topology& topology, std::uint64_t seed, const NoiseConfig& cfg) {
    if (!(cfg.median_1q > 0.0) || !(cfg.median_2q > 0.0)) {
        throw std::invalid_argument("sample_backend: medians must be positive");
    }
    if (cfg.sigma_1q < 0.0 || cfg.sigma_2q < 0.0) throw std::invalid_argument("sample_backend: sigmas must be >= 0");
    if (cfg.spatial_smoothing < 0.0 || cfg.spatial_smoothing > 1.0) {
        throw std::invalid_argument("sample_backend: spatial_smoothing must lie in [0,1]");
    }
    const CouplingGraph& g = topology.graph;
    const std::size_t n = g.num_nodes();
    const std::size_t m = g.num_edges();

    Rng rng(derive_seed({stream::errors, seed}));
    std::vector<double> zn(n), ze(m);
    for (auto& z : zn) z = standard_normal(rng);
    for (auto& z : ze) z = standard_normal(rng);

    const double s = cfg.spatial_smoothing;
    // A qubit's neighbourhood is its couplings; a coupling's is its two qubits.
    std::vector<double> bn(n), be(m);
    for (Qubit v = 0; v < n; ++v) {
        const auto inc = g.incident_edges(v);
        double acc = 0.0;
        for (std::size_t e : inc) acc += ze[e];
        bn[v] = inc.empty() ? zn[v] : (1.0 - s) * zn[v] + s * acc / static_cast<double>(inc.size());
    }
    for (std::size_t e = 0; e < m; ++e) {
        const auto [u, v] = g.edge(e);
        be[e] = (1.0 - s) * ze[e] + s * 0.5 * (zn[u] + zn[v]);
    }

    std::vector<double> yn(n), ye(m);
    for (Qubit v = 0; v < n; ++v) yn[v] = std::min(0.5, cfg.median_1q * std::exp(cfg.sigma_1q * bn[v]));
    for (std::size_t e = 0; e < m; ++e) ye[e] = std::min(0.5, cfg.median_2q * std::exp(cfg.sigma_2q * be[e]));

    BackendSpec b;
    b.id = std::move(id);
    b.topology = topology;
    b.errors = ErrorMap::unmasked(std::move(yn), std::move(ye));
    b.seed = seed;
    b.noise = cfg;
    return b;
}

ErrorMap derive_labels(const CalibrationTable& table, const CouplingGraph& graph) {
    const std::size_t n = graph.num_nodes();
    const std::size_t m = graph.num_edges();
    // Values are collected per component and summed in sorted order, so the labels
    // are bit-identical under any permutation of the rows.
    std::vector<std::vector<double>> by_node(n), by_edge(m);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table[i];
        auto fail = [i](const std::string& why) {
            throw std::invalid_argument("calibration row " + std::to_string(i) + ": " + why);
        };
        if (row.error && (!std::isfinite(*row.error) || *row.error < 0.0 || *row.error > 1.0)) {
            fail("error must lie in [0,1]");
        }
        if (row.kind == CalibrationRow::Kind::one_qubit) {
            if (row.operands.size() != 1) fail("1q entry needs exactly one operand");
            if (row.operands[0] >= n) fail("qubit index out of range");
            if (row.error) by_node[row.operands[0]].push_back(*row.error);
        } else {
            if (row.operands.size() != 2) fail("2q entry needs exactly two operands");
            if (row.operands[0] >= n || row.operands[1] >= n) fail("qubit index out of range");
            const auto e = graph.edge_index(row.operands[0], row.operands[1]);
            if (!e) fail("operand pair is not a coupling of the backend");
            if (row.error) by_edge[*e].push_back(*row.error);
        }
    }
    auto reduce = [](std::vector<double>& xs) {
        std::sort(xs.begin(), xs.end());
        double acc = 0.0;
        for (double x : xs) acc += x;
        return acc / static_cast<double>(xs.size());
    };
    ErrorMap out;
    out.y_nodes.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.y_edges.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.mask_nodes.assign(n, 0);
    out.mask_edges.assign(m, 0);
    for (Qubit v = 0; v < n; ++v) {
        if (by_node[v].empty()) continue;
        out.y_nodes[v] = reduce(by_node[v]);
        out.mask_nodes[v] = 1;
    }
    for (std::size_t e = 0; e < m; ++e) {
        if (by_edge[e].empty()) continue;
        out.y_edges[e] = reduce(by_edge[e]);
        out.mask_edges[e] = 1;
    }
    return out;
}

CalibrationTable calibration_table_from(const ErrorMap& errors, const CouplingGraph& graph) {
    CalibrationTable t;
    for (Qubit v = 0; v < errors.num_nodes(); ++v) {
        if (!errors.mask_nodes[v]) continue;
        t.push_back({CalibrationRow::Kind::one_qubit, {v}, "sx", errors.y_nodes[v]});
        t.push_back({CalibrationRow::Kind::one_qubit, {v}, "x", errors.y_nodes[v]});
    }
    for (std::size_t e = 0; e < errors.num_edges(); ++e) {
        if (!errors.mask_edges[e]) continue;
        const auto [u, v] = graph.edge(e);
        t.push_back({CalibrationRow::Kind::two_qubit, {u, v}, "cx", errors.y_edges[e]});
        t.push_back({CalibrationRow::Kind::two_qubit, {v, u}, "cx", errors.y_edges[e]});
    }
    return t;
}

ErrorMap apply_drift(const ErrorMap& errors, std::uint64_t seed, double scale_nodes, double scale_edges) {
    if (scale_nodes < 0.0 || scale_edges < 0.0) throw std::invalid_argument("apply_drift: scales must be >= 0");
    ErrorMap out = errors;
    Rng rng(derive_seed({stream::drift, seed}));
    auto perturb = [&rng](std::vector<double>& y, const std::vector<std::uint8_t>& mask, double s) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            // Draw for every slot so the stream layout is independent of the mask.
            const double u = uniform01(rng);
            if (!mask[i] || s == 0.0) continue;
            y[i] = std::max(kPositivityFloor, y[i] + s * (4.0 * u - 2.0));
        }
    };
    perturb(out.y_nodes, out.mask_nodes, scale_nodes);
    perturb(out.y_edges, out.mask_edges, scale_edges);
    return out;
}

}  // namespace qf
