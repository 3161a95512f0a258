#include "qf/transpiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qf/parallel.hpp"

namespace qf {

double path_failure(std::span<const double> p) {
    double survive = 1.0;
    for (double x : p) {
        if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("path_failure: probability outside [0,1)");
        survive *= 1.0 - x;
    }
    return 1.0 - survive;
}

RouteWeights::RouteWeights(const CouplingGraph& g, std::span<const double> edge_errors)
    : n_(g.num_nodes()), weights_(g.num_edges()), dist_(n_ * n_, std::numeric_limits<double>::infinity()) {
    if (edge_errors.size() != g.num_edges()) throw std::invalid_argument("RouteWeights: edge error count mismatch");
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const double p = edge_errors[e];
        if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("RouteWeights: edge error outside [0,1)");
        weights_[e] = -std::log1p(-p);
    }
    for (Qubit v = 0; v < n_; ++v) dist_[v * n_ + v] = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto [u, v] = g.edge(e);
        dist_[u * n_ + v] = std::min(dist_[u * n_ + v], weights_[e]);
        dist_[v * n_ + u] = dist_[u * n_ + v];
    }
    // Floyd-Warshall; graphs here have at most a few hundred qubits.
    for (std::size_t k = 0; k < n_; ++k) {
        for (std::size_t i = 0; i < n_; ++i) {
            const double dik = dist_[i * n_ + k];
            if (dik == std::numeric_limits<double>::infinity()) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                const double cand = dik + dist_[k * n_ + j];
                if (cand < dist_[i * n_ + j]) dist_[i * n_ + j] = cand;
            }
        }
    }
    // Floating-point association can leave D(i,j) and D(j,i) an ulp apart.
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = std::min(dist_[i * n_ + j], dist_[j * n_ + i]);
            dist_[i * n_ + j] = dist_[j * n_ + i] = d;
        }
}

std::vector<double> placement_scores(const BackendSpec& backend) {
    const CouplingGraph& g = backend.graph();
    const ErrorMap& err = backend.errors;
    std::vector<double> score(g.num_nodes(), 0.0);
    for (Qubit v = 0; v < g.num_nodes(); ++v) {
        double acc = 0.0;
        for (std::size_t e : g.incident_edges(v)) acc += err.y_edges[e];
        const double mean_edge = g.degree(v) > 0 ? acc / static_cast<double>(g.degree(v)) : 0.0;
        score[v] = err.y_nodes[v] + mean_edge;
    }
    return score;
}

Layout noise_aware_layout(const Circuit& circ, const BackendSpec& backend) {
    const CouplingGraph& g = backend.graph();
    const std::size_t n = g.num_nodes();

    std::vector<std::size_t> cx_degree(circ.width, 0);
    std::vector<char> used(circ.width, 0);
    for (const Gate& gate : circ.gates) {
        if (gate.q0 >= circ.width || gate.q1 >= circ.width) {
            throw std::invalid_argument("noise_aware_layout: gate operand outside circuit width");
        }
        used[gate.q0] = 1;
        if (gate.kind == GateKind::cx) {
            used[gate.q1] = 1;
            ++cx_degree[gate.q0];
            ++cx_degree[gate.q1];
        }
    }
    std::vector<Qubit> logical;
    for (Qubit q = 0; q < circ.width; ++q)
        if (used[q]) logical.push_back(q);
    if (logical.size() > n) {
        throw std::invalid_argument("noise_aware_layout: circuit uses " + std::to_string(logical.size()) +
                                    " qubits but backend has " + std::to_string(n));
    }
    std::stable_sort(logical.begin(), logical.end(),
                     [&](Qubit a, Qubit b) { return cx_degree[a] > cx_degree[b]; });

    const auto score = placement_scores(backend);
    Layout layout;
    layout.logical_to_physical.assign(circ.width, Layout::kUnmapped);
    std::vector<char> placed(n, 0), frontier(n, 0);
    for (std::size_t k = 0; k < logical.size(); ++k) {
        Qubit best = n;
        for (Qubit p = 0; p < n; ++p) {
            if (placed[p] || (k > 0 && !frontier[p])) continue;
            if (best == n || score[p] < score[best]) best = p;
        }
        placed[best] = 1;
        frontier[best] = 0;
        for (Qubit y : g.neighbors(best))
            if (!placed[y]) frontier[y] = 1;
        layout.logical_to_physical[logical[k]] = best;
    }
    return layout;
}

TranspiledCircuit route(const Circuit& circ, const Layout& layout, const BackendSpec& backend,
                        const RouteWeights& weights) {
    const CouplingGraph& g = backend.graph();
    const std::size_t n = g.num_nodes();
    constexpr Qubit empty = Layout::kUnmapped;

    if (layout.logical_to_physical.size() != circ.width) throw std::invalid_argument("route: layout width mismatch");
    std::vector<Qubit> l2p = layout.logical_to_physical;
    std::vector<Qubit> p2l(n, empty);
    for (Qubit q = 0; q < l2p.size(); ++q) {
        if (l2p[q] == empty) continue;
        if (l2p[q] >= n || p2l[l2p[q]] != empty) throw std::invalid_argument("route: layout is not injective");
        p2l[l2p[q]] = q;
    }
    auto phys = [&](Qubit q) {
        if (q >= l2p.size() || l2p[q] == empty) throw std::invalid_argument("route: gate on an unplaced qubit");
        return l2p[q];
    };

    TranspiledCircuit out;
    out.num_physical = n;
    out.initial_layout = layout;
    out.source_seed = circ.meta.seed;
    out.gates.reserve(circ.gates.size() * 2);

    for (const Gate& gate : circ.gates) {
        if (gate.kind == GateKind::rot) {
            out.gates.push_back({Gate::rot(phys(gate.q0), gate.angles), GateOrigin::logical});
            continue;
        }
        Qubit cur = phys(gate.q0);
        const Qubit target = phys(gate.q1);
        for (std::size_t hops = 0; !g.adjacent(cur, target); ++hops) {
            if (hops >= n) throw std::runtime_error("route: no progress toward target (zero-weight cycle?)");
            // Next hop on a minimum-weight path; ties go to the smaller canonical edge index.
            const auto nb = g.neighbors(cur);
            const auto inc = g.incident_edges(cur);
            std::size_t pick = 0;
            double best = weights.weight(inc[0]) + weights.distance(nb[0], target);
            for (std::size_t k = 1; k < nb.size(); ++k) {
                const double cost = weights.weight(inc[k]) + weights.distance(nb[k], target);
                const double tol = 1e-12 * std::max(1.0, best);
                if (cost < best - tol || (cost <= best + tol && inc[k] < inc[pick])) {
                    best = std::min(best, cost);
                    pick = k;
                }
            }
            const Qubit next = nb[pick];
            out.gates.push_back({Gate::cx(cur, next), GateOrigin::swap});
            out.gates.push_back({Gate::cx(next, cur), GateOrigin::swap});
            out.gates.push_back({Gate::cx(cur, next), GateOrigin::swap});
            ++out.swap_count;
            const Qubit a = p2l[cur], b = p2l[next];
            p2l[cur] = b;
            p2l[next] = a;
            if (a != empty) l2p[a] = next;
            if (b != empty) l2p[b] = cur;
            cur = next;
        }
        out.gates.push_back({Gate::cx(cur, target), GateOrigin::logical});
    }
    out.final_layout.logical_to_physical = l2p;
    return out;
}

TranspiledCircuit route(const Circuit& circ, const Layout& layout, const BackendSpec& backend) {
    return route(circ, layout, backend, RouteWeights(backend.graph(), backend.errors.y_edges));
}

TranspiledCircuit transpile(const Circuit& circ, const BackendSpec& backend, const RouteWeights& weights) {
    return route(circ, noise_aware_layout(circ, backend), backend, weights);
}

std::vector<TranspiledCircuit> transpile_pool_serial(const CircuitPool& pool, const BackendSpec& backend) {
    const RouteWeights weights(backend.graph(), backend.errors.y_edges);
    std::vector<TranspiledCircuit> out;
    out.reserve(pool.circuits.size());
    for (const Circuit& c : pool.circuits) out.push_back(transpile(c, backend, weights));
    return out;
}

std::vector<TranspiledCircuit> transpile_pool(const CircuitPool& pool, const BackendSpec& backend) {
    const RouteWeights weights(backend.graph(), backend.errors.y_edges);
    std::vector<TranspiledCircuit> out(pool.circuits.size());
    const auto count = static_cast<std::ptrdiff_t>(pool.circuits.size());
    // Each iteration writes only its own slot; errors are rethrown after the region.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) if (parallel::enabled())
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = transpile(pool.circuits[static_cast<std::size_t>(i)], backend, weights);
        } catch (...) {
#pragma omp critical(qf_transpile_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace qf
