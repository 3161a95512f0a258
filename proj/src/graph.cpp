#include "qf/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

#include "qf/rng.hpp"

namespace qf {

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("hconcat: row mismatch " + std::to_string(a.rows()) + " vs " +
                                    std::to_string(b.rows()));
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
        std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

std::optional<std::size_t> CouplingGraph::edge_index(Qubit a, Qubit b) const {
    if (a == b) return std::nullopt;
    const Edge key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

CouplingGraph canonicalize_edges(std::span<const std::pair<Qubit, Qubit>> raw, std::size_t n) {
    if (n == 0) throw std::invalid_argument("coupling graph needs at least one qubit");
    CouplingGraph g;
    g.edges_.reserve(raw.size());
    for (const auto& [a, b] : raw) {
        if (a >= n || b >= n) {
            throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                        ") has an endpoint >= n=" + std::to_string(n));
        }
        if (a == b) throw std::invalid_argument("self-loop on qubit " + std::to_string(a));
        g.edges_.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

    g.adjacency_.assign(n, {});
    g.incident_.assign(n, {});
    // Ascending neighbor order falls out of the sorted edge list for the u side;
    // the v side is sorted afterwards together with its edge indices.
    for (std::size_t e = 0; e < g.edges_.size(); ++e) {
        const auto [u, v] = g.edges_[e];
        g.adjacency_[u].push_back(v);
        g.incident_[u].push_back(e);
        g.adjacency_[v].push_back(u);
        g.incident_[v].push_back(e);
    }
    for (Qubit v = 0; v < n; ++v) {
        std::vector<std::pair<Qubit, std::size_t>> zipped;
        for (std::size_t k = 0; k < g.adjacency_[v].size(); ++k) zipped.emplace_back(g.adjacency_[v][k], g.incident_[v][k]);
        std::sort(zipped.begin(), zipped.end());
        for (std::size_t k = 0; k < zipped.size(); ++k) {
            g.adjacency_[v][k] = zipped[k].first;
            g.incident_[v][k] = zipped[k].second;
        }
    }

    const auto dist = bfs_distances(g, 0);
    for (Qubit v = 0; v < n; ++v) {
        if (dist[v] == std::numeric_limits<std::size_t>::max()) {
            throw std::invalid_argument("coupling graph is disconnected: node " + std::to_string(v) +
                                        " unreachable from node 0");
        }
    }
    return g;
}

std::vector<std::size_t> bfs_distances(const CouplingGraph& g, Qubit src) {
    constexpr auto inf = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(g.num_nodes(), inf);
    std::queue<Qubit> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        const Qubit x = q.front();
        q.pop();
        for (Qubit y : g.neighbors(x)) {
            if (dist[y] == inf) {
                dist[y] = dist[x] + 1;
                q.push(y);
            }
        }
    }
    return dist;
}

bool connected_without_edge(const CouplingGraph& g, std::size_t skip) {
    const std::size_t n = g.num_nodes();
    std::vector<char> seen(n, 0);
    std::vector<Qubit> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Qubit x = stack.back();
        stack.pop_back();
        const auto nb = g.neighbors(x);
        const auto inc = g.incident_edges(x);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (inc[k] == skip || seen[nb[k]]) continue;
            seen[nb[k]] = 1;
            ++reached;
            stack.push_back(nb[k]);
        }
    }
    return reached == n;
}

// ---------------------------------------------------------------------------

std::string to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::path: return "path";
        case TopologyKind::ring: return "ring";
        case TopologyKind::grid: return "grid";
        case TopologyKind::heavyhex: return "heavyhex";
    }
    return "unknown";
}

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "path") return TopologyKind::path;
    if (s == "ring") return TopologyKind::ring;
    if (s == "grid") return TopologyKind::grid;
    if (s == "heavyhex" || s == "heavyhex-like") return TopologyKind::heavyhex;
    throw std::invalid_argument("unknown topology kind '" + s + "'");
}

namespace {

std::vector<std::pair<Qubit, Qubit>> heavyhex_pairs(const TopologyParams& p, std::uint64_t seed) {
    const std::size_t n = p.n;
    const std::size_t rows = std::max<std::size_t>(1, std::min(p.rows, n / 2));
    // Row r holds base (+1 for the first n % rows rows) consecutive qubits.
    std::vector<std::size_t> start(rows + 1, 0), len(rows, n / rows);
    for (std::size_t r = 0; r < n % rows; ++r) ++len[r];
    for (std::size_t r = 0; r < rows; ++r) start[r + 1] = start[r] + len[r];
    const std::size_t cols = len[0];
    const std::size_t per_gap = p.couplers > 0 ? p.couplers : std::max<std::size_t>(1, cols / 4);

    std::vector<std::pair<Qubit, Qubit>> pairs;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c + 1 < len[r]; ++c) pairs.emplace_back(start[r] + c, start[r] + c + 1);

    Rng rng(derive_seed({stream::topology, seed, n, rows, per_gap}));
    std::vector<char> has_vertical(n, 0);
    for (std::size_t r = 0; r + 1 < rows; ++r) {
        std::vector<std::size_t> candidates;
        for (std::size_t c = 0; c < std::min(len[r], len[r + 1]); ++c) {
            if (!has_vertical[start[r] + c] && !has_vertical[start[r + 1] + c]) candidates.push_back(c);
        }
        shuffle_in_place(candidates, rng);
        std::vector<std::size_t> chosen;
        for (std::size_t c : candidates) {
            if (chosen.size() == per_gap) break;
            // Couplers in one gap sit at least two columns apart.
            const bool spaced = std::all_of(chosen.begin(), chosen.end(), [c](std::size_t o) {
                return (c > o ? c - o : o - c) >= 2;
            });
            if (spaced) chosen.push_back(c);
        }
        if (chosen.empty()) {
            throw std::invalid_argument("heavyhex: no room for a vertical coupler between rows " +
                                        std::to_string(r) + " and " + std::to_string(r + 1));
        }
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t c : chosen) {
            has_vertical[start[r] + c] = has_vertical[start[r + 1] + c] = 1;
            pairs.emplace_back(start[r] + c, start[r + 1] + c);
        }
    }
    return pairs;
}

}  // namespace

Topology gen_topology(TopologyKind kind, const TopologyParams& params, std::uint64_t seed) {
    std::vector<std::pair<Qubit, Qubit>> pairs;
    std::size_t n = params.n;
    switch (kind) {
        case TopologyKind::path:
            if (n < 2) throw std::invalid_argument("path topology needs n >= 2");
            for (Qubit i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
            break;
        case TopologyKind::ring:
            if (n < 3) throw std::invalid_argument("ring topology needs n >= 3");
            for (Qubit i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
            break;
        case TopologyKind::grid: {
            const std::size_t rows = params.rows, cols = params.cols;
            n = rows * cols;
            if (n < 2) throw std::invalid_argument("grid topology needs rows*cols >= 2");
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    const Qubit q = r * cols + c;
                    if (c + 1 < cols) pairs.emplace_back(q, q + 1);
                    if (r + 1 < rows) pairs.emplace_back(q, q + cols);
                }
            }
            break;
        }
        case TopologyKind::heavyhex:
            if (n < 2) throw std::invalid_argument("heavyhex topology needs n >= 2");
            pairs = heavyhex_pairs(params, seed);
            break;
    }
    Topology t;
    t.kind = kind;
    t.params = params;
    if (kind == TopologyKind::grid) t.params.n = n;
    t.seed = seed;
    t.graph = canonicalize_edges(pairs, n);
    return t;
}

// ---------------------------------------------------------------------------

Betweenness betweenness(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    const std::size_t m = g.num_edges();
    Betweenness out{std::vector<double>(n, 0.0), std::vector<double>(m, 0.0)};
    constexpr auto inf = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<Qubit> order;
    order.reserve(n);
    for (Qubit s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        order.clear();
        std::queue<Qubit> q;
        dist[s] = 0;
        sigma[s] = 1.0;
        q.push(s);
        while (!q.empty()) {
            const Qubit x = q.front();
            q.pop();
            order.push_back(x);
            for (Qubit y : g.neighbors(x)) {
                if (dist[y] == inf) {
                    dist[y] = dist[x] + 1;
                    q.push(y);
                }
                if (dist[y] == dist[x] + 1) sigma[y] += sigma[x];
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const Qubit w = *it;
            const auto nb = g.neighbors(w);
            const auto inc = g.incident_edges(w);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const Qubit pred = nb[k];
                if (dist[pred] + 1 != dist[w]) continue;
                const double c = sigma[pred] / sigma[w] * (1.0 + delta[w]);
                out.edges[inc[k]] += c;
                delta[pred] += c;
            }
            if (w != s) out.nodes[w] += delta[w];
        }
    }
    // Every unordered pair was visited from both endpoints.
    const double node_pairs = static_cast<double>(n - 1) * static_cast<double>(n > 1 ? n - 2 : 0) / 2.0;
    const double all_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    for (auto& b : out.nodes) b = node_pairs > 0 ? b / 2.0 / node_pairs : 0.0;
    for (auto& b : out.edges) b = all_pairs > 0 ? b / 2.0 / all_pairs : 0.0;
    return out;
}

std::vector<double> clustering_coefficients(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> out(n, 0.0);
    for (Qubit v = 0; v < n; ++v) {
        const auto nb = g.neighbors(v);
        const std::size_t k = nb.size();
        if (k < 2) continue;
        std::size_t links = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (g.adjacent(nb[i], nb[j])) ++links;
        out[v] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
    }
    return out;
}

std::vector<double> harmonic_centrality(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> out(n, 0.0);
    for (Qubit v = 0; v < n; ++v) {
        const auto d = bfs_distances(g, v);
        double acc = 0.0;
        for (Qubit w = 0; w < n; ++w)
            if (w != v) acc += 1.0 / static_cast<double>(d[w]);
        out[v] = acc;
    }
    return out;
}

std::vector<std::size_t> core_numbers(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::size_t> deg(n), core(n, 0);
    std::vector<char> removed(n, 0);
    for (Qubit v = 0; v < n; ++v) deg[v] = g.degree(v);
    // Repeatedly strip the minimum-degree node; its core number is the running max of removal degrees.
    std::size_t level = 0;
    for (std::size_t step = 0; step < n; ++step) {
        Qubit best = n;
        for (Qubit v = 0; v < n; ++v)
            if (!removed[v] && (best == n || deg[v] < deg[best])) best = v;
        level = std::max(level, deg[best]);
        core[best] = level;
        removed[best] = 1;
        for (Qubit y : g.neighbors(best))
            if (!removed[y]) --deg[y];
    }
    return core;
}

std::vector<std::uint8_t> bridge_flags(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::uint8_t> flags(g.num_edges(), 0);
    std::vector<std::size_t> disc(n, 0), low(n, 0);
    std::vector<char> seen(n, 0);
    std::size_t timer = 0;

    // Iterative DFS: frame = (node, parent edge, next neighbor slot).
    struct Frame {
        Qubit v;
        std::size_t parent_edge;
        std::size_t next;
    };
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<Frame> stack;
    for (Qubit root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        disc[root] = low[root] = timer++;
        stack.push_back({root, none, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto nb = g.neighbors(f.v);
            const auto inc = g.incident_edges(f.v);
            if (f.next < nb.size()) {
                const std::size_t k = f.next++;
                if (inc[k] == f.parent_edge) continue;
                const Qubit y = nb[k];
                if (seen[y]) {
                    low[f.v] = std::min(low[f.v], disc[y]);
                } else {
                    seen[y] = 1;
                    disc[y] = low[y] = timer++;
                    stack.push_back({y, inc[k], 0});
                }
                continue;
            }
            const Frame done = f;
            stack.pop_back();
            if (!stack.empty()) {
                Frame& parent = stack.back();
                low[parent.v] = std::min(low[parent.v], low[done.v]);
                if (low[done.v] > disc[parent.v]) flags[done.parent_edge] = 1;
            }
        }
    }
    return flags;
}

std::vector<double> min_max_normalize(std::span<const double> a) {
    std::vector<double> out(a.size(), 0.0);
    if (a.empty()) return out;
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    const double range = *hi - *lo;
    if (range <= 0.0) return out;
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - *lo) / range;
    return out;
}

Matrix node_static_features(const CouplingGraph& g) {
    const std::size_t n = g.num_nodes();
    Matrix x(n, node_col::count);
    std::size_t max_deg = 0;
    for (Qubit v = 0; v < n; ++v) max_deg = std::max(max_deg, g.degree(v));
    const auto bc = betweenness(g);
    const auto cc = clustering_coefficients(g);
    const auto hc = harmonic_centrality(g);
    const auto core = core_numbers(g);
    const std::size_t max_core = core.empty() ? 0 : *std::max_element(core.begin(), core.end());
    for (Qubit v = 0; v < n; ++v) {
        x(v, node_col::deg_norm) = max_deg > 0 ? static_cast<double>(g.degree(v)) / static_cast<double>(max_deg) : 0.0;
        x(v, node_col::betweenness) = bc.nodes[v];
        x(v, node_col::clustering) = cc[v];
        x(v, node_col::harmonic) = hc[v];
        x(v, node_col::kcore_norm) = max_core > 0 ? static_cast<double>(core[v]) / static_cast<double>(max_core) : 0.0;
    }
    return x;
}

Matrix edge_static_features(const CouplingGraph& g) {
    const std::size_t m = g.num_edges();
    Matrix x(m, edge_col::count);
    const auto bc = betweenness(g);
    const auto bridges = bridge_flags(g);
    std::vector<double> sumdeg(m), proddeg(m);
    for (std::size_t e = 0; e < m; ++e) {
        const auto [u, v] = g.edge(e);
        const auto du = static_cast<double>(g.degree(u));
        const auto dv = static_cast<double>(g.degree(v));
        sumdeg[e] = du + dv;
        proddeg[e] = du * dv;
    }
    const auto sn = min_max_normalize(sumdeg);
    const auto pn = min_max_normalize(proddeg);
    for (std::size_t e = 0; e < m; ++e) {
        x(e, edge_col::betweenness) = bc.edges[e];
        x(e, edge_col::sumdeg_norm) = sn[e];
        x(e, edge_col::proddeg_norm) = pn[e];
        x(e, edge_col::bridge) = bridges[e];
    }
    return x;
}

}  // namespace qf
