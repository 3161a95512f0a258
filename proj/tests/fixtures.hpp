// Small deterministic datasets shared by the model and pipeline suites.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qf/features.hpp"
#include "qf/rng.hpp"
#include "qf/transpiler.hpp"

namespace qf::test {

struct Fleet {
    std::vector<BackendSpec> backends;
    std::vector<GraphSample> samples;  // raw (unstandardized), labelled
};

inline Fleet small_fleet(std::size_t backends, std::size_t pools, std::size_t circuits, std::uint64_t seed,
                         TopologyKind kind = TopologyKind::heavyhex, std::size_t n = 27) {
    Fleet f;
    TopologyParams tp;
    tp.n = n;
    for (std::size_t b = 0; b < backends; ++b) {
        const auto topo = gen_topology(kind, tp, derive_seed({seed, 1}));
        f.backends.push_back(sample_backend("fx-" + std::to_string(b), topo, derive_seed({seed, b}), {}));
        const auto& bk = f.backends.back();
        auto graph = std::make_shared<const CouplingGraph>(bk.graph());
        for (std::size_t p = 0; p < pools; ++p) {
            const auto pool = gen_pool(n, circuits, derive_seed({seed, b, 7}), p, {16, 2 * bk.graph().num_edges()}, bk.id);
            f.samples.push_back(build_sample(bk, graph, p, transpile_pool(pool, bk), true));
        }
    }
    return f;
}

inline std::vector<GraphSample> standardized(const std::vector<GraphSample>& raw) {
    const auto st = fit_standardizer(raw, "none");
    std::vector<GraphSample> out;
    for (const auto& s : raw) out.push_back(st.apply(s));
    return out;
}

}  // namespace qf::test
