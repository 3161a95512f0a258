#include "qf/circuit.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "qf/parallel.hpp"
#include "qf/rng.hpp"

namespace qf {

std::size_t Circuit::cx_count() const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.kind == GateKind::cx; }));
}

Circuit gen_circuit(std::size_t n_qubits, std::uint64_t seed, const CircuitConfig& cfg) {
    if (n_qubits == 0) throw std::invalid_argument("gen_circuit: n_qubits must be >= 1");
    if (cfg.depth_cap == 0) throw std::invalid_argument("gen_circuit: depth_cap must be >= 1");
    constexpr double two_pi = 6.283185307179586476925286766559;

    Rng rng(seed);
    Circuit c;
    c.width = n_qubits;
    c.meta.seed = seed;
    const auto w = static_cast<std::size_t>(uniform_int(rng, 1, n_qubits));
    const auto budget = static_cast<std::size_t>(uniform_int(rng, 0, cfg.budget_max));
    c.meta.active_width = w;
    c.meta.cx_budget = budget;

    std::vector<Qubit> active(n_qubits);
    std::iota(active.begin(), active.end(), Qubit{0});
    shuffle_in_place(active, rng);
    active.resize(w);
    std::sort(active.begin(), active.end());

    std::size_t remaining = budget;
    std::vector<Qubit> order = active;
    for (std::size_t layer = 0; layer < cfg.depth_cap; ++layer) {
        for (Qubit q : active) {
            c.gates.push_back(Gate::rot(q, {two_pi * uniform01(rng), two_pi * uniform01(rng), two_pi * uniform01(rng)}));
        }
        if (remaining == 0 || w < 2) break;
        shuffle_in_place(order, rng);
        for (std::size_t k = 0; k + 1 < w && remaining > 0; k += 2, --remaining) {
            c.gates.push_back(Gate::cx(order[k], order[k + 1]));
        }
    }
    return c;
}

std::uint64_t circuit_seed(std::uint64_t master_seed, std::size_t pool_index, std::size_t circuit_index) {
    return derive_seed({stream::circuits, master_seed, pool_index, circuit_index});
}

CircuitPool gen_pool(std::size_t n_qubits, std::size_t m, std::uint64_t master_seed, std::size_t pool_index,
                     const CircuitConfig& cfg, std::string backend_id) {
    if (m == 0) throw std::invalid_argument("gen_pool: pool size M must be >= 1");
    CircuitPool pool;
    pool.meta = {std::move(backend_id), pool_index, master_seed};
    pool.circuits.resize(m);
    const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 8) if (parallel::enabled())
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        pool.circuits[idx] = gen_circuit(n_qubits, circuit_seed(master_seed, pool_index, idx), cfg);
    }
    return pool;
}

}  // namespace qf
