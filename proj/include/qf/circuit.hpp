#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qf/graph.hpp"

namespace qf {

enum class GateKind : std::uint8_t { rot, cx };

/// ROT carries one operand and three angles; CX carries (control, target).
struct Gate {
    GateKind kind = GateKind::rot;
    Qubit q0 = 0;
    Qubit q1 = 0;
    std::array<double, 3> angles{};

    static Gate rot(Qubit q, std::array<double, 3> a) { return {GateKind::rot, q, q, a}; }
    static Gate cx(Qubit control, Qubit target) { return {GateKind::cx, control, target, {}}; }
    bool operator==(const Gate&) const = default;
};

struct CircuitMeta {
    std::uint64_t seed = 0;
    std::size_t active_width = 0;
    std::size_t cx_budget = 0;
    bool operator==(const CircuitMeta&) const = default;
};

struct Circuit {
    std::size_t width = 0;
    std::vector<Gate> gates;
    CircuitMeta meta;

    [[nodiscard]] std::size_t cx_count() const;
    bool operator==(const Circuit&) const = default;
};

struct CircuitConfig {
    std::size_t depth_cap = 64;
    std::size_t budget_max = 56;
};

/**
 * Random layered circuit.
 *
 * Draws an active width w in [1, n] and a CX budget in [0, budget_max], picks w
 * active qubits, then repeats up to depth_cap layers of: one ROT per active qubit,
 * followed by CX gates on a fresh random matching of the active set. The last
 * matching is truncated so the CX total hits the budget exactly; generation stops
 * once the budget is spent (or no matching exists for w = 1), leaving a closing
 * rotation layer.
 */
Circuit gen_circuit(std::size_t n_qubits, std::uint64_t seed, const CircuitConfig& cfg);

struct PoolMeta {
    std::string backend_id;
    std::size_t pool_index = 0;
    std::uint64_t master_seed = 0;
    bool operator==(const PoolMeta&) const = default;
};

struct CircuitPool {
    std::vector<Circuit> circuits;
    PoolMeta meta;
    bool operator==(const CircuitPool&) const = default;
};

/// Seed of circuit `index` in pool `pool_index`: derive_seed({circuits, master, pool, index}).
std::uint64_t circuit_seed(std::uint64_t master_seed, std::size_t pool_index, std::size_t circuit_index);

/// M circuits with per-circuit derived seeds; throws std::invalid_argument when M = 0.
CircuitPool gen_pool(std::size_t n_qubits, std::size_t m, std::uint64_t master_seed, std::size_t pool_index,
                     const CircuitConfig& cfg, std::string backend_id = {});

}  // namespace qf
