#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qf/backend.hpp"
#include "qf/circuit.hpp"

namespace qf {

/// 1 - prod(1 - p_i): failure probability of an interaction routed across couplings p.
/// Throws std::invalid_argument if any p lies outside [0, 1).
double path_failure(std::span<const double> p);

/**
 * Additive routing metric: w(e) = -ln(1 - p_2q(e)), so a minimum-weight path is a
 * minimum-p_eff path. `distance` is the all-pairs shortest weighted distance.
 */
class RouteWeights {
public:
    RouteWeights() = default;
    RouteWeights(const CouplingGraph& g, std::span<const double> edge_errors);

    [[nodiscard]] double weight(std::size_t edge) const { return weights_.at(edge); }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] double distance(Qubit a, Qubit b) const { return dist_[a * n_ + b]; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<double> weights_;
    std::vector<double> dist_;
};

/// Injective logical -> physical map. Slots of logical qubits the circuit never touches hold kUnmapped.
struct Layout {
    static constexpr Qubit kUnmapped = static_cast<Qubit>(-1);
    std::vector<Qubit> logical_to_physical;
    bool operator==(const Layout&) const = default;
};

/// A CX emitted by routing carries the origin of its logical gate or the SWAP it decomposes.
enum class GateOrigin : std::uint8_t { logical, swap };

struct PhysicalGate {
    Gate gate;
    GateOrigin origin = GateOrigin::logical;
    bool operator==(const PhysicalGate&) const = default;
};

struct TranspiledCircuit {
    std::size_t num_physical = 0;
    std::vector<PhysicalGate> gates;
    Layout initial_layout;
    Layout final_layout;
    std::size_t swap_count = 0;
    std::uint64_t source_seed = 0;
    bool operator==(const TranspiledCircuit&) const = default;
};

/// Physical-qubit placement score: node error + mean error of incident couplings.
std::vector<double> placement_scores(const BackendSpec& backend);

/**
 * Greedy noise-aware placement.
 *
 * Logical qubits are visited by descending CX degree (index breaks ties). The first
 * lands on the best-scoring physical qubit; each subsequent one on the best-scoring
 * free qubit adjacent to the already placed set. Throws std::invalid_argument when
 * the circuit is wider than the backend.
 */
Layout noise_aware_layout(const Circuit& circ, const BackendSpec& backend);

/**
 * In-order SWAP routing. A CX whose operands are not coupled walks its control along
 * the minimum-weight path toward the target, one SWAP (three CX) per step; the next
 * hop minimises w(cur, x) + D(x, target), smallest edge index first on ties.
 */
TranspiledCircuit route(const Circuit& circ, const Layout& layout, const BackendSpec& backend,
                        const RouteWeights& weights);
TranspiledCircuit route(const Circuit& circ, const Layout& layout, const BackendSpec& backend);

/// Layout + routing for one circuit with precomputed weights.
TranspiledCircuit transpile(const Circuit& circ, const BackendSpec& backend, const RouteWeights& weights);

/// OpenMP kernel over circuits; output is identical to transpile_pool_serial.
std::vector<TranspiledCircuit> transpile_pool(const CircuitPool& pool, const BackendSpec& backend);
/// Single-threaded reference.
std::vector<TranspiledCircuit> transpile_pool_serial(const CircuitPool& pool, const BackendSpec& backend);

}  // namespace qf
