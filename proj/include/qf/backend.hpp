#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qf/graph.hpp"

namespace qf {

/// Lower bound applied wherever an error rate must stay strictly positive.
inline constexpr double kPositivityFloor = 1e-9;

/**
 * Per-qubit and per-coupling error rates with validity masks.
 *
 * Masked-out entries hold NaN. Every loss and metric filters on the mask before
 * touching a value, so the sentinel can never leak into a sum.
 */
struct ErrorMap {
    std::vector<double> y_nodes;
    std::vector<double> y_edges;
    std::vector<std::uint8_t> mask_nodes;
    std::vector<std::uint8_t> mask_edges;

    static ErrorMap unmasked(std::vector<double> nodes, std::vector<double> edges);

    [[nodiscard]] std::size_t num_nodes() const noexcept { return y_nodes.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return y_edges.size(); }

    /// Throws std::invalid_argument if sizes disagree or a masked-in entry is negative or non-finite.
    void validate() const;

    bool operator==(const ErrorMap& o) const;
};

struct NoiseConfig {
    double median_1q = 2e-4;
    double sigma_1q = 0.4;
    double median_2q = 1e-2;
    double sigma_2q = 0.4;
    double spatial_smoothing = 0.5;
    bool operator==(const NoiseConfig&) const = default;
};

struct BackendSpec {
    std::string id;
    Topology topology;
    ErrorMap errors;
    std::uint64_t seed = 0;
    NoiseConfig noise;

    [[nodiscard]] const CouplingGraph& graph() const noexcept { return topology.graph; }
};

/**
 * Draws a synthetic error map on `topology`.
 *
 * Each component gets a standard-normal log deviation. Deviations are then blended
 * with the mean deviation of the component's neighbourhood in the qubit/coupling
 * incidence structure (for a qubit: its couplings; for a coupling: its two qubits)
 * with weight spatial_smoothing, and finally mapped to median * exp(sigma * deviation),
 * capped at 0.5. Working in standardized log space lets qubit and coupling errors
 * share weak regions despite their two-decade scale gap.
 */
BackendSpec sample_backend(std::string id, const Topology& topology, std::uint64_t seed, const NoiseConfig& cfg);

struct CalibrationRow {
    enum class Kind { one_qubit, two_qubit };
    Kind kind = Kind::one_qubit;
    std::vector<Qubit> operands;  // one qubit, or a directed pair
    std::string gate;
    std::optional<double> error;
};

using CalibrationTable = std::vector<CalibrationRow>;

/// Node label = mean 1q-gate error per qubit; edge label = mean over both directions.
/// Components without entries are masked out. Malformed rows throw with their index.
ErrorMap derive_labels(const CalibrationTable& table, const CouplingGraph& graph);

/// Emits an x/sx style table reproducing `errors` exactly through derive_labels.
CalibrationTable calibration_table_from(const ErrorMap& errors, const CouplingGraph& graph);

/// Adds U[-2s, 2s] noise (mean |delta| = s) to every masked-in entry and floors at kPositivityFloor.
ErrorMap apply_drift(const ErrorMap& errors, std::uint64_t seed, double scale_nodes, double scale_edges);

}  // namespace qf
