#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qf/autodiff.hpp"
#include "qf/rng.hpp"

namespace qf::nn {

enum class Mode { train, eval };

/// Affine layers with ReLU between them and identity on the output.
struct MlpSpec {
    std::vector<std::size_t> widths;  // [in, hidden..., out]
    double dropout = 0.0;             // applied after each hidden activation in train mode

    [[nodiscard]] std::size_t layers() const { return widths.size() - 1; }
    void validate() const;
};

/// Parameter slots of one MLP inside a ParamSet.
struct MlpHandle {
    MlpSpec spec;
    std::vector<std::size_t> weight_slots;
    std::vector<std::size_t> bias_slots;
};

/// Registers weights "<prefix>.W<l>" / "<prefix>.b<l>"; W ~ U(+-sqrt(6/(fan_in+fan_out))), b = 0.
MlpHandle add_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, Rng& init_rng);

/// Forward pass. In train mode `dropout_rng` must be given; masks are recorded on the tape.
Var mlp_apply(Tape& tape, const MlpHandle& mlp, Var input, Mode mode, Rng* dropout_rng);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
    AdamConfig cfg;
    ParamSet m;
    ParamSet v;
    std::uint64_t step = 0;

    static AdamState for_params(const ParamSet& params, const AdamConfig& cfg);
};

/// One bias-corrected Adam update. Throws std::invalid_argument on any shape mismatch.
void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads);

/// Loss and reverse-mode gradients at `params`.
using LossAndGrad = std::function<std::pair<double, ParamSet>(const ParamSet&)>;

/**
 * Central finite differences (step h) against reverse-mode gradients, over every scalar
 * parameter. Returns max |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
 * Throws NumericalError if any gradient is non-finite.
 */
double grad_check(const LossAndGrad& f, const ParamSet& params, double h = 1e-5);

/// Loss only; the finite-difference probes never need gradients.
using LossFn = std::function<double(const ParamSet&)>;

/// Central-difference gradient of `loss` at `params` for every scalar parameter.
ParamSet fd_gradient(const LossFn& loss, const ParamSet& params, double h = 1e-5);

/// max |a - n| / max(1e-8, |a| + |n|) over all entries; throws NumericalError on non-finite input.
double max_relative_error(const ParamSet& analytic, const ParamSet& numeric);

}  // namespace qf::nn
