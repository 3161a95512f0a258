#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qf/features.hpp"
#include "qf/nn.hpp"

namespace qf {

enum class TargetKind { node, edge };

std::string to_string(TargetKind k);
TargetKind target_kind_from_string(const std::string& s);

struct RegressorConfig {
    TargetKind kind = TargetKind::node;
    std::size_t hidden = 64;
    std::size_t rounds = 1;
    std::size_t mlp_depth = 2;  // affine layers per block
    double dropout = 0.1;
    double huber_delta = 1e-4;  // node default; edge models use 1e-3
    std::uint64_t init_seed = 0;
    // Frozen output normalization: node z = shift + scale * g_V(h), edge y = scale * softplus(g_E(.)).
    // The identity (0, 1) reproduces the bare heads; train() can fit both from training labels.
    double target_shift = 0.0;
    double target_scale = 1.0;

    static RegressorConfig defaults_for(TargetKind kind);
    void validate() const;
    bool operator==(const RegressorConfig&) const = default;
};

/**
 * Edge-aware message-passing regressor.
 *
 *   h0_v = phi_V(x_v),  e_uv = phi_E(x_uv)
 *   m_vw = phi_M([h_v | h_w | e_vw])              for both orientations of every coupling
 *   a_v  = sum_w m_vw / max(1, deg v)
 *   h_v' = phi_U([h_v | a_v])                     repeated `rounds` times
 *
 * The node head is linear on the final embedding and predicts z = log(1 + y).
 * The edge head is an MLP on [h0_u | h0_v | e_uv] (canonical u < v) followed by softplus;
 * since it reads the pre-aggregation embeddings, edge models carry no phi_M/phi_U blocks.
 * Node and edge models never share parameters.
 */
class Regressor {
public:
    Regressor() = default;
    explicit Regressor(const RegressorConfig& cfg);

    [[nodiscard]] const RegressorConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] nn::ParamSet& params() noexcept { return params_; }
    [[nodiscard]] const nn::ParamSet& params() const noexcept { return params_; }

    /// Raw head output: node model -> z (n x 1, log1p space); edge model -> y_hat (|E| x 1, > 0).
    /// Throws SchemaError for unstandardized samples.
    nn::Var forward(nn::Tape& tape, const GraphSample& sample, nn::Mode mode, Rng* dropout_rng) const;

    /// Masked Huber loss of `forward` against the sample labels.
    nn::Var loss(nn::Tape& tape, const GraphSample& sample, nn::Mode mode, Rng* dropout_rng) const;

    /// Eval-mode predictions on the error-rate scale (node: expm1(z), edge: softplus output).
    [[nodiscard]] std::vector<double> predict(const GraphSample& sample) const;
    [[nodiscard]] std::vector<double> predict_with(const nn::ParamSet& params, const GraphSample& sample) const;

    /// Loss and parameter gradients for one sample (used by training and grad_check).
    [[nodiscard]] std::pair<double, nn::ParamSet> loss_and_grad(const nn::ParamSet& params, const GraphSample& sample,
                                                                nn::Mode mode, Rng* dropout_rng) const;

private:
    nn::Var rescale(nn::Tape& tape, nn::Var x, double shift) const;

    RegressorConfig cfg_;
    nn::ParamSet params_;
    nn::MlpHandle node_enc_, edge_enc_, head_;
    std::vector<nn::MlpHandle> message_, update_;
};

/// Mean Huber over masked-in nodes of z - log1p(y).
double loss_node(std::span<const double> z, std::span<const double> labels, std::span<const std::uint8_t> mask,
                 double delta);
/// Mean Huber over masked-in edges of y_hat - y.
double loss_edge(std::span<const double> y_hat, std::span<const double> labels, std::span<const std::uint8_t> mask,
                 double delta);

}  // namespace qf
