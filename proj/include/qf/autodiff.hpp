#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qf/matrix.hpp"

namespace qf::nn {

using Tensor = Matrix;

/// Named parameter blocks; gradients use the same layout.
struct ParamSet {
    std::vector<std::string> names;
    std::vector<Tensor> values;

    std::size_t add(std::string name, Tensor t);
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::size_t scalar_count() const;
    [[nodiscard]] ParamSet zeros_like() const;
    [[nodiscard]] std::size_t index_of(const std::string& name) const;
    bool operator==(const ParamSet&) const = default;
};

struct Var {
    std::size_t id = 0;
};

/**
 * Reverse-mode tape over the operator set the regressors need.
 *
 * Nodes are appended in evaluation order; backward() sweeps them in reverse and
 * accumulates into each node's gradient. Parameter leaves remember their slot in
 * the ParamSet so gradients can be collected afterwards. Every op checks that its
 * result is finite and throws NumericalError otherwise.
 */
class Tape {
public:
    explicit Tape(const ParamSet& params) : params_(&params) {}

    Var constant(Tensor value);
    Var param(std::size_t slot);

    /// x W + b, with W (in x out) and b (1 x out).
    Var affine(Var x, Var w, Var b);
    Var relu(Var x);
    /// Elementwise multiply by a fixed mask (inverted dropout keeps the 1/(1-p) factor in the mask).
    Var mask_mul(Var x, Tensor mask);
    Var concat_cols(std::span<const Var> parts);
    /// out[i] = x[index[i]].
    Var gather_rows(Var x, std::vector<std::size_t> index);
    /// out[t] = (sum of x[i] with target[i] == t) / max(1, count_t); `rows` output rows.
    Var scatter_mean_rows(Var x, std::vector<std::size_t> target, std::size_t rows);
    Var softplus(Var x);
    Var log1p(Var x);
    /// Mean of Huber(pred - target) over rows with mask 1; pred is k x 1. Scalar result.
    Var masked_huber_mean(Var pred, std::vector<double> target, std::vector<std::uint8_t> mask, double delta);
    /// Sum of all entries weighted elementwise by `weights` (same shape); scalar result.
    Var weighted_sum(Var x, Tensor weights);

    [[nodiscard]] const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
    [[nodiscard]] const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }

    /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
    void backward(Var root);
    /// Sum of gradients reaching each parameter slot.
    [[nodiscard]] ParamSet param_grads() const;

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> back;
        std::ptrdiff_t slot = -1;
    };
    Var push(Tensor value, std::function<void(Tape&)> back, const char* op);
    Tensor& g(std::size_t id) { return nodes_[id].grad; }
    const Tensor& v(std::size_t id) const { return nodes_[id].value; }

    const ParamSet* params_;
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Scalar primitives
// ---------------------------------------------------------------------------

struct ValueGrad {
    double value;
    double grad;
};

/// r^2/2 for |r| <= delta, delta(|r| - delta/2) otherwise. Throws std::invalid_argument if delta <= 0.
ValueGrad huber(double r, double delta);
/// ln(1 + e^x) without overflow; derivative is the logistic function.
ValueGrad softplus(double x);

}  // namespace qf::nn
