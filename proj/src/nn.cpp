#include "qf/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "qf/errors.hpp"

namespace qf::nn {

void MlpSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("MlpSpec: need at least [in, out]");
    for (auto w : widths)
        if (w == 0) throw std::invalid_argument("MlpSpec: widths must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("MlpSpec: dropout must lie in [0,1)");
}

MlpHandle add_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, Rng& init_rng) {
    spec.validate();
    MlpHandle h;
    h.spec = spec;
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        Tensor w(in, out);
        for (auto& x : w.values()) x = limit * (2.0 * uniform01(init_rng) - 1.0);
        h.weight_slots.push_back(params.add(prefix + ".W" + std::to_string(l), std::move(w)));
        h.bias_slots.push_back(params.add(prefix + ".b" + std::to_string(l), Tensor(1, out, 0.0)));
    }
    return h;
}

Var mlp_apply(Tape& tape, const MlpHandle& mlp, Var input, Mode mode, Rng* dropout_rng) {
    if (tape.value(input).cols() != mlp.spec.widths.front()) {
        throw std::invalid_argument("mlp_apply: input width " + std::to_string(tape.value(input).cols()) +
                                    " != " + std::to_string(mlp.spec.widths.front()));
    }
    const bool drop = mode == Mode::train && mlp.spec.dropout > 0.0;
    if (drop && dropout_rng == nullptr) throw std::invalid_argument("mlp_apply: train mode needs a dropout rng");
    Var x = input;
    for (std::size_t l = 0; l < mlp.spec.layers(); ++l) {
        x = tape.affine(x, tape.param(mlp.weight_slots[l]), tape.param(mlp.bias_slots[l]));
        if (l + 1 == mlp.spec.layers()) break;
        x = tape.relu(x);
        if (drop) {
            const Tensor& xv = tape.value(x);
            Tensor mask(xv.rows(), xv.cols());
            const double keep = 1.0 - mlp.spec.dropout;
            for (auto& e : mask.values()) e = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
            x = tape.mask_mul(x, std::move(mask));
        }
    }
    return x;
}

AdamState AdamState::for_params(const ParamSet& params, const AdamConfig& cfg) {
    return AdamState{cfg, params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads) {
    if (grads.size() != params.size() || state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient block count mismatch");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads.values[k].rows() != params.values[k].rows() || grads.values[k].cols() != params.values[k].cols()) {
            throw std::invalid_argument("adam_step: shape mismatch in block '" + params.names[k] + "'");
        }
    }
    ++state.step;
    const auto& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params.values[k].values();
        auto g = grads.values[k].values();
        auto m = state.m.values[k].values();
        auto v = state.v.values[k].values();
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

ParamSet fd_gradient(const LossFn& loss, const ParamSet& params, double h) {
    ParamSet probe = params;
    ParamSet out = params.zeros_like();
    for (std::size_t k = 0; k < probe.size(); ++k) {
        auto vals = probe.values[k].values();
        auto dst = out.values[k].values();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double saved = vals[i];
            vals[i] = saved + h;
            const double up = loss(probe);
            vals[i] = saved - h;
            const double down = loss(probe);
            vals[i] = saved;
            dst[i] = (up - down) / (2.0 * h);
        }
    }
    return out;
}

double max_relative_error(const ParamSet& analytic, const ParamSet& numeric) {
    if (analytic.size() != numeric.size()) throw std::invalid_argument("max_relative_error: block count mismatch");
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        const auto a = analytic.values[k].values();
        const auto n = numeric.values[k].values();
        if (a.size() != n.size()) throw std::invalid_argument("max_relative_error: shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!std::isfinite(a[i]) || !std::isfinite(n[i])) throw NumericalError("grad_check: non-finite gradient");
            worst = std::max(worst, std::abs(a[i] - n[i]) / std::max(1e-8, std::abs(a[i]) + std::abs(n[i])));
        }
    }
    return worst;
}

double grad_check(const LossAndGrad& f, const ParamSet& params, double h) {
    const auto [loss0, analytic] = f(params);
    if (!std::isfinite(loss0)) throw NumericalError("grad_check: non-finite loss");
    return max_relative_error(analytic, fd_gradient([&](const ParamSet& p) { return f(p).first; }, params, h));
}

}  // namespace qf::nn
