#include "qf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qf/errors.hpp"

namespace qf::nn {

std::size_t ParamSet::add(std::string name, Tensor t) {
    names.push_back(std::move(name));
    values.push_back(std::move(t));
    return values.size() - 1;
}

std::size_t ParamSet::scalar_count() const {
    std::size_t c = 0;
    for (const auto& t : values) c += t.size();
    return c;
}

ParamSet ParamSet::zeros_like() const {
    ParamSet z;
    z.names = names;
    for (const auto& t : values) z.values.emplace_back(t.rows(), t.cols(), 0.0);
    return z;
}

std::size_t ParamSet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::out_of_range("ParamSet: no parameter named '" + name + "'");
}

ValueGrad huber(double r, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be > 0");
    const double a = std::abs(r);
    if (a <= delta) return {0.5 * r * r, r};
    return {delta * (a - 0.5 * delta), r > 0.0 ? delta : -delta};
}

ValueGrad softplus(double x) {
    // ln(1+e^x) = max(x,0) + log1p(e^{-|x|})
    const double value = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    const double grad = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return {value, grad};
}

namespace {

void require_finite(const Tensor& t, const char* op) {
    for (double x : t.values()) {
        if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value produced by ") + op);
    }
}

void require_shape(bool ok, const char* op, const std::string& detail) {
    if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch (" + detail + ")");
}

std::string dims(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&)> back, const char* op) {
    require_finite(value, op);
    Node node;
    node.grad = Tensor(value.rows(), value.cols(), 0.0);
    node.value = std::move(value);
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return push(std::move(value), nullptr, "constant"); }

Var Tape::param(std::size_t slot) {
    Var p = push(params_->values.at(slot), nullptr, "param");
    nodes_[p.id].slot = static_cast<std::ptrdiff_t>(slot);
    return p;
}

Var Tape::affine(Var x, Var w, Var b) {
    const Tensor& X = v(x.id);
    const Tensor& W = v(w.id);
    const Tensor& B = v(b.id);
    require_shape(X.cols() == W.rows() && B.rows() == 1 && B.cols() == W.cols(), "affine",
                  dims(X) + " * " + dims(W) + " + " + dims(B));
    const std::size_t n = X.rows(), in = W.rows(), out = W.cols();
    Tensor Y(n, out);
    for (std::size_t i = 0; i < n; ++i) {
        double* y = Y.row(i).data();
        const double* xr = X.row(i).data();
        for (std::size_t j = 0; j < out; ++j) y[j] = B(0, j);
        for (std::size_t k = 0; k < in; ++k) {
            const double xv = xr[k];
            if (xv == 0.0) continue;
            const double* wr = W.row(k).data();
            for (std::size_t j = 0; j < out; ++j) y[j] += xv * wr[j];
        }
    }
    const std::size_t xi = x.id, wi = w.id, bi = b.id;
    Var yv = push(std::move(Y), nullptr, "affine");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, wi, bi, yi, n, in, out](Tape& t) {
        const Tensor& dY = t.g(yi);
        const Tensor& Xv = t.v(xi);
        const Tensor& Wv = t.v(wi);
        Tensor& dX = t.g(xi);
        Tensor& dW = t.g(wi);
        Tensor& dB = t.g(bi);
        for (std::size_t i = 0; i < n; ++i) {
            const double* dy = dY.row(i).data();
            const double* xr = Xv.row(i).data();
            double* dx = dX.row(i).data();
            for (std::size_t j = 0; j < out; ++j) dB(0, j) += dy[j];
            for (std::size_t k = 0; k < in; ++k) {
                const double* wr = Wv.row(k).data();
                double* dw = dW.row(k).data();
                double acc = 0.0;
                const double xv = xr[k];
                for (std::size_t j = 0; j < out; ++j) {
                    acc += dy[j] * wr[j];
                    dw[j] += xv * dy[j];
                }
                dx[k] += acc;
            }
        }
    };
    return yv;
}

Var Tape::relu(Var x) {
    Tensor Y = v(x.id);
    for (auto& e : Y.values()) e = e > 0.0 ? e : 0.0;
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "relu");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi](Tape& t) {
        auto dy = t.g(yi).values();
        auto xv = t.v(xi).values();
        auto dx = t.g(xi).values();
        for (std::size_t i = 0; i < dy.size(); ++i)
            if (xv[i] > 0.0) dx[i] += dy[i];
    };
    return yv;
}

Var Tape::mask_mul(Var x, Tensor mask) {
    const Tensor& X = v(x.id);
    require_shape(mask.rows() == X.rows() && mask.cols() == X.cols(), "mask_mul", dims(X) + " vs " + dims(mask));
    Tensor Y = X;
    for (std::size_t i = 0; i < Y.size(); ++i) Y.values()[i] *= mask.values()[i];
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "mask_mul");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi, m = std::move(mask)](Tape& t) {
        auto dy = t.g(yi).values();
        auto dx = t.g(xi).values();
        auto mv = m.values();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mv[i];
    };
    return yv;
}

Var Tape::concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const std::size_t n = v(parts[0].id).rows();
    std::size_t total = 0;
    std::vector<std::size_t> ids, widths;
    for (Var p : parts) {
        require_shape(v(p.id).rows() == n, "concat_cols", "row counts differ");
        ids.push_back(p.id);
        widths.push_back(v(p.id).cols());
        total += v(p.id).cols();
    }
    Tensor Y(n, total);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto src = v(ids[k]).row(i);
            std::copy(src.begin(), src.end(), Y.row(i).begin() + static_cast<std::ptrdiff_t>(off));
            off += widths[k];
        }
    }
    Var yv = push(std::move(Y), nullptr, "concat_cols");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [ids, widths, yi, n](Tape& t) {
        const Tensor& dY = t.g(yi);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t off = 0;
            for (std::size_t k = 0; k < ids.size(); ++k) {
                auto dx = t.g(ids[k]).row(i);
                for (std::size_t j = 0; j < widths[k]; ++j) dx[j] += dY(i, off + j);
                off += widths[k];
            }
        }
    };
    return yv;
}

Var Tape::gather_rows(Var x, std::vector<std::size_t> index) {
    const Tensor& X = v(x.id);
    Tensor Y(index.size(), X.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= X.rows()) throw std::out_of_range("gather_rows: index out of range");
        std::copy(X.row(index[i]).begin(), X.row(index[i]).end(), Y.row(i).begin());
    }
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "gather_rows");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi, idx = std::move(index)](Tape& t) {
        const Tensor& dY = t.g(yi);
        Tensor& dX = t.g(xi);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto dst = dX.row(idx[i]);
            auto src = dY.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
        }
    };
    return yv;
}

Var Tape::scatter_mean_rows(Var x, std::vector<std::size_t> target, std::size_t rows) {
    const Tensor& X = v(x.id);
    require_shape(target.size() == X.rows(), "scatter_mean_rows", "one target per input row");
    std::vector<double> count(rows, 0.0);
    for (std::size_t t : target) {
        if (t >= rows) throw std::out_of_range("scatter_mean_rows: target out of range");
        count[t] += 1.0;
    }
    Tensor Y(rows, X.cols());
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto dst = Y.row(target[i]);
        auto src = X.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double inv = 1.0 / std::max(1.0, count[r]);
        for (auto& e : Y.row(r)) e *= inv;
    }
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "scatter_mean_rows");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi, tg = std::move(target), cnt = std::move(count)](Tape& t) {
        const Tensor& dY = t.g(yi);
        Tensor& dX = t.g(xi);
        for (std::size_t i = 0; i < tg.size(); ++i) {
            const double inv = 1.0 / std::max(1.0, cnt[tg[i]]);
            auto dst = dX.row(i);
            auto src = dY.row(tg[i]);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j] * inv;
        }
    };
    return yv;
}

Var Tape::softplus(Var x) {
    Tensor Y = v(x.id);
    for (auto& e : Y.values()) e = nn::softplus(e).value;
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "softplus");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi](Tape& t) {
        auto dy = t.g(yi).values();
        auto xv = t.v(xi).values();
        auto dx = t.g(xi).values();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * nn::softplus(xv[i]).grad;
    };
    return yv;
}

Var Tape::log1p(Var x) {
    Tensor Y = v(x.id);
    for (auto& e : Y.values()) {
        if (!(e > -1.0)) throw NumericalError("log1p: argument <= -1");
        e = std::log1p(e);
    }
    const std::size_t xi = x.id;
    Var yv = push(std::move(Y), nullptr, "log1p");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi](Tape& t) {
        auto dy = t.g(yi).values();
        auto xv = t.v(xi).values();
        auto dx = t.g(xi).values();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] / (1.0 + xv[i]);
    };
    return yv;
}

Var Tape::masked_huber_mean(Var pred, std::vector<double> target, std::vector<std::uint8_t> mask, double delta) {
    const Tensor& P = v(pred.id);
    require_shape(P.cols() == 1 && P.rows() == target.size() && target.size() == mask.size(), "masked_huber_mean",
                  dims(P) + " vs " + std::to_string(target.size()) + " targets");
    if (!(delta > 0.0)) throw std::invalid_argument("masked_huber_mean: delta must be > 0");
    std::size_t active = 0;
    for (auto m : mask) active += m ? 1 : 0;
    if (active == 0) throw std::invalid_argument("masked_huber_mean: every component is masked out");
    const double inv = 1.0 / static_cast<double>(active);
    double loss = 0.0;
    std::vector<double> dres(target.size(), 0.0);
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (!mask[i]) continue;
        const auto hg = huber(P(i, 0) - target[i], delta);
        loss += hg.value;
        dres[i] = hg.grad * inv;
    }
    const std::size_t pi = pred.id;
    Var yv = push(Tensor(1, 1, loss * inv), nullptr, "masked_huber_mean");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [pi, yi, d = std::move(dres)](Tape& t) {
        const double up = t.g(yi)(0, 0);
        Tensor& dP = t.g(pi);
        for (std::size_t i = 0; i < d.size(); ++i) dP(i, 0) += up * d[i];
    };
    return yv;
}

Var Tape::weighted_sum(Var x, Tensor weights) {
    const Tensor& X = v(x.id);
    require_shape(weights.rows() == X.rows() && weights.cols() == X.cols(), "weighted_sum", dims(X) + " vs " + dims(weights));
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) acc += X.values()[i] * weights.values()[i];
    const std::size_t xi = x.id;
    Var yv = push(Tensor(1, 1, acc), nullptr, "weighted_sum");
    const std::size_t yi = yv.id;
    nodes_[yi].back = [xi, yi, w = std::move(weights)](Tape& t) {
        const double up = t.g(yi)(0, 0);
        auto dx = t.g(xi).values();
        auto wv = w.values();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up * wv[i];
    };
    return yv;
}

void Tape::backward(Var root) {
    Node& r = nodes_.at(root.id);
    if (r.value.rows() != 1 || r.value.cols() != 1) throw std::invalid_argument("backward: root must be a scalar");
    for (auto& node : nodes_) node.grad.fill(0.0);
    r.grad(0, 0) = 1.0;
    for (std::size_t i = root.id + 1; i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this);
    }
    for (const auto& node : nodes_) require_finite(node.grad, "backward");
}

ParamSet Tape::param_grads() const {
    ParamSet out = params_->zeros_like();
    for (const auto& node : nodes_) {
        if (node.slot < 0) continue;
        auto dst = out.values[static_cast<std::size_t>(node.slot)].values();
        auto src = node.grad.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return out;
}

}  // namespace qf::nn
