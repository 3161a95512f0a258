#include "qf/gnn.hpp"

#include <cmath>
#include <stdexcept>

#include "qf/errors.hpp"

namespace qf {

std::string to_string(TargetKind k) { return k == TargetKind::node ? "node" : "edge"; }

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "node") return TargetKind::node;
    if (s == "edge") return TargetKind::edge;
    throw std::invalid_argument("unknown target kind '" + s + "' (expected node|edge)");
}

RegressorConfig RegressorConfig::defaults_for(TargetKind kind) {
    RegressorConfig c;
    c.kind = kind;
    c.huber_delta = kind == TargetKind::node ? 1e-4 : 1e-3;
    return c;
}

void RegressorConfig::validate() const {
    if (hidden == 0) throw std::invalid_argument("RegressorConfig: hidden must be >= 1");
    if (rounds == 0) throw std::invalid_argument("RegressorConfig: rounds must be >= 1");
    if (mlp_depth == 0) throw std::invalid_argument("RegressorConfig: mlp_depth must be >= 1");
    if (!(huber_delta > 0.0)) throw std::invalid_argument("RegressorConfig: huber_delta must be > 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("RegressorConfig: dropout must lie in [0,1)");
    if (!std::isfinite(target_shift) || !(target_scale > 0.0) || !std::isfinite(target_scale)) {
        throw std::invalid_argument("RegressorConfig: target_shift must be finite and target_scale > 0");
    }
    if (kind == TargetKind::edge && target_shift != 0.0) {
        throw std::invalid_argument("RegressorConfig: edge models take no target_shift");
    }
}

namespace {

nn::MlpSpec block(std::size_t in, std::size_t hidden, std::size_t out, std::size_t depth, double dropout) {
    nn::MlpSpec s;
    s.widths.push_back(in);
    for (std::size_t l = 1; l < depth; ++l) s.widths.push_back(hidden);
    s.widths.push_back(out);
    s.dropout = dropout;
    return s;
}

}  // namespace

Regressor::Regressor(const RegressorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng init(derive_seed({stream::init, cfg_.init_seed, cfg_.kind == TargetKind::node ? 0u : 1u}));
    const std::size_t H = cfg_.hidden, d = cfg_.mlp_depth;
    node_enc_ = nn::add_mlp(params_, "phi_V", block(kNodeFeatures, H, H, d, cfg_.dropout), init);
    edge_enc_ = nn::add_mlp(params_, "phi_E", block(kEdgeFeatures, H, H, d, cfg_.dropout), init);
    for (std::size_t r = 0; cfg_.kind == TargetKind::node && r < cfg_.rounds; ++r) {
        const std::string suffix = cfg_.rounds > 1 ? std::to_string(r) : "";
        message_.push_back(nn::add_mlp(params_, "phi_M" + suffix, block(3 * H, H, H, d, cfg_.dropout), init));
        update_.push_back(nn::add_mlp(params_, "phi_U" + suffix, block(2 * H, H, H, d, cfg_.dropout), init));
    }
    if (cfg_.kind == TargetKind::node) {
        head_ = nn::add_mlp(params_, "g_V", block(H, H, 1, 1, 0.0), init);
    } else {
        head_ = nn::add_mlp(params_, "g_E", block(3 * H, H, 1, d, cfg_.dropout), init);
    }
}

nn::Var Regressor::forward(nn::Tape& tape, const GraphSample& sample, nn::Mode mode, Rng* dropout_rng) const {
    if (!sample.standardized) throw SchemaError("Regressor::forward: sample is not standardized");
    if (!sample.graph) throw std::invalid_argument("Regressor::forward: sample has no graph");
    const CouplingGraph& g = *sample.graph;
    const std::size_t n = g.num_nodes(), m = g.num_edges();
    if (sample.x_nodes.rows() != n || sample.x_nodes.cols() != kNodeFeatures || sample.x_edges.rows() != m ||
        sample.x_edges.cols() != kEdgeFeatures) {
        throw SchemaError("Regressor::forward: feature matrix shape does not match the graph/schema");
    }

    const nn::Var xv = tape.constant(sample.x_nodes);
    const nn::Var xe = tape.constant(sample.x_edges);
    const nn::Var h0 = nn::mlp_apply(tape, node_enc_, xv, mode, dropout_rng);
    const nn::Var emb = nn::mlp_apply(tape, edge_enc_, xe, mode, dropout_rng);

    std::vector<std::size_t> canon_u(m), canon_v(m);
    for (std::size_t e = 0; e < m; ++e) {
        canon_u[e] = g.edge(e).u;
        canon_v[e] = g.edge(e).v;
    }

    if (cfg_.kind == TargetKind::edge) {
        const nn::Var parts[] = {tape.gather_rows(h0, canon_u), tape.gather_rows(h0, canon_v), emb};
        const nn::Var z = nn::mlp_apply(tape, head_, tape.concat_cols(parts), mode, dropout_rng);
        return rescale(tape, tape.softplus(z), 0.0);
    }

    // Two arcs per coupling; the receiving endpoint comes first in the message input.
    std::vector<std::size_t> recv, send, arc_edge;
    recv.reserve(2 * m), send.reserve(2 * m), arc_edge.reserve(2 * m);
    for (std::size_t e = 0; e < m; ++e) {
        recv.push_back(canon_u[e]), send.push_back(canon_v[e]), arc_edge.push_back(e);
        recv.push_back(canon_v[e]), send.push_back(canon_u[e]), arc_edge.push_back(e);
    }
    const nn::Var arc_emb = tape.gather_rows(emb, arc_edge);
    nn::Var h = h0;
    for (std::size_t r = 0; r < cfg_.rounds; ++r) {
        const nn::Var parts[] = {tape.gather_rows(h, recv), tape.gather_rows(h, send), arc_emb};
        const nn::Var msg = nn::mlp_apply(tape, message_[r], tape.concat_cols(parts), mode, dropout_rng);
        const nn::Var agg = tape.scatter_mean_rows(msg, recv, n);
        const nn::Var upd[] = {h, agg};
        h = nn::mlp_apply(tape, update_[r], tape.concat_cols(upd), mode, dropout_rng);
    }
    return rescale(tape, nn::mlp_apply(tape, head_, h, mode, dropout_rng), cfg_.target_shift);
}

nn::Var Regressor::rescale(nn::Tape& tape, nn::Var x, double shift) const {
    if (cfg_.target_scale == 1.0 && shift == 0.0) return x;
    return tape.affine(x, tape.constant(nn::Tensor(1, 1, cfg_.target_scale)), tape.constant(nn::Tensor(1, 1, shift)));
}

nn::Var Regressor::loss(nn::Tape& tape, const GraphSample& sample, nn::Mode mode, Rng* dropout_rng) const {
    if (!sample.labels) throw std::invalid_argument("Regressor::loss: sample carries no labels");
    const nn::Var out = forward(tape, sample, mode, dropout_rng);
    const ErrorMap& lab = *sample.labels;
    if (cfg_.kind == TargetKind::node) {
        std::vector<double> target(lab.num_nodes(), 0.0);
        for (std::size_t i = 0; i < target.size(); ++i)
            if (lab.mask_nodes[i]) target[i] = std::log1p(lab.y_nodes[i]);
        return tape.masked_huber_mean(out, std::move(target), lab.mask_nodes, cfg_.huber_delta);
    }
    std::vector<double> target(lab.num_edges(), 0.0);
    for (std::size_t i = 0; i < target.size(); ++i)
        if (lab.mask_edges[i]) target[i] = lab.y_edges[i];
    return tape.masked_huber_mean(out, std::move(target), lab.mask_edges, cfg_.huber_delta);
}

std::vector<double> Regressor::predict(const GraphSample& sample) const { return predict_with(params_, sample); }

std::vector<double> Regressor::predict_with(const nn::ParamSet& params, const GraphSample& sample) const {
    nn::Tape tape(params);
    const nn::Var out = forward(tape, sample, nn::Mode::eval, nullptr);
    std::vector<double> y = tape.value(out).column(0);
    if (cfg_.kind == TargetKind::node) {
        for (auto& v : y) v = std::expm1(v);
    }
    return y;
}

std::pair<double, nn::ParamSet> Regressor::loss_and_grad(const nn::ParamSet& params, const GraphSample& sample,
                                                         nn::Mode mode, Rng* dropout_rng) const {
    nn::Tape tape(params);
    const nn::Var l = loss(tape, sample, mode, dropout_rng);
    tape.backward(l);
    return {tape.value(l)(0, 0), tape.param_grads()};
}

double loss_node(std::span<const double> z, std::span<const double> labels, std::span<const std::uint8_t> mask,
                 double delta) {
    if (z.size() != labels.size() || z.size() != mask.size()) throw std::invalid_argument("loss_node: length mismatch");
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!mask[i]) continue;
        acc += nn::huber(z[i] - std::log1p(labels[i]), delta).value;
        ++k;
    }
    if (k == 0) throw std::invalid_argument("loss_node: every component is masked out");
    return acc / static_cast<double>(k);
}

double loss_edge(std::span<const double> y_hat, std::span<const double> labels, std::span<const std::uint8_t> mask,
                 double delta) {
    if (y_hat.size() != labels.size() || y_hat.size() != mask.size()) {
        throw std::invalid_argument("loss_edge: length mismatch");
    }
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < y_hat.size(); ++i) {
        if (!mask[i]) continue;
        acc += nn::huber(y_hat[i] - labels[i], delta).value;
        ++k;
    }
    if (k == 0) throw std::invalid_argument("loss_edge: every component is masked out");
    return acc / static_cast<double>(k);
}

}  // namespace qf
