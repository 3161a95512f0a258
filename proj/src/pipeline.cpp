#include "qf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "qf/errors.hpp"

namespace qf {

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

json to_json(const DriftConfig& c) {
    return {{"enabled", c.enabled},
            {"resample_every", c.resample_every},
            {"scale_nodes", c.scale_nodes},
            {"scale_edges", c.scale_edges}};
}

json to_json(const RegressorConfig& c) {
    return {{"kind", to_string(c.kind)},   {"hidden", c.hidden},   {"rounds", c.rounds},
            {"mlp_depth", c.mlp_depth},    {"dropout", c.dropout}, {"huber_delta", c.huber_delta},
            {"init_seed", c.init_seed},     {"target_shift", c.target_shift}, {"target_scale", c.target_scale}};
}

json to_json(const TrainConfig& c) {
    return {{"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"val_fraction", c.val_fraction},
            {"seed", c.seed},
            {"drift", to_json(c.drift)},
            {"adam", {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
            {"calibrate", c.calibrate},
            {"normalize_targets", c.normalize_targets},
            {"reference_epochs", {{"node", c.reference_epochs_node}, {"edge", c.reference_epochs_edge}}}};
}

json StudyConfig::to_json() const {
    return {{"backends", backends},
            {"qubits", qubits},
            {"topology", to_string(topology)},
            {"shared_topology", shared_topology},
            {"noise",
             {{"median_1q", noise.median_1q},
              {"sigma_1q", noise.sigma_1q},
              {"median_2q", noise.median_2q},
              {"sigma_2q", noise.sigma_2q},
              {"spatial_smoothing", noise.spatial_smoothing}}},
            {"circuit", {{"depth_cap", circuit.depth_cap}, {"budget_max", circuit.budget_max}}},
            {"pools", pools},
            {"circuits", circuits},
            {"seed", seed},
            {"node_model", qf::to_json(node_model)},
            {"edge_model", qf::to_json(edge_model)},
            {"train", qf::to_json(train)}};
}

void TrainConfig::validate() const {
    if (max_epochs == 0) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (patience == 0) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("TrainConfig: val_fraction must lie in (0,1)");
    }
    if (drift.resample_every == 0) throw std::invalid_argument("TrainConfig: drift.resample_every must be >= 1");
    if (!(drift.scale_nodes >= 0.0) || !(drift.scale_edges >= 0.0)) {
        throw std::invalid_argument("TrainConfig: drift scales must be >= 0");
    }
    if (!(adam.lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
}

// ---------------------------------------------------------------------------
// Calibration and early stopping
// ---------------------------------------------------------------------------

LinearCalibration fit_linear_calibration(std::span<const double> preds, std::span<const double> labels,
                                         std::span<const std::uint8_t> mask) {
    if (preds.size() != labels.size() || preds.size() != mask.size()) {
        throw std::invalid_argument("fit_linear_calibration: length mismatch");
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!mask[i]) continue;
        if (!std::isfinite(preds[i]) || !std::isfinite(labels[i])) {
            throw std::invalid_argument("fit_linear_calibration: non-finite point at index " + std::to_string(i));
        }
        x.push_back(preds[i]);
        y.push_back(labels[i]);
    }
    if (x.size() < 2) throw std::invalid_argument("fit_linear_calibration: need at least 2 masked-in points");
    const double k = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearCalibration c;
    if (sxx <= 1e-300 || sxx <= 1e-24 * mx * mx * k) {
        c.a = 1.0;
        c.b = my - mx;
    } else {
        c.a = sxy / sxx;
        c.b = my - c.a * mx;
    }
    return c;
}

bool EarlyStopper::update(std::size_t epoch, double metric) {
    if (!std::isfinite(metric)) throw NumericalError("EarlyStopper: non-finite validation metric");
    improved_ = best_epoch_ == 0 || metric < best_;
    if (improved_) {
        best_ = metric;
        best_epoch_ = epoch;
        stale_ = 0;
    } else {
        ++stale_;
    }
    return stale_ >= patience_;
}

Regressor Checkpoint::regressor() const {
    Regressor r(model);
    auto& p = r.params();
    if (p.names != params.names) throw SchemaError("checkpoint: parameter names do not match the model config");
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p.values[k].rows() != params.values[k].rows() || p.values[k].cols() != params.values[k].cols()) {
            throw SchemaError("checkpoint: shape mismatch in parameter '" + p.names[k] + "'");
        }
    }
    p = params;
    return r;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

const std::vector<double>& target_values(const ErrorMap& m, TargetKind kind) {
    return kind == TargetKind::node ? m.y_nodes : m.y_edges;
}

const std::vector<std::uint8_t>& target_mask(const ErrorMap& m, TargetKind kind) {
    return kind == TargetKind::node ? m.mask_nodes : m.mask_edges;
}

void accumulate(std::vector<double>& acc, const std::vector<double>& v) {
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

}  // namespace

TrainResult train(TargetKind kind, std::span<const GraphSample> samples, const std::string& holdout_id,
                  const RegressorConfig& model_cfg, const TrainConfig& cfg) {
    cfg.validate();
    if (model_cfg.kind != kind) throw std::invalid_argument("train: model config kind does not match target kind");
    if (samples.empty()) throw std::invalid_argument("train: empty training set");
    bool any_label = false;
    for (const auto& s : samples) {
        if (s.backend_id == holdout_id) throw LeakageError("train: sample of holdout backend '" + holdout_id + "'");
        if (!s.labels) throw std::invalid_argument("train: sample without labels (" + s.backend_id + ")");
        const auto& mk = target_mask(*s.labels, kind);
        any_label = any_label || std::any_of(mk.begin(), mk.end(), [](std::uint8_t b) { return b != 0; });
    }
    if (!any_label) throw std::invalid_argument("train: every " + to_string(kind) + " label is masked out");

    TrainResult out;
    Checkpoint& ck = out.checkpoint;
    ck.model = model_cfg;
    if (cfg.normalize_targets) {
        // Node: mean/std of log1p(y); edge: scale so that a zero head output predicts the label mean.
        std::vector<double> t;
        for (const auto& s : samples) {
            const auto& y = target_values(*s.labels, kind);
            const auto& mk = target_mask(*s.labels, kind);
            for (std::size_t i = 0; i < y.size(); ++i)
                if (mk[i]) t.push_back(kind == TargetKind::node ? std::log1p(y[i]) : y[i]);
        }
        const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
        if (kind == TargetKind::node) {
            double ss = 0.0;
            for (double v : t) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / static_cast<double>(t.size()));
            ck.model.target_shift = mean;
            ck.model.target_scale = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
        } else {
            ck.model.target_shift = 0.0;
            ck.model.target_scale = mean > 0.0 ? mean / std::log(2.0) : 1.0;
        }
    }
    ck.standardizer = fit_standardizer(samples, holdout_id);

    std::vector<GraphSample> work;
    work.reserve(samples.size());
    for (const auto& s : samples) work.push_back(ck.standardizer.apply(s));

    // Pool-level split inside each backend.
    std::map<std::string, std::vector<std::size_t>> by_backend;
    for (std::size_t i = 0; i < work.size(); ++i) by_backend[work[i].backend_id].push_back(i);
    std::vector<std::size_t> train_idx;
    std::map<std::string, std::vector<std::size_t>> val_idx;
    for (auto& [id, idx] : by_backend) {
        if (idx.size() < 2) throw std::invalid_argument("train: backend '" + id + "' needs >= 2 pools to split");
        Rng rng(derive_seed({stream::split, cfg.seed, hash_string(id)}));
        shuffle_in_place(idx, rng);
        const auto want = static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(idx.size())));
        const std::size_t n_val = std::clamp<std::size_t>(want, 1, idx.size() - 1);
        std::vector<std::size_t> v(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
        std::sort(v.begin(), v.end());
        val_idx[id] = std::move(v);
        train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());

    std::vector<ErrorMap> static_labels;
    static_labels.reserve(work.size());
    for (const auto& s : work) static_labels.push_back(*s.labels);

    Regressor model(ck.model);
    nn::ParamSet params = model.params();
    nn::ParamSet best_params = params;
    nn::AdamState adam = nn::AdamState::for_params(params, cfg.adam);
    EarlyStopper stopper(cfg.patience);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.drift.enabled && (epoch - 1) % cfg.drift.resample_every == 0) {
            const std::uint64_t period = (epoch - 1) / cfg.drift.resample_every;
            for (std::size_t i : train_idx) {
                const std::uint64_t dseed = derive_seed({stream::drift, cfg.seed, hash_string(work[i].backend_id), period});
                work[i].labels = apply_drift(static_labels[i], dseed, cfg.drift.scale_nodes, cfg.drift.scale_edges);
            }
        }

        std::vector<std::size_t> order = train_idx;
        Rng order_rng(derive_seed({stream::selection, cfg.seed, epoch}));
        shuffle_in_place(order, order_rng);
        for (std::size_t step = 0; step < order.size(); ++step) {
            Rng drop(derive_seed({stream::dropout, cfg.seed, epoch, step}));
            const auto [l, grads] = model.loss_and_grad(params, work[order[step]], nn::Mode::train, &drop);
            (void)l;
            nn::adam_step(adam, params, grads);
        }

        double sse = 0.0;
        std::size_t count = 0;
        std::map<std::string, std::vector<double>> val_preds;
        for (const auto& [id, idx] : val_idx) {
            std::vector<double> acc;
            for (std::size_t i : idx) {
                const std::vector<double> yhat = model.predict_with(params, work[i]);
                const auto& y = target_values(static_labels[i], kind);
                const auto& mk = target_mask(static_labels[i], kind);
                for (std::size_t c = 0; c < yhat.size(); ++c) {
                    if (!mk[c]) continue;
                    sse += (yhat[c] - y[c]) * (yhat[c] - y[c]);
                    ++count;
                }
                accumulate(acc, yhat);
            }
            for (auto& v : acc) v /= static_cast<double>(idx.size());
            val_preds[id] = std::move(acc);
        }
        const double rmse = count ? std::sqrt(sse / static_cast<double>(count)) : 0.0;
        out.val_rmse.push_back(rmse);
        out.epochs_run = epoch;
        const bool stop = stopper.update(epoch, rmse);
        if (stopper.improved_last()) {
            best_params = params;
            out.val_predictions = std::move(val_preds);
        }
        if (stop) break;
    }
    out.best_epoch = stopper.best_epoch();
    ck.params = std::move(best_params);

    // Calibration on pool-averaged validation predictions, one point per component per backend.
    if (cfg.calibrate) {
        std::vector<double> p, y;
        std::vector<std::uint8_t> mk;
        for (const auto& [id, pred] : out.val_predictions) {
            const ErrorMap& lab = static_labels[val_idx.at(id).front()];
            const auto& yv = target_values(lab, kind);
            const auto& mv = target_mask(lab, kind);
            p.insert(p.end(), pred.begin(), pred.end());
            y.insert(y.end(), yv.begin(), yv.end());
            mk.insert(mk.end(), mv.begin(), mv.end());
        }
        ck.calibration = fit_linear_calibration(p, y, mk);
    }
    for (const auto& [id, idx] : by_backend) ck.calibration.fit_backends.push_back(id);

    json split = json::object();
    for (const auto& [id, idx] : val_idx) {
        std::vector<std::size_t> pools;
        for (std::size_t i : idx) pools.push_back(work[i].pool_index);
        split[id] = pools;
    }
    ck.manifest = {{"schema_version", Checkpoint::kSchemaVersion},
                   {"feature_schema_version", kFeatureSchemaVersion},
                   {"kind", to_string(kind)},
                   {"holdout", holdout_id},
                   {"model", to_json(ck.model)},
                   {"train", to_json(cfg)},
                   {"train_backends", ck.calibration.fit_backends},
                   {"val_pools", split},
                   {"samples", work.size()},
                   {"epochs_run", out.epochs_run},
                   {"best_epoch", out.best_epoch},
                   {"val_rmse", out.val_rmse},
                   {"calibration", {{"a", ck.calibration.a}, {"b", ck.calibration.b}}}};
    return out;
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

namespace {

void guard_inference(const Checkpoint& ck, const GraphSample& s) {
    if (s.labels) throw LeakageError("inference: holdout sample carries labels");
    const auto& fb = ck.standardizer.fit_backends;
    if (std::find(fb.begin(), fb.end(), s.backend_id) != fb.end()) {
        throw LeakageError("inference: standardizer was fit on target backend '" + s.backend_id + "'");
    }
    const auto& cb = ck.calibration.fit_backends;
    if (std::find(cb.begin(), cb.end(), s.backend_id) != cb.end()) {
        throw LeakageError("inference: calibration was fit on target backend '" + s.backend_id + "'");
    }
}

}  // namespace

PoolPredictions predict_pools(const Checkpoint& node_ckpt, const Checkpoint& edge_ckpt,
                              std::span<const GraphSample> pools) {
    if (pools.empty()) throw std::invalid_argument("predict_pools: need at least one pool");
    if (node_ckpt.model.kind != TargetKind::node || edge_ckpt.model.kind != TargetKind::edge) {
        throw UsageError("predict_pools: checkpoint kinds must be (node, edge)");
    }
    const Regressor node_model = node_ckpt.regressor();
    const Regressor edge_model = edge_ckpt.regressor();
    PoolPredictions out;
    for (const auto& s : pools) {
        guard_inference(node_ckpt, s);
        guard_inference(edge_ckpt, s);
        if (s.backend_id != pools.front().backend_id) {
            throw std::invalid_argument("predict_pools: pools from more than one backend");
        }
        out.nodes.push_back(node_model.predict(node_ckpt.standardizer.apply(s)));
        out.edges.push_back(edge_model.predict(edge_ckpt.standardizer.apply(s)));
    }
    return out;
}

ErrorMap aggregate_predictions(const PoolPredictions& preds, std::size_t pool_count, const LinearCalibration& node_cal,
                               const LinearCalibration& edge_cal) {
    if (pool_count == 0 || pool_count > preds.nodes.size() || pool_count > preds.edges.size()) {
        throw std::invalid_argument("aggregate_predictions: pool count " + std::to_string(pool_count) +
                                    " outside [1, " + std::to_string(preds.nodes.size()) + "]");
    }
    auto mean_of = [&](const std::vector<std::vector<double>>& rows, const LinearCalibration& cal) {
        std::vector<double> acc(rows.front().size(), 0.0);
        for (std::size_t p = 0; p < pool_count; ++p) {
            if (rows[p].size() != acc.size()) throw std::invalid_argument("aggregate_predictions: ragged pools");
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += rows[p][i];
        }
        for (auto& v : acc) v = std::max(cal.apply(v / static_cast<double>(pool_count)), kPositivityFloor);
        return acc;
    };
    return ErrorMap::unmasked(mean_of(preds.nodes, node_cal), mean_of(preds.edges, edge_cal));
}

ErrorMap infer_holdout(const Checkpoint& node_ckpt, const Checkpoint& edge_ckpt, std::span<const GraphSample> pools) {
    const PoolPredictions p = predict_pools(node_ckpt, edge_ckpt, pools);
    return aggregate_predictions(p, pools.size(), node_ckpt.calibration, edge_ckpt.calibration);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
        i = j + 1;
    }
    return r;
}

std::vector<std::size_t> top_indices(std::span<const double> v, std::size_t k) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    idx.resize(std::min(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

ComponentReport component_report(std::span<const double> pred, std::span<const double> truth,
                                 std::span<const std::uint8_t> mask, std::size_t top_k, const char* what) {
    if (pred.size() != truth.size() || truth.size() != mask.size()) {
        throw std::invalid_argument(std::string("evaluate: ") + what + " component counts differ");
    }
    std::vector<double> p, t;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!mask[i]) continue;
        if (!(truth[i] > 0.0) || !std::isfinite(truth[i])) {
            throw std::invalid_argument(std::string("evaluate: ") + what + " truth value at " + std::to_string(i) +
                                        " is not a positive finite rate");
        }
        if (!std::isfinite(pred[i])) {
            throw std::invalid_argument(std::string("evaluate: ") + what + " prediction at " + std::to_string(i) +
                                        " is not finite");
        }
        p.push_back(pred[i]);
        t.push_back(truth[i]);
    }
    if (t.empty()) throw std::invalid_argument(std::string("evaluate: no masked-in ") + what + " components");

    ComponentReport r;
    r.count = t.size();
    r.top_k = std::min(top_k, t.size());
    double pct = 0.0, lm = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        pct += std::abs(p[i] - t[i]) / t[i];
        lm += std::abs(std::log(std::max(p[i], kPositivityFloor) / std::max(t[i], kPositivityFloor)));
        sse += (p[i] - t[i]) * (p[i] - t[i]);
    }
    const double k = static_cast<double>(t.size());
    r.percent_diff = 100.0 * pct / k;
    r.log_mismatch = lm / k;
    r.rmse = std::sqrt(sse / k);
    r.spearman = spearman(p, t);
    r.top_overlap = top_k_overlap(p, t, top_k);
    return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.empty()) throw std::invalid_argument("spearman: empty input");
    const std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
    if (ra == rb) return 1.0;
    const double k = static_cast<double>(a.size());
    const double mean = (k + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::size_t top_k_overlap(std::span<const double> a, std::span<const double> b, std::size_t k) {
    if (a.size() != b.size()) throw std::invalid_argument("top_k_overlap: length mismatch");
    const auto ta = top_indices(a, k), tb = top_indices(b, k);
    std::vector<std::size_t> both;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(both));
    return both.size();
}

EvalReport evaluate(const ErrorMap& pred, const ErrorMap& truth, std::size_t top_k) {
    if (top_k == 0) throw std::invalid_argument("evaluate: top_k must be >= 1");
    EvalReport r;
    r.nodes = component_report(pred.y_nodes, truth.y_nodes, truth.mask_nodes, top_k, "node");
    r.edges = component_report(pred.y_edges, truth.y_edges, truth.mask_edges, top_k, "edge");
    return r;
}

// ---------------------------------------------------------------------------
// Study orchestration
// ---------------------------------------------------------------------------

void LabelStore::put(const std::string& backend_id, ErrorMap labels) {
    labels.validate();
    labels_[backend_id] = std::move(labels);
}

const ErrorMap& LabelStore::read(const std::string& backend_id, const std::string& purpose) {
    const auto it = labels_.find(backend_id);
    if (it == labels_.end()) throw std::out_of_range("LabelStore: no labels for '" + backend_id + "'");
    log_.emplace_back(backend_id, purpose);
    return it->second;
}

std::vector<BackendSpec> generate_backends(std::size_t count, std::size_t qubits, TopologyKind kind,
                                           const NoiseConfig& noise, std::uint64_t seed, bool shared_topology) {
    if (count == 0) throw UsageError("generate_backends: count must be >= 1");
    std::vector<BackendSpec> out;
    for (std::size_t i = 0; i < count; ++i) {
        TopologyParams tp;
        tp.n = qubits;
        if (kind == TopologyKind::grid) {
            tp.rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(qubits))));
            tp.cols = (qubits + tp.rows - 1) / tp.rows;
            tp.n = tp.rows * tp.cols;
        }
        const Topology topo = gen_topology(kind, tp, shared_topology ? derive_seed({stream::topology, seed})
                                                                    : derive_seed({stream::topology, seed, i}));
        out.push_back(sample_backend("synth-" + std::to_string(i), topo, derive_seed({seed, i}), noise));
    }
    return out;
}

std::vector<PoolArtifacts> generate_pool_artifacts(const BackendSpec& backend,
                                                  std::shared_ptr<const CouplingGraph> graph, std::size_t pools,
                                                  std::size_t circuits, const CircuitConfig& circuit,
                                                  std::uint64_t seed, bool with_labels,
                                                  const DriftConfig* per_pool_drift) {
    if (pools == 0) throw UsageError("generate_samples: pools must be >= 1");
    CircuitConfig cc = circuit;
    if (cc.budget_max == 0) cc.budget_max = 2 * graph->num_edges();
    const std::uint64_t master = derive_seed({stream::circuits, seed, hash_string(backend.id)});
    std::vector<PoolArtifacts> out;
    out.reserve(pools);
    for (std::size_t p = 0; p < pools; ++p) {
        PoolArtifacts a;
        a.pool = gen_pool(graph->num_nodes(), circuits, master, p, cc, backend.id);
        if (per_pool_drift && per_pool_drift->enabled) {
            BackendSpec drifted = backend;
            drifted.errors = apply_drift(backend.errors,
                                         derive_seed({stream::drift, seed, hash_string(backend.id), p, 0xD21F7ull}),
                                         per_pool_drift->scale_nodes, per_pool_drift->scale_edges);
            a.transpiled = transpile_pool(a.pool, drifted);
        } else {
            a.transpiled = transpile_pool(a.pool, backend);
        }
        a.sample = build_sample(backend, graph, p, a.transpiled, with_labels);
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<GraphSample> generate_samples(const BackendSpec& backend, std::shared_ptr<const CouplingGraph> graph,
                                          std::size_t pools, std::size_t circuits, const CircuitConfig& circuit,
                                          std::uint64_t seed, bool with_labels, const DriftConfig* per_pool_drift) {
    std::vector<GraphSample> out;
    for (auto& a : generate_pool_artifacts(backend, std::move(graph), pools, circuits, circuit, seed, with_labels,
                                           per_pool_drift))
        out.push_back(std::move(a.sample));
    return out;
}

StudyData build_study_data(const StudyConfig& cfg) {
    if (cfg.backends < 2) throw UsageError("study: need at least 2 backends (train + holdout)");
    StudyData d;
    d.backends = generate_backends(cfg.backends, cfg.qubits, cfg.topology, cfg.noise, cfg.seed, cfg.shared_topology);
    d.holdout = d.backends.size() - 1;
    for (std::size_t b = 0; b < d.backends.size(); ++b) {
        BackendSpec& spec = d.backends[b];
        auto graph = std::make_shared<const CouplingGraph>(spec.graph());
        // Labels go through the calibration-table path exactly like vendor data would.
        spec.errors = derive_labels(calibration_table_from(spec.errors, *graph), *graph);
        const bool is_holdout = b == d.holdout;
        d.graphs.push_back(graph);
        d.samples.push_back(generate_samples(spec, graph, cfg.pools, cfg.circuits, cfg.circuit, cfg.seed, !is_holdout,
                                             is_holdout ? &cfg.train.drift : nullptr));
        if (is_holdout) {
            d.labels.put(spec.id, spec.errors);
            spec.errors = ErrorMap{};
        }
    }
    return d;
}

namespace {

std::vector<GraphSample> gather_training(const StudyData& data, std::span<const std::size_t> chosen) {
    std::vector<GraphSample> out;
    for (std::size_t b : chosen) {
        if (b == data.holdout) throw LeakageError("study: holdout backend selected for training");
        out.insert(out.end(), data.samples.at(b).begin(), data.samples.at(b).end());
    }
    return out;
}

}  // namespace

StudyResult run_study(StudyData& data, const StudyConfig& cfg, std::span<const std::size_t> order,
                      std::size_t train_backends) {
    std::vector<std::size_t> chosen;
    if (order.empty()) {
        for (std::size_t b = 0; b < data.backends.size(); ++b)
            if (b != data.holdout) chosen.push_back(b);
    } else {
        chosen.assign(order.begin(), order.end());
    }
    if (train_backends != 0) {
        if (train_backends > chosen.size()) {
            throw std::invalid_argument("study: " + std::to_string(train_backends) + " training backends requested, " +
                                        std::to_string(chosen.size()) + " available");
        }
        chosen.resize(train_backends);
    }
    const std::vector<GraphSample> training = gather_training(data, chosen);

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    RegressorConfig nm = cfg.node_model, em = cfg.edge_model;
    nm.kind = TargetKind::node, em.kind = TargetKind::edge;
    nm.init_seed = em.init_seed = cfg.seed;

    StudyResult r;
    const std::string& hid = data.holdout_id();
    r.node = train(TargetKind::node, training, hid, nm, tc);
    r.edge = train(TargetKind::edge, training, hid, em, tc);
    r.pool_predictions = predict_pools(r.node.checkpoint, r.edge.checkpoint, data.samples.at(data.holdout));
    r.prediction = aggregate_predictions(r.pool_predictions, r.pool_predictions.nodes.size(),
                                         r.node.checkpoint.calibration, r.edge.checkpoint.calibration);
    r.report = evaluate(r.prediction, data.labels.read(hid, "evaluate"));

    std::vector<std::string> ids;
    for (std::size_t b : chosen) ids.push_back(data.backends[b].id);
    r.manifest = {{"config", cfg.to_json()},
                  {"train_backends", ids},
                  {"holdout", hid},
                  {"node", r.node.checkpoint.manifest},
                  {"edge", r.edge.checkpoint.manifest}};
    return r;
}

std::vector<AblationRow> ablate_pools(StudyData& data, const StudyResult& result, std::span<const std::size_t> counts) {
    const ErrorMap& truth = data.labels.read(data.holdout_id(), "ablate_pools");
    std::vector<AblationRow> rows;
    for (std::size_t p : counts) {
        if (p == 0 || p > result.pool_predictions.nodes.size()) {
            throw std::invalid_argument("ablate_pools: pool count " + std::to_string(p) + " outside [1, " +
                                        std::to_string(result.pool_predictions.nodes.size()) + "]");
        }
        const ErrorMap pred = aggregate_predictions(result.pool_predictions, p, result.node.checkpoint.calibration,
                                                    result.edge.checkpoint.calibration);
        const EvalReport rep = evaluate(pred, truth);
        rows.push_back({p, rep.nodes.log_mismatch, rep.edges.log_mismatch});
    }
    return rows;
}

std::vector<std::size_t> backend_order(const StudyData& data, std::uint64_t seed) {
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < data.backends.size(); ++b)
        if (b != data.holdout) order.push_back(b);
    Rng rng(derive_seed({stream::selection, seed, 0xBAC4E9Dull}));
    shuffle_in_place(order, rng);
    return order;
}

std::vector<AblationRow> ablate_backends(StudyData& data, const StudyConfig& cfg, std::span<const std::size_t> ks) {
    const std::vector<std::size_t> order = backend_order(data, cfg.seed);
    for (std::size_t k : ks) {
        if (k == 0 || k > order.size()) {
            throw std::invalid_argument("ablate_backends: k=" + std::to_string(k) + " outside [1, " +
                                        std::to_string(order.size()) + "]");
        }
    }
    std::vector<AblationRow> rows;
    for (std::size_t k : ks) {
        const StudyResult r = run_study(data, cfg, order, k);
        rows.push_back({k, r.report.nodes.log_mismatch, r.report.edges.log_mismatch});
    }
    return rows;
}

DriftComparison drift_experiment(const StudyConfig& cfg) {
    StudyConfig off = cfg, on = cfg;
    off.train.drift.enabled = false;
    on.train.drift.enabled = true;
    DriftComparison out;
    StudyData d_off = build_study_data(off);
    out.static_run = run_study(d_off, off);
    StudyData d_on = build_study_data(on);
    out.drift_run = run_study(d_on, on);
    return out;
}

}  // namespace qf
