#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qf/gnn.hpp"

namespace qf {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct DriftConfig {
    bool enabled = false;
    std::size_t resample_every = 3;  // epochs
    double scale_nodes = 1e-4;
    double scale_edges = 1e-2;
    bool operator==(const DriftConfig&) const = default;
};

struct TrainConfig;
json to_json(const DriftConfig& c);
json to_json(const RegressorConfig& c);
json to_json(const TrainConfig& c);

struct TrainConfig {
    std::size_t max_epochs = 100;
    std::size_t patience = 5;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    DriftConfig drift;
    nn::AdamConfig adam;
    bool calibrate = true;
    /// Fit the model's frozen output shift/scale on the training labels before the first step.
    bool normalize_targets = true;
    // Epoch counts at which the reference experiments stopped; recorded, not enforced.
    std::size_t reference_epochs_node = 22;
    std::size_t reference_epochs_edge = 33;

    void validate() const;
};

/// y ~ a * y_hat + b.
struct LinearCalibration {
    double a = 1.0;
    double b = 0.0;
    std::vector<std::string> fit_backends;
    [[nodiscard]] double apply(double y_hat) const { return a * y_hat + b; }
    bool operator==(const LinearCalibration&) const = default;
};

/// Ordinary least squares of labels on predictions over masked-in points.
/// Constant predictions fall back to a = 1, b = mean(label) - mean(pred).
/// Throws std::invalid_argument with fewer than two valid points.
LinearCalibration fit_linear_calibration(std::span<const double> preds, std::span<const double> labels,
                                         std::span<const std::uint8_t> mask);

/// Patience-based early stopping on a metric that should decrease (epochs are 1-based).
class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
    /// Records the metric for `epoch`; returns true when training should stop.
    bool update(std::size_t epoch, double metric);
    [[nodiscard]] std::size_t best_epoch() const noexcept { return best_epoch_; }
    [[nodiscard]] double best_metric() const noexcept { return best_; }
    [[nodiscard]] bool improved_last() const noexcept { return improved_; }

private:
    std::size_t patience_;
    std::size_t best_epoch_ = 0;
    std::size_t stale_ = 0;
    double best_ = 0.0;
    bool improved_ = false;
};

struct Checkpoint {
    inline static constexpr int kSchemaVersion = 1;
    RegressorConfig model;
    nn::ParamSet params;
    Standardizer standardizer;
    LinearCalibration calibration;
    json manifest;

    [[nodiscard]] Regressor regressor() const;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    std::vector<double> val_rmse;
    /// Pool-averaged, uncalibrated validation predictions per training backend (best epoch).
    std::map<std::string, std::vector<double>> val_predictions;
};

/**
 * Trains one regressor on labelled samples of the training backends.
 *
 * Pools of every backend are split train/val by a seeded shuffle. The z-scoring is fit
 * on all training-backend samples; one Adam step is taken per sample per epoch; the
 * validation RMSE of each epoch drives early stopping, and the best epoch's weights are
 * restored. With drift enabled, training labels are re-perturbed every `resample_every`
 * epochs while validation keeps the unperturbed snapshot. Throws LeakageError if any
 * sample belongs to `holdout_id`.
 */
TrainResult train(TargetKind kind, std::span<const GraphSample> samples, const std::string& holdout_id,
                  const RegressorConfig& model_cfg, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Inference and evaluation
// ---------------------------------------------------------------------------

struct PoolPredictions {
    std::vector<std::vector<double>> nodes;  // one row per pool, uncalibrated
    std::vector<std::vector<double>> edges;
};

/// Raw per-pool predictions; samples must be unlabelled and from a backend absent from both fits.
PoolPredictions predict_pools(const Checkpoint& node_ckpt, const Checkpoint& edge_ckpt,
                              std::span<const GraphSample> pools);

/// Mean over pools, per-model calibration, then clamp at kPositivityFloor. All masks are 1.
ErrorMap aggregate_predictions(const PoolPredictions& preds, std::size_t pool_count, const LinearCalibration& node_cal,
                               const LinearCalibration& edge_cal);

ErrorMap infer_holdout(const Checkpoint& node_ckpt, const Checkpoint& edge_ckpt, std::span<const GraphSample> pools);

struct ComponentReport {
    std::size_t count = 0;
    double percent_diff = 0.0;
    double spearman = 0.0;
    std::size_t top_k = 10;
    std::size_t top_overlap = 0;
    double log_mismatch = 0.0;
    double rmse = 0.0;
};

struct EvalReport {
    ComponentReport nodes;
    ComponentReport edges;
};

/// Spearman rank correlation with average ranks for ties (0 when either side is constant).
double spearman(std::span<const double> a, std::span<const double> b);
/// |top_k(a) ∩ top_k(b)| by descending value, lower index first on ties.
std::size_t top_k_overlap(std::span<const double> a, std::span<const double> b, std::size_t k);

/// Truth masks select the components on both sides. Throws std::invalid_argument when no
/// component is masked in or a masked-in truth value is <= 0.
EvalReport evaluate(const ErrorMap& pred, const ErrorMap& truth, std::size_t top_k = 10);

// ---------------------------------------------------------------------------
// Study orchestration
// ---------------------------------------------------------------------------

/// Truth store with an access log, so a run can prove holdout labels were only read by evaluation.
class LabelStore {
public:
    void put(const std::string& backend_id, ErrorMap labels);
    const ErrorMap& read(const std::string& backend_id, const std::string& purpose);
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& log() const noexcept { return log_; }

private:
    std::map<std::string, ErrorMap> labels_;
    std::vector<std::pair<std::string, std::string>> log_;
};

struct StudyConfig {
    std::size_t backends = 5;
    std::size_t qubits = 27;
    TopologyKind topology = TopologyKind::heavyhex;
    /// One coupling map for the whole fleet (a device family) instead of one per backend.
    bool shared_topology = true;
    NoiseConfig noise;
    CircuitConfig circuit{64, 0};  // budget_max 0 = 2 |E| of each backend
    std::size_t pools = 20;
    std::size_t circuits = 100;
    std::uint64_t seed = 0;
    RegressorConfig node_model = RegressorConfig::defaults_for(TargetKind::node);
    RegressorConfig edge_model = RegressorConfig::defaults_for(TargetKind::edge);
    /// train.seed is replaced by `seed`. With train.drift.enabled the holdout error map is
    /// also drifted once per inference pool before that pool is transpiled.
    TrainConfig train;

    [[nodiscard]] json to_json() const;
};

/// Backends and raw samples. Holdout samples are unlabelled and the holdout BackendSpec has its
/// error map stripped once its pools are transpiled; truth lives only in the label store.
struct StudyData {
    std::vector<BackendSpec> backends;
    std::vector<std::shared_ptr<const CouplingGraph>> graphs;
    std::vector<std::vector<GraphSample>> samples;  // [backend][pool]
    std::size_t holdout = 0;
    LabelStore labels;

    [[nodiscard]] const std::string& holdout_id() const { return backends.at(holdout).id; }
};

/// Deterministic backend ids "synth-<index>".
std::vector<BackendSpec> generate_backends(std::size_t count, std::size_t qubits, TopologyKind kind,
                                           const NoiseConfig& noise, std::uint64_t seed, bool shared_topology = true);

struct PoolArtifacts {
    CircuitPool pool;
    std::vector<TranspiledCircuit> transpiled;
    GraphSample sample;
};
/// Every intermediate of generate_samples, for file-based pipelines that persist each stage.
std::vector<PoolArtifacts> generate_pool_artifacts(const BackendSpec& backend,
                                                  std::shared_ptr<const CouplingGraph> graph, std::size_t pools,
                                                  std::size_t circuits, const CircuitConfig& circuit,
                                                  std::uint64_t seed, bool with_labels,
                                                  const DriftConfig* per_pool_drift);
/// Transpiles P pools of M circuits against `backend` (optionally drifting its error map per pool).
std::vector<GraphSample> generate_samples(const BackendSpec& backend, std::shared_ptr<const CouplingGraph> graph,
                                          std::size_t pools, std::size_t circuits, const CircuitConfig& circuit,
                                          std::uint64_t seed, bool with_labels, const DriftConfig* per_pool_drift);

StudyData build_study_data(const StudyConfig& cfg);

struct StudyResult {
    TrainResult node;
    TrainResult edge;
    PoolPredictions pool_predictions;
    ErrorMap prediction;
    EvalReport report;
    json manifest;
};

/// Trains on the first `train_backends` entries of `order` (all training backends when 0).
StudyResult run_study(StudyData& data, const StudyConfig& cfg, std::span<const std::size_t> order = {},
                      std::size_t train_backends = 0);

struct AblationRow {
    std::size_t setting = 0;  // P for pool ablation, k for backend ablation
    double mismatch_nodes = 0.0;
    double mismatch_edges = 0.0;
};

/// Re-aggregates the first P pool predictions of a finished study; training stays fixed.
std::vector<AblationRow> ablate_pools(StudyData& data, const StudyResult& result, std::span<const std::size_t> counts);

/// Training-backend visiting order for backend ablation, shuffled by the study seed.
std::vector<std::size_t> backend_order(const StudyData& data, std::uint64_t seed);

/// Retrains with the first k training backends of backend_order() for each k.
std::vector<AblationRow> ablate_backends(StudyData& data, const StudyConfig& cfg, std::span<const std::size_t> ks);

struct DriftComparison {
    StudyResult static_run;
    StudyResult drift_run;
};

DriftComparison drift_experiment(const StudyConfig& cfg);

}  // namespace qf
