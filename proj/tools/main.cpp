// qf: file-based front end for the forensic reconstruction pipeline.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qf/errors.hpp"
#include "qf/io.hpp"
#include "qf/parallel.hpp"

using namespace qf;
namespace fs = std::filesystem;

namespace {

bool g_quiet = false;

void note(const std::string& msg) {
    if (!g_quiet) std::cerr << "[qf] " << msg << "\n";
}

std::vector<fs::path> json_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw SchemaError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string pool_name(const char* stem, std::size_t p, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, p, ext);
    return buf;
}

// A dataset directory holds samples/ (the model inputs); a bare directory of sample files works too.
std::vector<fs::path> sample_files(const fs::path& dir) {
    const fs::path sub = dir / "samples";
    return json_files(fs::is_directory(sub) ? sub : dir);
}

std::vector<GraphSample> load_samples(const std::vector<fs::path>& files) {
    std::vector<GraphSample> out;
    for (const auto& f : files) out.push_back(io::sample_from_json(io::read_json(f)));
    return out;
}

fs::path checkpoint_file(const fs::path& p) { return fs::is_directory(p) ? p / "checkpoint.json" : p; }

/// Truth comes from a backend file (calibration table) or a bare error-map file.
ErrorMap load_truth(const fs::path& p) {
    const json j = io::read_json(p);
    if (j.contains("calibration")) return io::backend_from_json(j).errors;
    return io::error_map_from_json(j);
}

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw UsageError("expected a comma-separated list of non-negative integers, got '" + s + "'");
        out.push_back(std::stoull(tok));
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

struct ModelFlags {
    std::size_t hidden = 64, rounds = 1, depth = 2;
    double dropout = 0.1;
    double delta = 0;  // 0 = per-kind default
};

void add_model_flags(CLI::App* c, ModelFlags& m) {
    c->add_option("--hidden", m.hidden, "Hidden width H")->capture_default_str();
    c->add_option("--rounds", m.rounds, "Message-passing rounds")->capture_default_str();
    c->add_option("--mlp-depth", m.depth, "Affine layers per block")->capture_default_str();
    c->add_option("--dropout", m.dropout, "Dropout rate on hidden layers")->capture_default_str();
    c->add_option("--huber-delta", m.delta, "Huber threshold (0 = 1e-4 node, 1e-3 edge)");
}

RegressorConfig model_config(TargetKind kind, const ModelFlags& m, std::uint64_t seed) {
    auto c = RegressorConfig::defaults_for(kind);
    c.hidden = m.hidden;
    c.rounds = m.rounds;
    c.mlp_depth = m.depth;
    c.dropout = m.dropout;
    if (m.delta > 0) c.huber_delta = m.delta;
    c.init_seed = seed;
    return c;
}

void add_train_flags(CLI::App* c, TrainConfig& t) {
    c->add_option("--max-epochs", t.max_epochs)->capture_default_str();
    c->add_option("--patience", t.patience)->capture_default_str();
    c->add_option("--val-fraction", t.val_fraction)->capture_default_str();
    c->add_option("--lr", t.adam.lr, "Adam learning rate")->capture_default_str();
    c->add_flag("!--no-calibrate", t.calibrate, "Skip the linear calibration fit");
    c->add_flag("!--no-normalize-targets", t.normalize_targets, "Keep the bare output heads");
    c->add_flag("--drift", t.drift.enabled, "Perturb labels during training");
    c->add_option("--drift-every", t.drift.resample_every)->capture_default_str();
    c->add_option("--drift-nodes", t.drift.scale_nodes)->capture_default_str();
    c->add_option("--drift-edges", t.drift.scale_edges)->capture_default_str();
}

struct StudyFlags {
    StudyConfig cfg;
    ModelFlags model;
    std::string topology = "heavyhex";
    bool distinct = false;
};

void add_study_flags(CLI::App* c, StudyFlags& s) {
    c->add_option("--seed", s.cfg.seed, "Master seed")->capture_default_str();
    c->add_option("--backends", s.cfg.backends, "Fleet size (last one is the holdout)")->capture_default_str();
    c->add_option("--qubits", s.cfg.qubits)->capture_default_str();
    c->add_option("--topology", s.topology, "path|ring|grid|heavyhex")->capture_default_str();
    c->add_flag("--distinct-topologies", s.distinct, "Draw one coupling map per backend");
    c->add_option("--pools", s.cfg.pools)->capture_default_str();
    c->add_option("--circuits", s.cfg.circuits)->capture_default_str();
    c->add_option("--depth-cap", s.cfg.circuit.depth_cap)->capture_default_str();
    add_model_flags(c, s.model);
    add_train_flags(c, s.cfg.train);
}

StudyConfig study_config(StudyFlags s) {
    s.cfg.topology = topology_kind_from_string(s.topology);
    s.cfg.shared_topology = !s.distinct;
    s.cfg.node_model = model_config(TargetKind::node, s.model, s.cfg.seed);
    s.cfg.edge_model = model_config(TargetKind::edge, s.model, s.cfg.seed);
    return s.cfg;
}

void write_report(const fs::path& dir, const std::string& stem, const EvalReport& r) {
    io::write_json(dir / (stem + ".json"), io::to_json(r));
    io::write_file(dir / (stem + ".csv"), io::report_csv(r));
}

std::string summary(const EvalReport& r) {
    std::ostringstream o;
    o << "nodes rho=" << r.nodes.spearman << " pct=" << r.nodes.percent_diff << " top=" << r.nodes.top_overlap
      << " | edges rho=" << r.edges.spearman << " pct=" << r.edges.percent_diff << " top=" << r.edges.top_overlap;
    return o.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reconstruct qubit and coupling error maps from transpiled-circuit statistics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI key-value file with option defaults (sections per subcommand)");
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Upper bound on worker threads (0 = runtime default)");
    app.add_flag("--quiet,-q", g_quiet, "Suppress diagnostics");

    // gen-backends
    auto* gb = app.add_subcommand("gen-backends", "Sample a synthetic backend fleet");
    std::size_t gb_count = 5, gb_qubits = 27;
    std::string gb_topo = "heavyhex", gb_out;
    std::uint64_t gb_seed = 0;
    bool gb_distinct = false;
    NoiseConfig gb_noise;
    gb->add_option("--count", gb_count)->capture_default_str();
    gb->add_option("--qubits", gb_qubits)->capture_default_str();
    gb->add_option("--topology", gb_topo)->capture_default_str();
    gb->add_option("--seed", gb_seed)->capture_default_str();
    gb->add_flag("--distinct-topologies", gb_distinct);
    gb->add_option("--median-1q", gb_noise.median_1q)->capture_default_str();
    gb->add_option("--sigma-1q", gb_noise.sigma_1q)->capture_default_str();
    gb->add_option("--median-2q", gb_noise.median_2q)->capture_default_str();
    gb->add_option("--sigma-2q", gb_noise.sigma_2q)->capture_default_str();
    gb->add_option("--smoothing", gb_noise.spatial_smoothing)->capture_default_str();
    gb->add_option("--out", gb_out, "Output directory")->required();

    // gen-dataset
    auto* gd = app.add_subcommand("gen-dataset", "Generate, transpile and featurize circuit pools for one backend");
    std::string gd_backend, gd_out;
    std::size_t gd_pools = 20, gd_circuits = 1000;
    std::uint64_t gd_seed = 0;
    CircuitConfig gd_circ{64, 0};
    bool gd_unlabelled = false;
    DriftConfig gd_drift;
    gd->add_option("--backend", gd_backend, "Backend file")->required()->check(CLI::ExistingFile);
    gd->add_option("--pools", gd_pools)->capture_default_str();
    gd->add_option("--circuits", gd_circuits)->capture_default_str();
    gd->add_option("--seed", gd_seed)->capture_default_str();
    gd->add_option("--depth-cap", gd_circ.depth_cap)->capture_default_str();
    gd->add_option("--budget-max", gd_circ.budget_max, "0 = 2|E|")->capture_default_str();
    gd->add_flag("--unlabelled", gd_unlabelled, "Omit labels (holdout backend)");
    gd->add_flag("--drift", gd_drift.enabled, "Drift the error map once per pool before transpiling");
    gd->add_option("--drift-nodes", gd_drift.scale_nodes)->capture_default_str();
    gd->add_option("--drift-edges", gd_drift.scale_edges)->capture_default_str();
    gd->add_option("--out", gd_out)->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a node or edge regressor");
    std::string tr_kind = "node", tr_holdout, tr_out;
    std::vector<std::string> tr_data;
    std::uint64_t tr_seed = 0;
    ModelFlags tr_model;
    TrainConfig tr_cfg;
    tr->add_option("--kind", tr_kind, "node|edge")->capture_default_str();
    tr->add_option("--data", tr_data, "Dataset directories")->required();
    tr->add_option("--holdout", tr_holdout, "Backend id that must not enter training")->required();
    tr->add_option("--seed", tr_seed)->capture_default_str();
    add_model_flags(tr, tr_model);
    add_train_flags(tr, tr_cfg);
    tr->add_option("--out", tr_out, "Checkpoint directory")->required();

    // infer
    auto* in = app.add_subcommand("infer", "Predict the holdout error map from its transpiled pools");
    std::string in_node, in_edge, in_topo, in_pools, in_out;
    std::size_t in_count = 0;
    in->add_option("--node", in_node)->required();
    in->add_option("--edge", in_edge)->required();
    in->add_option("--topology", in_topo, "Backend file; only its coupling map is read, to cross-check the pools");
    in->add_option("--pools", in_pools, "Dataset directory of the holdout")->required();
    in->add_option("--pool-count", in_count, "Use the first P pools (0 = all)");
    in->add_option("--out", in_out)->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Compare a predicted error map with the truth");
    std::string ev_pred, ev_truth, ev_out;
    std::size_t ev_k = 10;
    ev->add_option("--pred", ev_pred)->required()->check(CLI::ExistingFile);
    ev->add_option("--truth", ev_truth, "Backend file or error map")->required()->check(CLI::ExistingFile);
    ev->add_option("--top-k", ev_k)->capture_default_str();
    ev->add_option("--out", ev_out)->required();

    // ablate-pools
    auto* ap = app.add_subcommand("ablate-pools", "Holdout mismatch against the number of inference pools");
    std::string ap_node, ap_edge, ap_pools, ap_truth, ap_counts = "1,5,20", ap_out;
    ap->add_option("--node", ap_node)->required();
    ap->add_option("--edge", ap_edge)->required();
    ap->add_option("--pools", ap_pools)->required();
    ap->add_option("--truth", ap_truth)->required()->check(CLI::ExistingFile);
    ap->add_option("--counts", ap_counts)->capture_default_str();
    ap->add_option("--out", ap_out)->required();

    // ablate-backends, drift, study: in-memory studies
    auto* ab = app.add_subcommand("ablate-backends", "Holdout mismatch against the number of training backends");
    StudyFlags ab_flags;
    std::string ab_ks = "1,4", ab_out;
    add_study_flags(ab, ab_flags);
    ab->add_option("--ks", ab_ks)->capture_default_str();
    ab->add_option("--out", ab_out)->required();

    auto* dr = app.add_subcommand("drift", "Static versus drifting noise model");
    StudyFlags dr_flags;
    std::string dr_out;
    add_study_flags(dr, dr_flags);
    dr->add_option("--out", dr_out)->required();

    auto* st = app.add_subcommand("study", "Full holdout study in one process");
    StudyFlags st_flags;
    std::string st_out;
    add_study_flags(st, st_flags);
    st->add_option("--out", st_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (threads > 0) parallel::set_threads(threads);

        if (*gb) {
            const fs::path out = gb_out;
            const auto fleet =
                generate_backends(gb_count, gb_qubits, topology_kind_from_string(gb_topo), gb_noise, gb_seed, !gb_distinct);
            for (const auto& b : fleet) io::write_json(out / (b.id + ".json"), io::to_json(b));
            io::write_manifest(out, "gen-backends",
                               {{"count", gb_count},
                                {"qubits", gb_qubits},
                                {"topology", gb_topo},
                                {"seed", gb_seed},
                                {"shared_topology", !gb_distinct},
                                {"noise",
                                 {{"median_1q", gb_noise.median_1q},
                                  {"sigma_1q", gb_noise.sigma_1q},
                                  {"median_2q", gb_noise.median_2q},
                                  {"sigma_2q", gb_noise.sigma_2q},
                                  {"spatial_smoothing", gb_noise.spatial_smoothing}}}},
                               json::object());
            note("wrote " + std::to_string(fleet.size()) + " backends to " + out.string());
        } else if (*gd) {
            const fs::path out = gd_out, bfile = gd_backend;
            const auto backend = io::backend_from_json(io::read_json(bfile));
            auto graph = std::make_shared<const CouplingGraph>(backend.graph());
            const auto arts = generate_pool_artifacts(backend, graph, gd_pools, gd_circuits, gd_circ, gd_seed,
                                                      !gd_unlabelled, &gd_drift);
            for (const auto& a : arts) {
                const std::size_t p = a.pool.meta.pool_index;
                io::write_file(out / "pools" / pool_name("pool", p, ".jsonl"), io::pool_to_jsonl(a.pool));
                io::write_file(out / "transpiled" / pool_name("pool", p, ".jsonl"),
                               io::transpiled_pool_to_jsonl(a.pool.meta, a.transpiled));
                io::write_json(out / "samples" / pool_name("sample", p, ".json"), io::to_json(a.sample));
            }
            const fs::path inputs[] = {bfile};
            io::write_manifest(out, "gen-dataset",
                               {{"backend_id", backend.id},
                                {"pools", gd_pools},
                                {"circuits", gd_circuits},
                                {"seed", gd_seed},
                                {"master_seed", arts.front().pool.meta.master_seed},
                                {"depth_cap", gd_circ.depth_cap},
                                {"budget_max", gd_circ.budget_max},
                                {"labelled", !gd_unlabelled},
                                {"drift", to_json(gd_drift)}},
                               io::digest_inputs(inputs));
            note("wrote " + std::to_string(arts.size()) + " pools for " + backend.id);
        } else if (*tr) {
            const auto kind = target_kind_from_string(tr_kind);
            std::vector<fs::path> files;
            for (const auto& d : tr_data) {
                const auto f = sample_files(d);
                files.insert(files.end(), f.begin(), f.end());
            }
            const auto samples = load_samples(files);
            tr_cfg.seed = tr_seed;
            const auto model = model_config(kind, tr_model, tr_seed);
            const auto result = train(kind, samples, tr_holdout, model, tr_cfg);
            const fs::path out = tr_out;
            io::write_json(out / "checkpoint.json", io::to_json(result.checkpoint));
            io::write_manifest(out, "train", result.checkpoint.manifest, io::digest_inputs(files));
            note("trained " + tr_kind + " model: " + std::to_string(result.epochs_run) + " epochs, best " +
                 std::to_string(result.best_epoch));
        } else if (*in) {
            const fs::path nfile = checkpoint_file(in_node), efile = checkpoint_file(in_edge);
            const auto node = io::checkpoint_from_json(io::read_json(nfile));
            const auto edge = io::checkpoint_from_json(io::read_json(efile));
            auto files = sample_files(in_pools);
            if (in_count > 0) {
                if (in_count > files.size()) throw UsageError("--pool-count exceeds the available pools");
                files.resize(in_count);
            }
            const auto pools = load_samples(files);
            if (!in_topo.empty()) {
                const json b = io::read_json(in_topo);
                const auto g = io::graph_from_json(b.at("topology").at("graph"));
                for (const auto& s : pools)
                    if (!(*s.graph == g)) throw SchemaError("pool " + s.backend_id + " does not match --topology");
            }
            const auto pred = infer_holdout(node, edge, pools);
            const fs::path out = in_out;
            io::write_json(out / "errormap.json", io::to_json(pred));
            std::vector<fs::path> inputs{nfile, efile};
            inputs.insert(inputs.end(), files.begin(), files.end());
            io::write_manifest(out, "infer", {{"backend_id", pools.front().backend_id}, {"pool_count", pools.size()}},
                               io::digest_inputs(inputs));
            note("predicted " + pools.front().backend_id + " from " + std::to_string(pools.size()) + " pools");
        } else if (*ev) {
            const auto pred = io::error_map_from_json(io::read_json(ev_pred));
            const auto truth = load_truth(ev_truth);
            if (pred.num_nodes() != truth.num_nodes() || pred.num_edges() != truth.num_edges())
                throw UsageError("evaluate: component counts differ between --pred and --truth");
            const auto r = evaluate(pred, truth, ev_k);
            write_report(ev_out, "report", r);
            const fs::path inputs[] = {ev_pred, ev_truth};
            io::write_manifest(ev_out, "evaluate", {{"top_k", ev_k}}, io::digest_inputs(inputs));
            note(summary(r));
        } else if (*ap) {
            const fs::path nfile = checkpoint_file(ap_node), efile = checkpoint_file(ap_edge);
            const auto node = io::checkpoint_from_json(io::read_json(nfile));
            const auto edge = io::checkpoint_from_json(io::read_json(efile));
            const auto files = sample_files(ap_pools);
            const auto pools = load_samples(files);
            const auto truth = load_truth(ap_truth);
            const auto counts = parse_list(ap_counts);
            for (auto p : counts)
                if (p == 0 || p > pools.size()) throw UsageError("pool count " + std::to_string(p) + " out of range");
            const auto pp = predict_pools(node, edge, pools);
            std::vector<AblationRow> rows;
            for (auto p : counts) {
                const auto r = evaluate(aggregate_predictions(pp, p, node.calibration, edge.calibration), truth);
                rows.push_back({p, r.nodes.log_mismatch, r.edges.log_mismatch});
            }
            const fs::path out = ap_out;
            io::write_file(out / "ablation_pools.csv", io::ablation_csv("pools", rows));
            std::vector<fs::path> inputs{nfile, efile, ap_truth};
            inputs.insert(inputs.end(), files.begin(), files.end());
            io::write_manifest(out, "ablate-pools", {{"counts", counts}}, io::digest_inputs(inputs));
            note("pool ablation over " + std::to_string(rows.size()) + " settings");
        } else if (*ab) {
            const auto cfg = study_config(ab_flags);
            const auto ks = parse_list(ab_ks);
            StudyData data = build_study_data(cfg);
            const auto rows = ablate_backends(data, cfg, ks);
            const fs::path out = ab_out;
            io::write_file(out / "ablation_backends.csv", io::ablation_csv("backends", rows));
            std::vector<std::string> order;
            for (auto b : backend_order(data, cfg.seed)) order.push_back(data.backends[b].id);
            io::write_manifest(out, "ablate-backends", {{"config", cfg.to_json()}, {"ks", ks}, {"order", order}},
                               json::object());
            note("backend ablation over " + std::to_string(rows.size()) + " settings");
        } else if (*dr) {
            auto cfg = study_config(dr_flags);
            const auto cmp = drift_experiment(cfg);
            const fs::path out = dr_out;
            write_report(out, "static_report", cmp.static_run.report);
            write_report(out, "drift_report", cmp.drift_run.report);
            io::write_manifest(out, "drift",
                               {{"static", cmp.static_run.manifest}, {"drift", cmp.drift_run.manifest}},
                               json::object());
            note("static: " + summary(cmp.static_run.report));
            note("drift:  " + summary(cmp.drift_run.report));
        } else if (*st) {
            const auto cfg = study_config(st_flags);
            StudyData data = build_study_data(cfg);
            const auto r = run_study(data, cfg);
            const fs::path out = st_out;
            write_report(out, "report", r.report);
            io::write_json(out / "prediction.json", io::to_json(r.prediction));
            io::write_json(out / "node_checkpoint.json", io::to_json(r.node.checkpoint));
            io::write_json(out / "edge_checkpoint.json", io::to_json(r.edge.checkpoint));
            io::write_manifest(out, "study", r.manifest, json::object());
            note(summary(r.report));
        }
    } catch (const SchemaError& e) {
        std::cerr << "qf: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "qf: " << e.what() << "\n";
        return 4;
    } catch (const LeakageError& e) {
        std::cerr << "qf: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qf: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qf: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
