#include "qf/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qf/errors.hpp"

namespace qf::io {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const json::exception& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    }
}

void expect_schema(const json& j, const char* field, int version, const char* what) {
    if (!j.is_object() || !j.contains(field)) throw SchemaError(std::string(what) + ": missing '" + field + "'");
    if (j.at(field).get<int>() != version) {
        throw SchemaError(std::string(what) + ": unsupported schema version " + j.at(field).dump() + " (expected " +
                          std::to_string(version) + ")");
    }
}

json nan_to_null(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isnan(x) ? json(nullptr) : json(x));
    return a;
}

std::vector<double> null_to_nan(const json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    return v;
}

}  // namespace

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + p.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot open '" + p.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SchemaError("write to '" + p.string() + "' failed");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

json read_json(const fs::path& p) {
    const std::string text = read_file(p);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------

json to_json(const ErrorMap& m) {
    return {{"schema_version", kErrorMapSchema},
            {"y_nodes", nan_to_null(m.y_nodes)},
            {"y_edges", nan_to_null(m.y_edges)},
            {"mask_nodes", m.mask_nodes},
            {"mask_edges", m.mask_edges}};
}

ErrorMap error_map_from_json(const json& j) {
    return guarded("error map", [&] {
        expect_schema(j, "schema_version", kErrorMapSchema, "error map");
        ErrorMap m;
        m.y_nodes = null_to_nan(j.at("y_nodes"));
        m.y_edges = null_to_nan(j.at("y_edges"));
        m.mask_nodes = j.at("mask_nodes").get<std::vector<std::uint8_t>>();
        m.mask_edges = j.at("mask_edges").get<std::vector<std::uint8_t>>();
        for (std::size_t i = 0; i < m.mask_nodes.size() && i < m.y_nodes.size(); ++i)
            if (m.mask_nodes[i] && std::isnan(m.y_nodes[i])) throw SchemaError("error map: null under mask 1");
        for (std::size_t i = 0; i < m.mask_edges.size() && i < m.y_edges.size(); ++i)
            if (m.mask_edges[i] && std::isnan(m.y_edges[i])) throw SchemaError("error map: null under mask 1");
        m.validate();
        return m;
    });
}

json to_json(const CouplingGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
    return {{"num_qubits", g.num_nodes()}, {"edges", edges}};
}

CouplingGraph graph_from_json(const json& j) {
    return guarded("coupling graph", [&] {
        std::vector<std::pair<Qubit, Qubit>> raw;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw SchemaError("coupling graph: edge must be a [u, v] pair");
            raw.emplace_back(e[0].get<Qubit>(), e[1].get<Qubit>());
        }
        return canonicalize_edges(raw, j.at("num_qubits").get<std::size_t>());
    });
}

json to_json(const BackendSpec& b) {
    const auto& p = b.topology.params;
    return {{"schema_version", kBackendSchema},
            {"id", b.id},
            {"seed", b.seed},
            {"topology",
             {{"kind", to_string(b.topology.kind)},
              {"seed", b.topology.seed},
              {"params", {{"n", p.n}, {"rows", p.rows}, {"cols", p.cols}, {"couplers", p.couplers}}},
              {"graph", to_json(b.graph())}}},
            {"noise",
             {{"median_1q", b.noise.median_1q},
              {"sigma_1q", b.noise.sigma_1q},
              {"median_2q", b.noise.median_2q},
              {"sigma_2q", b.noise.sigma_2q},
              {"spatial_smoothing", b.noise.spatial_smoothing}}},
            {"calibration", to_json(calibration_table_from(b.errors, b.graph()))}};
}

BackendSpec backend_from_json(const json& j) {
    return guarded("backend", [&] {
        expect_schema(j, "schema_version", kBackendSchema, "backend");
        BackendSpec b;
        b.id = j.at("id").get<std::string>();
        if (b.id.empty()) throw SchemaError("backend: empty id");
        b.seed = j.at("seed").get<std::uint64_t>();
        const json& t = j.at("topology");
        b.topology.kind = topology_kind_from_string(t.at("kind").get<std::string>());
        b.topology.seed = t.at("seed").get<std::uint64_t>();
        const json& p = t.at("params");
        b.topology.params = {p.at("n").get<std::size_t>(), p.at("rows").get<std::size_t>(),
                             p.at("cols").get<std::size_t>(), p.at("couplers").get<std::size_t>()};
        b.topology.graph = graph_from_json(t.at("graph"));
        const json& nz = j.at("noise");
        b.noise = {nz.at("median_1q").get<double>(), nz.at("sigma_1q").get<double>(), nz.at("median_2q").get<double>(),
                   nz.at("sigma_2q").get<double>(), nz.at("spatial_smoothing").get<double>()};
        b.errors = derive_labels(calibration_from_json(j.at("calibration")), b.graph());
        return b;
    });
}

json to_json(const CalibrationTable& t) {
    json rows = json::array();
    for (const auto& r : t) {
        rows.push_back({{"kind", r.kind == CalibrationRow::Kind::one_qubit ? "1q" : "2q"},
                        {"operands", r.operands},
                        {"gate", r.gate},
                        {"error", r.error ? json(*r.error) : json(nullptr)}});
    }
    return rows;
}

CalibrationTable calibration_from_json(const json& j) {
    return guarded("calibration table", [&] {
        if (!j.is_array()) throw SchemaError("calibration table: expected an array of rows");
        CalibrationTable t;
        for (const auto& r : j) {
            CalibrationRow row;
            const auto kind = r.at("kind").get<std::string>();
            if (kind == "1q") row.kind = CalibrationRow::Kind::one_qubit;
            else if (kind == "2q") row.kind = CalibrationRow::Kind::two_qubit;
            else throw SchemaError("calibration table: unknown row kind '" + kind + "'");
            row.operands = r.at("operands").get<std::vector<Qubit>>();
            row.gate = r.at("gate").get<std::string>();
            if (!r.at("error").is_null()) row.error = r.at("error").get<double>();
            t.push_back(std::move(row));
        }
        return t;
    });
}

// ---------------------------------------------------------------------------

namespace {

json gate_json(const Gate& g) {
    if (g.kind == GateKind::cx) return {{"op", "cx"}, {"q", {g.q0, g.q1}}};
    return {{"op", "rot"}, {"q", {g.q0}}, {"angles", g.angles}};
}

Gate gate_from(const json& j) {
    const auto op = j.at("op").get<std::string>();
    const auto q = j.at("q").get<std::vector<Qubit>>();
    if (op == "cx") {
        if (q.size() != 2 || q[0] == q[1]) throw SchemaError("gate: cx needs two distinct operands");
        return Gate::cx(q[0], q[1]);
    }
    if (op == "rot") {
        if (q.size() != 1) throw SchemaError("gate: rot needs one operand");
        return Gate::rot(q[0], j.at("angles").get<std::array<double, 3>>());
    }
    throw SchemaError("gate: unknown op '" + op + "'");
}

json layout_json(const Layout& l) {
    json a = json::array();
    for (Qubit q : l.logical_to_physical) a.push_back(q == Layout::kUnmapped ? json(nullptr) : json(q));
    return a;
}

Layout layout_from(const json& a) {
    Layout l;
    for (const auto& x : a) l.logical_to_physical.push_back(x.is_null() ? Layout::kUnmapped : x.get<Qubit>());
    return l;
}

}  // namespace

json to_json(const Circuit& c) {
    json gates = json::array();
    for (const auto& g : c.gates) gates.push_back(gate_json(g));
    return {{"width", c.width},
            {"seed", c.meta.seed},
            {"active_width", c.meta.active_width},
            {"cx_budget", c.meta.cx_budget},
            {"gates", gates}};
}

Circuit circuit_from_json(const json& j) {
    return guarded("circuit", [&] {
        Circuit c;
        c.width = j.at("width").get<std::size_t>();
        c.meta = {j.at("seed").get<std::uint64_t>(), j.at("active_width").get<std::size_t>(),
                  j.at("cx_budget").get<std::size_t>()};
        for (const auto& g : j.at("gates")) {
            c.gates.push_back(gate_from(g));
            if (c.gates.back().q0 >= c.width || c.gates.back().q1 >= c.width) {
                throw SchemaError("circuit: operand outside width " + std::to_string(c.width));
            }
        }
        return c;
    });
}

json to_json(const TranspiledCircuit& t) {
    json gates = json::array();
    for (const auto& pg : t.gates) {
        json g = gate_json(pg.gate);
        if (pg.gate.kind == GateKind::cx) g["origin"] = pg.origin == GateOrigin::swap ? "swap" : "logical";
        gates.push_back(std::move(g));
    }
    return {{"num_physical", t.num_physical},
            {"source_seed", t.source_seed},
            {"swap_count", t.swap_count},
            {"initial_layout", layout_json(t.initial_layout)},
            {"final_layout", layout_json(t.final_layout)},
            {"gates", gates}};
}

TranspiledCircuit transpiled_from_json(const json& j) {
    return guarded("transpiled circuit", [&] {
        TranspiledCircuit t;
        t.num_physical = j.at("num_physical").get<std::size_t>();
        t.source_seed = j.at("source_seed").get<std::uint64_t>();
        t.swap_count = j.at("swap_count").get<std::size_t>();
        t.initial_layout = layout_from(j.at("initial_layout"));
        t.final_layout = layout_from(j.at("final_layout"));
        for (const auto& g : j.at("gates")) {
            PhysicalGate pg{gate_from(g), GateOrigin::logical};
            if (pg.gate.q0 >= t.num_physical || pg.gate.q1 >= t.num_physical) {
                throw SchemaError("transpiled circuit: operand outside the device");
            }
            if (g.contains("origin") && g.at("origin").get<std::string>() == "swap") pg.origin = GateOrigin::swap;
            t.gates.push_back(pg);
        }
        return t;
    });
}

namespace {

std::vector<json> jsonl_lines(const std::string& text, const char* what) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw SchemaError(std::string(what) + ": bad line " + std::to_string(out.size() + 1) + ": " + e.what());
        }
    }
    if (out.empty()) throw SchemaError(std::string(what) + ": missing header line");
    return out;
}

json pool_header(const PoolMeta& m, const char* type, std::size_t count) {
    return {{"schema_version", kPoolSchema},
            {"type", type},
            {"backend_id", m.backend_id},
            {"pool_index", m.pool_index},
            {"master_seed", m.master_seed},
            {"circuits", count}};
}

PoolMeta header_meta(const json& h, const char* type, std::size_t lines) {
    expect_schema(h, "schema_version", kPoolSchema, type);
    if (h.at("type").get<std::string>() != type) throw SchemaError(std::string("pool: expected type '") + type + "'");
    if (h.at("circuits").get<std::size_t>() != lines) throw SchemaError("pool: circuit count disagrees with header");
    return {h.at("backend_id").get<std::string>(), h.at("pool_index").get<std::size_t>(),
            h.at("master_seed").get<std::uint64_t>()};
}

}  // namespace

std::string pool_to_jsonl(const CircuitPool& pool) {
    std::string out = pool_header(pool.meta, "circuit_pool", pool.circuits.size()).dump() + "\n";
    for (const auto& c : pool.circuits) out += to_json(c).dump() + "\n";
    return out;
}

CircuitPool pool_from_jsonl(const std::string& text) {
    return guarded("circuit pool", [&] {
        const auto lines = jsonl_lines(text, "circuit pool");
        CircuitPool p;
        p.meta = header_meta(lines[0], "circuit_pool", lines.size() - 1);
        for (std::size_t i = 1; i < lines.size(); ++i) p.circuits.push_back(circuit_from_json(lines[i]));
        return p;
    });
}

std::string transpiled_pool_to_jsonl(const PoolMeta& meta, std::span<const TranspiledCircuit> tpool) {
    std::string out = pool_header(meta, "transpiled_pool", tpool.size()).dump() + "\n";
    for (const auto& t : tpool) out += to_json(t).dump() + "\n";
    return out;
}

std::vector<TranspiledCircuit> transpiled_pool_from_jsonl(const std::string& text, PoolMeta* meta) {
    return guarded("transpiled pool", [&] {
        const auto lines = jsonl_lines(text, "transpiled pool");
        const PoolMeta m = header_meta(lines[0], "transpiled_pool", lines.size() - 1);
        if (meta) *meta = m;
        std::vector<TranspiledCircuit> out;
        for (std::size_t i = 1; i < lines.size(); ++i) out.push_back(transpiled_from_json(lines[i]));
        return out;
    });
}

// ---------------------------------------------------------------------------

json to_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}}; }

Matrix matrix_from_json(const json& j) {
    return guarded("matrix", [&] {
        return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                      j.at("data").get<std::vector<double>>());
    });
}

json to_json(const GraphSample& s) {
    if (!s.graph) throw std::invalid_argument("sample has no graph");
    json j = {{"schema_version", kSampleSchema},
              {"feature_schema_version", kFeatureSchemaVersion},
              {"backend_id", s.backend_id},
              {"pool_index", s.pool_index},
              {"graph", to_json(*s.graph)},
              {"x_nodes", to_json(s.x_nodes)},
              {"x_edges", to_json(s.x_edges)},
              {"mask_nodes", s.mask_nodes},
              {"mask_edges", s.mask_edges},
              {"standardized", s.standardized}};
    j["labels"] = s.labels ? to_json(*s.labels) : json(nullptr);
    return j;
}

GraphSample sample_from_json(const json& j) {
    return guarded("sample", [&] {
        expect_schema(j, "schema_version", kSampleSchema, "sample");
        expect_schema(j, "feature_schema_version", kFeatureSchemaVersion, "sample features");
        GraphSample s;
        s.backend_id = j.at("backend_id").get<std::string>();
        s.pool_index = j.at("pool_index").get<std::size_t>();
        s.graph = std::make_shared<const CouplingGraph>(graph_from_json(j.at("graph")));
        s.x_nodes = matrix_from_json(j.at("x_nodes"));
        s.x_edges = matrix_from_json(j.at("x_edges"));
        s.mask_nodes = j.at("mask_nodes").get<std::vector<std::uint8_t>>();
        s.mask_edges = j.at("mask_edges").get<std::vector<std::uint8_t>>();
        s.standardized = j.at("standardized").get<bool>();
        if (!j.at("labels").is_null()) s.labels = error_map_from_json(j.at("labels"));
        if (s.x_nodes.rows() != s.graph->num_nodes() || s.x_nodes.cols() != kNodeFeatures ||
            s.x_edges.rows() != s.graph->num_edges() || s.x_edges.cols() != kEdgeFeatures) {
            throw SchemaError("sample: feature shape disagrees with graph or schema");
        }
        if (s.mask_nodes.size() != s.x_nodes.rows() || s.mask_edges.size() != s.x_edges.rows()) {
            throw SchemaError("sample: mask length disagrees with features");
        }
        if (s.labels && (s.labels->num_nodes() != s.x_nodes.rows() || s.labels->num_edges() != s.x_edges.rows())) {
            throw SchemaError("sample: label length disagrees with features");
        }
        return s;
    });
}

json to_json(const Standardizer& s) {
    return {{"node_mean", s.node_mean},
            {"node_scale", s.node_scale},
            {"edge_mean", s.edge_mean},
            {"edge_scale", s.edge_scale},
            {"fit_backends", s.fit_backends}};
}

Standardizer standardizer_from_json(const json& j) {
    return guarded("standardizer", [&] {
        Standardizer s;
        s.node_mean = j.at("node_mean").get<std::vector<double>>();
        s.node_scale = j.at("node_scale").get<std::vector<double>>();
        s.edge_mean = j.at("edge_mean").get<std::vector<double>>();
        s.edge_scale = j.at("edge_scale").get<std::vector<double>>();
        s.fit_backends = j.at("fit_backends").get<std::vector<std::string>>();
        if (s.node_mean.size() != kNodeFeatures || s.node_scale.size() != kNodeFeatures ||
            s.edge_mean.size() != kEdgeFeatures || s.edge_scale.size() != kEdgeFeatures) {
            throw SchemaError("standardizer: column count does not match the feature schema");
        }
        return s;
    });
}

json to_json(const LinearCalibration& c) { return {{"a", c.a}, {"b", c.b}, {"fit_backends", c.fit_backends}}; }

LinearCalibration linear_calibration_from_json(const json& j) {
    return guarded("calibration", [&] {
        LinearCalibration c;
        c.a = j.at("a").get<double>();
        c.b = j.at("b").get<double>();
        c.fit_backends = j.at("fit_backends").get<std::vector<std::string>>();
        if (!std::isfinite(c.a) || !std::isfinite(c.b)) throw SchemaError("calibration: non-finite coefficients");
        return c;
    });
}

RegressorConfig regressor_config_from_json(const json& j) {
    return guarded("model config", [&] {
        RegressorConfig c = RegressorConfig::defaults_for(target_kind_from_string(j.at("kind").get<std::string>()));
        c.hidden = j.value("hidden", c.hidden);
        c.rounds = j.value("rounds", c.rounds);
        c.mlp_depth = j.value("mlp_depth", c.mlp_depth);
        c.dropout = j.value("dropout", c.dropout);
        c.huber_delta = j.value("huber_delta", c.huber_delta);
        c.init_seed = j.value("init_seed", c.init_seed);
        c.target_shift = j.value("target_shift", c.target_shift);
        c.target_scale = j.value("target_scale", c.target_scale);
        c.validate();
        return c;
    });
}

TrainConfig train_config_from_json(const json& j) {
    return guarded("train config", [&] {
        TrainConfig c;
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.patience = j.value("patience", c.patience);
        c.val_fraction = j.value("val_fraction", c.val_fraction);
        c.seed = j.value("seed", c.seed);
        c.calibrate = j.value("calibrate", c.calibrate);
        c.normalize_targets = j.value("normalize_targets", c.normalize_targets);
        if (j.contains("drift")) {
            const json& d = j.at("drift");
            c.drift.enabled = d.value("enabled", c.drift.enabled);
            c.drift.resample_every = d.value("resample_every", c.drift.resample_every);
            c.drift.scale_nodes = d.value("scale_nodes", c.drift.scale_nodes);
            c.drift.scale_edges = d.value("scale_edges", c.drift.scale_edges);
        }
        if (j.contains("adam")) {
            const json& a = j.at("adam");
            c.adam.lr = a.value("lr", c.adam.lr);
            c.adam.beta1 = a.value("beta1", c.adam.beta1);
            c.adam.beta2 = a.value("beta2", c.adam.beta2);
            c.adam.eps = a.value("eps", c.adam.eps);
        }
        if (j.contains("reference_epochs")) {
            c.reference_epochs_node = j.at("reference_epochs").value("node", c.reference_epochs_node);
            c.reference_epochs_edge = j.at("reference_epochs").value("edge", c.reference_epochs_edge);
        }
        c.validate();
        return c;
    });
}

json to_json(const Checkpoint& c) {
    json params = json::array();
    for (std::size_t k = 0; k < c.params.size(); ++k) {
        json p = to_json(c.params.values[k]);
        p["name"] = c.params.names[k];
        params.push_back(std::move(p));
    }
    return {{"schema_version", Checkpoint::kSchemaVersion},
            {"feature_schema_version", kFeatureSchemaVersion},
            {"model", qf::to_json(c.model)},
            {"params", params},
            {"standardizer", to_json(c.standardizer)},
            {"calibration", to_json(c.calibration)},
            {"manifest", c.manifest}};
}

Checkpoint checkpoint_from_json(const json& j) {
    return guarded("checkpoint", [&] {
        expect_schema(j, "schema_version", Checkpoint::kSchemaVersion, "checkpoint");
        expect_schema(j, "feature_schema_version", kFeatureSchemaVersion, "checkpoint features");
        Checkpoint c;
        c.model = regressor_config_from_json(j.at("model"));
        for (const auto& p : j.at("params")) c.params.add(p.at("name").get<std::string>(), matrix_from_json(p));
        c.standardizer = standardizer_from_json(j.at("standardizer"));
        c.calibration = linear_calibration_from_json(j.at("calibration"));
        c.manifest = j.at("manifest");
        (void)c.regressor();  // validates parameter names and shapes against the model config
        return c;
    });
}

json to_json(const ComponentReport& r) {
    return {{"count", r.count},
            {"percent_diff", r.percent_diff},
            {"spearman", r.spearman},
            {"top_k", r.top_k},
            {"top_overlap", r.top_overlap},
            {"log_mismatch", r.log_mismatch},
            {"rmse", r.rmse}};
}

json to_json(const EvalReport& r) {
    return {{"schema_version", kReportSchema}, {"nodes", to_json(r.nodes)}, {"edges", to_json(r.edges)}};
}

namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

std::string report_csv(const EvalReport& r) {
    std::string out = "component,metric,value\n";
    for (const auto& [name, c] : {std::pair{"nodes", &r.nodes}, std::pair{"edges", &r.edges}}) {
        const std::string n = name;
        out += n + ",count," + std::to_string(c->count) + "\n";
        out += n + ",percent_diff," + num(c->percent_diff) + "\n";
        out += n + ",spearman," + num(c->spearman) + "\n";
        out += n + ",top_overlap," + std::to_string(c->top_overlap) + "\n";
        out += n + ",top_k," + std::to_string(c->top_k) + "\n";
        out += n + ",log_mismatch," + num(c->log_mismatch) + "\n";
        out += n + ",rmse," + num(c->rmse) + "\n";
    }
    return out;
}

std::string ablation_csv(const std::string& setting_name, std::span<const AblationRow> rows) {
    std::string out = setting_name + ",M_nodes,M_edges\n";
    for (const auto& r : rows) out += std::to_string(r.setting) + "," + num(r.mismatch_nodes) + "," + num(r.mismatch_edges) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

namespace {

json digest_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        if (fs::relative(e.path(), dir) == fs::path(kManifestName)) continue;
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    json out = json::object();
    for (const auto& f : files) out[fs::relative(f, dir).generic_string()] = sha256_hex(read_file(f));
    return out;
}

}  // namespace

json make_manifest(const fs::path& dir, const std::string& command, const json& params, const json& inputs) {
    return {{"schema_version", kManifestSchema},
            {"tool_version", kToolVersion},
            {"schemas",
             {{"backend", kBackendSchema},
              {"pool", kPoolSchema},
              {"sample", kSampleSchema},
              {"features", kFeatureSchemaVersion},
              {"checkpoint", Checkpoint::kSchemaVersion},
              {"error_map", kErrorMapSchema},
              {"report", kReportSchema}}},
            {"command", command},
            {"params", params},
            {"inputs", inputs},
            {"outputs", digest_dir(dir)}};
}

void write_manifest(const fs::path& dir, const std::string& command, const json& params, const json& inputs) {
    write_json(dir / kManifestName, make_manifest(dir, command, params, inputs));
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
    const json m = read_json(dir / kManifestName);
    const json now = digest_dir(dir);
    std::vector<std::string> bad;
    const json& recorded = m.at("outputs");
    for (const auto& [name, digest] : recorded.items()) {
        if (!now.contains(name) || now.at(name) != digest) bad.push_back(name);
    }
    for (const auto& [name, digest] : now.items()) {
        if (!recorded.contains(name)) bad.push_back(name);
    }
    return bad;
}

json digest_inputs(std::span<const fs::path> files) {
    json out = json::object();
    for (const auto& f : files) out[f.generic_string()] = sha256_hex(read_file(f));
    return out;
}

}  // namespace qf::io
