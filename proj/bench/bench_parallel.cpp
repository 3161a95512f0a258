// Serial reference vs OpenMP kernels on a 27-qubit heavy-hex backend.
#include <benchmark/benchmark.h>

#include "qf/features.hpp"
#include "qf/parallel.hpp"
#include "qf/transpiler.hpp"

using namespace qf;

namespace {

struct Setup {
    BackendSpec backend;
    CircuitPool pool;
    std::vector<TranspiledCircuit> transpiled;
};

const Setup& setup() {
    static const Setup s = [] {
        Setup s;
        s.backend = sample_backend("bench", gen_topology(TopologyKind::heavyhex, {}, 1), 1, {});
        s.pool = gen_pool(27, 500, 42, 0, {64, 2 * s.backend.graph().num_edges()}, "bench");
        s.transpiled = transpile_pool_serial(s.pool, s.backend);
        return s;
    }();
    return s;
}

void BM_TranspileSerial(benchmark::State& st) {
    const auto& s = setup();
    for (auto _ : st) benchmark::DoNotOptimize(transpile_pool_serial(s.pool, s.backend));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.pool.circuits.size()));
}

void BM_TranspileParallel(benchmark::State& st) {
    const auto& s = setup();
    parallel::set_threads(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(transpile_pool(s.pool, s.backend));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.pool.circuits.size()));
}

void BM_NodeFeaturesSerial(benchmark::State& st) {
    const auto& s = setup();
    for (auto _ : st) benchmark::DoNotOptimize(dynamic_node_features_serial(s.transpiled, 27));
}

void BM_NodeFeaturesParallel(benchmark::State& st) {
    const auto& s = setup();
    parallel::set_threads(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(dynamic_node_features(s.transpiled, 27));
}

void BM_EdgeFeaturesSerial(benchmark::State& st) {
    const auto& s = setup();
    const auto g = s.backend.graph();
    for (auto _ : st) benchmark::DoNotOptimize(dynamic_edge_features_serial(s.transpiled, g));
}

void BM_EdgeFeaturesParallel(benchmark::State& st) {
    const auto& s = setup();
    const auto g = s.backend.graph();
    parallel::set_threads(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(dynamic_edge_features(s.transpiled, g));
}

}  // namespace

BENCHMARK(BM_TranspileSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TranspileParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NodeFeaturesSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_NodeFeaturesParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EdgeFeaturesSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EdgeFeaturesParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
