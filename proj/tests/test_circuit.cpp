#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "qf/circuit.hpp"
#include "qf/io.hpp"

using namespace qf;

namespace {

std::uint64_t find_seed(std::size_t n, const CircuitConfig& cfg, std::size_t w, std::size_t budget) {
    for (std::uint64_t s = 0; s < 100000; ++s) {
        const auto c = gen_circuit(n, s, cfg);
        if (c.meta.active_width == w && c.meta.cx_budget == budget) return s;
    }
    FAIL("no seed found");
    return 0;
}

// Splits the gate list into alternating rotation layers and CX runs.
struct Layers {
    std::vector<std::vector<Gate>> rot, cx;
};

Layers split_layers(const Circuit& c) {
    Layers l;
    GateKind prev = GateKind::cx;
    for (const Gate& g : c.gates) {
        auto& bucket = g.kind == GateKind::rot ? l.rot : l.cx;
        if (g.kind != prev || bucket.empty()) bucket.emplace_back();
        bucket.back().push_back(g);
        prev = g.kind;
    }
    return l;
}

}  // namespace

TEST_CASE("width-1 circuits carry no CX") {
    CircuitConfig cfg{64, 20};
    const auto s = find_seed(5, cfg, 1, 20);
    const auto c = gen_circuit(5, s, cfg);
    CHECK(c.cx_count() == 0);
    CHECK(c.gates.size() == 1);
}

TEST_CASE("budget is hit exactly by truncating the last matching") {
    CircuitConfig cfg{64, 5};
    const auto s = find_seed(4, cfg, 4, 5);
    const auto c = gen_circuit(4, s, cfg);
    CHECK(c.cx_count() == 5);
    const auto l = split_layers(c);
    REQUIRE(l.cx.size() == 3);
    CHECK(l.cx[2].size() == 1);
    CHECK(l.rot.size() == 4);
}

TEST_CASE("gen_circuit is deterministic and rejects bad input") {
    const CircuitConfig cfg{64, 56};
    CHECK(gen_circuit(27, 42, cfg) == gen_circuit(27, 42, cfg));
    CHECK_FALSE(gen_circuit(27, 42, cfg) == gen_circuit(27, 43, cfg));
    CHECK_THROWS_AS(gen_circuit(0, 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(gen_circuit(3, 0, CircuitConfig{0, 4}), std::invalid_argument);
}

TEST_CASE("structural properties over random circuits") {
    for (std::uint64_t s = 0; s < 2000; ++s) {
        const std::size_t n = 1 + s % 27;
        const CircuitConfig cfg{1 + s % 9, s % 60};
        const auto c = gen_circuit(n, s, cfg);
        const std::size_t w = c.meta.active_width;
        REQUIRE(w >= 1);
        REQUIRE(w <= n);
        CHECK(c.meta.cx_budget <= cfg.budget_max);
        std::set<Qubit> active;
        const auto l = split_layers(c);
        for (const auto& layer : l.rot) {
            CHECK(layer.size() == w);
            std::set<Qubit> qs;
            for (const auto& g : layer) qs.insert(g.q0), active.insert(g.q0);
            CHECK(qs.size() == w);
        }
        CHECK(active.size() == w);
        for (const auto& layer : l.cx) {
            std::set<Qubit> seen;
            for (const auto& g : layer) {
                CHECK(g.q0 != g.q1);
                CHECK(g.q0 < n);
                CHECK(g.q1 < n);
                CHECK(active.count(g.q0) == 1);
                CHECK(active.count(g.q1) == 1);
                CHECK(seen.insert(g.q0).second);
                CHECK(seen.insert(g.q1).second);
            }
        }
        // Gate-count accounting.
        const std::size_t per = w / 2, b = c.meta.cx_budget, d = cfg.depth_cap;
        const std::size_t expect_cx = per == 0 ? 0 : std::min(b, d * per);
        const std::size_t expect_layers = per == 0 ? 1 : std::min(d, (b + per - 1) / per + 1);
        CHECK(c.cx_count() == expect_cx);
        CHECK(c.gates.size() - c.cx_count() == expect_layers * w);
        for (const auto& g : c.gates)
            if (g.kind == GateKind::rot)
                for (double a : g.angles) CHECK((a >= 0.0 && a < 6.283185307179587));
    }
}

TEST_CASE("gen_pool examples") {
    const CircuitConfig cfg{64, 56};
    const auto p = gen_pool(27, 3, 9, 2, cfg, "synth-0");
    REQUIRE(p.circuits.size() == 3);
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(p.circuits[i].meta.seed == circuit_seed(9, 2, i));
        seeds.insert(p.circuits[i].meta.seed);
    }
    CHECK(seeds.size() == 3);
    CHECK(circuit_seed(9, 2, 0) == derive_seed({stream::circuits, 9, 2, 0}));
    CHECK(io::pool_to_jsonl(p) == io::pool_to_jsonl(gen_pool(27, 3, 9, 2, cfg, "synth-0")));
    CHECK_FALSE(gen_pool(27, 3, 9, 3, cfg) == p);
    CHECK_THROWS_AS(gen_pool(27, 0, 9, 2, cfg), std::invalid_argument);
}

TEST_CASE("active width is uniform on 1..n") {
    const auto p = gen_pool(27, 1000, 1, 0, {64, 56});
    double acc = 0;
    for (const auto& c : p.circuits) acc += static_cast<double>(c.meta.active_width);
    CHECK(acc / 1000.0 == doctest::Approx(14.0).epsilon(0.05));
}
