#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "qf/backend.hpp"
#include "qf/rng.hpp"

using namespace qf;

namespace {

Topology heavyhex(std::uint64_t seed = 0) { return gen_topology(TopologyKind::heavyhex, {}, seed); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

TEST_CASE("degenerate noise gives the medians exactly") {
    NoiseConfig c;
    c.sigma_1q = c.sigma_2q = 0.0;
    c.spatial_smoothing = 0.0;
    const auto b = sample_backend("b", heavyhex(), 3, c);
    for (double y : b.errors.y_nodes) CHECK(y == c.median_1q);
    for (double y : b.errors.y_edges) CHECK(y == c.median_2q);
}

TEST_CASE("default noise sits at the stated orders of magnitude") {
    std::vector<double> n, e;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto b = sample_backend("b", heavyhex(s), s, {});
        n.insert(n.end(), b.errors.y_nodes.begin(), b.errors.y_nodes.end());
        e.insert(e.end(), b.errors.y_edges.begin(), b.errors.y_edges.end());
    }
    const double mn = median(n), me = median(e);
    CHECK(mn > 1e-4 / 3.0);
    CHECK(mn < 1e-4 * 30.0);
    CHECK(me > 1e-2 / 3.0);
    CHECK(me < 1e-2 * 3.0);
    CHECK(std::abs(std::log(mn / 2e-4)) < 0.3);
    CHECK(std::abs(std::log(me / 1e-2)) < 0.3);
}

TEST_CASE("sample_backend is deterministic and validates its config") {
    const auto t = heavyhex(4);
    CHECK(sample_backend("a", t, 9, {}).errors == sample_backend("a", t, 9, {}).errors);
    CHECK_FALSE(sample_backend("a", t, 9, {}).errors == sample_backend("a", t, 10, {}).errors);
    NoiseConfig bad;
    bad.median_1q = 0.0;
    CHECK_THROWS_AS(sample_backend("a", t, 0, bad), std::invalid_argument);
    bad = {};
    bad.sigma_2q = -1.0;
    CHECK_THROWS_AS(sample_backend("a", t, 0, bad), std::invalid_argument);
    bad = {};
    bad.spatial_smoothing = 1.5;
    CHECK_THROWS_AS(sample_backend("a", t, 0, bad), std::invalid_argument);
}

TEST_CASE("1000-seed sweep never violates error map invariants") {
    const auto t = heavyhex(1);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto b = sample_backend("b", t, s, {});
        REQUIRE_NOTHROW(b.errors.validate());
        CHECK(b.errors.num_nodes() == t.graph.num_nodes());
        CHECK(b.errors.num_edges() == t.graph.num_edges());
        for (double y : b.errors.y_nodes) CHECK((y > 0.0 && y < 1.0));
        for (double y : b.errors.y_edges) CHECK((y > 0.0 && y < 1.0));
    }
}

TEST_CASE("smoothing correlates qubit errors with their couplings") {
    // Pearson correlation of node log-deviation and mean incident-edge log-deviation.
    auto corr = [](double s) {
        NoiseConfig c;
        c.spatial_smoothing = s;
        std::vector<double> a, b;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto t = heavyhex(seed);
            const auto bk = sample_backend("b", t, seed, c);
            for (Qubit v = 0; v < t.graph.num_nodes(); ++v) {
                double acc = 0;
                for (auto e : t.graph.incident_edges(v)) acc += std::log(bk.errors.y_edges[e]);
                a.push_back(std::log(bk.errors.y_nodes[v]));
                b.push_back(acc / t.graph.degree(v));
            }
        }
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
        ma /= a.size(), mb /= b.size();
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    };
    CHECK(std::abs(corr(0.0)) < 0.1);
    CHECK(corr(0.5) > 0.5);
}

TEST_CASE("derive_labels examples") {
    const auto g = gen_topology(TopologyKind::path, {6}, 0).graph;
    using K = CalibrationRow::Kind;
    const CalibrationTable t{
        {K::one_qubit, {0}, "x", 1e-4},
        {K::one_qubit, {0}, "sx", 3e-4},
        {K::two_qubit, {0, 1}, "cx", 1e-2},
        {K::two_qubit, {1, 0}, "cx", 2e-2},
        {K::one_qubit, {1}, "x", std::nullopt},
    };
    const auto m = derive_labels(t, g);
    CHECK(m.y_nodes[0] == doctest::Approx(2e-4).epsilon(1e-15));
    CHECK(m.mask_nodes[0] == 1);
    CHECK(m.y_edges[0] == doctest::Approx(1.5e-2).epsilon(1e-15));
    CHECK(m.mask_edges[0] == 1);
    CHECK(m.mask_nodes[1] == 0);
    CHECK(m.mask_nodes[5] == 0);
    CHECK(std::isnan(m.y_nodes[5]));
    CHECK(m.mask_edges[3] == 0);
}

TEST_CASE("derive_labels rejects malformed rows with their index") {
    const auto g = gen_topology(TopologyKind::path, {3}, 0).graph;
    using K = CalibrationRow::Kind;
    auto expect_row = [&](const CalibrationTable& t, const std::string& needle) {
        try {
            derive_labels(t, g);
            FAIL("expected rejection");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_row({{K::one_qubit, {0}, "x", 1e-4}, {K::one_qubit, {7}, "x", 1e-4}}, "row 1");
    expect_row({{K::two_qubit, {0, 2}, "cx", 1e-2}}, "row 0");
    expect_row({{K::one_qubit, {0}, "x", 1.5}}, "row 0");
    expect_row({{K::one_qubit, {0, 1}, "x", 1e-3}}, "row 0");
}

TEST_CASE("derive_labels is invariant to row order and 2q direction") {
    const auto t = heavyhex(2);
    const auto b = sample_backend("b", t, 2, {});
    auto table = calibration_table_from(b.errors, t.graph);
    const auto base = derive_labels(table, t.graph);
    CHECK(base == b.errors);
    Rng rng(77);
    for (int k = 0; k < 20; ++k) {
        shuffle_in_place(table, rng);
        for (auto& row : table)
            if (row.kind == CalibrationRow::Kind::two_qubit && uniform01(rng) < 0.5)
                std::swap(row.operands[0], row.operands[1]);
        const auto m = derive_labels(table, t.graph);
        CHECK(m.y_nodes == base.y_nodes);
        CHECK(m.y_edges == base.y_edges);
    }
}

TEST_CASE("apply_drift identity, determinism and mask preservation") {
    const auto t = heavyhex(0);
    auto e = sample_backend("b", t, 0, {}).errors;
    e.mask_nodes[3] = 0;
    e.y_nodes[3] = std::numeric_limits<double>::quiet_NaN();
    const auto same = apply_drift(e, 5, 0.0, 0.0);
    CHECK(same == e);
    const auto a = apply_drift(e, 5, 1e-4, 1e-2), b = apply_drift(e, 5, 1e-4, 1e-2);
    CHECK(a == b);
    CHECK(a.mask_nodes == e.mask_nodes);
    CHECK(a.mask_edges == e.mask_edges);
    CHECK(std::isnan(a.y_nodes[3]));
    for (std::size_t i = 0; i < a.num_nodes(); ++i)
        if (a.mask_nodes[i]) CHECK(a.y_nodes[i] >= kPositivityFloor);
    CHECK_THROWS_AS(apply_drift(e, 0, -1e-4, 0.0), std::invalid_argument);
}

TEST_CASE("drift magnitude and mean preservation over 10^4 resamples") {
    const auto e = ErrorMap::unmasked({1e-3, 5e-4}, {5e-2});
    double abs_dev = 0, mean0 = 0, mean1 = 0, mean_e = 0;
    const int R = 10000;
    for (int r = 0; r < R; ++r) {
        const auto d = apply_drift(e, static_cast<std::uint64_t>(r), 1e-4, 1e-2);
        abs_dev += std::abs(d.y_nodes[0] - e.y_nodes[0]);
        mean0 += d.y_nodes[0];
        mean1 += d.y_nodes[1];
        mean_e += d.y_edges[0];
    }
    CHECK(abs_dev / R == doctest::Approx(1e-4).epsilon(0.2));
    CHECK(mean0 / R == doctest::Approx(1e-3).epsilon(0.05));
    CHECK(mean1 / R == doctest::Approx(5e-4).epsilon(0.05));
    CHECK(mean_e / R == doctest::Approx(5e-2).epsilon(0.05));
}

TEST_CASE("drift floors tiny entries at the positivity floor") {
    const auto e = ErrorMap::unmasked({5e-10}, {5e-10});
    bool clamped = false;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto d = apply_drift(e, s, 1e-4, 1e-2);
        CHECK(d.y_nodes[0] >= kPositivityFloor);
        clamped |= d.y_nodes[0] == kPositivityFloor;
    }
    CHECK(clamped);
}

TEST_CASE("ErrorMap validation") {
    auto m = ErrorMap::unmasked({1e-4, 2e-4}, {1e-2});
    CHECK_NOTHROW(m.validate());
    m.y_nodes[0] = -1.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.mask_nodes[0] = 0;
    m.y_nodes[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_NOTHROW(m.validate());
    m.mask_edges.push_back(1);
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
