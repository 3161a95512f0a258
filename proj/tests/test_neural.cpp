#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qf/errors.hpp"
#include "qf/nn.hpp"

using namespace qf;
using namespace qf::nn;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Tensor t(r, c);
    for (auto& x : t.values()) x = scale * (2.0 * uniform01(rng) - 1.0);
    return t;
}

// A composite exercising every tape op: gather, concat, MLP, scatter-mean, softplus, log1p, Huber, weighted sum.
struct Composite {
    ParamSet params;
    MlpHandle mlp;
    std::size_t x_slot = 0;

    explicit Composite(std::uint64_t seed) {
        Rng rng(seed);
        x_slot = params.add("x", random_tensor(rng, 4, 3));
        mlp = add_mlp(params, "f", {{6, 5, 1}, 0.0}, rng);
    }

    std::pair<double, ParamSet> operator()(const ParamSet& p) const {
        Tape t(p);
        const Var x = t.param(x_slot);
        const Var a = t.gather_rows(x, {0, 1, 2, 3, 1});
        const Var b = t.gather_rows(x, {1, 2, 3, 0, 3});
        const Var parts[] = {a, b};
        const Var h = mlp_apply(t, mlp, t.concat_cols(parts), Mode::eval, nullptr);
        const Var agg = t.scatter_mean_rows(h, {0, 1, 1, 2, 0}, 4);
        const Var s = t.softplus(agg);
        const Var l = t.log1p(s);
        const Var hub = t.masked_huber_mean(l, {0.3, 0.0, 0.5, 0.1}, {1, 1, 0, 1}, 0.05);
        Tensor w(4, 1, 0.0);
        w(0, 0) = 0.7, w(3, 0) = -0.2;
        const Var ws = t.weighted_sum(t.relu(t.mask_mul(s, Tensor(4, 1, 1.25))), w);
        Tensor one(1, 1, 1.0);
        const Var tot = t.affine(hub, t.constant(one), ws);
        t.backward(tot);
        return {t.value(tot)(0, 0), t.param_grads()};
    }
};

}  // namespace

TEST_CASE("huber examples") {
    const double d = 1e-3;
    CHECK(huber(0.0, d).value == 0.0);
    CHECK(huber(0.0, d).grad == 0.0);
    CHECK(huber(d / 2, d).value == doctest::Approx(d * d / 8).epsilon(1e-15));
    CHECK(huber(2 * d, d).value == doctest::Approx(1.5 * d * d).epsilon(1e-15));
    CHECK(huber(2 * d, d).grad == d);
    CHECK(huber(-5 * d, d).grad == -d);
    CHECK_THROWS_AS(huber(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("softplus examples and overflow safety") {
    CHECK(softplus(0.0).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(std::abs(softplus(50.0).value - 50.0) <= 1e-12);
    CHECK(softplus(0.0).grad == 0.5);
    const double h = 1e-5;
    const double fd = (softplus(h).value - softplus(-h).value) / (2 * h);
    CHECK(std::abs(fd - 0.5) <= 1e-8);
    for (double x = -700; x <= 700; x += 7) {
        CHECK(std::isfinite(softplus(x).value));
        CHECK(std::isfinite(softplus(x).grad));
        CHECK(softplus(x).value > 0.0);
    }
}

TEST_CASE("mlp: zero params, identity layer, determinism") {
    Rng rng(1);
    ParamSet p;
    const auto mlp = add_mlp(p, "m", {{3, 4, 2}, 0.0}, rng);
    CHECK(p.names == std::vector<std::string>{"m.W0", "m.b0", "m.W1", "m.b1"});
    const Tensor in = random_tensor(rng, 5, 3);
    for (const auto& w : p.values) {
        const double bound = std::sqrt(6.0 / (w.rows() + w.cols()));
        if (w.rows() == 1) continue;
        for (double x : w.values()) CHECK(std::abs(x) <= bound);
    }
    {
        ParamSet z = p.zeros_like();
        Tape t(z);
        const Var out = mlp_apply(t, mlp, t.constant(in), Mode::eval, nullptr);
        for (double x : t.value(out).values()) CHECK(x == 0.0);
    }
    {
        ParamSet q;
        Rng r2(0);
        const auto id = add_mlp(q, "i", {{3, 3}, 0.0}, r2);
        q.values[0] = Tensor(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
        Tape t(q);
        const Var out = mlp_apply(t, id, t.constant(in), Mode::eval, nullptr);
        CHECK(t.value(out) == in);
    }
    Tape a(p), b(p);
    CHECK(a.value(mlp_apply(a, mlp, a.constant(in), Mode::eval, nullptr)) ==
          b.value(mlp_apply(b, mlp, b.constant(in), Mode::eval, nullptr)));
    Tape c(p);
    CHECK_THROWS_AS(mlp_apply(c, mlp, c.constant(Tensor(5, 2)), Mode::eval, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(MlpSpec({{3, 0, 1}, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(MlpSpec({{3, 1}, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("dropout masks are seeded, inverted, and absent in eval mode") {
    Rng rng(2);
    ParamSet p;
    const auto mlp = add_mlp(p, "m", {{3, 64, 1}, 0.5}, rng);
    const Tensor in = random_tensor(rng, 7, 3);
    auto run = [&](Mode mode, std::uint64_t seed) {
        Tape t(p);
        Rng d(seed);
        return t.value(mlp_apply(t, mlp, t.constant(in), mode, &d));
    };
    CHECK(run(Mode::train, 5) == run(Mode::train, 5));
    CHECK_FALSE(run(Mode::train, 5) == run(Mode::train, 6));
    CHECK(run(Mode::eval, 5) == run(Mode::eval, 6));
    Tape t(p);
    CHECK_THROWS_AS(mlp_apply(t, mlp, t.constant(in), Mode::train, nullptr), std::invalid_argument);
}

TEST_CASE("adam examples") {
    ParamSet p;
    p.add("w", Tensor(1, 1, 1.0));
    auto st = AdamState::for_params(p, {});
    ParamSet g = p.zeros_like();
    g.values[0](0, 0) = 2.0;  // d/dw w^2 at w=1
    adam_step(st, p, g);
    // m_hat = g and v_hat = g^2 after bias correction, so the step is lr * g / (|g| + eps).
    CHECK(std::abs(p.values[0](0, 0) - (1.0 - 1e-3 * 2.0 / (2.0 + 1e-8))) <= 1e-15);
    CHECK(p.values[0](0, 0) == doctest::Approx(0.999).epsilon(1e-10));
    CHECK(st.step == 1);

    ParamSet q;
    q.add("w", Tensor(2, 2, 0.5));
    auto s2 = AdamState::for_params(q, {});
    const ParamSet before = q;
    adam_step(s2, q, q.zeros_like());
    CHECK(q == before);
    CHECK(s2.step == 1);

    auto trajectory = [] {
        ParamSet r;
        r.add("w", Tensor(1, 2, std::vector<double>{1.0, -2.0}));
        auto s = AdamState::for_params(r, {});
        for (int k = 0; k < 100; ++k) {
            ParamSet gr = r.zeros_like();
            for (std::size_t i = 0; i < 2; ++i) gr.values[0].values()[i] = 2.0 * r.values[0].values()[i];
            adam_step(s, r, gr);
        }
        return r;
    };
    CHECK(trajectory() == trajectory());
    ParamSet wrong;
    wrong.add("w", Tensor(1, 3));
    CHECK_THROWS_AS(adam_step(st, p, wrong), std::invalid_argument);
}

TEST_CASE("grad_check: linear model is exact") {
    Rng rng(4);
    ParamSet p;
    p.add("W", random_tensor(rng, 3, 2));
    p.add("b", random_tensor(rng, 1, 2));
    const Tensor x = random_tensor(rng, 6, 3), w = random_tensor(rng, 6, 2);
    const LossAndGrad f = [&](const ParamSet& q) {
        Tape t(q);
        const Var out = t.weighted_sum(t.affine(t.constant(x), t.param(0), t.param(1)), w);
        t.backward(out);
        return std::pair{t.value(out)(0, 0), t.param_grads()};
    };
    CHECK(grad_check(f, p) < 1e-9);
}

TEST_CASE("grad_check on every composite op at random points") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Composite c(s);
        const LossAndGrad f = [&](const ParamSet& q) { return c(q); };
        CHECK(grad_check(f, c.params) < 1e-4);
    }
}

TEST_CASE("grad_check detects a corrupted gradient") {
    const Composite c(3);
    const LossAndGrad bad = [&](const ParamSet& q) {
        auto r = c(q);
        r.second.values[1].values()[0] += 0.5 + 3.0 * r.second.values[1].values()[0];
        return r;
    };
    CHECK(grad_check(bad, c.params) > 1e-2);
}

TEST_CASE("fd_gradient and max_relative_error compose to grad_check") {
    const Composite c(7);
    const LossAndGrad f = [&](const ParamSet& q) { return c(q); };
    const LossFn loss = [&](const ParamSet& q) { return c(q).first; };
    const auto numeric = fd_gradient(loss, c.params);
    CHECK(max_relative_error(c(c.params).second, numeric) == grad_check(f, c.params));
    CHECK(max_relative_error(numeric, numeric) == 0.0);
    auto inf = numeric;
    inf.values[0].values()[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(max_relative_error(inf, numeric), NumericalError);
}

TEST_CASE("non-finite values are hard errors") {
    ParamSet p;
    Tape t(p);
    CHECK_THROWS_AS(t.log1p(t.constant(Tensor(1, 1, -2.0))), NumericalError);
    CHECK_THROWS_AS(t.constant(Tensor(1, 1, std::numeric_limits<double>::infinity())), NumericalError);
    CHECK_THROWS_AS(t.masked_huber_mean(t.constant(Tensor(2, 1)), {0, 0}, {0, 0}, 1.0), std::invalid_argument);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    const Var ok = t.masked_huber_mean(t.constant(Tensor(2, 1, 0.0)), {0.0, nan}, {1, 0}, 1.0);
    CHECK(t.value(ok)(0, 0) == 0.0);
}
