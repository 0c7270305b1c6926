#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "movac/mlp.hpp"

using namespace movac;

namespace {

// Smooth scalar loss over the net output for gradient checks.
ad::Var smooth_loss(ad::Tape& t, const MlpVars& vars, const Matrix& x) {
    ad::Var out = mlp_forward(t, vars, ad::constant(t, x));
    return ad::mean(ad::mul(out, out));
}

}  // namespace

TEST_CASE("mlp forward: zero net, identity layer, hand-computed 1-2-1") {
    MlpParams zero = make_mlp({3, 4, 2}, 1);
    for (auto& l : zero.layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
    Matrix x(2, 3);
    x << 1, -2, 3, 0.5, 0.25, -1;
    CHECK(mlp_forward(zero, x).cwiseAbs().maxCoeff() == 0.0);

    MlpParams ident;
    ident.layers.push_back({Matrix::Identity(3, 3), Matrix::Zero(1, 3)});
    CHECK(mlp_forward(ident, x).isApprox(x));

    MlpParams small;
    Matrix w1(1, 2);
    w1 << 0.5, -1.0;
    Matrix b1(1, 2);
    b1 << 0.25, 0.5;
    Matrix w2(2, 1);
    w2 << 2.0, -3.0;
    Matrix b2(1, 1);
    b2 << 0.1;
    small.layers.push_back({w1, b1});
    small.layers.push_back({w2, b2});
    Vector in(1);
    in << 1.0;
    // pre-activations (0.75, -0.5) -> relu (0.75, 0) -> 1.5 + 0.1
    CHECK(mlp_forward(small, in)(0) == doctest::Approx(1.6).epsilon(1e-12));

    Matrix bad(2, 5);
    CHECK_THROWS_AS(mlp_forward(small, bad), DimensionError);
}

TEST_CASE("grad: sum of parameters has all-ones gradient") {
    MlpParams p = make_mlp({2, 3, 1}, 7);
    ad::Tape t;
    MlpVars vars = lift(t, p);
    ad::Var loss = ad::sum(vars.layers[0].first);
    for (std::size_t l = 0; l < vars.layers.size(); ++l) {
        if (l > 0) loss = ad::add(loss, ad::sum(vars.layers[l].first));
        loss = ad::add(loss, ad::sum(vars.layers[l].second));
    }
    TensorList g = grad(t, loss, vars);
    for (const auto& gi : g) {
        CHECK(gi.minCoeff() == doctest::Approx(1.0));
        CHECK(gi.maxCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("grad: half squared error of a linear layer matches the closed form") {
    MlpParams p;
    Matrix w(2, 2);
    w << 0.3, -0.7, 1.2, 0.4;
    p.layers.push_back({w, Matrix::Zero(1, 2)});
    Matrix x(1, 2);
    x << 0.8, -0.5;
    Matrix y(1, 2);
    y << 0.2, 0.9;

    ad::Tape t;
    MlpVars vars = lift(t, p);
    ad::Var pred = ad::matmul(ad::constant(t, x), vars.layers[0].first);
    ad::Var diff = ad::sub(pred, ad::constant(t, y));
    ad::Var loss = ad::scale(ad::sum(ad::mul(diff, diff)), 0.5);
    TensorList g = grad(t, loss, vars);

    const Matrix residual = x * w - y;       // 1 x out
    const Matrix expected = x.transpose() * residual;  // in x out
    CHECK(g[0].isApprox(expected, 1e-12));

    // bias does not appear in the graph: zero gradient
    CHECK(g[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward rejects non-scalar losses") {
    MlpParams p = make_mlp({2, 2}, 3);
    ad::Tape t;
    MlpVars vars = lift(t, p);
    ad::Var out = mlp_forward(t, vars, ad::constant(t, Matrix::Ones(3, 2)));
    CHECK_THROWS_AS(t.backward(out), ContractError);
}

TEST_CASE("adam: zero gradient is the identity") {
    MlpParams p = make_mlp({4, 8, 2}, 11);
    TensorList params = mlp_tensors(p);
    TensorList before = params;
    AdamState opt = make_adam(params, 1e-3);
    TensorList zeros;
    for (const auto& t : params) zeros.push_back(Matrix::Zero(t.rows(), t.cols()));
    adam_step(opt, params, zeros);
    for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i].isApprox(before[i], 0.0));
}

TEST_CASE("adam: first step moves a scalar by about the learning rate") {
    TensorList params = {Matrix::Constant(1, 1, 0.5)};
    AdamState opt = make_adam(params, 1e-3);
    adam_step(opt, params, {Matrix::Constant(1, 1, 1.0)});
    // bias-corrected ratio is 1/(1 + eps-term)
    CHECK(params[0](0, 0) == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
    CHECK(opt.step == 1);
}

TEST_CASE("adam: identical parameters with identical gradients stay identical") {
    TensorList params = {Matrix::Constant(2, 2, 0.25)};
    AdamState opt = make_adam(params, 3e-4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int step = 0; step < 25; ++step) {
        const double g = dist(rng);
        adam_step(opt, params, {Matrix::Constant(2, 2, g)});
        CHECK(params[0](0, 0) == params[0](1, 1));
        CHECK(params[0](0, 1) == params[0](1, 0));
    }
}

TEST_CASE("adam: NaN gradient raises and leaves parameters untouched") {
    TensorList params = {Matrix::Constant(1, 2, 1.0)};
    AdamState opt = make_adam(params, 1e-3);
    Matrix bad(1, 2);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(adam_step(opt, params, {bad}), NumericError);
    CHECK(params[0](0, 0) == 1.0);
    CHECK(params[0](0, 1) == 1.0);
    CHECK(opt.step == 0);
}

TEST_CASE("finite differences: quadratic loss is exact to rounding") {
    MlpParams p;
    Matrix w(2, 1);
    w << 0.4, -0.9;
    p.layers.push_back({w, Matrix::Zero(1, 1)});
    Matrix x(3, 2);
    x << 1, 2, -0.5, 0.25, 0.75, -1;
    const double err = finite_diff_check(
        p, [&](ad::Tape& t, const MlpVars& v) { return smooth_loss(t, v, x); }, 1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("finite differences: zero network has zero error") {
    MlpParams p = make_mlp({2, 4, 1}, 77);
    for (auto& l : p.layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
    Matrix x = Matrix::Ones(2, 2);
    const double err = finite_diff_check(
        p, [&](ad::Tape& t, const MlpVars& v) { return smooth_loss(t, v, x); }, 1e-5);
    CHECK(err == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("finite differences: random 8-16-16-4 net stays under 1e-4") {
    MlpParams p = make_mlp({8, 16, 16, 4}, 42);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> dist(-1, 1);
    Matrix x(5, 8);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = dist(rng);
    const double err = finite_diff_check(
        p, [&](ad::Tape& t, const MlpVars& v) { return smooth_loss(t, v, x); }, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("finite differences: loss through softmax and gather ops") {
    MlpParams p = make_mlp({3, 8, 4}, 17);
    Matrix x(6, 3);
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = dist(rng);
    std::vector<int> picks = {0, 3, 1, 2, 0, 1};
    auto builder = [&](ad::Tape& t, const MlpVars& v) {
        ad::Var logits = mlp_forward(t, v, ad::constant(t, x));
        ad::Var logp = ad::gather_cols(ad::sub_colvec(logits, ad::row_logsumexp(logits)), picks);
        return ad::neg(ad::mean(logp));
    };
    CHECK(finite_diff_check(p, builder, 1e-5) < 1e-4);
}

TEST_CASE("finite differences: loss through exp, clamp and min ops") {
    MlpParams p = make_mlp({2, 6, 1}, 23);
    Matrix x(4, 2);
    x << 0.3, -0.8, 1.1, 0.2, -0.4, 0.9, 0.5, 0.5;
    Matrix adv(4, 1);
    adv << 1.0, -0.5, 0.25, 2.0;
    auto builder = [&](ad::Tape& t, const MlpVars& v) {
        ad::Var out = mlp_forward(t, v, ad::constant(t, x));
        ad::Var ratio = ad::exp_op(ad::scale(out, 0.1));
        ad::Var a = ad::constant(t, adv);
        ad::Var surr = ad::min_op(ad::mul(ratio, a), ad::mul(ad::clamp(ratio, 0.9, 1.1), a));
        return ad::neg(ad::mean(surr));
    };
    CHECK(finite_diff_check(p, builder, 1e-5) < 1e-4);
}

TEST_CASE("determinism: same seed gives bit-identical parameters and outputs") {
    MlpParams a = make_mlp({6, 64, 64, 3}, 777);
    MlpParams b = make_mlp({6, 64, 64, 3}, 777);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].weight == b.layers[l].weight);
        CHECK(a.layers[l].bias == b.layers[l].bias);
    }
    Matrix x = Matrix::Constant(2, 6, 0.1);
    CHECK(mlp_forward(a, x) == mlp_forward(b, x));

    MlpParams c = make_mlp({6, 64, 64, 3}, 778);
    CHECK(a.layers[0].weight != c.layers[0].weight);
}

TEST_CASE("gradient check across random nets and smooth losses") {
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> width(2, 16);
        MlpParams p = make_mlp({width(rng), width(rng), width(rng)}, 100 + trial);
        Matrix x(3, p.input_dim());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = dist(rng);
        const double err = finite_diff_check(
            p, [&](ad::Tape& t, const MlpVars& v) { return smooth_loss(t, v, x); }, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("clip_global_norm scales long gradients and keeps short ones") {
    TensorList g = {Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 4.0)};
    clip_global_norm(g, 0.5);
    CHECK(global_norm(g) == doctest::Approx(0.5));
    CHECK(g[0](0, 0) / g[1](0, 0) == doctest::Approx(0.75));

    TensorList small = {Matrix::Constant(1, 1, 0.1)};
    clip_global_norm(small, 0.5);
    CHECK(small[0](0, 0) == 0.1);
}
