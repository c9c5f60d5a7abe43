#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "narfima/error.hpp"
#include "narfima/neuralnet.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"

using namespace narfima;

namespace {

struct Series {
    std::vector<double> y, e;
    std::vector<std::vector<double>> X;
};

Series random_series(std::size_t T, std::size_t r, std::uint64_t seed) {
    GaussianSource g(seed);
    Series s;
    s.y.resize(T);
    s.e.resize(T);
    s.X.assign(r, std::vector<double>(T));
    for (std::size_t t = 0; t < T; ++t) {
        s.y[t] = g();
        s.e[t] = g();
        for (auto& col : s.X) col[t] = g();
    }
    return s;
}

NetworkWeights random_weights(std::size_t inputs, std::size_t k, bool skip, std::uint64_t seed) {
    GaussianSource g(seed);
    auto w = NetworkWeights::zeros(inputs, k, skip);
    Eigen::VectorXd flat = w.pack();
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = 0.7 * g();
    w.unpack(flat);
    return w;
}

// In-sample MSE of OLS with intercept on the scaled design.
double ols_mse(const FeatureMatrix& fm) {
    Eigen::MatrixXd A(fm.scaled.rows(), fm.scaled.cols() + 1);
    A << Eigen::VectorXd::Ones(fm.scaled.rows()), fm.scaled;
    const auto ls = numeric::least_squares(A, fm.scaled_targets);
    return ls.ssr / static_cast<double>(fm.scaled.rows());
}

}  // namespace

TEST_SUITE("neuralnet") {

TEST_CASE("feature rows for p = q = 1") {
    const std::vector<double> y{1, 2, 3, 4}, e{0, 0, 0, 0};
    const auto fm = build_feature_matrix(y, e, {}, 1, 1);
    REQUIRE(fm.rows() == 3);
    REQUIRE(fm.columns() == 2);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(fm.raw(i, 0) == static_cast<double>(i + 1));
        CHECK(fm.raw(i, 1) == 0.0);
        CHECK(fm.targets(i) == static_cast<double>(i + 2));
    }
}

TEST_CASE("row count and column layout") {
    const auto s = random_series(5, 1, 1);
    const auto fm = build_feature_matrix(s.y, s.e, s.X, 2, 1);
    CHECK(fm.rows() == 3);
    CHECK(fm.columns() == 4);
    // first row is t = 1: [y_1, y_0, e_1, X_1]
    CHECK(fm.raw(0, 0) == s.y[1]);
    CHECK(fm.raw(0, 1) == s.y[0]);
    CHECK(fm.raw(0, 2) == s.e[1]);
    CHECK(fm.raw(0, 3) == s.X[0][1]);
    CHECK(fm.targets(0) == s.y[2]);
    const auto row = feature_row(s.y, s.e, s.X, 2, 1, 1);
    for (std::size_t j = 0; j < 4; ++j) CHECK(row[j] == fm.raw(0, static_cast<Eigen::Index>(j)));
}

TEST_CASE("scaled columns are standardized, constant columns pass through") {
    auto s = random_series(60, 1, 2);
    std::fill(s.e.begin(), s.e.end(), 3.0);
    const auto fm = build_feature_matrix(s.y, s.e, s.X, 2, 1);
    for (Eigen::Index c = 0; c < fm.scaled.cols(); ++c) {
        const double m = fm.scaled.col(c).mean();
        CHECK(std::abs(m) < 1e-8);
        if (c == 2) {
            CHECK(fm.scaler.scale[2] == 1.0);
            continue;
        }
        const double var = (fm.scaled.col(c).array() - m).square().sum() / static_cast<double>(fm.scaled.rows() - 1);
        CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("lag order must leave at least one row") {
    const std::vector<double> y{1, 2, 3}, e{0, 0, 0};
    CHECK_THROWS_AS(build_feature_matrix(y, e, {}, 3, 1), InsufficientDataError);
    CHECK_THROWS_AS(build_feature_matrix(y, e, {}, 1, 4), InsufficientDataError);
    CHECK_THROWS_AS(build_feature_matrix(y, std::vector<double>{0, 0}, {}, 1, 1), ContractError);
}

TEST_CASE("zero network predicts the target mean") {
    const auto s = random_series(40, 0, 3);
    const auto fm = build_feature_matrix(s.y, s.e, {}, 1, 1);
    const auto w = NetworkWeights::zeros(2, 3, true);
    const std::vector<double> row{0.3, -0.2};
    CHECK(predict_one(w, row, fm.scaler) == doctest::Approx(fm.targets.mean()).epsilon(1e-12));
}

TEST_CASE("skip-only network passes the first input through") {
    auto w = NetworkWeights::zeros(3, 2, true);
    w.skip_weights(0) = 1.0;
    CHECK(predict_one(w, std::vector<double>{3.0, 7.0, -1.0}, FeatureScaler::identity(3)) == 3.0);
}

TEST_CASE("hand-computed single node") {
    auto w = NetworkWeights::zeros(2, 1, false);
    w.hidden_in(0, 0) = 0.5;
    w.hidden_in(0, 1) = -1.0;
    w.hidden_bias(0) = 0.2;
    w.hidden_out(0) = 2.0;
    w.bias = 0.1;
    const double expected = 0.1 + 2.0 / (1.0 + std::exp(-(0.2 + 0.5 * 1.0 - 1.0 * 2.0)));
    CHECK(std::abs(predict_one(w, std::vector<double>{1.0, 2.0}, FeatureScaler::identity(2)) - expected) < 1e-12);
    CHECK_THROWS_AS(predict_one(w, std::vector<double>{1.0}, FeatureScaler::identity(2)), ContractError);
}

TEST_CASE("analytic gradient matches central differences") {
    const auto s = random_series(80, 2, 4);
    const auto fm = build_feature_matrix(s.y, s.e, s.X, 3, 2);
    for (bool skip : {false, true}) {
        const auto w = random_weights(fm.columns(), 4, skip, 9);
        const Eigen::VectorXd g = network_gradient(w, fm).pack();
        const Eigen::VectorXd x0 = w.pack();
        for (Eigen::Index i = 0; i < x0.size(); ++i) {
            if (!skip && i >= x0.size() - 1 - static_cast<Eigen::Index>(fm.columns()) && i < x0.size() - 1) {
                CHECK(g(i) == 0.0);
                continue;
            }
            auto wp = w, wm = w;
            Eigen::VectorXd xp = x0, xm = x0;
            xp(i) += 1e-5;
            xm(i) -= 1e-5;
            wp.unpack(xp);
            wm.unpack(xm);
            const double fd = (network_loss(wp, fm) - network_loss(wm, fm)) / 2e-5;
            CHECK(std::abs(fd - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
        }
    }
}

TEST_CASE("zero weights and zero targets give zero bias gradient") {
    std::vector<double> y(20, 0.0), e(20, 0.0);
    auto fm = build_feature_matrix(y, e, {}, 1, 1);
    const auto g = network_gradient(NetworkWeights::zeros(2, 2, true), fm);
    CHECK(g.bias == 0.0);
}

TEST_CASE("linear data: skip network is no worse than least squares") {
    GaussianSource g(5);
    std::vector<double> y(300), e(300, 0.0);
    y[0] = g();
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = 0.8 * y[t - 1] + 0.5 * g();
    const auto fm = build_feature_matrix(y, e, {}, 1, 1);
    TrainConfig cfg;
    const auto res = train_network_detailed(fm, 1, true, cfg);
    CHECK(std::sqrt(res.loss) <= std::sqrt(ols_mse(fm)) + 1e-3);
}

TEST_CASE("nonlinear data: network beats the best linear fit") {
    GaussianSource g(6);
    std::vector<double> y(300), e(300, 0.0);
    y[0] = 1.0;
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = 3.0 * std::sin(2.0 * y[t - 1]) + 0.05 * g();
    const auto fm = build_feature_matrix(y, e, {}, 1, 1);
    const auto res = train_network_detailed(fm, 3, false, TrainConfig{});
    CHECK(res.loss < ols_mse(fm));
    CHECK(res.weights.skip_weights.isZero(0.0));
}

TEST_CASE("loss trace is non-increasing and the gradient vanishes at convergence") {
    const auto s = random_series(120, 1, 7);
    const auto fm = build_feature_matrix(s.y, s.e, s.X, 2, 2);
    TrainConfig cfg;
    cfg.max_iter = 5000;
    const auto res = train_network_detailed(fm, 2, true, cfg);
    REQUIRE(res.loss_trace.size() > 1);
    for (std::size_t i = 1; i < res.loss_trace.size(); ++i) CHECK(res.loss_trace[i] <= res.loss_trace[i - 1]);
    CHECK(network_gradient(res.weights, fm).pack().norm() < 1e-2);
}

TEST_CASE("training is bitwise reproducible") {
    const auto s = random_series(100, 1, 8);
    const auto fm = build_feature_matrix(s.y, s.e, s.X, 2, 1);
    TrainConfig cfg;
    cfg.seed = 99;
    const auto a = train_network(fm, 3, true, cfg).pack();
    const auto b = train_network(fm, 3, true, cfg).pack();
    CHECK(a == b);
    cfg.seed = 100;
    CHECK(train_network(fm, 3, true, cfg).pack() != a);
}

TEST_CASE("permuting inputs with the weights leaves the output unchanged") {
    auto w = random_weights(3, 2, true, 10);
    auto v = w;
    const std::vector<int> perm{2, 0, 1};
    for (int j = 0; j < 3; ++j) {
        v.hidden_in.col(j) = w.hidden_in.col(perm[static_cast<std::size_t>(j)]);
        v.skip_weights(j) = w.skip_weights(perm[static_cast<std::size_t>(j)]);
    }
    const std::vector<double> x{0.4, -1.1, 2.0};
    const std::vector<double> px{x[2], x[0], x[1]};
    const auto id = FeatureScaler::identity(3);
    CHECK(predict_one(v, px, id) == doctest::Approx(predict_one(w, x, id)).epsilon(1e-14));
}

TEST_CASE("raw skip weights undo the scaling") {
    auto w = NetworkWeights::zeros(2, 1, true);
    w.skip_weights << 0.5, -0.25;
    FeatureScaler sc;
    sc.center = {1.0, 2.0};
    sc.scale = {2.0, 4.0};
    sc.target_center = 0.0;
    sc.target_scale = 8.0;
    const auto raw = raw_skip_weights(w, sc);
    CHECK(raw[0] == doctest::Approx(2.0));
    CHECK(raw[1] == doctest::Approx(-0.5));
}

TEST_CASE("hidden layer needs a node") {
    const auto s = random_series(30, 0, 11);
    const auto fm = build_feature_matrix(s.y, s.e, {}, 1, 1);
    CHECK_THROWS_AS(train_network(fm, 0, true, TrainConfig{}), ContractError);
}

}
