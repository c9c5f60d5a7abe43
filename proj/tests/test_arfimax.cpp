#include <doctest.h>

#include <cmath>

#include "narfima/arfimax.hpp"
#include "narfima/error.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"
#include "support.hpp"

using namespace narfima;

namespace {

ArfimaxModel ar1_model(double phi, std::vector<double> history) {
    ArfimaxModel m;
    m.spec = {1, 0, false};
    m.d = 0.0;
    m.d_estimated = false;
    m.phi = {phi};
    m.history = std::move(history);
    m.residuals.assign(m.history.size(), 0.0);
    m.fitted.assign(m.history.size(), 0.0);
    return m;
}

}  // namespace

TEST_SUITE("arfimax") {

TEST_CASE("simulation is deterministic per seed") {
    const auto a = simulate_arfima(0.3, std::vector<double>{0.4}, std::vector<double>{0.2}, 1.0, 400, 42);
    const auto b = simulate_arfima(0.3, std::vector<double>{0.4}, std::vector<double>{0.2}, 1.0, 400, 42);
    const auto c = simulate_arfima(0.3, std::vector<double>{0.4}, std::vector<double>{0.2}, 1.0, 400, 43);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("white-noise simulation has unit scale") {
    const auto x = simulate_arfima(0.0, {}, {}, 1.0, 5000, 7);
    const double sd = numeric::sample_sd(x);
    CHECK(sd >= 0.9);
    CHECK(sd <= 1.1);
}

TEST_CASE("higher d raises lag-one autocorrelation") {
    const auto strong = simulate_arfima(0.4, {}, {}, 1.0, 3000, 8);
    const auto weak = simulate_arfima(0.05, {}, {}, 1.0, 3000, 8);
    CHECK(narfima::testing::sample_acf(strong, 1) > narfima::testing::sample_acf(weak, 1));
}

TEST_CASE("simulation rejects bad parameters") {
    CHECK_THROWS_AS(simulate_arfima(0.5, {}, {}, 1.0, 10, 1), DomainError);
    CHECK_THROWS_AS(simulate_arfima(0.2, std::vector<double>{1.2}, {}, 1.0, 10, 1), DomainError);
    CHECK_THROWS_AS(simulate_arfima(0.2, {}, std::vector<double>{-1.5}, 1.0, 10, 1), DomainError);
}

TEST_CASE("fit recovers d on fractional noise and keeps it inside (0, 0.5)") {
    const auto x = simulate_arfima(0.3, {}, {}, 1.0, 2000, sub_seed(77, std::uint64_t{0}));
    const auto m = fit_arfimax(TimeSeriesDataset::from_values("s", x), {0, 0, false});
    CHECK(m.d > 0.0);
    CHECK(m.d < 0.5);
    CHECK(std::abs(m.d - 0.3) <= 0.08);
}

TEST_CASE("white noise gives small d") {
    const auto x = simulate_arfima(0.0, {}, {}, 1.0, 1000, 21);
    const auto m = fit_arfimax(TimeSeriesDataset::from_values("s", x), {0, 0, false});
    CHECK(m.d < 0.1);
    CHECK(m.d > 0.0);
}

TEST_CASE("residuals equal target minus fitted and are centred") {
    const auto x = simulate_arfima(0.25, std::vector<double>{0.3}, {}, 1.0, 400, 5);
    const auto ds = TimeSeriesDataset::from_values("s", x);
    const auto m = fit_arfimax(ds, {1, 1, false});
    const auto& e = arfimax_residuals(m);
    REQUIRE(e.size() == x.size());
    REQUIRE(m.fitted.size() == x.size());
    double err = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) err = std::max(err, std::abs(e[t] - (x[t] - m.fitted[t])));
    CHECK(err < 1e-10);
    CHECK(std::abs(numeric::mean(e)) < 0.05 * numeric::sample_sd(e));
    CHECK(numeric::ar_polynomial_stable(m.phi));
}

TEST_CASE("one-step forecast equals the fitted-value formula at the end of the sample") {
    const auto x = simulate_arfima(0.3, std::vector<double>{0.2}, std::vector<double>{0.3}, 1.0, 300, 6);
    const auto m = fit_arfimax(TimeSeriesDataset::from_values("s", x), {1, 1, false});
    auto shorter = m;
    shorter.history.pop_back();
    shorter.residuals.pop_back();
    shorter.fitted.pop_back();
    CHECK(arfimax_forecast(shorter, 1)[0] == doctest::Approx(m.fitted.back()).epsilon(1e-10));
}

TEST_CASE("AR(1) recursion from a last value of 2") {
    const auto fc = arfimax_forecast(ar1_model(0.5, {0.3, -1.0, 2.0}), 3);
    CHECK(fc[0] == doctest::Approx(1.0));
    CHECK(fc[1] == doctest::Approx(0.5));
    CHECK(fc[2] == doctest::Approx(0.25));
}

TEST_CASE("constant process forecasts its level") {
    ArfimaxModel m = ar1_model(0.0, {4.0, 4.0, 4.0});
    m.phi.clear();
    m.spec.p = 0;
    m.d = 1e-9;
    m.level = 4.0;
    for (double v : arfimax_forecast(m, 5)) CHECK(v == doctest::Approx(4.0));
}

TEST_CASE("covariates: required without values, frozen otherwise") {
    std::vector<double> y(200), xcol(200);
    GaussianSource g(3);
    for (std::size_t t = 0; t < 200; ++t) {
        xcol[t] = g();
        y[t] = g() + (t > 0 ? 0.8 * xcol[t - 1] : 0.0);
    }
    const auto ds = TimeSeriesDataset::from_values("s", y, {"x"}, {xcol});
    const auto m = fit_arfimax(ds, {0, 0, true});
    REQUIRE(m.pi.size() == 1);
    CHECK(m.pi[0] == doctest::Approx(0.8).epsilon(0.2));
    CHECK_NOTHROW(arfimax_forecast(m, 1));
    CHECK_THROWS_AS(arfimax_forecast(m, 3), ContractError);
    CHECK_THROWS_AS(arfimax_forecast(m, 3, ExogenousMatrix{{1.0}}), ContractError);
    const auto frozen = arfimax_forecast(m, 3, std::nullopt, FutureExogMode::FreezeLast);
    const auto supplied = arfimax_forecast(m, 3, ExogenousMatrix{{xcol.back(), xcol.back()}});
    CHECK(frozen == supplied);
}

TEST_CASE("fitting is scale-equivariant") {
    const auto x = simulate_arfima(0.3, std::vector<double>{0.3}, {}, 1.0, 500, 12);
    std::vector<double> cx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cx[i] = 3.0 * x[i];
    const auto a = fit_arfimax(TimeSeriesDataset::from_values("s", x), {1, 0, false});
    const auto b = fit_arfimax(TimeSeriesDataset::from_values("s", cx), {1, 0, false});
    CHECK(b.d == doctest::Approx(a.d).epsilon(1e-4));
    CHECK(b.phi[0] == doctest::Approx(a.phi[0]).epsilon(1e-4));
    CHECK(b.sigma2 == doctest::Approx(9.0 * a.sigma2).epsilon(1e-4));
    CHECK(b.fitted[250] == doctest::Approx(3.0 * a.fitted[250]).epsilon(1e-4));
}

TEST_CASE("order selection") {
    const auto x = simulate_arfima(0.3, {}, {}, 1.0, 300, 14);
    const auto ds = TimeSeriesDataset::from_values("s", x);
    const auto only = select_order(ds, 0, 0);
    CHECK(only.p == 0);
    CHECK(only.q == 0);
    const auto sel = select_order_fit(ds, 1, 1, std::nullopt, false);
    CHECK(sel.spec.p <= 1);
    CHECK(sel.spec.q <= 1);
    CHECK_THROWS_AS(select_order(ds, 6, 0), ContractError);
}

TEST_CASE("integer-order fits hold d fixed") {
    const auto x = simulate_arfima(0.0, std::vector<double>{0.5}, {}, 1.0, 300, 15);
    const auto ds = TimeSeriesDataset::from_values("s", x);
    const auto m0 = fit_arimax(ds, {1, 0, false}, 0.0);
    CHECK(m0.d == 0.0);
    CHECK_FALSE(m0.d_estimated);
    CHECK(m0.phi[0] == doctest::Approx(0.5).epsilon(0.3));
    CHECK(fit_arimax(ds, {0, 0, false}, 1.0).d == 1.0);
}

TEST_CASE("short training data is rejected") {
    const auto ds = TimeSeriesDataset::from_values("s", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK_THROWS_AS(fit_arfimax(ds, {2, 2, false}), InsufficientDataError);
}

}
