#include <doctest.h>

#include <cmath>

#include "narfima/error.hpp"
#include "narfima/evaluation.hpp"
#include "support.hpp"

using namespace narfima;
using narfima::testing::read_text;

TEST_SUITE("evaluation") {

TEST_CASE("metrics on a two-step forecast") {
    const std::vector<double> y{100, 110}, f{90, 121}, train{1, 2, 3};
    const auto m = compute_metrics(y, f, train);
    REQUIRE(m.mape.has_value());
    CHECK(*m.mape == doctest::Approx(10.0));
    CHECK(m.smape == doctest::Approx(100.0 * (10.0 / 95.0 + 11.0 / 115.5) / 2.0));
    CHECK(m.smape == doctest::Approx(10.025).epsilon(1e-4));
    CHECK(m.mae == doctest::Approx(10.5));
    CHECK(m.rmse == doctest::Approx(std::sqrt(110.5)));
    REQUIRE(m.mase.has_value());
    CHECK(*m.mase == doctest::Approx(10.5));
    CHECK(m.get("MAE") == m.mae);
    CHECK_THROWS(m.get("R2"));
}

TEST_CASE("undefined metrics") {
    const auto one = compute_metrics(std::vector<double>{2}, std::vector<double>{1}, std::vector<double>{1, 2});
    CHECK_FALSE(one.mase.has_value());
    const auto zero = compute_metrics(std::vector<double>{0, 1}, std::vector<double>{1, 1}, std::vector<double>{1, 2});
    CHECK_FALSE(zero.mape.has_value());
    const auto flat = compute_metrics(std::vector<double>{1, 1}, std::vector<double>{1, 2}, std::vector<double>{3, 3, 3});
    CHECK_FALSE(flat.mase.has_value());
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1}, std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    ContractError);
}

TEST_CASE("score table bookkeeping and csv output") {
    ScoreTable t;
    t.add({"B", "d", 1, "MAE"}, 2.0);
    t.add({"A", "d", 1, "MAE"}, 1.0);
    CHECK_THROWS_AS(t.add({"A", "d", 1, "MAE"}, 3.0), ContractError);
    CHECK(t.models() == std::vector<std::string>{"B", "A"});
    CHECK(t.get({"A", "d", 1, "MAE"}) == 1.0);
    CHECK_FALSE(t.get({"A", "d", 3, "MAE"}).has_value());
    t.add_metrics("A", "d", 3, compute_metrics(std::vector<double>{1, 2}, std::vector<double>{1, 3}, std::vector<double>{0, 1}));
    CHECK(t.cells().size() == 2);

    narfima::testing::TempDir dir;
    t.write_long_csv(dir / "long.csv");
    t.write_wide_csv(dir / "wide.csv");
    const auto lng = read_text(dir / "long.csv");
    CHECK(lng.rfind("model,dataset,horizon,metric,value\n", 0) == 0);
    CHECK(lng.find("B,d,1,MAE,2\n") != std::string::npos);
    const auto wide = read_text(dir / "wide.csv");
    CHECK(wide.find("h1_MAE") != std::string::npos);
    CHECK(wide.find("h3_RMSE") != std::string::npos);
}

TEST_CASE("average ranks share ties") {
    CHECK(average_ranks(std::vector<double>{3, 1, 2}) == std::vector<double>{3, 1, 2});
    CHECK(average_ranks(std::vector<double>{1, 1, 2}) == std::vector<double>{1.5, 1.5, 3});
}

TEST_CASE("MCB on a total order") {
    ScoreTable t;
    for (std::size_t h : {1, 3, 6, 12})
        for (const auto& [name, v] : std::vector<std::pair<std::string, double>>{{"A", 1}, {"B", 2}, {"C", 3}})
            t.add({name, "d", h, "RMSE"}, v * static_cast<double>(h));
    const auto r = mcb_ranks(t, "RMSE");
    CHECK(r.mean_ranks == std::vector<double>{1, 2, 3});
    CHECK(r.best == 0);
    CHECK(r.cells == 4);
    CHECK(r.critical_distance == doctest::Approx(studentized_range_q95(3) * std::sqrt(3.0 * 4.0 / (12.0 * 4.0))));
    CHECK(r.reference_lower == doctest::Approx(1.0 - r.critical_distance));
}

TEST_CASE("MCB with one model and with gaps") {
    ScoreTable one;
    one.add({"A", "d", 1, "MAE"}, 1.0);
    one.add({"A", "d", 3, "MAE"}, 2.0);
    const auto r = mcb_ranks(one, "MAE");
    CHECK(r.mean_ranks == std::vector<double>{1.0});
    CHECK(r.critical_distance == 0.0);

    ScoreTable gap;
    gap.add({"A", "d", 1, "MAE"}, 1.0);
    gap.add({"B", "d", 1, "MAE"}, 2.0);
    gap.add({"A", "d", 3, "MAE"}, 1.0);
    CHECK_THROWS_AS(mcb_ranks(gap, "MAE"), ContractError);
    CHECK(studentized_range_q95(2) == doctest::Approx(2.772).epsilon(1e-3));
}

TEST_CASE("elementary score") {
    CHECK(elementary_score(3.0, 5.0, 4.0) == 1.0);
    CHECK(elementary_score(3.0, 5.0, 6.0) == 0.0);
    CHECK(elementary_score(5.0, 3.0, 4.0) == 1.0);
    CHECK(elementary_score(4.0, 4.0, 4.0) == 0.0);
}

TEST_CASE("Murphy curve and grid") {
    const std::vector<double> y{1, 2, 3}, f{1.5, 2.5, 2.0};
    const auto grid = default_theta_grid(y, {f}, 11);
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == doctest::Approx(1.0 - 0.02));
    CHECK(grid.back() == doctest::Approx(3.0 + 0.02));
    const auto c = murphy_curve(y, f, grid);
    CHECK(c.score.size() == 11);
    CHECK(c.score.front() == 0.0);
    CHECK(trapezoid(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("naive model and rolling backtest") {
    std::vector<double> y(40);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i % 7) + 1.0;
    const auto ds = TimeSeriesDataset::from_values("toy", y);
    const auto naive = make_model("Naive", NarfimaConfig{});
    CHECK(naive.forecast(ds, 3, {}) == std::vector<double>(3, y.back()));
    CHECK_THROWS_AS(make_model("Prophet", NarfimaConfig{}), ContractError);

    ForecastModel broken{"Broken", [](const TimeSeriesDataset&, std::size_t, const ExogenousMatrix&) -> std::vector<double> {
                             throw FitError("does not converge", 0.0);
                         }};
    const auto res = rolling_backtest(ds, {naive, broken}, {1, 3});
    CHECK(res.table.failures().size() == 2);
    CHECK(res.forecasts.size() == 2);
    const auto mae = res.table.get({"Naive", "toy", 3, "MAE"});
    REQUIRE(mae.has_value());
    const auto split = rolling_split(ds, 3);
    double ae = 0.0;
    for (double v : split.test.target()) ae += std::abs(v - split.train.target().back());
    CHECK(*mae == doctest::Approx(ae / 3.0));
}

}
