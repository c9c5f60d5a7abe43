#include <doctest.h>

#include "narfima/conformal.hpp"
#include "narfima/error.hpp"

using namespace narfima;

TEST_SUITE("conformal") {

TEST_CASE("scores divide absolute errors by psi") {
    const std::vector<double> y{2, 4}, f{1, 1}, psi{1, 3};
    CHECK(conformal_scores(y, f, psi) == std::vector<double>{1, 1});
    CHECK_THROWS_AS(conformal_scores(y, f, std::vector<double>{1, 0}), Error);
    CHECK_THROWS_AS(conformal_scores(y, std::vector<double>{1}, psi), ContractError);
}

TEST_CASE("quantile order statistic") {
    CHECK(weighted_quantile(std::vector<double>{1, 2, 3, 4}, std::nullopt, 0.25) == 4.0);
    CHECK(weighted_quantile(std::vector<double>{100, 1, 2}, 2, 0.5) == 2.0);
    CHECK(weighted_quantile(std::vector<double>{4, 3, 2, 1}, std::nullopt, 0.5) == 3.0);
    CHECK(weighted_quantile(std::vector<double>{5}, std::nullopt, 0.1) == 5.0);
    CHECK_THROWS(weighted_quantile(std::vector<double>{}, std::nullopt, 0.1));
}

TEST_CASE("config validation") {
    ConformalConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg.alpha = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg.alpha = 0.1;
    cfg.tau = 0;
    CHECK_THROWS(cfg.validate());
    cfg.tau = 5;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("interval is symmetric around the forecast") {
    const std::vector<ScoreRecord> hist{{1, 0, 1}, {0, 2, 1}, {3, 0, 1}, {0, 4, 1}};
    ConformalConfig cfg;
    cfg.alpha = 0.25;
    const auto iv = predict_with_interval(hist, cfg, 10.0, 0.5);
    CHECK(iv.center == 10.0);
    CHECK(iv.lower == doctest::Approx(8.0));
    CHECK(iv.upper == doctest::Approx(12.0));
}

TEST_CASE("psi from rolling MAD") {
    ConformalConfig cfg;
    std::vector<ScoreRecord> hist{{1, 0, 1}};
    CHECK(next_psi(hist, cfg) == 1.0);
    cfg.psi_mode = PsiMode::RollingMad;
    CHECK(next_psi(hist, cfg) == 1.0);  // fewer than two errors
    hist = {{1, 0, 1}, {2, 0, 1}, {4, 0, 1}};
    // errors 1, 2, 4: median 2, absolute deviations 1, 0, 2 -> MAD 1
    CHECK(next_psi(hist, cfg) == doctest::Approx(1.0));
    hist = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
    CHECK(next_psi(hist, cfg) == 1.0);
}

TEST_CASE("sequential intervals use only the past") {
    const std::vector<double> y{0, 1, 0, 5, 0}, f{0, 0, 0, 0, 0};
    ConformalConfig cfg;
    cfg.alpha = 0.5;
    const auto iv = sequential_intervals(y, f, cfg, 2);
    REQUIRE(iv.size() == 3);
    // t = 2 sees scores {0, 1}: ceil(3 * 0.5) = 2nd smallest = 1
    CHECK(iv[0].upper == doctest::Approx(1.0));
    // t = 4 sees {0, 1, 0, 5}: ceil(5 * 0.5) = 3rd smallest = 1
    CHECK(iv[2].upper == doctest::Approx(1.0));
    CHECK_THROWS(sequential_intervals(y, f, cfg, 0));
}

TEST_CASE("band reuses one calibration quantile") {
    const std::vector<ScoreRecord> hist{{1, 0, 1}, {2, 0, 1}, {3, 0, 1}};
    ConformalConfig cfg;
    cfg.alpha = 0.5;
    const auto band = interval_band(hist, cfg, std::vector<double>{10, 20});
    REQUIRE(band.size() == 2);
    CHECK(band[0].upper - band[0].center == doctest::Approx(band[1].upper - band[1].center));
    CHECK(band[1].lower == doctest::Approx(18.0));
}

}
