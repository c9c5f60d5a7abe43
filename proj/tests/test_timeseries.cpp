#include <doctest.h>

#include "narfima/error.hpp"
#include "narfima/timeseries.hpp"
#include "support.hpp"

using namespace narfima;
using narfima::testing::TempDir;
using narfima::testing::write_text;

TEST_SUITE("timeseries") {

TEST_CASE("year-month parsing and arithmetic") {
    const auto ym = YearMonth::parse("1997-01");
    CHECK(ym.year == 1997);
    CHECK(ym.month == 1);
    CHECK(ym.plus_months(12).to_string() == "1998-01");
    CHECK(ym.plus_months(-1).to_string() == "1996-12");
    CHECK_THROWS_AS(YearMonth::parse("2020-13"), DomainError);
    CHECK_THROWS_AS(YearMonth::parse("2020/01"), DomainError);
}

TEST_CASE("three-row csv loads with one covariate") {
    TempDir dir;
    write_text(dir / "d.csv", "date,rate,gepu\n2020-01,1.5,100\n2020-02,1.6,101\n2020-03,1.7,99\n");
    const auto ds = load_dataset_csv(dir / "d.csv", "rate", {"gepu"});
    CHECK(ds.size() == 3);
    CHECK(ds.num_exogenous() == 1);
    CHECK(ds.target()[2] == 1.7);
    CHECK(ds.exogenous(0)[1] == 101.0);
    CHECK(ds.exogenous_names()[0] == "gepu");
    CHECK(ds.name() == "d");
}

TEST_CASE("column order follows the request") {
    TempDir dir;
    write_text(dir / "d.csv", "date,a,b,c\n2020-01,1,2,3\n2020-02,4,5,6\n");
    const auto ds = load_dataset_csv(dir / "d.csv", "b", {"c", "a"});
    CHECK(ds.target() == std::vector<double>{2, 5});
    CHECK(ds.exogenous(0)[0] == 3.0);
    CHECK(ds.exogenous(1)[0] == 1.0);
}

TEST_CASE("blank target cell reports its row") {
    TempDir dir;
    write_text(dir / "d.csv", "date,rate\n2020-01,1\n2020-02,\n2020-03,3\n");
    try {
        load_dataset_csv(dir / "d.csv", "rate", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
    }
}

TEST_CASE("non-numeric cell reports its row") {
    TempDir dir;
    write_text(dir / "d.csv", "date,rate\n2020-01,1\n2020-02,2\n2020-03,abc\n");
    try {
        load_dataset_csv(dir / "d.csv", "rate", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
    }
}

TEST_CASE("month gap is rejected") {
    TempDir dir;
    write_text(dir / "d.csv", "date,rate\n1997-01,1\n1997-03,2\n");
    try {
        load_dataset_csv(dir / "d.csv", "rate", {});
        FAIL("expected a gap error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(std::string(e.what()).find("gap") != std::string::npos);
    }
}

TEST_CASE("missing column is named") {
    TempDir dir;
    write_text(dir / "d.csv", "date,rate\n2020-01,1\n2020-02,2\n");
    try {
        load_dataset_csv(dir / "d.csv", "rate", {"gepu"});
        FAIL("expected a missing-column error");
    } catch (const MissingColumnError& e) {
        CHECK(e.column() == "gepu");
    }
}

TEST_CASE("quoted fields and CRLF line endings") {
    TempDir dir;
    write_text(dir / "d.csv", "date,\"rate\"\r\n2020-01,\"1.25\"\r\n2020-02,2\r\n");
    const auto ds = load_dataset_csv(dir / "d.csv", "rate", {});
    CHECK(ds.target() == std::vector<double>{1.25, 2.0});
}

TEST_CASE("save then load is lossless") {
    TempDir dir;
    const auto ds = TimeSeriesDataset::from_values("x", {0.1, 1.0 / 3.0, -2e-17, 12345.678901234},
                                                   {"z"}, {{1.0 / 7.0, 2, 3, 4}}, {1999, 11});
    save_dataset_csv(ds, dir / "x.csv", "y");
    const auto back = load_dataset_csv(dir / "x.csv", "y", {"z"});
    CHECK(back == ds);
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS(TimeSeriesDataset("x", {{2000, 1}, {2000, 3}}, {1, 2}, {}, {}), ContractError);
    CHECK_THROWS_AS(TimeSeriesDataset("x", {{2000, 1}}, {1, 2}, {}, {}), ContractError);
    CHECK_THROWS_AS(TimeSeriesDataset::from_values("x", {1, 2}, {"z"}, {{1}}), ContractError);
    CHECK_THROWS_AS(TimeSeriesDataset::from_values("x", {1, NAN}), ContractError);
}

TEST_CASE("rolling split boundaries on the 1997-01..2023-10 calendar") {
    std::vector<double> y(322);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
    const auto ds = TimeSeriesDataset::from_values("brl", y, {}, {}, {1997, 1});
    CHECK(ds.timestamps().back().to_string() == "2023-10");

    const auto s1 = rolling_split(ds, 1);
    CHECK(s1.train.size() == 321);
    CHECK(s1.train.timestamps().back().to_string() == "2023-09");
    CHECK(s1.test.timestamps().front().to_string() == "2023-10");

    const auto s48 = rolling_split(ds, 48);
    CHECK(s48.train.timestamps().back().to_string() == "2019-10");
    CHECK(s48.test.size() == 48);
    CHECK(s48.test.timestamps().front().to_string() == "2019-11");
    CHECK(s48.test.target().front() == 274.0);
}

TEST_CASE("split concatenation reproduces the dataset") {
    const auto ds = TimeSeriesDataset::from_values("x", {1, 2, 3, 4, 5, 6}, {"z"}, {{6, 5, 4, 3, 2, 1}});
    const auto s = rolling_split(ds, 2);
    auto y = s.train.target();
    y.insert(y.end(), s.test.target().begin(), s.test.target().end());
    CHECK(y == ds.target());
    CHECK(s.test.exogenous(0)[0] == 2.0);
}

TEST_CASE("split errors") {
    std::vector<double> y(10, 1.0);
    const auto ds = TimeSeriesDataset::from_values("x", y);
    CHECK_THROWS_AS(rolling_split(ds, 10), InsufficientDataError);
    CHECK_THROWS_AS(rolling_split(ds, 0), ContractError);
}

}
