#include <doctest.h>

#include <cmath>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "narfima/arfimax.hpp"
#include "narfima/csv.hpp"
#include "narfima/random.hpp"
#include "narfima/timeseries.hpp"
#include "support.hpp"

using namespace narfima;
using narfima::testing::read_text;
using narfima::testing::TempDir;
using narfima::testing::write_text;

namespace {

struct Outcome {
    int code = 0;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "narfima");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err, out;
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    const int code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cerr.rdbuf(old_err);
    std::cout.rdbuf(old_out);
    return {code, err.str()};
}

void write_dataset(const std::filesystem::path& path, std::size_t T) {
    const auto l = simulate_arfima(0.3, {}, {}, 1.0, T, 5);
    const auto x = simulate_arfima(0.2, {}, {}, 1.0, T, 6);
    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) y[t] = l[t] + (t > 0 ? std::sin(x[t - 1]) : 0.0);
    save_dataset_csv(TimeSeriesDataset::from_values("toy", y, {"x"}, {x}, {2001, 1}), path, "y");
}

std::string small_config(const std::string& extra = "") {
    return R"({
  "data": "toy.csv",
  "target": "y",
  "exogenous": ["x"],
  "horizons": [3],
  "models": ["Naive", "ARFIMAx"],
  "seed": 7,
  "narfima": {"grid_p": [1, 2], "grid_q": [1, 1], "grid_k": [1, 1], "restarts": 1,
              "stage1_max_p": 1, "stage1_max_q": 1})" +
           extra + "\n}\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and version exit cleanly") {
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"--version"}).code == 0);
}

TEST_CASE("configuration errors exit with status 1") {
    TempDir dir;
    const auto missing = run_cli({"fit", "-c", (dir / "nope.json").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("error:") != std::string::npos);

    write_dataset(dir / "toy.csv", 80);
    write_text(dir / "bad.json", R"({"data": "toy.csv", "target": "y", "colour": "blue"})");
    const auto unknown = run_cli({"fit", "-c", (dir / "bad.json").string(), "-o", (dir / "o").string()});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("colour") != std::string::npos);

    write_text(dir / "gap.csv", "date,y\n2000-01,1\n2000-03,2\n");
    write_text(dir / "gap.json", R"({"data": "gap.csv", "target": "y"})");
    const auto gap = run_cli({"fit", "-c", (dir / "gap.json").string(), "-o", (dir / "o").string()});
    CHECK(gap.code == 1);
    CHECK(gap.err.find("row 2") != std::string::npos);

    CHECK(run_cli({"forecast"}).code != 0);
}

TEST_CASE("config parsing applies defaults and resolves paths") {
    const auto cfg = cli::parse_run_config(nlohmann::json::parse(small_config()), "/data/dir");
    CHECK(cfg.data == std::filesystem::path("/data/dir/toy.csv"));
    CHECK(cfg.horizons == std::vector<std::size_t>{3});
    CHECK(cfg.seed == 7);
    CHECK(cfg.narfima.grid_p.hi == 2);
    CHECK_FALSE(cfg.alpha_set);
    CHECK(cli::validation_length_for(cfg, 12) == 12);
    CHECK(cli::validation_length_for(cfg, 1) == 6);
    const auto other = cli::parse_run_config(nlohmann::json::parse(small_config(R"(, "dataset_name": "z")")), "/");
    CHECK(other.hash() != cfg.hash());
    CHECK(cfg.hash() == cli::parse_run_config(cfg.to_json(), "/").hash());
}

TEST_CASE("fit, forecast with intervals, and diagnose") {
    TempDir dir;
    write_dataset(dir / "toy.csv", 90);
    write_text(dir / "run.json", small_config());
    const auto out = (dir / "out").string();
    REQUIRE(run_cli({"fit", "-c", (dir / "run.json").string(), "-o", out}).code == 0);
    const auto pipe = (dir / "out" / "pipeline_h3.json").string();
    CHECK(std::filesystem::exists(pipe));
    CHECK(std::filesystem::exists(dir / "out" / "cv_h3.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "chosen_parameters.csv"));
    CHECK(read_text(dir / "out" / "manifest_fit.json").find("config_hash") != std::string::npos);

    // Without data the covariate path for steps 2..h is unknown.
    const auto nodata = run_cli({"forecast", "--pipeline", pipe, "--horizon", "3", "-o", (dir / "f0").string()});
    CHECK(nodata.code == 1);
    CHECK(nodata.err.find("covariates: x") != std::string::npos);

    const auto fc = run_cli({"forecast", "-c", (dir / "run.json").string(), "--pipeline", pipe, "--horizon", "3",
                             "--alpha", "0.2", "-o", (dir / "f1").string()});
    REQUIRE(fc.code == 0);
    std::istringstream iv(read_text(dir / "f1" / "intervals.csv"));
    std::string line;
    std::getline(iv, line);
    CHECK(line == "date,lower,point,upper");
    int rows = 0;
    while (std::getline(iv, line)) {
        const auto f = csv::split_record(line);
        REQUIRE(f.size() == 4);
        CHECK(std::stod(f[1]) <= std::stod(f[2]));
        CHECK(std::stod(f[2]) <= std::stod(f[3]));
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(read_text(dir / "f1" / "forecast.csv").rfind("date,point_forecast\n2008-04,", 0) == 0);

    // Future covariates from a separate file.
    write_text(dir / "future.csv", "date,x\n2008-04,0.5\n2008-05,-0.5\n");
    const auto fx = run_cli({"forecast", "--pipeline", pipe, "--horizon", "3", "--future-exog",
                             (dir / "future.csv").string(), "-o", (dir / "f2").string()});
    CHECK(fx.code == 0);

    const auto dg = run_cli({"diagnose", "-c", (dir / "run.json").string(), "-o", out});
    CHECK(dg.code == 0);
    CHECK(read_text(dir / "out" / "assumptions.csv").find("pipeline_h3.json") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "out" / "diagnostics.txt"));
}

TEST_CASE("simulate writes a chain and an ergodicity summary") {
    TempDir dir;
    const auto r = run_cli({"simulate", "--T", "2000", "--k", "2", "-o", (dir / "s").string()});
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(dir / "s" / "chain.csv"));
    CHECK(read_text(dir / "s" / "ergodicity.txt").find("feasible") != std::string::npos);
}

TEST_CASE("output directory from the environment, flags win") {
    TempDir dir;
    ::setenv(cli::kOutputDirEnv, (dir / "env").string().c_str(), 1);
    CHECK(run_cli({"simulate", "--T", "500"}).code == 0);
    CHECK(std::filesystem::exists(dir / "env" / "chain.csv"));
    CHECK(run_cli({"simulate", "--T", "500", "-o", (dir / "flag").string()}).code == 0);
    CHECK(std::filesystem::exists(dir / "flag" / "chain.csv"));
    ::unsetenv(cli::kOutputDirEnv);
}

}
