#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "narfima/csv.hpp"
#include "narfima/diagnostics.hpp"
#include "narfima/error.hpp"
#include "narfima/evaluation.hpp"
#include "narfima/random.hpp"
#include "narfima/serialization.hpp"

namespace narfima::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ------------------------------------------------------------------- config

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ContractError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ContractError("unknown key '" + key + "' in " + where);
}

IntRange parse_range(const json& j, const char* name) {
    if (!j.is_array() || j.size() != 2) throw ContractError(std::string(name) + " must be [lo, hi]");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

std::string psi_mode_name(PsiMode m) { return m == PsiMode::ConstantOne ? "CONSTANT_ONE" : "ROLLING_MAD"; }

std::string exog_mode_name(FutureExogMode m) {
    return m == FutureExogMode::Required ? "REQUIRED" : "FREEZE_LAST";
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    reject_unknown(j, {"data", "target", "exogenous", "dataset_name", "horizons", "models", "seed",
                       "output_dir", "narfima", "conformal"},
                   "config");
    RunConfig c;
    try {
        if (j.contains("data")) {
            c.data = j.at("data").get<std::string>();
            if (c.data.is_relative()) c.data = base_dir / c.data;
        }
        if (j.contains("target")) c.target = j.at("target").get<std::string>();
        if (j.contains("exogenous")) c.exogenous = j.at("exogenous").get<std::vector<std::string>>();
        if (j.contains("dataset_name")) c.dataset_name = j.at("dataset_name").get<std::string>();
        c.horizons = j.contains("horizons") ? j.at("horizons").get<std::vector<std::size_t>>() : default_horizons();
        if (j.contains("models")) c.models = j.at("models").get<std::vector<std::string>>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

        if (j.contains("narfima")) {
            const auto& n = j.at("narfima");
            reject_unknown(n, {"grid_p", "grid_q", "grid_k", "try_skip", "validation_length", "stage1",
                               "future_exog_mode", "restarts", "max_iter", "weight_decay", "stage1_max_p",
                               "stage1_max_q", "arima_d"},
                           "narfima");
            auto& f = c.narfima;
            if (n.contains("grid_p")) f.grid_p = parse_range(n["grid_p"], "grid_p");
            if (n.contains("grid_q")) f.grid_q = parse_range(n["grid_q"], "grid_q");
            if (n.contains("grid_k")) f.grid_k = parse_range(n["grid_k"], "grid_k");
            if (n.contains("try_skip")) f.try_skip = skip_mode_from_string(n["try_skip"].get<std::string>());
            if (n.contains("validation_length") && !n["validation_length"].is_null())
                c.validation_length = n["validation_length"].get<std::size_t>();
            if (n.contains("stage1")) f.stage1 = stage1_from_string(n["stage1"].get<std::string>());
            if (n.contains("future_exog_mode")) {
                const auto m = n["future_exog_mode"].get<std::string>();
                if (m == "REQUIRED")
                    f.future_exog_mode = FutureExogMode::Required;
                else if (m == "FREEZE_LAST")
                    f.future_exog_mode = FutureExogMode::FreezeLast;
                else
                    throw ContractError("future_exog_mode must be REQUIRED or FREEZE_LAST");
            }
            if (n.contains("restarts")) f.train.restarts = n["restarts"].get<std::size_t>();
            if (n.contains("max_iter")) f.train.max_iter = n["max_iter"].get<std::size_t>();
            if (n.contains("weight_decay")) f.train.weight_decay = n["weight_decay"].get<double>();
            if (n.contains("stage1_max_p")) f.stage1_max_p = n["stage1_max_p"].get<std::size_t>();
            if (n.contains("stage1_max_q")) f.stage1_max_q = n["stage1_max_q"].get<std::size_t>();
            if (n.contains("arima_d")) f.arima_d = n["arima_d"].get<double>();
        }
        if (j.contains("conformal")) {
            const auto& k = j.at("conformal");
            reject_unknown(k, {"alpha", "tau", "psi_mode", "mad_window"}, "conformal");
            if (k.contains("alpha") && !k["alpha"].is_null()) {
                c.conformal.alpha = k["alpha"].get<double>();
                c.alpha_set = true;
            }
            if (k.contains("tau") && !k["tau"].is_null()) c.conformal.tau = k["tau"].get<std::size_t>();
            if (k.contains("psi_mode")) {
                const auto m = k["psi_mode"].get<std::string>();
                if (m == "CONSTANT_ONE")
                    c.conformal.psi_mode = PsiMode::ConstantOne;
                else if (m == "ROLLING_MAD")
                    c.conformal.psi_mode = PsiMode::RollingMad;
                else
                    throw ContractError("psi_mode must be CONSTANT_ONE or ROLLING_MAD");
            }
            if (k.contains("mad_window")) c.conformal.mad_window = k["mad_window"].get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw ContractError(std::string("invalid config value: ") + e.what());
    }
    return c;
}

json RunConfig::to_json() const {
    auto range = [](const IntRange& r) { return json::array({r.lo, r.hi}); };
    return {{"data", data.generic_string()},
            {"target", target},
            {"exogenous", exogenous},
            {"dataset_name", dataset_name},
            {"horizons", horizons},
            {"models", models},
            {"seed", seed},
            {"narfima",
             {{"grid_p", range(narfima.grid_p)},
              {"grid_q", range(narfima.grid_q)},
              {"grid_k", range(narfima.grid_k)},
              {"try_skip", to_string(narfima.try_skip)},
              {"validation_length", validation_length ? json(*validation_length) : json(nullptr)},
              {"stage1", to_string(narfima.stage1)},
              {"future_exog_mode", exog_mode_name(narfima.future_exog_mode)},
              {"restarts", narfima.train.restarts},
              {"max_iter", narfima.train.max_iter},
              {"weight_decay", narfima.train.weight_decay},
              {"stage1_max_p", narfima.stage1_max_p},
              {"stage1_max_q", narfima.stage1_max_q},
              {"arima_d", narfima.arima_d}}},
            {"conformal",
             {{"alpha", alpha_set ? json(conformal.alpha) : json(nullptr)},
              {"tau", conformal.tau ? json(*conformal.tau) : json(nullptr)},
              {"psi_mode", psi_mode_name(conformal.psi_mode)},
              {"mad_window", conformal.mad_window}}}};
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_json().dump()); }

std::size_t validation_length_for(const RunConfig& cfg, std::size_t h) {
    return cfg.validation_length ? *cfg.validation_length : std::max<std::size_t>(h, 6);
}

// ----------------------------------------------------------------- helpers

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::string horizons;
    std::optional<std::size_t> grid_max;
    std::string output_dir;
};

std::vector<std::size_t> parse_horizons(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        long long v = -1;
        try {
            v = std::stoll(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v <= 0) throw ContractError("invalid horizon '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ContractError("--horizons must list at least one horizon");
    return out;
}

RunConfig resolve_config(const Common& common) {
    RunConfig cfg;
    if (!common.config_path.empty()) {
        const fs::path p = common.config_path;
        cfg = parse_run_config(load_json(p), p.has_parent_path() ? p.parent_path() : fs::path("."));
    }
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
    if (!common.output_dir.empty()) cfg.output_dir = common.output_dir;
    if (common.seed) cfg.seed = *common.seed;
    if (common.alpha) {
        cfg.conformal.alpha = *common.alpha;
        cfg.alpha_set = true;
    }
    if (!common.horizons.empty()) cfg.horizons = parse_horizons(common.horizons);
    if (common.grid_max) {
        if (*common.grid_max < 1 || *common.grid_max > 5) throw ContractError("--grid-max must lie in 1..5");
        for (IntRange* r : {&cfg.narfima.grid_p, &cfg.narfima.grid_q, &cfg.narfima.grid_k}) {
            r->hi = *common.grid_max;
            r->lo = std::min(r->lo, r->hi);
        }
    }
    cfg.narfima.seed = cfg.seed;
    if (cfg.horizons.empty()) throw ContractError("horizons must be nonempty");
    if (cfg.alpha_set) cfg.conformal.validate();
    cfg.narfima.validate();
    return cfg;
}

TimeSeriesDataset load_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ContractError("config does not name a data file");
    if (cfg.target.empty()) throw ContractError("config does not name a target column");
    auto ds = load_dataset_csv(cfg.data, cfg.target, cfg.exogenous);
    if (cfg.dataset_name.empty()) return ds;
    return TimeSeriesDataset(cfg.dataset_name, ds.timestamps(), ds.target(), ds.exogenous_names(),
                             ds.exogenous());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
    json m = {{"command", command},
              {"seed", cfg.seed},
              {"config_hash", hash},
              {"versions", {{"narfima", kVersion}, {"format", kFormatVersion}, {"json", "nlohmann 3"}}},
              {"config", cfg.to_json()},
              {"outputs", outputs}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    save_json(m, cfg.output_dir / ("manifest_" + command + ".json"));
}

NarfimaConfig narfima_for(const RunConfig& cfg, std::size_t validation_length) {
    NarfimaConfig n = cfg.narfima;
    n.validation_length = validation_length;
    return n;
}

std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------------- fit

int cmd_fit(const RunConfig& cfg, bool full) {
    const auto ds = load_data(cfg);
    ensure_dir(cfg.output_dir);
    std::vector<std::string> outputs;

    auto chosen = open_out(cfg.output_dir / "chosen_parameters.csv");
    csv::write_record(chosen, {"dataset", "horizon", "p", "q", "k", "skip", "validation_rmse", "in_sample_rmse"});
    auto fit_one = [&](const TimeSeriesDataset& train, const std::string& label, std::size_t V) {
        const auto ncfg = narfima_for(cfg, V);
        const auto cv = cross_validate_detailed(train, ncfg);
        const auto pipe = fit_narfima_cell(train, ncfg, cv.chosen);
        const std::string pipe_name = "pipeline_" + label + ".json";
        save_pipeline(pipe, cfg.output_dir / pipe_name);
        outputs.push_back(pipe_name);

        const std::string cv_name = "cv_" + label + ".csv";
        auto cvout = open_out(cfg.output_dir / cv_name);
        csv::write_record(cvout, {"p", "q", "k", "skip", "validation_rmse", "error"});
        double best = 0.0;
        for (const auto& row : cv.table) {
            csv::write_record(cvout, {std::to_string(row.cell.p), std::to_string(row.cell.q),
                                      std::to_string(row.cell.k), row.cell.skip ? "TRUE" : "FALSE",
                                      row.rmse ? fmt(*row.rmse) : "", row.error});
            if (row.cell == cv.chosen) best = *row.rmse;
        }
        outputs.push_back(cv_name);
        csv::write_record(chosen, {train.name(), label, std::to_string(pipe.chosen.p),
                                   std::to_string(pipe.chosen.q), std::to_string(pipe.chosen.k),
                                   pipe.chosen.skip ? "TRUE" : "FALSE", fmt(best), fmt(pipe.in_sample_rmse)});
    };
    if (full) {
        const std::size_t hmax = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
        fit_one(ds, "full", validation_length_for(cfg, hmax));
    } else {
        for (auto h : cfg.horizons) {
            const auto split = rolling_split(ds, h);
            fit_one(split.train, "h" + std::to_string(h), validation_length_for(cfg, h));
        }
    }
    outputs.push_back("chosen_parameters.csv");
    write_manifest(cfg, "fit", outputs);
    return 0;
}

// ----------------------------------------------------------------- forecast

ExogenousMatrix future_covariates(const RunConfig& cfg, const NarfimaPipeline& pipe, std::size_t h,
                                  const std::string& future_path, const TimeSeriesDataset* ds) {
    ExogenousMatrix out;
    const std::size_t r = pipe.exogenous_names.size();
    if (r == 0 || h < 2) return out;
    const auto first = pipe.last_timestamp.plus_months(1);
    auto take = [&](const std::vector<YearMonth>& stamps, const std::vector<std::vector<double>>& cols) {
        auto it = std::find(stamps.begin(), stamps.end(), first);
        if (it == stamps.end()) return;
        const auto off = static_cast<std::size_t>(it - stamps.begin());
        for (const auto& col : cols)
            out.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(off),
                             col.begin() + static_cast<std::ptrdiff_t>(std::min(col.size(), off + h - 1)));
    };
    if (!future_path.empty()) {
        const auto table = load_monthly_columns(future_path, pipe.exogenous_names);
        take(table.timestamps, table.values);
        if (out.empty())
            throw ContractError("future covariate file does not start at " + first.to_string());
    } else if (ds) {
        if (ds->exogenous_names() != pipe.exogenous_names)
            throw ContractError("dataset covariates do not match the pipeline's");
        take(ds->timestamps(), ds->exogenous());
    }
    (void)cfg;
    return out;
}

int cmd_forecast(const RunConfig& cfg, const std::string& pipeline_path, std::size_t h,
                 const std::string& future_path) {
    if (h == 0) throw ContractError("forecast horizon must be positive");
    const auto pipe = load_pipeline(pipeline_path);
    std::optional<TimeSeriesDataset> ds;
    if (!cfg.data.empty()) ds = load_data(cfg);

    auto future = future_covariates(cfg, pipe, h, future_path, ds ? &*ds : nullptr);
    std::optional<ExogenousMatrix> fut;
    if (!future.empty()) fut = future;
    const auto fc = forecast_recursive(pipe, h, fut);

    ensure_dir(cfg.output_dir);
    std::vector<std::string> outputs{"forecast.csv"};
    auto out = open_out(cfg.output_dir / "forecast.csv");
    csv::write_record(out, {"date", "point_forecast"});
    for (std::size_t j = 0; j < h; ++j)
        csv::write_record(out, {pipe.last_timestamp.plus_months(static_cast<long>(j + 1)).to_string(), fmt(fc[j])});

    if (cfg.alpha_set) {
        if (!ds) throw ContractError("prediction intervals need the training data (config 'data')");
        // Calibrate on the pipeline's in-sample one-step errors.
        auto it = std::find(ds->timestamps().begin(), ds->timestamps().end(), pipe.last_timestamp);
        if (it == ds->timestamps().end())
            throw ContractError("data does not contain the pipeline's last timestamp " +
                                pipe.last_timestamp.to_string());
        const auto end = static_cast<std::size_t>(it - ds->timestamps().begin()) + 1;
        const auto train = ds->slice(0, end);
        const auto pred = in_sample_predictions(pipe, train);
        const std::size_t lag = std::max(pipe.chosen.p, pipe.chosen.q);
        std::vector<ScoreRecord> history;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double psi = next_psi(history, cfg.conformal);
            history.push_back({train.target()[lag + i], pred[i], psi});
        }
        const auto band = interval_band(history, cfg.conformal, fc);
        auto iv = open_out(cfg.output_dir / "intervals.csv");
        csv::write_record(iv, {"date", "lower", "point", "upper"});
        for (std::size_t j = 0; j < h; ++j)
            csv::write_record(iv, {pipe.last_timestamp.plus_months(static_cast<long>(j + 1)).to_string(),
                                   fmt(band[j].lower), fmt(band[j].center), fmt(band[j].upper)});
        outputs.push_back("intervals.csv");
    }
    write_manifest(cfg, "forecast", outputs, {{"pipeline", pipeline_path}, {"h", h}});
    return 0;
}

// ----------------------------------------------------------------- backtest

int cmd_backtest(const RunConfig& cfg) {
    const auto ds = load_data(cfg);
    ensure_dir(cfg.output_dir);
    for (auto h : cfg.horizons)
        if (h >= ds.size()) throw ContractError("horizon " + std::to_string(h) + " is not below the series length");

    // One backtest per horizon so neural models get the horizon-specific
    // validation length.
    ScoreTable table;
    std::vector<BacktestForecast> forecasts;
    for (auto h : cfg.horizons) {
        std::vector<ForecastModel> models;
        for (const auto& name : cfg.models) models.push_back(make_model(name, narfima_for(cfg, validation_length_for(cfg, h))));
        auto res = rolling_backtest(ds, models, {h});
        for (const auto& [k, v] : res.table.entries()) table.add(k, v);
        for (const auto& f : res.table.failures()) table.add_failure(f);
        for (auto& f : res.forecasts) forecasts.push_back(std::move(f));
    }
    std::vector<std::string> outputs{"scores_long.csv", "scores_wide.csv", "failures.csv", "forecasts.csv",
                                     "mcb.csv"};
    table.write_long_csv(cfg.output_dir / "scores_long.csv");
    table.write_wide_csv(cfg.output_dir / "scores_wide.csv");
    {
        auto out = open_out(cfg.output_dir / "failures.csv");
        csv::write_record(out, {"model", "dataset", "horizon", "reason"});
        for (const auto& f : table.failures())
            csv::write_record(out, {f.model, f.dataset, std::to_string(f.horizon), f.reason});
    }
    {
        auto out = open_out(cfg.output_dir / "forecasts.csv");
        csv::write_record(out, {"model", "horizon", "date", "actual", "forecast"});
        for (const auto& f : forecasts)
            for (std::size_t i = 0; i < f.forecast.size(); ++i)
                csv::write_record(out, {f.model, std::to_string(f.horizon), f.dates[i].to_string(),
                                        fmt(f.actual[i]), fmt(f.forecast[i])});
    }
    json mcb_notes = json::object();
    {
        auto out = open_out(cfg.output_dir / "mcb.csv");
        csv::write_record(out, {"metric", "model", "mean_rank", "interval_lower", "interval_upper", "best",
                                "cells", "critical_distance"});
        for (const auto& metric : metric_names()) {
            try {
                const auto r = mcb_ranks(table, metric);
                for (std::size_t m = 0; m < r.models.size(); ++m)
                    csv::write_record(out, {metric, r.models[m], fmt(r.mean_ranks[m]),
                                            fmt(r.mean_ranks[m] - r.critical_distance),
                                            fmt(r.mean_ranks[m] + r.critical_distance),
                                            m == r.best ? "TRUE" : "FALSE", std::to_string(r.cells),
                                            fmt(r.critical_distance)});
            } catch (const ContractError& e) {
                mcb_notes[metric] = e.what();
            }
        }
    }
    for (auto h : cfg.horizons) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> fcs;
        const std::vector<double>* actual = nullptr;
        for (const auto& f : forecasts)
            if (f.horizon == h) {
                names.push_back(f.model);
                fcs.push_back(f.forecast);
                actual = &f.actual;
            }
        if (!actual) continue;
        const auto grid = default_theta_grid(*actual, fcs);
        std::vector<MurphyCurve> curves;
        for (const auto& fc : fcs) curves.push_back(murphy_curve(*actual, fc, grid));
        const std::string name = "murphy_h" + std::to_string(h) + ".csv";
        write_murphy_csv(cfg.output_dir / name, names, curves);
        outputs.push_back(name);
    }
    write_manifest(cfg, "backtest", outputs, {{"mcb_notes", mcb_notes}});
    return 0;
}

// ----------------------------------------------------------------- diagnose

int cmd_diagnose(const RunConfig& cfg, std::vector<std::string> pipelines) {
    std::ostringstream rep;
    std::vector<std::string> outputs{"diagnostics.txt"};
    ensure_dir(cfg.output_dir);

    if (!cfg.data.empty()) {
        const auto ds = load_data(cfg);
        rep << "dataset: " << ds.name() << " (" << ds.size() << " observations, "
            << ds.timestamps().front().to_string() << " to " << ds.timestamps().back().to_string() << ")\n\n";
        rep << "[long memory]\n";
        try {
            rep << "hurst_exponent = " << fmt(hurst_exponent(ds.target())) << "\n\n";
        } catch (const Error& e) {
            rep << "hurst_exponent unavailable: " << e.what() << "\n\n";
        }

        rep << "[residual nonlinearity: ARFIMAx residuals]\n";
        auto out = open_out(cfg.output_dir / "nonlinearity.csv");
        outputs.push_back("nonlinearity.csv");
        csv::write_record(out, {"horizon", "arfimax_p", "arfimax_q", "arfimax_d", "terasvirta_lag",
                                "terasvirta_statistic", "terasvirta_p", "bds_m2_statistic", "bds_m2_p",
                                "bds_m3_statistic", "bds_m3_p", "error"});
        for (auto h : cfg.horizons) {
            std::vector<std::string> row{std::to_string(h)};
            try {
                const auto split = rolling_split(ds, h);
                const auto sel = select_order_fit(split.train, cfg.narfima.stage1_max_p, cfg.narfima.stage1_max_q,
                                                  std::nullopt, true, cfg.narfima.stage1_fit);
                const auto& e = sel.model.residuals;
                const auto tv = terasvirta_test(e, 0);
                const auto b2 = bds_test(e, 2, 1.0);
                const auto b3 = bds_test(e, 3, 1.0);
                row.insert(row.end(), {std::to_string(sel.spec.p), std::to_string(sel.spec.q), fmt(sel.model.d),
                                       std::to_string(tv.lag), fmt(tv.statistic), fmt(tv.p_value), fmt(b2.statistic),
                                       fmt(b2.p_value), fmt(b3.statistic), fmt(b3.p_value), ""});
                rep << "h=" << h << ": terasvirta p = " << fmt(tv.p_value) << ", bds(m=2) p = " << fmt(b2.p_value)
                    << ", bds(m=3) p = " << fmt(b3.p_value) << "\n";
            } catch (const Error& e) {
                row.resize(11);
                row.push_back(e.what());
                rep << "h=" << h << ": unavailable (" << e.what() << ")\n";
            }
            csv::write_record(out, row);
        }
        rep << "\n";
    }

    if (pipelines.empty()) {
        for (auto h : cfg.horizons) {
            const auto p = cfg.output_dir / ("pipeline_h" + std::to_string(h) + ".json");
            if (fs::exists(p)) pipelines.push_back(p.string());
        }
    }
    rep << "[skip-connection assumptions]\n";
    auto as = open_out(cfg.output_dir / "assumptions.csv");
    outputs.push_back("assumptions.csv");
    csv::write_record(as, {"pipeline", "p", "q", "k", "skip", "psi1", "psi2", "a3_value", "a3_holds", "a5_value",
                           "a5_holds", "note"});
    if (pipelines.empty()) rep << "no pipelines found\n";
    for (const auto& path : pipelines) {
        const auto pipe = load_pipeline(path);
        const auto r = check_skip_assumptions(pipe);
        const std::string label = fs::path(path).filename().string();
        auto join = [](const std::vector<double>& v) {
            std::string s;
            for (double x : v) s += (s.empty() ? "" : ";") + fmt(x);
            return s;
        };
        const auto& c = pipe.chosen;
        if (!r.applicable) {
            csv::write_record(as, {label, std::to_string(c.p), std::to_string(c.q), std::to_string(c.k), "FALSE", "",
                                   "", "", "", "", "", r.note});
            rep << label << ": " << r.note << "\n";
            continue;
        }
        csv::write_record(as, {label, std::to_string(c.p), std::to_string(c.q), std::to_string(c.k), "TRUE",
                               join(r.psi1), join(r.psi2), fmt(r.a3_value), r.a3_holds ? "TRUE" : "FALSE",
                               fmt(r.a5_value), r.a5_holds ? "TRUE" : "FALSE", ""});
        rep << label << ": A3 sum = " << fmt(r.a3_value) << (r.a3_holds ? " (holds)" : " (fails)")
            << ", A5 |sum psi1| = " << fmt(r.a5_value) << (r.a5_holds ? " (holds)" : " (fails)") << "\n";
    }
    auto txt = open_out(cfg.output_dir / "diagnostics.txt");
    txt << rep.str();
    write_manifest(cfg, "diagnose", outputs, {{"pipelines", pipelines}});
    return 0;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
    double psi1 = 0.5;
    double psi2 = 0.2;
    std::size_t k = 3;
    double g_scale = 1.0;
    double sigma = 1.0;
    double feedback_d = 0.3;
    std::size_t T = 20000;
    std::vector<double> y0{-100.0, 100.0};
    double burn_in = 0.5;
};

int cmd_simulate(const RunConfig& cfg, const SimulateArgs& a) {
    if (a.y0.size() != 2) throw ContractError("--y0 takes exactly two starting values");
    ChainConfig cc;
    cc.psi1 = a.psi1;
    cc.psi2 = a.psi2;
    cc.g = BoundedMap::random(a.k, a.g_scale, sub_seed(cfg.seed, "network_g"));
    cc.sigma = a.sigma;
    cc.feedback_d = a.feedback_d;
    const auto ca = simulate_narfima_chain(cc, a.T, a.y0[0], sub_seed(cfg.seed, "chain_a"));
    const auto cb = simulate_narfima_chain(cc, a.T, a.y0[1], sub_seed(cfg.seed, "chain_b"));
    const auto r = ergodicity_diagnostic(ca, cb, a.burn_in);

    ensure_dir(cfg.output_dir);
    {
        auto out = open_out(cfg.output_dir / "chain.csv");
        csv::write_record(out, {"t", "chain_a", "chain_b"});
        for (std::size_t t = 0; t < a.T; ++t) csv::write_record(out, {std::to_string(t), fmt(ca[t]), fmt(cb[t])});
    }
    {
        auto out = open_out(cfg.output_dir / "ergodicity.txt");
        out << "psi1 = " << fmt(a.psi1) << "\npsi2 = " << fmt(a.psi2) << "\nhidden_nodes = " << a.k
            << "\nT = " << a.T << "\ny0 = " << fmt(a.y0[0]) << ", " << fmt(a.y0[1])
            << "\nburn_in = " << fmt(a.burn_in) << "\n\ndrift_slope = " << fmt(r.drift_slope)
            << "\ndrift_delta = " << fmt(r.drift_delta) << "\ndrift_B = " << fmt(r.drift_B)
            << "\ndrift_feasible = " << (r.drift_feasible ? "true" : "false")
            << "\nchain_distance_ks = " << fmt(r.chain_distance) << "\ndiverged = " << (r.diverged ? "true" : "false")
            << "\n";
    }
    write_manifest(cfg, "simulate", {"chain.csv", "ergodicity.txt"});
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config_path, "JSON run configuration");
    sub->add_option("--seed", c.seed, "global seed (overrides the config)");
    sub->add_option("--alpha", c.alpha, "conformal miscoverage level");
    sub->add_option("--horizons", c.horizons, "comma-separated horizons, e.g. 1,3,6");
    sub->add_option("--grid-max", c.grid_max, "upper bound for the p, q and k grids (1..5)");
    sub->add_option("-o,--output-dir", c.output_dir, "output directory");
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"NARFIMA hybrid forecasting toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    bool full = false;
    std::string pipeline_path, future_path;
    std::size_t h = 1;
    std::vector<std::string> pipelines;
    SimulateArgs sim;

    auto* fit = app.add_subcommand("fit", "cross-validate and fit NARFIMA per horizon");
    add_common(fit, common);
    fit->add_flag("--full", full, "fit once on the full series instead of per rolling split");

    auto* fc = app.add_subcommand("forecast", "recursive forecast from a saved pipeline");
    add_common(fc, common);
    fc->add_option("--pipeline", pipeline_path, "pipeline JSON")->required();
    fc->add_option("--horizon", h, "forecast horizon")->required();
    fc->add_option("--future-exog", future_path, "CSV with future covariate values");

    auto* bt = app.add_subcommand("backtest", "rolling-origin evaluation of the configured models");
    add_common(bt, common);

    auto* dg = app.add_subcommand("diagnose", "long memory, residual nonlinearity and skip assumptions");
    add_common(dg, common);
    dg->add_option("--pipeline", pipelines, "pipeline JSON files (default: pipeline_h*.json in the output dir)");

    auto* sm = app.add_subcommand("simulate", "simulate two NARFIMA chains and check ergodicity");
    add_common(sm, common);
    sm->add_option("--psi1", sim.psi1);
    sm->add_option("--psi2", sim.psi2);
    sm->add_option("--k", sim.k, "hidden nodes of the bounded map");
    sm->add_option("--g-scale", sim.g_scale, "coefficient range of the bounded map");
    sm->add_option("--sigma", sim.sigma);
    sm->add_option("--feedback-d", sim.feedback_d);
    sm->add_option("--T", sim.T);
    sm->add_option("--y0", sim.y0, "two starting values")->delimiter(',');
    sm->add_option("--burn-in", sim.burn_in);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const auto cfg = resolve_config(common);
        if (fit->parsed()) return cmd_fit(cfg, full);
        if (fc->parsed()) return cmd_forecast(cfg, pipeline_path, h, future_path);
        if (bt->parsed()) return cmd_backtest(cfg);
        if (dg->parsed()) return cmd_diagnose(cfg, pipelines);
        if (sm->parsed()) return cmd_simulate(cfg, sim);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace narfima::cli
