#include "narfima/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "narfima/csv.hpp"
#include "narfima/error.hpp"
#include "narfima/numeric.hpp"

namespace narfima {

std::optional<double> MetricSet::get(const std::string& metric) const {
    if (metric == "MAPE") return mape;
    if (metric == "SMAPE") return smape;
    if (metric == "MAE") return mae;
    if (metric == "RMSE") return rmse;
    if (metric == "MASE") return mase;
    throw ContractError("unknown metric '" + metric + "'");
}

MetricSet compute_metrics(std::span<const double> actuals, std::span<const double> forecasts,
                          std::span<const double> train) {
    const std::size_t h = actuals.size();
    if (h == 0) throw ContractError("metrics need at least one forecast");
    if (forecasts.size() != h) throw ContractError("actuals and forecasts differ in length");
    if (h > 1 && train.size() < 2) throw ContractError("MASE needs a training series of length >= 2");

    MetricSet m;
    double ape = 0.0, sape = 0.0, ae = 0.0, se = 0.0;
    bool zero_actual = false;
    for (std::size_t t = 0; t < h; ++t) {
        const double err = forecasts[t] - actuals[t];
        ae += std::abs(err);
        se += err * err;
        if (actuals[t] == 0.0)
            zero_actual = true;
        else
            ape += std::abs(err / actuals[t]);
        const double denom = (std::abs(forecasts[t]) + std::abs(actuals[t])) / 2.0;
        if (denom > 0.0) sape += std::abs(err) / denom;
    }
    const double hd = static_cast<double>(h);
    if (!zero_actual) m.mape = 100.0 * ape / hd;
    m.smape = 100.0 * sape / hd;
    m.mae = ae / hd;
    m.rmse = std::sqrt(se / hd);
    if (h > 1) {
        double scale = 0.0;
        for (std::size_t t = 1; t < train.size(); ++t) scale += std::abs(train[t] - train[t - 1]);
        scale *= hd / static_cast<double>(train.size() - 1);
        if (scale > 0.0) m.mase = ae / scale;
    }
    return m;
}

// ---------------------------------------------------------------- ScoreTable

void ScoreTable::add(const ScoreKey& key, double value) {
    if (!entries_.emplace(key, value).second)
        throw ContractError("duplicate score entry for " + key.model + "/" + key.dataset + "/h" +
                            std::to_string(key.horizon) + "/" + key.metric);
    if (std::find(models_.begin(), models_.end(), key.model) == models_.end())
        models_.push_back(key.model);
}

void ScoreTable::add_metrics(const std::string& model, const std::string& dataset,
                             std::size_t horizon, const MetricSet& metrics) {
    for (const auto& name : metric_names())
        if (auto v = metrics.get(name)) add({model, dataset, horizon, name}, *v);
    if (std::find(models_.begin(), models_.end(), model) == models_.end()) models_.push_back(model);
}

std::optional<double> ScoreTable::get(const ScoreKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<std::string, std::size_t>> ScoreTable::cells() const {
    std::set<std::pair<std::string, std::size_t>> s;
    for (const auto& [k, v] : entries_) s.emplace(k.dataset, k.horizon);
    return {s.begin(), s.end()};
}

void ScoreTable::write_long_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    csv::write_record(out, {"model", "dataset", "horizon", "metric", "value"});
    // Model order follows insertion; everything else is sorted.
    for (const auto& model : models_)
        for (const auto& [k, v] : entries_)
            if (k.model == model)
                csv::write_record(out, {k.model, k.dataset, std::to_string(k.horizon), k.metric,
                                        csv::format_double(v)});
}

void ScoreTable::write_wide_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    std::set<std::size_t> horizons;
    std::set<std::string> datasets;
    for (const auto& [k, v] : entries_) {
        horizons.insert(k.horizon);
        datasets.insert(k.dataset);
    }
    for (const auto& f : failures_) {
        horizons.insert(f.horizon);
        datasets.insert(f.dataset);
    }
    std::vector<std::string> header{"dataset", "model"};
    for (auto h : horizons)
        for (const auto& m : metric_names()) header.push_back("h" + std::to_string(h) + "_" + m);
    csv::write_record(out, header);
    for (const auto& ds : datasets)
        for (const auto& model : models_) {
            std::vector<std::string> row{ds, model};
            for (auto h : horizons)
                for (const auto& m : metric_names()) {
                    auto v = get({model, ds, h, m});
                    row.push_back(v ? csv::format_double(*v) : "");
                }
            csv::write_record(out, row);
        }
}

// ------------------------------------------------------------------- models

namespace {

std::vector<double> linear_forecast(const ArfimaxModel& model, std::size_t h,
                                    const ExogenousMatrix& future, FutureExogMode mode) {
    return arfimax_forecast(model, h, future, mode);
}

}  // namespace

ForecastModel make_model(const std::string& name, const NarfimaConfig& cfg) {
    ForecastModel m;
    m.name = name;
    const auto mode = cfg.future_exog_mode;
    const auto fit_opts = cfg.stage1_fit;
    const std::size_t max_p = cfg.stage1_max_p, max_q = cfg.stage1_max_q;

    auto linear = [=](std::size_t mq, std::optional<double> d, bool exog) {
        return [=](const TimeSeriesDataset& train, std::size_t h, const ExogenousMatrix& future) {
            auto sel = select_order_fit(train, max_p, mq, d, exog, fit_opts);
            return linear_forecast(sel.model, h, exog ? future : ExogenousMatrix{}, mode);
        };
    };
    auto neural = [=](Stage1Kind kind, bool residuals) {
        return [=](const TimeSeriesDataset& train, std::size_t h, const ExogenousMatrix& future) {
            NarfimaConfig c = cfg;
            c.stage1 = kind;
            c.use_residuals = residuals;
            c.validation_length = std::max(h, cfg.validation_length);
            const auto pipe = fit_narfima(train, c);
            return forecast_recursive(pipe, h, future);
        };
    };

    if (name == "Naive") {
        m.forecast = [](const TimeSeriesDataset& train, std::size_t h, const ExogenousMatrix&) {
            return std::vector<double>(h, train.target().back());
        };
    } else if (name == "AR") {
        m.forecast = linear(0, 0.0, false);
    } else if (name == "ARIMAx_d0") {
        m.forecast = linear(max_q, 0.0, true);
    } else if (name == "ARIMAx_d1") {
        m.forecast = linear(max_q, 1.0, true);
    } else if (name == "ARFIMAx") {
        m.forecast = linear(max_q, std::nullopt, true);
    } else if (name == "ARNNx") {
        m.forecast = neural(Stage1Kind::Arfimax, false);
    } else if (name == "NARFIMA") {
        m.forecast = neural(Stage1Kind::Arfimax, true);
    } else if (name == "NARIMA") {
        m.forecast = neural(Stage1Kind::Arimax, true);
    } else if (name == "NNaive") {
        m.forecast = neural(Stage1Kind::Naive, true);
    } else {
        std::string known;
        for (const auto& k : known_models()) known += (known.empty() ? "" : ", ") + k;
        throw ContractError("unknown model '" + name + "' (known: " + known + ")");
    }
    return m;
}

BacktestResult rolling_backtest(const TimeSeriesDataset& dataset,
                                const std::vector<ForecastModel>& models,
                                const std::vector<std::size_t>& horizons) {
    if (horizons.empty()) throw ContractError("at least one horizon is required");
    for (auto h : horizons)
        if (h == 0 || h >= dataset.size())
            throw ContractError("horizon " + std::to_string(h) + " must lie in [1, " +
                                std::to_string(dataset.size() - 1) + "]");

    struct Cell {
        std::vector<double> forecast;
        std::string error;
    };
    const std::size_t M = models.size();
    std::vector<Cell> cells(M * horizons.size());
    numeric::parallel_for(cells.size(), [&](std::size_t i) {
        const auto& model = models[i % M];
        const std::size_t h = horizons[i / M];
        const auto split = rolling_split(dataset, h);
        try {
            auto fc = model.forecast(split.train, h, split.test.exogenous());
            if (fc.size() != h) throw ContractError("forecast has the wrong length");
            for (double v : fc)
                if (!std::isfinite(v)) throw TrainingError("non-finite forecast");
            cells[i].forecast = std::move(fc);
        } catch (const std::exception& e) {
            cells[i].error = e.what();
        }
    });

    BacktestResult result;
    for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
        const std::size_t h = horizons[hi];
        const auto split = rolling_split(dataset, h);
        for (std::size_t mi = 0; mi < M; ++mi) {
            const auto& cell = cells[hi * M + mi];
            if (!cell.error.empty()) {
                result.table.add_failure({models[mi].name, dataset.name(), h, cell.error});
                continue;
            }
            const auto metrics = compute_metrics(split.test.target(), cell.forecast, split.train.target());
            result.table.add_metrics(models[mi].name, dataset.name(), h, metrics);
            result.forecasts.push_back(
                {models[mi].name, h, split.test.timestamps(), split.test.target(), cell.forecast});
        }
    }
    return result;
}

// ---------------------------------------------------------------------- MCB

double studentized_range_q95(std::size_t k) {
    static constexpr double q[] = {0.0,    0.0,    2.7718, 3.3145, 3.6332, 3.8577, 4.0301,
                                   4.1696, 4.2863, 4.3865, 4.4741, 4.5519, 4.6217, 4.6849,
                                   4.7427, 4.7959, 4.8452, 4.8910, 4.9337, 4.9739, 5.0117};
    if (k == 0 || k > 20) throw ContractError("studentized range constant tabulated for 1 <= K <= 20");
    return q[k];
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

MCBResult mcb_ranks(const ScoreTable& table, const std::string& metric) {
    MCBResult res;
    res.models = table.models();
    const std::size_t K = res.models.size();
    if (K == 0) throw ContractError("score table is empty");

    std::vector<std::pair<std::string, std::size_t>> used;
    std::string gaps;
    for (const auto& [ds, h] : table.cells()) {
        std::size_t present = 0;
        std::string missing;
        for (const auto& m : res.models) {
            if (table.get({m, ds, h, metric}))
                ++present;
            else
                missing += " " + m;
        }
        if (present == 0) continue;  // metric undefined for the whole cell (e.g. MASE at h = 1)
        if (present < K)
            gaps += "\n  " + ds + " h=" + std::to_string(h) + ":" + missing;
        else
            used.emplace_back(ds, h);
    }
    if (!gaps.empty()) throw ContractError("missing " + metric + " scores for:" + gaps);
    if (used.empty()) throw ContractError("no cells with " + metric + " scores");

    res.cells = used.size();
    res.mean_ranks.assign(K, 0.0);
    std::vector<double> row(K);
    for (const auto& [ds, h] : used) {
        for (std::size_t m = 0; m < K; ++m) row[m] = *table.get({res.models[m], ds, h, metric});
        const auto r = average_ranks(row);
        for (std::size_t m = 0; m < K; ++m) res.mean_ranks[m] += r[m];
    }
    for (auto& r : res.mean_ranks) r /= static_cast<double>(res.cells);
    res.best = static_cast<std::size_t>(
        std::min_element(res.mean_ranks.begin(), res.mean_ranks.end()) - res.mean_ranks.begin());
    const double Kd = static_cast<double>(K);
    res.critical_distance =
        studentized_range_q95(K) * std::sqrt(Kd * (Kd + 1.0) / (12.0 * static_cast<double>(res.cells)));
    res.reference_lower = res.mean_ranks[res.best] - res.critical_distance;
    res.reference_upper = res.mean_ranks[res.best] + res.critical_distance;
    return res;
}

// ------------------------------------------------------------------- Murphy

double elementary_score(double forecast, double actual, double theta) {
    const double lo = std::min(forecast, actual);
    const double hi = std::max(forecast, actual);
    return (lo <= theta && theta < hi) ? std::abs(actual - theta) : 0.0;
}

MurphyCurve murphy_curve(std::span<const double> actuals, std::span<const double> forecasts,
                         std::span<const double> theta_grid) {
    if (theta_grid.empty()) throw ContractError("Murphy theta grid is empty");
    if (actuals.size() != forecasts.size()) throw ContractError("actuals and forecasts differ in length");
    if (actuals.empty()) throw ContractError("Murphy curve needs at least one forecast");
    if (!std::is_sorted(theta_grid.begin(), theta_grid.end()))
        throw ContractError("Murphy theta grid must be sorted ascending");
    MurphyCurve c;
    c.theta.assign(theta_grid.begin(), theta_grid.end());
    c.score.resize(theta_grid.size());
    for (std::size_t g = 0; g < theta_grid.size(); ++g) {
        double s = 0.0;
        for (std::size_t t = 0; t < actuals.size(); ++t)
            s += elementary_score(forecasts[t], actuals[t], theta_grid[g]);
        c.score[g] = s / static_cast<double>(actuals.size());
    }
    return c;
}

std::vector<double> default_theta_grid(std::span<const double> actuals,
                                       const std::vector<std::vector<double>>& forecasts,
                                       std::size_t points) {
    if (points < 2) throw ContractError("theta grid needs at least two points");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto take = [&](std::span<const double> v) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    };
    take(actuals);
    for (const auto& f : forecasts) take(f);
    if (!std::isfinite(lo)) throw ContractError("theta grid needs data");
    double pad = 0.01 * (hi - lo);
    if (pad == 0.0) pad = 0.01 * std::max(1.0, std::abs(lo));
    lo -= pad;
    hi += pad;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

void write_murphy_csv(const std::filesystem::path& path, const std::vector<std::string>& models,
                      const std::vector<MurphyCurve>& curves) {
    if (models.size() != curves.size() || curves.empty())
        throw ContractError("one Murphy curve per model is required");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    std::vector<std::string> header{"theta"};
    for (const auto& m : models) header.push_back("score_" + m);
    csv::write_record(out, header);
    for (std::size_t g = 0; g < curves[0].theta.size(); ++g) {
        std::vector<std::string> row{csv::format_double(curves[0].theta[g])};
        for (const auto& c : curves) row.push_back(csv::format_double(c.score.at(g)));
        csv::write_record(out, row);
    }
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("trapezoid inputs differ in length");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

}  // namespace narfima
