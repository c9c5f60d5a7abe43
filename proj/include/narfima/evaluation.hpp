#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "narfima/arfimax.hpp"
#include "narfima/narfima.hpp"
#include "narfima/timeseries.hpp"

namespace narfima {

struct MetricSet {
    std::optional<double> mape;  // empty when an actual is zero
    double smape = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mase;  // empty at h = 1

    // Named access in the canonical order below; empty for undefined metrics.
    std::optional<double> get(const std::string& metric) const;
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"MAPE", "SMAPE", "MAE", "MASE", "RMSE"};
    return names;
}

// MAPE and SMAPE in percent. MASE scales the summed absolute error by
// (h / (T-1)) times the summed absolute first difference of `train`.
MetricSet compute_metrics(std::span<const double> actuals, std::span<const double> forecasts,
                          std::span<const double> train);

struct ScoreKey {
    std::string model;
    std::string dataset;
    std::size_t horizon = 0;
    std::string metric;

    friend auto operator<=>(const ScoreKey&, const ScoreKey&) = default;
};

struct ScoreFailure {
    std::string model;
    std::string dataset;
    std::size_t horizon = 0;
    std::string reason;
};

class ScoreTable {
public:
    // Throws ContractError on a duplicate key.
    void add(const ScoreKey& key, double value);
    void add_metrics(const std::string& model, const std::string& dataset, std::size_t horizon,
                     const MetricSet& metrics);
    void add_failure(ScoreFailure failure) { failures_.push_back(std::move(failure)); }

    std::optional<double> get(const ScoreKey& key) const;
    const std::map<ScoreKey, double>& entries() const { return entries_; }
    const std::vector<ScoreFailure>& failures() const { return failures_; }

    // Models in first-insertion order.
    const std::vector<std::string>& models() const { return models_; }
    std::vector<std::pair<std::string, std::size_t>> cells() const;  // (dataset, horizon)

    // model,dataset,horizon,metric,value
    void write_long_csv(const std::filesystem::path& path) const;
    // One row per (dataset, model), columns metric_h for every horizon; blank when undefined.
    void write_wide_csv(const std::filesystem::path& path) const;

private:
    std::map<ScoreKey, double> entries_;
    std::vector<std::string> models_;
    std::vector<ScoreFailure> failures_;
};

// A forecasting method under evaluation. `future_exogenous` holds the test-period
// covariate values (r x h).
struct ForecastModel {
    std::string name;
    std::function<std::vector<double>(const TimeSeriesDataset& train, std::size_t h,
                                      const ExogenousMatrix& future_exogenous)>
        forecast;
};

// Baselines by name: Naive, AR, ARIMAx_d0, ARIMAx_d1, ARFIMAx, ARNNx, NARFIMA,
// NARIMA, NNaive. Neural models take the grid and seed from `cfg`; for each
// horizon the validation length becomes max(h, cfg.validation_length).
ForecastModel make_model(const std::string& name, const NarfimaConfig& cfg);

inline const std::vector<std::string>& known_models() {
    static const std::vector<std::string> names{"Naive", "AR", "ARIMAx_d0", "ARIMAx_d1", "ARFIMAx",
                                                "ARNNx", "NARFIMA", "NARIMA", "NNaive"};
    return names;
}

struct BacktestForecast {
    std::string model;
    std::size_t horizon = 0;
    std::vector<YearMonth> dates;
    std::vector<double> actual;
    std::vector<double> forecast;
};

struct BacktestResult {
    ScoreTable table;
    std::vector<BacktestForecast> forecasts;  // successful (model, horizon) pairs
};

BacktestResult rolling_backtest(const TimeSeriesDataset& dataset,
                                const std::vector<ForecastModel>& models,
                                const std::vector<std::size_t>& horizons);

struct MCBResult {
    std::vector<std::string> models;
    std::vector<double> mean_ranks;
    double critical_distance = 0.0;  // half-width of each model's interval
    std::size_t best = 0;            // index of the lowest mean rank
    std::size_t cells = 0;
    double reference_lower = 0.0;
    double reference_upper = 0.0;
};

// 0.95 quantile of the studentized range for K groups and infinite degrees of
// freedom (K <= 20); 0 for K = 1.
double studentized_range_q95(std::size_t k);

MCBResult mcb_ranks(const ScoreTable& table, const std::string& metric);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

struct MurphyCurve {
    std::vector<double> theta;
    std::vector<double> score;
};

double elementary_score(double forecast, double actual, double theta);

MurphyCurve murphy_curve(std::span<const double> actuals, std::span<const double> forecasts,
                         std::span<const double> theta_grid);

// `points` evenly spaced values over [min, max] of all inputs padded by 1% of
// the range on each side.
std::vector<double> default_theta_grid(std::span<const double> actuals,
                                       const std::vector<std::vector<double>>& forecasts,
                                       std::size_t points = 501);

// theta,score_<model>... for curves sharing one grid.
void write_murphy_csv(const std::filesystem::path& path, const std::vector<std::string>& models,
                      const std::vector<MurphyCurve>& curves);

double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace narfima
