#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace narfima {

enum class PsiMode { ConstantOne, RollingMad };

struct ConformalConfig {
    double alpha = 0.05;
    std::optional<std::size_t> tau;  // window size; empty means unbounded
    PsiMode psi_mode = PsiMode::ConstantOne;
    std::size_t mad_window = 24;

    void validate() const;
};

struct PredictionInterval {
    double lower = 0.0;
    double center = 0.0;
    double upper = 0.0;
};

// One past step: realised value, point forecast and uncertainty scale.
struct ScoreRecord {
    double actual = 0.0;
    double forecast = 0.0;
    double psi = 1.0;
};

// |y_t - yhat_t| / psi_t elementwise.
std::vector<double> conformal_scores(std::span<const double> actuals,
                                     std::span<const double> forecasts,
                                     std::span<const double> psi);

// The ceil((m+1)(1-alpha))-th smallest of the last m = min(tau, n) scores,
// clamped to the window maximum.
double weighted_quantile(std::span<const double> scores, std::optional<std::size_t> tau,
                         double alpha);

// Interval next_forecast +/- CQ * next_psi, calibrated on `history`.
PredictionInterval predict_with_interval(std::span<const ScoreRecord> history,
                                         const ConformalConfig& cfg, double next_forecast,
                                         double next_psi = 1.0);

// Uncertainty scale for the next step from past absolute errors: 1 under
// ConstantOne; median absolute deviation of the last `mad_window` errors under
// RollingMad (1 when fewer than two errors are available or the MAD is zero).
double next_psi(std::span<const ScoreRecord> history, const ConformalConfig& cfg);

// Sequential evaluation: interval t uses records [0, t) as calibration, starting
// after `warmup` records.
std::vector<PredictionInterval> sequential_intervals(std::span<const double> actuals,
                                                     std::span<const double> forecasts,
                                                     const ConformalConfig& cfg,
                                                     std::size_t warmup);

// Interval bands for a multi-step forecast reusing one set of calibration scores.
std::vector<PredictionInterval> interval_band(std::span<const ScoreRecord> history,
                                              const ConformalConfig& cfg,
                                              std::span<const double> forecasts);

}  // namespace narfima
