#include "narfima/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "narfima/error.hpp"

namespace narfima {

void ConformalConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (tau && *tau < 1) throw DomainError("conformal window tau must be at least 1");
    if (psi_mode == PsiMode::RollingMad && mad_window < 2)
        throw DomainError("rolling MAD window must be at least 2");
}

std::vector<double> conformal_scores(std::span<const double> actuals,
                                     std::span<const double> forecasts,
                                     std::span<const double> psi) {
    if (actuals.size() != forecasts.size() || actuals.size() != psi.size())
        throw ContractError("conformal score inputs differ in length");
    std::vector<double> out(actuals.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        if (!(psi[t] > 0.0)) throw DomainError("uncertainty scale psi must be strictly positive");
        out[t] = std::abs(actuals[t] - forecasts[t]) / psi[t];
    }
    return out;
}

double weighted_quantile(std::span<const double> scores, std::optional<std::size_t> tau,
                         double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (tau && *tau == 0) throw DomainError("conformal window tau must be at least 1");
    const std::size_t m = tau ? std::min(*tau, scores.size()) : scores.size();
    if (m == 0) throw ContractError("no calibration scores inside the window");
    std::vector<double> window(scores.end() - static_cast<std::ptrdiff_t>(m), scores.end());
    std::sort(window.begin(), window.end());
    const double rank = std::ceil(static_cast<double>(m + 1) * (1.0 - alpha) - 1e-12);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, m);
    return window[k - 1];
}

PredictionInterval predict_with_interval(std::span<const ScoreRecord> history,
                                         const ConformalConfig& cfg, double next_forecast,
                                         double next_psi) {
    cfg.validate();
    if (history.empty()) throw ContractError("conformal calibration history is empty");
    if (!(next_psi > 0.0)) throw DomainError("uncertainty scale psi must be strictly positive");
    std::vector<double> scores(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (!(history[i].psi > 0.0)) throw DomainError("uncertainty scale psi must be strictly positive");
        scores[i] = std::abs(history[i].actual - history[i].forecast) / history[i].psi;
    }
    const double half = weighted_quantile(scores, cfg.tau, cfg.alpha) * next_psi;
    return {next_forecast - half, next_forecast, next_forecast + half};
}

double next_psi(std::span<const ScoreRecord> history, const ConformalConfig& cfg) {
    if (cfg.psi_mode == PsiMode::ConstantOne) return 1.0;
    const std::size_t m = std::min(cfg.mad_window, history.size());
    if (m < 2) return 1.0;
    std::vector<double> err;
    err.reserve(m);
    for (std::size_t i = history.size() - m; i < history.size(); ++i)
        err.push_back(history[i].actual - history[i].forecast);
    auto median = [](std::vector<double> v) {
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        double hi = v[mid];
        if (v.size() % 2 == 1) return hi;
        double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lo + hi);
    };
    const double med = median(err);
    for (double& e : err) e = std::abs(e - med);
    const double mad = median(err);
    return mad > 0.0 ? mad : 1.0;
}

std::vector<PredictionInterval> sequential_intervals(std::span<const double> actuals,
                                                     std::span<const double> forecasts,
                                                     const ConformalConfig& cfg,
                                                     std::size_t warmup) {
    if (actuals.size() != forecasts.size()) throw ContractError("actuals and forecasts differ in length");
    if (warmup < 1 || warmup > actuals.size())
        throw ContractError("warmup must leave at least one calibration record");
    std::vector<ScoreRecord> history;
    history.reserve(actuals.size());
    std::vector<PredictionInterval> out;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        const double psi = next_psi(history, cfg);
        if (t >= warmup) out.push_back(predict_with_interval(history, cfg, forecasts[t], psi));
        history.push_back({actuals[t], forecasts[t], psi});
    }
    return out;
}

std::vector<PredictionInterval> interval_band(std::span<const ScoreRecord> history,
                                              const ConformalConfig& cfg,
                                              std::span<const double> forecasts) {
    const double psi = next_psi(history, cfg);
    std::vector<PredictionInterval> out;
    out.reserve(forecasts.size());
    for (double f : forecasts) out.push_back(predict_with_interval(history, cfg, f, psi));
    return out;
}

}  // namespace narfima
