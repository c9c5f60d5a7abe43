#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "narfima/timeseries.hpp"

namespace narfima {

// Future covariate values, one inner vector per covariate (r x h).
using ExogenousMatrix = std::vector<std::vector<double>>;

enum class FutureExogMode { Required, FreezeLast };

struct ArfimaxSpec {
    std::size_t p = 0;  // AR order
    std::size_t q = 0;  // MA order
    bool include_exogenous = true;

    static constexpr std::size_t kMaxOrder = 5;
};

// Fitted (1 - phi(B)) (1 - B)^d (y_t - level) = mu + sum_j pi_j X_{j,t-1} + (1 + theta(B)) eps_t.
//
// The target and covariates are centred on their training means before
// filtering; `level` and `exog_center` hold those means. Pre-sample values are
// zero for both the fractional filter and the MA recursion.
struct ArfimaxModel {
    ArfimaxSpec spec;
    double d = 0.0;
    bool d_estimated = true;  // false for the integer-order (ARIMAx) baselines
    std::vector<double> phi;
    std::vector<double> theta;
    std::vector<double> pi;
    double mu = 0.0;
    double sigma2 = 0.0;
    double level = 0.0;
    std::vector<double> exog_center;
    std::vector<double> residuals;  // e_t = y_t - fitted_t
    std::vector<double> fitted;     // one-step predictions
    double loglik_proxy = 0.0;      // conditional sum of squares at the optimum
    double aic = 0.0;

    // Forecast state: the training target and the last covariate row.
    std::vector<double> history;
    std::vector<double> last_exogenous;

    std::size_t num_exogenous() const { return pi.size(); }
};

struct ArfimaxFitOptions {
    std::size_t starts = 5;
    std::size_t max_iter = 500;
};

// CSS estimate with d constrained to (0, 0.5).
ArfimaxModel fit_arfimax(const TimeSeriesDataset& train, const ArfimaxSpec& spec,
                         const ArfimaxFitOptions& options = {});

// Same estimator with the differencing order held fixed (d = 0 or 1 for ARIMAx).
ArfimaxModel fit_arimax(const TimeSeriesDataset& train, const ArfimaxSpec& spec, double d,
                        const ArfimaxFitOptions& options = {});

struct OrderSelection {
    ArfimaxSpec spec;
    ArfimaxModel model;
    std::vector<std::string> failures;  // one entry per failed grid cell
};

// AIC over the (p, q) grid; ties go to smaller p+q, then smaller p.
OrderSelection select_order_fit(const TimeSeriesDataset& train, std::size_t max_p,
                                std::size_t max_q, std::optional<double> fixed_d = std::nullopt,
                                bool include_exogenous = true,
                                const ArfimaxFitOptions& options = {});

ArfimaxSpec select_order(const TimeSeriesDataset& train, std::size_t max_p, std::size_t max_q);

// Iterated minimum-MSE forecasts with future innovations at zero. Covariates
// enter at lag one, so step j uses X_{T+j-1}: the last training row for j = 1,
// then columns 0..h-2 of `future_exogenous`.
std::vector<double> arfimax_forecast(const ArfimaxModel& model, std::size_t h,
                                     const std::optional<ExogenousMatrix>& future_exogenous = std::nullopt,
                                     FutureExogMode mode = FutureExogMode::Required);

inline const std::vector<double>& arfimax_residuals(const ArfimaxModel& model) {
    return model.residuals;
}

// ARMA(phi, theta) innovations with standard deviation sigma, fractionally
// integrated with order d under a zero pre-sample.
std::vector<double> simulate_arfima(double d, std::span<const double> phi,
                                    std::span<const double> theta, double sigma, std::size_t T,
                                    std::uint64_t seed);

}  // namespace narfima
