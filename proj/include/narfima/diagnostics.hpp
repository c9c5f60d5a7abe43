#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "narfima/narfima.hpp"
#include "narfima/neuralnet.hpp"

namespace narfima {

struct AssumptionReport {
    bool applicable = true;  // false when the network has no skip connections
    std::string note;
    std::vector<double> psi1;  // skip weights on the y lags
    std::vector<double> psi2;  // skip weights on the residual lags
    double a3_value = 0.0;     // sum psi1 + sum psi2
    bool a3_holds = false;
    double a5_value = 0.0;     // |sum psi1|
    bool a5_holds = false;
};

inline constexpr double kA3Tolerance = 1e-6;

AssumptionReport check_skip_assumptions(std::span<const double> psi1, std::span<const double> psi2,
                                        double tolerance = kA3Tolerance);

// Reads psi1/psi2 from the first p and next q skip weights. With a scaler the
// weights are first converted to the raw input/target scale.
AssumptionReport check_skip_assumptions(const NetworkWeights& network, std::size_t p, std::size_t q,
                                        const FeatureScaler* scaler = nullptr);

AssumptionReport check_skip_assumptions(const NarfimaPipeline& pipeline);

// Rescaled-range estimate over dyadic block sizes 8, 16, ... (at most T).
double hurst_exponent(std::span<const double> series);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t lag = 0;  // Terasvirta: lag actually used
};

// Residuals of an OLS AR(lag) fit with intercept (length T - lag).
std::vector<double> ar_residuals(std::span<const double> series, std::size_t lag);

// AR order in 1..max_lag minimising AIC on a common sample.
std::size_t select_ar_lag(std::span<const double> series, std::size_t max_lag = 5);

// Neural-network linearity test, chi-square form. lag 0 selects the order by AIC.
TestResult terasvirta_test(std::span<const double> series, std::size_t lag = 0);

// BDS statistic for embedding dimension m with eps = eps_multiplier * sd.
TestResult bds_test(std::span<const double> series, std::size_t embed_dim = 2,
                    double eps_multiplier = 1.0);

// g(y, e) = beta0 + sum_i beta_i * sigmoid(mu_i + phi1_i y + phi2_i e)
struct BoundedMap {
    double beta0 = 0.0;
    std::vector<double> beta;
    std::vector<double> mu;
    std::vector<double> phi1;
    std::vector<double> phi2;

    double operator()(double y, double e) const;
    std::size_t nodes() const { return beta.size(); }

    static BoundedMap zero() { return {}; }
    // Coefficients uniform in [-scale, scale].
    static BoundedMap random(std::size_t k, double scale, std::uint64_t seed);
};

struct ChainConfig {
    double psi1 = 0.5;
    double psi2 = 0.0;
    BoundedMap g;
    double sigma = 1.0;
    double feedback_d = 0.3;      // long-memory order of the residual feedback e_t
    double feedback_sigma = 1.0;  // 0 switches the feedback off
};

// y_t = psi1 y_{t-1} + psi2 e_{t-1} + g(y_{t-1}, e_{t-1}) + eps_t with y_0 = y0.
std::vector<double> simulate_narfima_chain(const ChainConfig& cfg, std::size_t T, double y0,
                                           std::uint64_t seed);

struct ErgodicityReport {
    double drift_delta = 0.0;
    double drift_B = 0.0;
    double drift_slope = 0.0;
    bool drift_feasible = false;
    double chain_distance = 0.0;  // two-sample KS after burn-in
    bool diverged = false;
};

ErgodicityReport ergodicity_diagnostic(std::span<const double> chain_a,
                                       std::span<const double> chain_b, double burn_in = 0.5);

}  // namespace narfima
