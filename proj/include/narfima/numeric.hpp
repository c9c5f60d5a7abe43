#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace narfima::numeric {

struct NelderMeadOptions {
    std::size_t max_iter = 500;
    double initial_step = 0.5;
    double f_tolerance = 1e-10;  // relative spread of simplex values
    double x_tolerance = 1e-8;
};

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

MinimizeResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                           std::vector<double> start, const NelderMeadOptions& opts = {});

struct LeastSquaresResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double ssr = 0.0;
    Eigen::Index rank = 0;
};

// Minimum-norm solve of min ||X b - y||. Reports the numerical rank.
LeastSquaresResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);  // n - 1 divisor

// Standard normal upper tail and chi-square survival function.
double normal_sf(double z);
double chi_square_sf(double x, double dof);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Roots of 1 - c_1 z - ... - c_n z^n all strictly outside the unit circle.
bool ar_polynomial_stable(std::span<const double> c);

// Maps unconstrained values to coefficients of a stable polynomial via
// partial autocorrelations tanh(raw) and the Durbin-Levinson recursion.
std::vector<double> stable_from_unconstrained(std::span<const double> raw);

// Runs body(i) for i in [0, n) on up to `threads` workers; each index is
// written by exactly one call, so results are schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace narfima::numeric
