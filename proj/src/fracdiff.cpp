#include "narfima/fracdiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "narfima/error.hpp"

namespace narfima {

namespace {

void check_d(double d) {
    if (!(d >= 0.0 && d <= 1.0))
        throw DomainError("fractional order d must lie in [0, 1], got " + std::to_string(d));
}

void check_series(std::span<const double> series) {
    if (series.empty()) throw DomainError("fractional filter needs a non-empty series");
}

}  // namespace

std::vector<double> binomial_filter(double d, std::size_t n) {
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (std::size_t v = 1; v <= n; ++v) {
        const double dv = static_cast<double>(v);
        c[v] = c[v - 1] * (dv - 1.0 - d) / dv;
    }
    return c;
}

FracDiffCoeffs frac_diff_coeffs(double d, std::size_t n) {
    check_d(d);
    return {d, binomial_filter(d, n)};
}

std::vector<double> causal_filter(std::span<const double> series, std::span<const double> filter) {
    const std::size_t n = series.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lags = std::min(t + 1, filter.size());
        double acc = 0.0;
        for (std::size_t v = 0; v < lags; ++v) acc += filter[v] * series[t - v];
        out[t] = acc;
    }
    return out;
}

std::vector<double> frac_diff(std::span<const double> series, double d) {
    check_d(d);
    check_series(series);
    if (d == 0.0) return {series.begin(), series.end()};
    return causal_filter(series, binomial_filter(d, series.size() - 1));
}

std::vector<double> frac_integrate(std::span<const double> series, double d) {
    check_d(d);
    check_series(series);
    if (d == 0.0) return {series.begin(), series.end()};
    return causal_filter(series, binomial_filter(-d, series.size() - 1));
}

}  // namespace narfima
