#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace narfima {

// Binomial-expansion coefficients of (1 - B)^d up to lag n.
struct FracDiffCoeffs {
    double d = 0.0;
    std::vector<double> coeffs;  // coeffs[0] == 1
};

// c_0 = 1, c_v = c_{v-1} (v - 1 - d) / v. Requires 0 <= d <= 1.
FracDiffCoeffs frac_diff_coeffs(double d, std::size_t n);

// Same recursion without the domain restriction; negative d gives (1 - B)^{-|d|}.
std::vector<double> binomial_filter(double d, std::size_t n);

// out[t] = sum_{v=0..t} c_v x[t-v], zero pre-sample. Requires 0 <= d <= 1.
std::vector<double> frac_diff(std::span<const double> series, double d);

// Inverse of frac_diff: applies (1 - B)^{-d} under the same truncation.
std::vector<double> frac_integrate(std::span<const double> series, double d);

// Causal convolution of `series` with `filter` (filter[0] at lag 0), truncated
// to the length of `series`.
std::vector<double> causal_filter(std::span<const double> series, std::span<const double> filter);

}  // namespace narfima
