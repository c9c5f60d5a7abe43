#include "narfima/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "narfima/arfimax.hpp"
#include "narfima/error.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"

namespace narfima {

// ---------------------------------------------------------- skip assumptions

AssumptionReport check_skip_assumptions(std::span<const double> psi1, std::span<const double> psi2,
                                        double tolerance) {
    AssumptionReport r;
    r.psi1.assign(psi1.begin(), psi1.end());
    r.psi2.assign(psi2.begin(), psi2.end());
    const double s1 = std::accumulate(psi1.begin(), psi1.end(), 0.0);
    const double s2 = std::accumulate(psi2.begin(), psi2.end(), 0.0);
    r.a3_value = s1 + s2;
    r.a3_holds = std::abs(r.a3_value) > tolerance;
    r.a5_value = std::abs(s1);
    r.a5_holds = r.a5_value < 1.0;
    return r;
}

AssumptionReport check_skip_assumptions(const NetworkWeights& network, std::size_t p, std::size_t q,
                                        const FeatureScaler* scaler) {
    if (network.inputs() < p + q)
        throw ContractError("network has " + std::to_string(network.inputs()) +
                            " inputs, fewer than p + q = " + std::to_string(p + q));
    if (scaler && scaler->scale.size() != network.inputs())
        throw ContractError("scaler width does not match the network inputs");
    if (!network.skip) {
        AssumptionReport r;
        r.applicable = false;
        r.note = "omitted (no skip connections)";
        return r;
    }
    std::vector<double> w(network.inputs());
    if (scaler)
        w = raw_skip_weights(network, *scaler);
    else
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = network.skip_weights(static_cast<Eigen::Index>(j));
    return check_skip_assumptions(std::span<const double>(w.data(), p),
                                  std::span<const double>(w.data() + p, q));
}

AssumptionReport check_skip_assumptions(const NarfimaPipeline& pipeline) {
    return check_skip_assumptions(pipeline.network, pipeline.chosen.p, pipeline.chosen.q,
                                  &pipeline.scaler);
}

// ------------------------------------------------------------------- Hurst

double hurst_exponent(std::span<const double> series) {
    const std::size_t T = series.size();
    if (T < 64) throw InsufficientDataError("Hurst exponent needs at least 64 observations");
    if (numeric::sample_sd(series) == 0.0) throw DomainError("Hurst exponent undefined for a constant series");

    std::vector<double> lx, ly;
    for (std::size_t n = 8; n <= T; n *= 2) {
        double sum_rs = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b + n <= T; b += n) {
            const auto block = series.subspan(b, n);
            const double m = numeric::mean(block);
            double cum = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
            for (double x : block) {
                cum += x - m;
                lo = std::min(lo, cum);
                hi = std::max(hi, cum);
                ss += (x - m) * (x - m);
            }
            const double s = std::sqrt(ss / static_cast<double>(n));
            if (s == 0.0) continue;
            sum_rs += (hi - lo) / s;
            ++used;
        }
        if (used == 0) continue;
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(sum_rs / static_cast<double>(used)));
    }
    if (lx.size() < 2) throw DomainError("too few usable block sizes for the Hurst regression");
    const double mx = numeric::mean(lx), my = numeric::mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------- linearity tests

namespace {

// Lagged design [1, x_{t-1}, ..., x_{t-lag}] for t = start..T-1.
Eigen::MatrixXd lag_design(std::span<const double> x, std::size_t lag, std::size_t start) {
    const std::size_t n = x.size() - start;
    Eigen::MatrixXd X(n, lag + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = start + i;
        X(i, 0) = 1.0;
        for (std::size_t j = 1; j <= lag; ++j) X(i, j) = x[t - j];
    }
    return X;
}

Eigen::VectorXd tail_vector(std::span<const double> x, std::size_t start) {
    Eigen::VectorXd y(x.size() - start);
    for (std::size_t i = 0; i < static_cast<std::size_t>(y.size()); ++i) y(i) = x[start + i];
    return y;
}

std::vector<double> standardized(std::span<const double> x) {
    const double m = numeric::mean(x);
    const double s = numeric::sample_sd(x);
    if (!(s > 0.0)) throw DomainError("series has zero variance");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / s;
    return out;
}

}  // namespace

std::vector<double> ar_residuals(std::span<const double> series, std::size_t lag) {
    if (series.size() <= 2 * lag + 1) throw InsufficientDataError("series too short for the AR fit");
    const auto X = lag_design(series, lag, lag);
    const auto fit = numeric::least_squares(X, tail_vector(series, lag));
    return {fit.residuals.data(), fit.residuals.data() + fit.residuals.size()};
}

std::size_t select_ar_lag(std::span<const double> series, std::size_t max_lag) {
    if (max_lag < 1) throw ContractError("max_lag must be at least 1");
    if (series.size() <= 10 * max_lag) throw InsufficientDataError("series too short for AR order selection");
    const auto y = tail_vector(series, max_lag);
    const double n = static_cast<double>(y.size());
    std::size_t best = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= max_lag; ++p) {
        const auto fit = numeric::least_squares(lag_design(series, p, max_lag), y);
        const double aic = n * std::log(std::max(fit.ssr, 1e-300) / n) + 2.0 * static_cast<double>(p + 1);
        if (aic < best_aic - 1e-12) {
            best_aic = aic;
            best = p;
        }
    }
    return best;
}

TestResult terasvirta_test(std::span<const double> series, std::size_t lag) {
    if (lag == 0) lag = select_ar_lag(series, 5);
    if (series.size() <= 10 * lag)
        throw InsufficientDataError("Terasvirta test needs more than 10 * lag observations");
    const auto x = standardized(series);

    const auto X = lag_design(x, lag, lag);
    const auto y = tail_vector(x, lag);
    const auto base = numeric::least_squares(X, y);
    if (base.rank < X.cols()) throw SingularError("lagged regressors are collinear");

    // Second- and third-order products of the lags.
    std::vector<Eigen::VectorXd> extra;
    for (std::size_t i = 1; i <= lag; ++i)
        for (std::size_t j = i; j <= lag; ++j) {
            extra.push_back(X.col(i).cwiseProduct(X.col(j)));
            for (std::size_t k = j; k <= lag; ++k)
                extra.push_back(X.col(i).cwiseProduct(X.col(j)).cwiseProduct(X.col(k)));
        }
    Eigen::MatrixXd Z(X.rows(), X.cols() + static_cast<Eigen::Index>(extra.size()));
    Z.leftCols(X.cols()) = X;
    for (std::size_t c = 0; c < extra.size(); ++c) Z.col(X.cols() + static_cast<Eigen::Index>(c)) = extra[c];
    const auto aux = numeric::least_squares(Z, base.residuals);
    // Deterministic series can make the product terms exactly collinear with the
    // lags; degrees of freedom count only the columns that add rank.
    const auto dof = aux.rank - base.rank;
    if (dof <= 0) throw SingularError("auxiliary regressors add no rank");

    TestResult r;
    r.lag = lag;
    const double n = static_cast<double>(y.size());
    if (!(base.ssr > 0.0)) throw DomainError("linear fit is exact; test undefined");
    r.statistic = n * (base.ssr - aux.ssr) / base.ssr;
    r.p_value = numeric::chi_square_sf(r.statistic, static_cast<double>(dof));
    return r;
}

TestResult bds_test(std::span<const double> series, std::size_t m, double eps_multiplier) {
    if (m < 2) throw ContractError("BDS embedding dimension must be at least 2");
    if (!(eps_multiplier > 0.0)) throw DomainError("BDS epsilon multiplier must be positive");
    const std::size_t n = series.size();
    if (n < 3 * m + 10) throw InsufficientDataError("series too short for the BDS test");
    const double sd = numeric::sample_sd(series);
    if (!(sd > 0.0)) throw DomainError("BDS test undefined for a constant series");
    const double eps = eps_multiplier * sd;

    std::vector<unsigned char> I(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) I[i * n + j] = std::abs(series[i] - series[j]) < eps;
    auto ind = [&](std::size_t i, std::size_t j) { return I[i * n + j] != 0; };

    // Correlation integral of the full sample and k (triples sharing a point).
    double upper = 0.0, total = 0.0, row_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += ind(i, j);
        total += row;
        row_sq += row * row;
        for (std::size_t j = i + 1; j < n; ++j) upper += ind(i, j);
    }
    const double nd = static_cast<double>(n);
    const double c1 = upper / (nd * (nd - 1.0) / 2.0);
    const double k = (row_sq - 3.0 * total + 2.0 * nd) / (nd * (nd - 1.0) * (nd - 2.0));

    // C_m over embedded vectors and C_1 on the matching truncated sample.
    const std::size_t nm = n - m + 1;
    double cm = 0.0, c1m = 0.0;
    for (std::size_t i = 0; i < nm; ++i)
        for (std::size_t j = i + 1; j < nm; ++j) {
            bool all = true;
            for (std::size_t l = 0; l < m && all; ++l) all = ind(i + l, j + l);
            cm += all;
            c1m += ind(i + m - 1, j + m - 1);
        }
    const double pairs = static_cast<double>(nm) * static_cast<double>(nm - 1) / 2.0;
    cm /= pairs;
    c1m /= pairs;

    const double md = static_cast<double>(m);
    double tmp = 0.0;
    for (std::size_t j = 1; j < m; ++j)
        tmp += std::pow(k, md - static_cast<double>(j)) * std::pow(c1, 2.0 * static_cast<double>(j));
    const double var = 4.0 * (std::pow(k, md) + 2.0 * tmp + (md - 1.0) * (md - 1.0) * std::pow(c1, 2.0 * md) -
                              md * md * k * std::pow(c1, 2.0 * md - 2.0));
    if (!(var > 0.0)) throw DomainError("BDS variance is not positive (degenerate series)");

    TestResult r;
    r.lag = m;
    r.statistic = std::sqrt(static_cast<double>(nm)) * (cm - std::pow(c1m, md)) / std::sqrt(var);
    r.p_value = 2.0 * numeric::normal_sf(std::abs(r.statistic));
    return r;
}

// -------------------------------------------------------------- simulation

double BoundedMap::operator()(double y, double e) const {
    double out = beta0;
    for (std::size_t i = 0; i < beta.size(); ++i) out += beta[i] * sigmoid(mu[i] + phi1[i] * y + phi2[i] * e);
    return out;
}

BoundedMap BoundedMap::random(std::size_t k, double scale, std::uint64_t seed) {
    GaussianSource src(seed);
    auto u = [&] { return scale * (2.0 * src.uniform() - 1.0); };
    BoundedMap g;
    g.beta0 = u();
    for (std::size_t i = 0; i < k; ++i) {
        g.beta.push_back(u());
        g.mu.push_back(u());
        g.phi1.push_back(u());
        g.phi2.push_back(u());
    }
    return g;
}

std::vector<double> simulate_narfima_chain(const ChainConfig& cfg, std::size_t T, double y0,
                                           std::uint64_t seed) {
    if (!(cfg.sigma > 0.0)) throw DomainError("chain innovation sigma must be positive");
    const auto& g = cfg.g;
    if (g.mu.size() != g.nodes() || g.phi1.size() != g.nodes() || g.phi2.size() != g.nodes())
        throw ContractError("bounded map coefficient vectors differ in length");
    if (T == 0) return {};
    const auto e = simulate_arfima(cfg.feedback_d, {}, {}, cfg.feedback_sigma, T,
                                   sub_seed(seed, "feedback"));
    GaussianSource eps(sub_seed(seed, "innovations"));
    std::vector<double> y(T);
    y[0] = y0;
    for (std::size_t t = 1; t < T; ++t)
        y[t] = cfg.psi1 * y[t - 1] + cfg.psi2 * e[t - 1] + g(y[t - 1], e[t - 1]) + cfg.sigma * eps();
    return y;
}

ErgodicityReport ergodicity_diagnostic(std::span<const double> chain_a,
                                       std::span<const double> chain_b, double burn_in) {
    if (!(burn_in >= 0.0 && burn_in < 1.0)) throw DomainError("burn-in fraction must lie in [0, 1)");
    auto burn = [&](std::span<const double> c) {
        return static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(c.size())));
    };
    if (chain_a.size() < 3 || chain_b.size() < 3 || burn(chain_a) + 2 > chain_a.size() ||
        burn(chain_b) + 2 > chain_b.size())
        throw ContractError("chains are shorter than the burn-in");

    ErgodicityReport r;
    constexpr double kBlowUp = 1e100;
    auto finite = [&](double v) { return std::isfinite(v) && std::abs(v) < kBlowUp; };

    // Transition pairs (V(y_{t-1}), V(y_t)) from both full chains, V(y) = 1 + y^2,
    // normalised by the largest finite V so explosive chains stay representable.
    std::vector<std::pair<double, double>> pairs;
    double vmax = 1.0;
    for (auto c : {chain_a, chain_b})
        for (std::size_t t = 1; t < c.size(); ++t) {
            if (!finite(c[t - 1]) || !finite(c[t])) {
                r.diverged = true;
                continue;
            }
            const double a = 1.0 + c[t - 1] * c[t - 1], b = 1.0 + c[t] * c[t];
            pairs.emplace_back(a, b);
            vmax = std::max({vmax, a, b});
        }
    if (pairs.size() < 4) {
        r.diverged = true;
        r.chain_distance = 1.0;
        return r;
    }
    for (auto& [a, b] : pairs) {
        a /= vmax;
        b /= vmax;
    }
    std::sort(pairs.begin(), pairs.end());
    const std::size_t bins = std::clamp<std::size_t>(pairs.size() / 20, 2, 50);
    std::vector<double> bx, by;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t lo = b * pairs.size() / bins, hi = (b + 1) * pairs.size() / bins;
        if (hi == lo) continue;
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            sx += pairs[i].first;
            sy += pairs[i].second;
        }
        bx.push_back(sx / static_cast<double>(hi - lo));
        by.push_back(sy / static_cast<double>(hi - lo));
    }
    const double mx = numeric::mean(bx), my = numeric::mean(by);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < bx.size(); ++i) {
        sxy += (bx[i] - mx) * (by[i] - my);
        sxx += (bx[i] - mx) * (bx[i] - mx);
    }
    r.drift_slope = sxx > 0.0 ? sxy / sxx : 1.0;
    r.drift_B = (my - r.drift_slope * mx) * vmax;
    r.drift_feasible = r.drift_slope < 1.0 && !r.diverged;
    r.drift_delta = std::clamp(1.0 - r.drift_slope, 0.0, 1.0);

    auto post = [&](std::span<const double> c) {
        std::vector<double> v;
        for (std::size_t t = burn(c); t < c.size(); ++t)
            if (finite(c[t])) v.push_back(c[t]);
        return v;
    };
    auto pa = post(chain_a), pb = post(chain_b);
    r.chain_distance = (pa.empty() || pb.empty()) ? 1.0 : numeric::ks_statistic(std::move(pa), std::move(pb));
    return r;
}

}  // namespace narfima
