#include "narfima/arfimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "narfima/error.hpp"
#include "narfima/fracdiff.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"

namespace narfima {

namespace {

constexpr double kMaxLogit = 15.0;     // keeps d strictly inside (0, 0.5)
constexpr double kMaxMaRaw = 5.0;

double d_from_logit(double u) {
    u = std::clamp(u, -kMaxLogit, kMaxLogit);
    return 0.5 / (1.0 + std::exp(-u));
}

double logit_from_d(double d) { return -std::log(0.5 / d - 1.0); }

std::vector<double> ma_from_raw(std::span<const double> raw) {
    std::vector<double> clamped(raw.begin(), raw.end());
    for (double& v : clamped) v = std::clamp(v, -kMaxMaRaw, kMaxMaRaw);
    // stable_from_unconstrained gives c with 1 - sum c_k z^k stable; theta = -c
    auto c = numeric::stable_from_unconstrained(clamped);
    for (double& v : c) v = -v;
    return c;
}

// a~_t = a_t - sum_k theta_k a~_{t-k}
void ma_inverse_filter(std::span<double> series, std::span<const double> theta) {
    const std::size_t n = series.size();
    for (std::size_t t = 0; t < n; ++t) {
        double acc = series[t];
        for (std::size_t k = 1; k <= theta.size() && k <= t; ++k) acc -= theta[k - 1] * series[t - k];
        series[t] = acc;
    }
}

struct CssEvaluation {
    double sse = std::numeric_limits<double>::infinity();
    Eigen::VectorXd coef;  // [phi_1..phi_p, mu, pi_1..pi_r]
    Eigen::VectorXd eps;
};

// Conditional sum of squares with the linear coefficients profiled out.
class CssProblem {
public:
    CssProblem(const TimeSeriesDataset& train, const ArfimaxSpec& spec)
        : spec_(spec), n_(train.size()) {
        const auto& y = train.target();
        level_ = numeric::mean(y);
        yc_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) yc_[t] = y[t] - level_;
        if (spec.include_exogenous) {
            for (const auto& col : train.exogenous()) {
                const double m = numeric::mean(col);
                centers_.push_back(m);
                std::vector<double> c(n_);
                for (std::size_t t = 0; t < n_; ++t) c[t] = col[t] - m;
                xc_.push_back(std::move(c));
            }
        }
    }

    std::size_t r() const { return xc_.size(); }
    std::size_t n() const { return n_; }
    double level() const { return level_; }
    const std::vector<double>& centers() const { return centers_; }

    std::vector<double> differenced(double d) const {
        if (d == 0.0) return yc_;
        return causal_filter(yc_, binomial_filter(d, n_ - 1));
    }

    CssEvaluation evaluate(double d, std::span<const double> theta) const {
        const auto w = differenced(d);
        const auto N = static_cast<Eigen::Index>(n_);
        const std::size_t k = spec_.p + 1 + r();
        Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(k));
        Eigen::VectorXd target(N);
        for (std::size_t t = 0; t < n_; ++t) {
            const auto row = static_cast<Eigen::Index>(t);
            target(row) = w[t];
            for (std::size_t i = 1; i <= spec_.p; ++i)
                if (t >= i) Z(row, static_cast<Eigen::Index>(i - 1)) = w[t - i];
            Z(row, static_cast<Eigen::Index>(spec_.p)) = 1.0;
            for (std::size_t j = 0; j < r(); ++j)
                if (t >= 1) Z(row, static_cast<Eigen::Index>(spec_.p + 1 + j)) = xc_[j][t - 1];
        }
        if (!theta.empty()) {
            ma_inverse_filter(std::span<double>(target.data(), n_), theta);
            for (Eigen::Index c = 0; c < Z.cols(); ++c)
                ma_inverse_filter(std::span<double>(Z.col(c).data(), n_), theta);
        }
        auto ls = numeric::least_squares(Z, target);
        CssEvaluation out;
        out.sse = ls.ssr;
        out.coef = std::move(ls.coef);
        out.eps = std::move(ls.residuals);
        return out;
    }

private:
    ArfimaxSpec spec_;
    std::size_t n_;
    double level_ = 0.0;
    std::vector<double> yc_;
    std::vector<double> centers_;
    std::vector<std::vector<double>> xc_;
};

ArfimaxModel fit_css(const TimeSeriesDataset& train, const ArfimaxSpec& spec,
                     std::optional<double> fixed_d, const ArfimaxFitOptions& options) {
    if (spec.p > ArfimaxSpec::kMaxOrder || spec.q > ArfimaxSpec::kMaxOrder)
        throw ContractError("ARFIMAx orders must not exceed 5");
    const std::size_t r = spec.include_exogenous ? train.num_exogenous() : 0;
    const std::size_t needed = 10 * (spec.p + spec.q + r + 2);
    if (train.size() <= needed)
        throw InsufficientDataError("ARFIMAx(" + std::to_string(spec.p) + "," +
                                    std::to_string(spec.q) + ") needs more than " +
                                    std::to_string(needed) + " observations, got " +
                                    std::to_string(train.size()));

    const CssProblem problem(train, spec);
    const bool estimate_d = !fixed_d.has_value();
    const std::size_t offset = estimate_d ? 1 : 0;

    auto unpack = [&](std::span<const double> x) {
        const double d = estimate_d ? d_from_logit(x[0]) : *fixed_d;
        return std::make_pair(d, ma_from_raw(x.subspan(offset)));
    };
    auto objective = [&](std::span<const double> x) {
        auto [d, theta] = unpack(x);
        return problem.evaluate(d, theta).sse;
    };

    numeric::MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    const std::size_t dims = offset + spec.q;
    if (dims == 0) {
        best.value = objective({});
        best.converged = true;
        any_converged = true;
    } else {
        numeric::NelderMeadOptions nm;
        nm.max_iter = options.max_iter;
        nm.initial_step = 0.5;
        const std::size_t starts = std::max<std::size_t>(1, options.starts);
        for (std::size_t s = 0; s < starts; ++s) {
            std::vector<double> x0(dims, 0.0);
            const double frac = starts == 1 ? 0.5 : static_cast<double>(s) / static_cast<double>(starts - 1);
            if (estimate_d) x0[0] = logit_from_d(0.05 + 0.4 * frac);
            for (std::size_t k = 0; k < spec.q; ++k)
                x0[offset + k] = (s % 2 == 0 ? 0.0 : 0.3) * (k % 2 == 0 ? 1.0 : -1.0);
            auto res = numeric::nelder_mead(objective, x0, nm);
            any_converged = any_converged || res.converged;
            if (res.value < best.value) best = std::move(res);
        }
    }
    if (!any_converged || !std::isfinite(best.value))
        throw FitError("CSS optimizer did not converge in " + std::to_string(options.max_iter) +
                           " iterations",
                       best.value);

    auto [d, theta] = unpack(best.x);
    auto eval = problem.evaluate(d, theta);

    ArfimaxModel model;
    model.spec = spec;
    model.d = d;
    model.d_estimated = estimate_d;
    model.phi.assign(eval.coef.data(), eval.coef.data() + spec.p);
    model.mu = eval.coef(static_cast<Eigen::Index>(spec.p));
    model.pi.assign(eval.coef.data() + spec.p + 1, eval.coef.data() + eval.coef.size());
    model.theta = std::move(theta);
    model.level = problem.level();
    model.exog_center = problem.centers();

    if (!numeric::ar_polynomial_stable(model.phi))
        throw NonInvertibleError("fitted AR polynomial has a root on or inside the unit circle");
    std::vector<double> neg_theta(model.theta.size());
    std::transform(model.theta.begin(), model.theta.end(), neg_theta.begin(), [](double v) { return -v; });
    if (!numeric::ar_polynomial_stable(neg_theta))
        throw NonInvertibleError("fitted MA polynomial is not invertible");

    const auto n = train.size();
    model.residuals.assign(eval.eps.data(), eval.eps.data() + eval.eps.size());
    model.fitted.resize(n);
    for (std::size_t t = 0; t < n; ++t) model.fitted[t] = train.target()[t] - model.residuals[t];
    model.loglik_proxy = eval.sse;
    model.sigma2 = eval.sse / static_cast<double>(n);
    const double params = static_cast<double>(spec.p + spec.q + 1 + r + offset + 1);
    model.aic = static_cast<double>(n) * std::log(std::max(model.sigma2, 1e-300)) + 2.0 * params;

    model.history = train.target();
    if (r > 0) {
        for (std::size_t j = 0; j < r; ++j) model.last_exogenous.push_back(train.exogenous()[j].back());
    }
    return model;
}

}  // namespace

ArfimaxModel fit_arfimax(const TimeSeriesDataset& train, const ArfimaxSpec& spec,
                         const ArfimaxFitOptions& options) {
    return fit_css(train, spec, std::nullopt, options);
}

ArfimaxModel fit_arimax(const TimeSeriesDataset& train, const ArfimaxSpec& spec, double d,
                        const ArfimaxFitOptions& options) {
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("fixed differencing order must lie in [0, 1]");
    return fit_css(train, spec, d, options);
}

OrderSelection select_order_fit(const TimeSeriesDataset& train, std::size_t max_p,
                                std::size_t max_q, std::optional<double> fixed_d,
                                bool include_exogenous, const ArfimaxFitOptions& options) {
    if (max_p > ArfimaxSpec::kMaxOrder || max_q > ArfimaxSpec::kMaxOrder)
        throw ContractError("order grid bounds must not exceed 5");
    std::vector<ArfimaxSpec> cells;
    for (std::size_t p = 0; p <= max_p; ++p)
        for (std::size_t q = 0; q <= max_q; ++q) cells.push_back({p, q, include_exogenous});

    std::vector<std::optional<ArfimaxModel>> fits(cells.size());
    std::vector<std::string> errors(cells.size());
    numeric::parallel_for(cells.size(), [&](std::size_t i) {
        try {
            fits[i] = fixed_d ? fit_arimax(train, cells[i], *fixed_d, options)
                              : fit_arfimax(train, cells[i], options);
        } catch (const Error& e) {
            errors[i] = "(" + std::to_string(cells[i].p) + "," + std::to_string(cells[i].q) +
                        "): " + e.what();
        }
    });

    OrderSelection out;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!fits[i]) {
            out.failures.push_back(errors[i]);
            continue;
        }
        auto key = [&](std::size_t k) {
            return std::make_tuple(fits[k]->aic, cells[k].p + cells[k].q, cells[k].p);
        };
        if (!best || key(i) < key(*best)) best = i;
    }
    if (!best) {
        std::string msg = "every order-selection cell failed:";
        for (const auto& f : out.failures) msg += "\n  " + f;
        throw FitError(msg, std::numeric_limits<double>::infinity());
    }
    out.spec = cells[*best];
    out.model = std::move(*fits[*best]);
    return out;
}

ArfimaxSpec select_order(const TimeSeriesDataset& train, std::size_t max_p, std::size_t max_q) {
    return select_order_fit(train, max_p, max_q).spec;
}

std::vector<double> arfimax_forecast(const ArfimaxModel& model, std::size_t h,
                                     const std::optional<ExogenousMatrix>& future_exogenous,
                                     FutureExogMode mode) {
    if (h == 0) throw ContractError("forecast horizon must be positive");
    const std::size_t r = model.pi.size();
    const std::size_t n = model.history.size();
    if (n == 0) throw ContractError("model carries no training history");
    if (r > 0 && h > 1 && mode == FutureExogMode::Required) {
        if (!future_exogenous || future_exogenous->size() != r)
            throw ContractError("future covariates required for " + std::to_string(r) +
                                " exogenous regressors");
        for (const auto& col : *future_exogenous)
            if (col.size() + 1 < h)
                throw ContractError("future covariates cover fewer than h-1 steps");
    }

    const std::size_t total = n + h;
    const auto filt = binomial_filter(model.d, total);
    std::vector<double> yc(total, 0.0);
    for (std::size_t t = 0; t < n; ++t) yc[t] = model.history[t] - model.level;
    std::vector<double> w = causal_filter(std::span<const double>(yc.data(), n), filt);
    w.resize(total, 0.0);

    auto covariate = [&](std::size_t j, std::size_t t) {  // centred X_{j,t}
        double raw = 0.0;
        if (t < n) {
            raw = model.last_exogenous.at(j);  // only t = n-1 is ever requested
        } else if (mode == FutureExogMode::FreezeLast || !future_exogenous) {
            raw = model.last_exogenous.at(j);
        } else {
            raw = (*future_exogenous)[j][t - n];
        }
        return raw - model.exog_center.at(j);
    };

    std::vector<double> out(h);
    for (std::size_t step = 0; step < h; ++step) {
        const std::size_t t = n + step;
        double wt = model.mu;
        for (std::size_t i = 1; i <= model.phi.size(); ++i)
            if (t >= i) wt += model.phi[i - 1] * w[t - i];
        for (std::size_t j = 0; j < r; ++j) wt += model.pi[j] * covariate(j, t - 1);
        for (std::size_t k = 1; k <= model.theta.size(); ++k)
            if (t >= k && t - k < n) wt += model.theta[k - 1] * model.residuals[t - k];
        w[t] = wt;
        double yt = wt;
        for (std::size_t v = 1; v <= t; ++v) yt -= filt[v] * yc[t - v];
        yc[t] = yt;
        out[step] = yt + model.level;
    }
    return out;
}

std::vector<double> simulate_arfima(double d, std::span<const double> phi,
                                    std::span<const double> theta, double sigma, std::size_t T,
                                    std::uint64_t seed) {
    if (!(d >= 0.0 && d < 0.5)) throw DomainError("simulation requires 0 <= d < 0.5");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
    if (!numeric::ar_polynomial_stable(phi)) throw DomainError("AR polynomial is not stationary");
    std::vector<double> neg_theta(theta.size());
    std::transform(theta.begin(), theta.end(), neg_theta.begin(), [](double v) { return -v; });
    if (!numeric::ar_polynomial_stable(neg_theta)) throw DomainError("MA polynomial is not invertible");
    if (T == 0) return {};

    const std::size_t burn = (phi.empty() && theta.empty()) ? 0 : 200;
    GaussianSource noise(seed);
    std::vector<double> eps(T + burn), x(T + burn, 0.0);
    for (double& e : eps) e = sigma * noise();
    for (std::size_t t = 0; t < T + burn; ++t) {
        double v = eps[t];
        for (std::size_t i = 1; i <= phi.size() && i <= t; ++i) v += phi[i - 1] * x[t - i];
        for (std::size_t k = 1; k <= theta.size() && k <= t; ++k) v += theta[k - 1] * eps[t - k];
        x[t] = v;
    }
    std::vector<double> arma(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
    if (d == 0.0) return arma;
    return frac_integrate(arma, d);
}

}  // namespace narfima
