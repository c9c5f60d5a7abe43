#include "narfima/narfima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "narfima/error.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"

namespace narfima {

namespace {

void check_range(const IntRange& r, const char* name) {
    if (r.lo < 1 || r.hi > 5 || r.lo > r.hi)
        throw ContractError(std::string("grid range for ") + name + " must satisfy 1 <= lo <= hi <= 5");
}

TrainConfig network_config(const NarfimaConfig& cfg) {
    TrainConfig t = cfg.train;
    t.seed = sub_seed(cfg.seed, "network");
    return t;
}

std::size_t max_lag(const NarfimaConfig& cfg) {
    return std::max(cfg.grid_p.hi, cfg.use_residuals ? cfg.grid_q.hi : std::size_t{0});
}

double rmse(std::span<const double> a, std::span<const double> b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

ExogenousMatrix covariate_block(const TimeSeriesDataset& ds, std::size_t begin, std::size_t end) {
    ExogenousMatrix out;
    for (const auto& col : ds.exogenous())
        out.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(begin),
                         col.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace

void NarfimaConfig::validate() const {
    check_range(grid_p, "p");
    if (use_residuals) check_range(grid_q, "q");
    check_range(grid_k, "k");
    if (validation_length < 1) throw ContractError("validation_length must be at least 1");
}

std::string to_string(Stage1Kind kind) {
    switch (kind) {
        case Stage1Kind::Arfimax: return "ARFIMAX";
        case Stage1Kind::Arimax: return "ARIMAX";
        case Stage1Kind::Naive: return "NAIVE";
    }
    return "?";
}

Stage1Kind stage1_from_string(const std::string& name) {
    if (name == "ARFIMAX") return Stage1Kind::Arfimax;
    if (name == "ARIMAX") return Stage1Kind::Arimax;
    if (name == "NAIVE") return Stage1Kind::Naive;
    throw ContractError("unknown stage-1 model '" + name + "'");
}

std::string to_string(SkipMode mode) {
    switch (mode) {
        case SkipMode::Both: return "both";
        case SkipMode::On: return "true";
        case SkipMode::Off: return "false";
    }
    return "?";
}

SkipMode skip_mode_from_string(const std::string& name) {
    if (name == "both") return SkipMode::Both;
    if (name == "true") return SkipMode::On;
    if (name == "false") return SkipMode::Off;
    throw ContractError("try_skip must be one of both|true|false, got '" + name + "'");
}

Stage1Model fit_stage1(const TimeSeriesDataset& train, const NarfimaConfig& cfg) {
    Stage1Model s;
    s.kind = cfg.stage1;
    const auto& y = train.target();
    switch (cfg.stage1) {
        case Stage1Kind::Naive: {
            s.residuals.assign(y.size(), 0.0);
            for (std::size_t t = 1; t < y.size(); ++t) s.residuals[t] = y[t] - y[t - 1];
            break;
        }
        case Stage1Kind::Arfimax:
        case Stage1Kind::Arimax: {
            const std::optional<double> d =
                cfg.stage1 == Stage1Kind::Arimax ? std::optional<double>(cfg.arima_d) : std::nullopt;
            auto sel = select_order_fit(train, cfg.stage1_max_p, cfg.stage1_max_q, d, true,
                                        cfg.stage1_fit);
            s.residuals = sel.model.residuals;
            s.linear = std::move(sel.model);
            break;
        }
    }
    return s;
}

std::vector<GridCell> enumerate_grid(const NarfimaConfig& cfg) {
    std::vector<bool> skips;
    if (cfg.try_skip != SkipMode::On) skips.push_back(false);
    if (cfg.try_skip != SkipMode::Off) skips.push_back(true);
    const IntRange qr = cfg.use_residuals ? cfg.grid_q : IntRange{0, 0};
    std::vector<GridCell> cells;
    for (std::size_t p = cfg.grid_p.lo; p <= cfg.grid_p.hi; ++p)
        for (std::size_t q = qr.lo; q <= qr.hi; ++q)
            for (std::size_t k = cfg.grid_k.lo; k <= cfg.grid_k.hi; ++k)
                for (bool skip : skips) cells.push_back({p, q, k, skip});
    return cells;
}

bool tie_break_less(const GridCell& a, const GridCell& b) {
    auto key = [](const GridCell& c) {
        return std::make_tuple(c.p + c.q + c.k, c.skip ? 1 : 0, c.p, c.q, c.k);
    };
    return key(a) < key(b);
}

namespace {

NarfimaPipeline assemble(const TimeSeriesDataset& train, Stage1Model stage1, const GridCell& cell,
                         const NarfimaConfig& cfg) {
    const auto& y = train.target();
    const std::vector<double> no_residuals;
    const std::vector<double>& e = cell.q > 0 ? stage1.residuals : no_residuals;
    const auto fm = build_feature_matrix(y, e, train.exogenous(), cell.p, cell.q);
    auto trained = train_network_detailed(fm, cell.k, cell.skip, network_config(cfg));

    NarfimaPipeline pipe;
    pipe.network = std::move(trained.weights);
    pipe.chosen = cell;
    pipe.scaler = fm.scaler;
    const std::size_t lag = std::max(cell.p, cell.q);
    pipe.tail_y.assign(y.end() - static_cast<std::ptrdiff_t>(lag), y.end());
    if (cell.q > 0) pipe.tail_e.assign(e.end() - static_cast<std::ptrdiff_t>(lag), e.end());
    for (const auto& col : train.exogenous()) pipe.last_exogenous.push_back(col.back());
    pipe.exogenous_names = train.exogenous_names();
    pipe.last_timestamp = train.timestamps().back();
    pipe.future_exog_mode = cfg.future_exog_mode;

    double ss = 0.0;
    for (Eigen::Index i = 0; i < fm.scaled.rows(); ++i) {
        const double pred = fm.scaler.unscale_target(pipe.network.evaluate(fm.scaled.row(i).transpose()));
        ss += (pred - fm.targets(i)) * (pred - fm.targets(i));
    }
    pipe.in_sample_rmse = std::sqrt(ss / static_cast<double>(fm.scaled.rows()));
    pipe.stage1 = std::move(stage1);
    return pipe;
}

}  // namespace

CrossValidation cross_validate_detailed(const TimeSeriesDataset& train, const NarfimaConfig& cfg) {
    cfg.validate();
    const std::size_t n = train.size();
    const std::size_t V = cfg.validation_length;
    if (n <= V + 2 * max_lag(cfg))
        throw InsufficientDataError("training length " + std::to_string(n) +
                                    " too short for validation length " + std::to_string(V) +
                                    " and maximum lag " + std::to_string(max_lag(cfg)));

    const auto fit_part = train.slice(0, n - V);
    Stage1Model stage1;
    if (cfg.use_residuals) stage1 = fit_stage1(fit_part, cfg);
    const auto future = covariate_block(train, n - V, n);
    const std::span<const double> actual(train.target().data() + (n - V), V);

    const auto cells = enumerate_grid(cfg);
    CrossValidation cv;
    cv.table.resize(cells.size());
    numeric::parallel_for(cells.size(), [&](std::size_t i) {
        cv.table[i].cell = cells[i];
        try {
            auto pipe = assemble(fit_part, stage1, cells[i], cfg);
            const auto fc = forecast_recursive(pipe, V, future);
            const double score = rmse(fc, actual);
            if (!std::isfinite(score)) throw TrainingError("non-finite validation forecast");
            cv.table[i].rmse = score;
        } catch (const Error& e) {
            cv.table[i].error = e.what();
        }
    });

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cv.table.size(); ++i) {
        if (!cv.table[i].rmse) continue;
        if (!best) {
            best = i;
            continue;
        }
        const double a = *cv.table[i].rmse;
        const double b = *cv.table[*best].rmse;
        if (a < b || (a == b && tie_break_less(cv.table[i].cell, cv.table[*best].cell))) best = i;
    }
    if (!best) {
        std::string msg = "every cross-validation cell failed:";
        for (const auto& c : cv.table) msg += "\n  " + c.error;
        throw FitError(msg, std::numeric_limits<double>::infinity());
    }
    cv.chosen = cv.table[*best].cell;
    return cv;
}

GridCell cross_validate(const TimeSeriesDataset& train, const NarfimaConfig& cfg) {
    return cross_validate_detailed(train, cfg).chosen;
}

NarfimaPipeline fit_narfima_cell(const TimeSeriesDataset& train, const NarfimaConfig& cfg,
                                 const GridCell& cell) {
    Stage1Model stage1;
    if (cell.q > 0) stage1 = fit_stage1(train, cfg);
    if (stage1.residuals.size() < std::max(cell.p, cell.q) + 1 && cell.q > 0)
        throw InsufficientDataError("stage-1 residuals shorter than max(p,q)+1");
    return assemble(train, std::move(stage1), cell, cfg);
}

NarfimaPipeline fit_narfima(const TimeSeriesDataset& train, const NarfimaConfig& cfg) {
    const auto chosen = cross_validate(train, cfg);
    return fit_narfima_cell(train, cfg, chosen);
}

std::vector<double> forecast_recursive(const NarfimaPipeline& pipeline, std::size_t h,
                                       const std::optional<ExogenousMatrix>& future_exogenous) {
    if (h == 0) throw ContractError("forecast horizon must be positive");
    const auto& cell = pipeline.chosen;
    const std::size_t r = pipeline.last_exogenous.size();
    const bool freeze = pipeline.future_exog_mode == FutureExogMode::FreezeLast;
    if (r > 0 && h > 1 && !freeze) {
        std::string names;
        for (const auto& n : pipeline.exogenous_names) names += (names.empty() ? "" : ", ") + n;
        if (!future_exogenous || future_exogenous->size() != r)
            throw ContractError("future values required for covariates: " + names);
        for (const auto& col : *future_exogenous)
            if (col.size() + 1 < h)
                throw ContractError("future covariates cover fewer than h-1 steps for: " + names);
    }

    // Histories in reverse-chronological access: y_hist.back() is the latest value.
    std::vector<double> y_hist = pipeline.tail_y;
    std::vector<double> e_hist = pipeline.tail_e;
    std::vector<double> row(cell.p + cell.q + r);
    std::vector<double> out(h);
    for (std::size_t step = 0; step < h; ++step) {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < cell.p; ++i) row[pos++] = y_hist[y_hist.size() - 1 - i];
        for (std::size_t j = 0; j < cell.q; ++j) row[pos++] = e_hist[e_hist.size() - 1 - j];
        for (std::size_t c = 0; c < r; ++c) {
            if (step == 0 || freeze || !future_exogenous)
                row[pos++] = pipeline.last_exogenous[c];
            else
                row[pos++] = (*future_exogenous)[c][step - 1];
        }
        const double pred = predict_one(pipeline.network, row, pipeline.scaler);
        out[step] = pred;
        y_hist.push_back(pred);
        if (cell.q > 0) e_hist.push_back(0.0);
    }
    return out;
}

std::vector<double> in_sample_predictions(const NarfimaPipeline& pipeline,
                                          const TimeSeriesDataset& train) {
    const auto& cell = pipeline.chosen;
    if (train.size() == 0 || train.timestamps().back() != pipeline.last_timestamp)
        throw ContractError("training data does not end at the pipeline's last timestamp");
    if (train.num_exogenous() != pipeline.last_exogenous.size())
        throw ContractError("training data has a different number of covariates than the pipeline");
    if (cell.q > 0 && pipeline.stage1.residuals.size() != train.size())
        throw ContractError("stage-1 residuals do not cover the training data");
    const std::vector<double> none;
    const auto& e = cell.q > 0 ? pipeline.stage1.residuals : none;
    const std::size_t lag = std::max(cell.p, cell.q);
    std::vector<double> out;
    for (std::size_t t = lag - 1; t + 1 < train.size(); ++t)
        out.push_back(predict_one(pipeline.network,
                                  feature_row(train.target(), e, train.exogenous(), cell.p, cell.q, t),
                                  pipeline.scaler));
    return out;
}

}  // namespace narfima
