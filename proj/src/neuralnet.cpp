#include "narfima/neuralnet.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>

#include "narfima/error.hpp"
#include "narfima/numeric.hpp"
#include "narfima/random.hpp"

namespace narfima {

namespace {

constexpr double kConstantColumn = 1e-12;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
    return a.unaryExpr([](double v) { return narfima::sigmoid(v); });
}

struct ForwardPass {
    Eigen::MatrixXd hidden;  // n x k activations
    Eigen::VectorXd output;  // n
};

ForwardPass forward(const NetworkWeights& w, const Eigen::MatrixXd& X) {
    ForwardPass f;
    Eigen::MatrixXd pre = X * w.hidden_in.transpose();
    pre.rowwise() += w.hidden_bias.transpose();
    f.hidden = sigmoid(pre);
    f.output = f.hidden * w.hidden_out;
    f.output.array() += w.bias;
    if (w.skip) f.output += X * w.skip_weights;
    return f;
}

// Training objective: MSE plus optional weight decay on non-bias weights.
struct Objective {
    const FeatureMatrix& features;
    std::size_t inputs;
    std::size_t k;
    bool skip;
    double decay;

    double value(const NetworkWeights& w) const {
        double loss = network_loss(w, features);
        if (decay > 0.0)
            loss += decay * (w.hidden_in.squaredNorm() + w.hidden_out.squaredNorm() +
                             w.skip_weights.squaredNorm());
        return loss;
    }

    Eigen::VectorXd gradient(const NetworkWeights& w) const {
        NetworkWeights g = network_gradient(w, features);
        if (decay > 0.0) {
            g.hidden_in += 2.0 * decay * w.hidden_in;
            g.hidden_out += 2.0 * decay * w.hidden_out;
            if (skip) g.skip_weights += 2.0 * decay * w.skip_weights;
        }
        return g.pack();
    }
};

struct RestartOutcome {
    NetworkWeights weights;
    double loss = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::vector<double> trace;
    std::optional<std::string> failure;
};

NetworkWeights random_init(std::size_t inputs, std::size_t k, bool skip, double range,
                           std::uint64_t seed) {
    GaussianSource src(seed);
    auto draw = [&] { return range * (2.0 * src.uniform() - 1.0); };
    NetworkWeights w = NetworkWeights::zeros(inputs, k, skip);
    for (Eigen::Index i = 0; i < w.hidden_in.rows(); ++i)
        for (Eigen::Index j = 0; j < w.hidden_in.cols(); ++j) w.hidden_in(i, j) = draw();
    for (Eigen::Index i = 0; i < w.hidden_bias.size(); ++i) w.hidden_bias(i) = draw();
    for (Eigen::Index i = 0; i < w.hidden_out.size(); ++i) w.hidden_out(i) = draw();
    if (skip)
        for (Eigen::Index i = 0; i < w.skip_weights.size(); ++i) w.skip_weights(i) = draw();
    w.bias = draw();
    return w;
}

// Limited-memory BFGS directions with step halving; a step is accepted only if
// it lowers the objective. Falls back to steepest descent when the
// quasi-Newton direction fails to make progress.
RestartOutcome optimize(const Objective& obj, NetworkWeights w, const TrainConfig& cfg) {
    constexpr std::size_t kMemory = 8;
    constexpr int kMaxHalvings = 40;

    RestartOutcome out;
    Eigen::VectorXd x = w.pack();
    double fx = obj.value(w);
    if (!std::isfinite(fx)) {
        out.failure = "non-finite initial loss";
        return out;
    }
    Eigen::VectorXd g = obj.gradient(w);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
    out.trace.push_back(fx);
    double step_scale = 1.0;

    std::size_t iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
        if (g.norm() <= 1e-12) break;

        Eigen::VectorXd dir = -g;
        if (!memory.empty()) {
            // two-loop recursion
            std::vector<double> alpha(memory.size());
            Eigen::VectorXd qv = g;
            for (std::size_t m = memory.size(); m-- > 0;) {
                const auto& [s, yv] = memory[m];
                alpha[m] = s.dot(qv) / yv.dot(s);
                qv -= alpha[m] * yv;
            }
            const auto& [s_last, y_last] = memory.back();
            qv *= s_last.dot(y_last) / y_last.squaredNorm();
            for (std::size_t m = 0; m < memory.size(); ++m) {
                const auto& [s, yv] = memory[m];
                const double beta = yv.dot(qv) / yv.dot(s);
                qv += (alpha[m] - beta) * s;
            }
            dir = -qv;
            if (dir.dot(g) >= 0.0) {
                memory.clear();
                dir = -g;
            }
        }

        double step = memory.empty() ? step_scale / std::max(1.0, g.norm()) : 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = fx;
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            x_new = x + step * dir;
            w.unpack(x_new);
            f_new = obj.value(w);
            if (std::isfinite(f_new) && f_new < fx) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!memory.empty()) {
                memory.clear();
                w.unpack(x);
                continue;
            }
            w.unpack(x);
            break;
        }
        if (memory.empty()) step_scale = std::min(step * std::max(1.0, g.norm()) * 2.0, 1e3);

        const Eigen::VectorXd g_new = obj.gradient(w);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g_new - g;
        if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
            memory.emplace_back(s, yv);
            if (memory.size() > kMemory) memory.pop_front();
        }
        const double rel_change = (fx - f_new) / std::max(std::abs(fx), 1e-300);
        x = x_new;
        g = g_new;
        fx = f_new;
        out.trace.push_back(fx);
        if (fx <= 1e-30) break;
        if (rel_change < cfg.tolerance && memory.size() >= 2) break;
    }
    if (!std::isfinite(fx)) {
        out.failure = "loss became non-finite";
        return out;
    }
    w.unpack(x);
    out.weights = std::move(w);
    out.loss = network_loss(out.weights, obj.features);
    out.iterations = iter;
    return out;
}

}  // namespace

FeatureScaler FeatureScaler::identity(std::size_t columns) {
    FeatureScaler s;
    s.center.assign(columns, 0.0);
    s.scale.assign(columns, 1.0);
    return s;
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& rows, std::span<const double> targets) {
    FeatureScaler s;
    const auto cols = static_cast<std::size_t>(rows.cols());
    s.center.resize(cols);
    s.scale.resize(cols);
    std::vector<double> col(static_cast<std::size_t>(rows.rows()));
    for (std::size_t j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            col[static_cast<std::size_t>(i)] = rows(i, static_cast<Eigen::Index>(j));
        s.center[j] = numeric::mean(col);
        const double sd = numeric::sample_sd(col);
        s.scale[j] = sd > kConstantColumn * (1.0 + std::abs(s.center[j])) ? sd : 1.0;
    }
    s.target_center = numeric::mean(targets);
    const double sd = numeric::sample_sd(targets);
    s.target_scale = sd > kConstantColumn * (1.0 + std::abs(s.target_center)) ? sd : 1.0;
    return s;
}

Eigen::VectorXd FeatureScaler::transform(std::span<const double> row) const {
    if (row.size() != center.size())
        throw ContractError("feature row has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(center.size()));
    Eigen::VectorXd out(static_cast<Eigen::Index>(row.size()));
    for (std::size_t j = 0; j < row.size(); ++j)
        out(static_cast<Eigen::Index>(j)) = (row[j] - center[j]) / scale[j];
    return out;
}

Eigen::MatrixXd FeatureScaler::transform(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out = rows;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        out.col(j) = (rows.col(j).array() - center[jj]) / scale[jj];
    }
    return out;
}

std::vector<double> feature_row(std::span<const double> y, std::span<const double> e,
                                const std::vector<std::vector<double>>& X, std::size_t p,
                                std::size_t q, std::size_t t) {
    if (t + 1 < std::max(p, q) || t >= y.size())
        throw ContractError("feature row index out of range");
    std::vector<double> row;
    row.reserve(p + q + X.size());
    for (std::size_t i = 0; i < p; ++i) row.push_back(y[t - i]);
    for (std::size_t j = 0; j < q; ++j) row.push_back(e[t - j]);
    for (const auto& col : X) row.push_back(col[t]);
    return row;
}

FeatureMatrix build_feature_matrix(std::span<const double> y, std::span<const double> e,
                                   const std::vector<std::vector<double>>& X, std::size_t p,
                                   std::size_t q) {
    const std::size_t T = y.size();
    if (p == 0) throw ContractError("p must be at least 1");
    if (q > 0 && e.size() != T) throw ContractError("residual series length differs from target");
    for (const auto& col : X)
        if (col.size() != T) throw ContractError("covariate length differs from target");
    const std::size_t lag = std::max(p, q);
    if (lag >= T)
        throw InsufficientDataError("lag order " + std::to_string(lag) +
                                    " leaves no feature rows for T=" + std::to_string(T));

    FeatureMatrix fm;
    fm.p = p;
    fm.q = q;
    fm.r = X.size();
    const std::size_t rows = T - lag;
    fm.raw.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(fm.columns()));
    fm.targets.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = lag - 1 + i;
        const auto row = feature_row(y, e, X, p, q, t);
        for (std::size_t j = 0; j < row.size(); ++j)
            fm.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        fm.targets(static_cast<Eigen::Index>(i)) = y[t + 1];
    }
    fm.scaler = FeatureScaler::fit(fm.raw, std::span<const double>(fm.targets.data(), rows));
    fm.scaled = fm.scaler.transform(fm.raw);
    fm.scaled_targets = (fm.targets.array() - fm.scaler.target_center) / fm.scaler.target_scale;
    return fm;
}

NetworkWeights NetworkWeights::zeros(std::size_t inputs, std::size_t k, bool skip) {
    NetworkWeights w;
    w.k = k;
    w.skip = skip;
    w.hidden_in = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(inputs));
    w.hidden_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    w.hidden_out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    w.skip_weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inputs));
    return w;
}

Eigen::VectorXd NetworkWeights::pack() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < hidden_in.rows(); ++i)
        for (Eigen::Index j = 0; j < hidden_in.cols(); ++j) flat(pos++) = hidden_in(i, j);
    flat.segment(pos, hidden_bias.size()) = hidden_bias;
    pos += hidden_bias.size();
    flat.segment(pos, hidden_out.size()) = hidden_out;
    pos += hidden_out.size();
    flat.segment(pos, skip_weights.size()) = skip_weights;
    pos += skip_weights.size();
    flat(pos) = bias;
    return flat;
}

void NetworkWeights::unpack(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count()))
        throw ContractError("flat weight vector has the wrong length");
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < hidden_in.rows(); ++i)
        for (Eigen::Index j = 0; j < hidden_in.cols(); ++j) hidden_in(i, j) = flat(pos++);
    hidden_bias = flat.segment(pos, hidden_bias.size());
    pos += hidden_bias.size();
    hidden_out = flat.segment(pos, hidden_out.size());
    pos += hidden_out.size();
    if (skip)
        skip_weights = flat.segment(pos, skip_weights.size());
    else
        skip_weights.setZero();
    pos += skip_weights.size();
    bias = flat(pos);
}

double NetworkWeights::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != static_cast<Eigen::Index>(inputs()))
        throw ContractError("network input has the wrong length");
    double out = bias;
    for (Eigen::Index l = 0; l < hidden_in.rows(); ++l)
        out += hidden_out(l) * narfima::sigmoid(hidden_bias(l) + hidden_in.row(l).dot(x));
    if (skip) out += skip_weights.dot(x);
    return out;
}

double network_loss(const NetworkWeights& weights, const FeatureMatrix& features) {
    if (weights.inputs() != features.columns())
        throw ContractError("network inputs do not match feature columns");
    const auto f = forward(weights, features.scaled);
    return (f.output - features.scaled_targets).squaredNorm() /
           static_cast<double>(features.scaled.rows());
}

NetworkWeights network_gradient(const NetworkWeights& weights, const FeatureMatrix& features) {
    if (weights.inputs() != features.columns())
        throw ContractError("network inputs do not match feature columns");
    const Eigen::MatrixXd& X = features.scaled;
    const auto f = forward(weights, X);
    const double n = static_cast<double>(X.rows());
    const Eigen::VectorXd g = 2.0 * (f.output - features.scaled_targets) / n;

    NetworkWeights grad = NetworkWeights::zeros(weights.inputs(), weights.k, weights.skip);
    grad.bias = g.sum();
    grad.hidden_out = f.hidden.transpose() * g;
    if (weights.skip) grad.skip_weights = X.transpose() * g;
    Eigen::MatrixXd delta = (g * weights.hidden_out.transpose()).array() * f.hidden.array() *
                            (1.0 - f.hidden.array());
    grad.hidden_bias = delta.colwise().sum().transpose();
    grad.hidden_in = delta.transpose() * X;
    return grad;
}

TrainResult train_network_detailed(const FeatureMatrix& features, std::size_t k, bool skip,
                                   const TrainConfig& cfg) {
    if (k == 0) throw ContractError("hidden layer needs at least one node");
    if (cfg.restarts == 0 || cfg.max_iter == 0 || !(cfg.init_range > 0.0) || !(cfg.tolerance > 0.0))
        throw ContractError("training configuration values must be positive");
    if (features.rows() == 0) throw InsufficientDataError("no feature rows to train on");

    const std::size_t inputs = features.columns();
    const Objective obj{features, inputs, k, skip, cfg.weight_decay};

    std::vector<RestartOutcome> outcomes(cfg.restarts);
    numeric::parallel_for(cfg.restarts, [&](std::size_t r) {
        auto init = random_init(inputs, k, skip, cfg.init_range, sub_seed(cfg.seed, r));
        outcomes[r] = optimize(obj, std::move(init), cfg);
    });

    std::optional<std::size_t> best;
    std::string failures;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (outcomes[r].failure) {
            failures += " restart " + std::to_string(r) + ": " + *outcomes[r].failure + ";";
            continue;
        }
        if (!best || outcomes[r].loss < outcomes[*best].loss) best = r;
    }
    if (!best) throw TrainingError("network training failed:" + failures);

    TrainResult result;
    auto& win = outcomes[*best];
    result.weights = std::move(win.weights);
    result.loss = win.loss;
    result.iterations = win.iterations;
    result.restart = *best;
    result.loss_trace = std::move(win.trace);
    if (features.rows() < result.weights.parameter_count())
        result.warnings.push_back("feature rows (" + std::to_string(features.rows()) +
                                  ") fewer than network parameters (" +
                                  std::to_string(result.weights.parameter_count()) + ")");
    return result;
}

NetworkWeights train_network(const FeatureMatrix& features, std::size_t k, bool skip,
                             const TrainConfig& cfg) {
    return train_network_detailed(features, k, skip, cfg).weights;
}

double predict_one(const NetworkWeights& weights, std::span<const double> input_row,
                   const FeatureScaler& scaler) {
    if (input_row.size() != weights.inputs())
        throw ContractError("input row has " + std::to_string(input_row.size()) +
                            " entries, network expects " + std::to_string(weights.inputs()));
    return scaler.unscale_target(weights.evaluate(scaler.transform(input_row)));
}

std::vector<double> raw_skip_weights(const NetworkWeights& weights, const FeatureScaler& scaler) {
    std::vector<double> out(weights.inputs(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = weights.skip_weights(static_cast<Eigen::Index>(j)) * scaler.target_scale /
                 scaler.scale.at(j);
    return out;
}

}  // namespace narfima
