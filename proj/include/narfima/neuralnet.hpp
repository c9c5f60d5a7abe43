#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace narfima {

// Per-column z-score statistics for the design matrix and the target.
struct FeatureScaler {
    std::vector<double> center;
    std::vector<double> scale;
    double target_center = 0.0;
    double target_scale = 1.0;

    static FeatureScaler identity(std::size_t columns);
    static FeatureScaler fit(const Eigen::MatrixXd& rows, std::span<const double> targets);

    Eigen::VectorXd transform(std::span<const double> row) const;
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
    double scale_target(double y) const { return (y - target_center) / target_scale; }
    double unscale_target(double z) const { return z * target_scale + target_center; }
};

// Row at time t is [y_t..y_{t-p+1}, e_t..e_{t-q+1}, X_{1,t}..X_{r,t}] with target y_{t+1}.
struct FeatureMatrix {
    std::size_t p = 0;
    std::size_t q = 0;
    std::size_t r = 0;
    Eigen::MatrixXd raw;
    Eigen::VectorXd targets;
    FeatureScaler scaler;
    Eigen::MatrixXd scaled;
    Eigen::VectorXd scaled_targets;

    std::size_t rows() const { return static_cast<std::size_t>(raw.rows()); }
    std::size_t columns() const { return p + q + r; }
};

// Covariates are given column-wise. q may be 0 (no residual inputs, as in ARNNx).
FeatureMatrix build_feature_matrix(std::span<const double> y, std::span<const double> e,
                                   const std::vector<std::vector<double>>& X, std::size_t p,
                                   std::size_t q);

// Single feature row at 0-based time index t (requires t + 1 >= max(p, q)).
std::vector<double> feature_row(std::span<const double> y, std::span<const double> e,
                                const std::vector<std::vector<double>>& X, std::size_t p,
                                std::size_t q, std::size_t t);

// Single-hidden-layer logistic network with optional linear skip connections:
//   out = bias + sum_l hidden_out_l * sigmoid(hidden_bias_l + hidden_in_l . x) + skip . x
struct NetworkWeights {
    std::size_t k = 0;
    bool skip = false;
    Eigen::MatrixXd hidden_in;    // k x inputs
    Eigen::VectorXd hidden_bias;  // k
    Eigen::VectorXd hidden_out;   // k
    Eigen::VectorXd skip_weights; // inputs, identically zero when !skip
    double bias = 0.0;

    static NetworkWeights zeros(std::size_t inputs, std::size_t k, bool skip);

    std::size_t inputs() const { return static_cast<std::size_t>(hidden_in.cols()); }
    std::size_t parameter_count() const { return (inputs() + 2) * k + inputs() + 1; }

    // Flat layout: hidden_in (row-major), hidden_bias, hidden_out, skip_weights, bias.
    Eigen::VectorXd pack() const;
    void unpack(const Eigen::VectorXd& flat);

    // Network output for an already-scaled input.
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TrainConfig {
    std::size_t max_iter = 2000;
    std::size_t restarts = 3;
    std::uint64_t seed = 1;
    double init_range = 0.5;
    double tolerance = 1e-8;
    double weight_decay = 0.0;
};

struct TrainResult {
    NetworkWeights weights;
    double loss = 0.0;
    std::size_t iterations = 0;
    std::size_t restart = 0;          // index of the winning restart
    std::vector<double> loss_trace;   // accepted-step losses of the winning restart
    std::vector<std::string> warnings;
};

// Mean squared error of the scaled targets.
double network_loss(const NetworkWeights& weights, const FeatureMatrix& features);

// Exact gradient of network_loss in the same shape as the weights. Skip entries
// are zero when weights.skip is false.
NetworkWeights network_gradient(const NetworkWeights& weights, const FeatureMatrix& features);

TrainResult train_network_detailed(const FeatureMatrix& features, std::size_t k, bool skip,
                                   const TrainConfig& cfg);

NetworkWeights train_network(const FeatureMatrix& features, std::size_t k, bool skip,
                             const TrainConfig& cfg);

// Scales `input_row`, evaluates the network and returns the unscaled prediction.
double predict_one(const NetworkWeights& weights, std::span<const double> input_row,
                   const FeatureScaler& scaler);

// Skip weights expressed on the raw (unscaled) input/target scale.
std::vector<double> raw_skip_weights(const NetworkWeights& weights, const FeatureScaler& scaler);

}  // namespace narfima
