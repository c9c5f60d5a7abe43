#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "narfima/arfimax.hpp"
#include "narfima/neuralnet.hpp"
#include "narfima/timeseries.hpp"

namespace narfima {

// Source of the residual series fed to the network.
enum class Stage1Kind { Arfimax, Arimax, Naive };

enum class SkipMode { Both, On, Off };

struct IntRange {
    std::size_t lo = 1;
    std::size_t hi = 5;
};

struct NarfimaConfig {
    IntRange grid_p{1, 5};
    IntRange grid_q{1, 5};
    IntRange grid_k{1, 5};
    SkipMode try_skip = SkipMode::Both;
    std::size_t validation_length = 6;
    std::uint64_t seed = 1;
    Stage1Kind stage1 = Stage1Kind::Arfimax;
    FutureExogMode future_exog_mode = FutureExogMode::Required;
    // false drops the residual inputs entirely (the ARNNx baseline); grid_q is ignored.
    bool use_residuals = true;

    // Stage-1 order search and, for ARIMAx, the fixed differencing order.
    std::size_t stage1_max_p = 5;
    std::size_t stage1_max_q = 5;
    double arima_d = 1.0;
    ArfimaxFitOptions stage1_fit{};

    TrainConfig train{};  // seed is derived from `seed`

    void validate() const;
};

struct Stage1Model {
    Stage1Kind kind = Stage1Kind::Arfimax;
    std::optional<ArfimaxModel> linear;  // set for Arfimax and Arimax
    std::vector<double> residuals;       // in-sample, same length as the training data
};

Stage1Model fit_stage1(const TimeSeriesDataset& train, const NarfimaConfig& cfg);

struct GridCell {
    std::size_t p = 1;
    std::size_t q = 1;
    std::size_t k = 1;
    bool skip = false;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct NarfimaPipeline {
    Stage1Model stage1;
    NetworkWeights network;
    GridCell chosen;
    FeatureScaler scaler;
    // Last max(p, q) observations of y and e plus the last covariate row.
    std::vector<double> tail_y;
    std::vector<double> tail_e;
    std::vector<double> last_exogenous;
    std::vector<std::string> exogenous_names;
    YearMonth last_timestamp;
    FutureExogMode future_exog_mode = FutureExogMode::Required;
    double in_sample_rmse = 0.0;
};

struct CellScore {
    GridCell cell;
    std::optional<double> rmse;  // empty when the cell failed
    std::string error;
};

struct CrossValidation {
    GridCell chosen;
    std::vector<CellScore> table;  // grid enumeration order
};

// Cells in enumeration order (p, then q, then k, then skip=false before true).
std::vector<GridCell> enumerate_grid(const NarfimaConfig& cfg);

// Ordering used to break RMSE ties.
bool tie_break_less(const GridCell& a, const GridCell& b);

CrossValidation cross_validate_detailed(const TimeSeriesDataset& train, const NarfimaConfig& cfg);

GridCell cross_validate(const TimeSeriesDataset& train, const NarfimaConfig& cfg);

// Fits stage 1 and the network with a fixed cell.
NarfimaPipeline fit_narfima_cell(const TimeSeriesDataset& train, const NarfimaConfig& cfg,
                                 const GridCell& cell);

// Cross-validates, then refits on the full training set with the chosen cell.
NarfimaPipeline fit_narfima(const TimeSeriesDataset& train, const NarfimaConfig& cfg);

// Recursive multi-step forecast. Covariates for step j are X_{T+j-1}: the last
// training row for j = 1, then columns 0..h-2 of `future_exogenous`.
std::vector<double> forecast_recursive(const NarfimaPipeline& pipeline, std::size_t h,
                                       const std::optional<ExogenousMatrix>& future_exogenous = std::nullopt);

// One-step in-sample predictions of y_t for t = max(p, q) .. T-1 on the data the
// pipeline was fitted to (`train` must end at pipeline.last_timestamp).
std::vector<double> in_sample_predictions(const NarfimaPipeline& pipeline,
                                          const TimeSeriesDataset& train);

std::string to_string(Stage1Kind kind);
Stage1Kind stage1_from_string(const std::string& name);
std::string to_string(SkipMode mode);
SkipMode skip_mode_from_string(const std::string& name);

}  // namespace narfima
