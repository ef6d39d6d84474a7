#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lmforecast/errors.hpp"
#include "lmforecast/series.hpp"

namespace lmforecast {

// ============================================================================
// Network shape and parameters
// ============================================================================

/// Shape of the nonlinear autoregressive network: a single tanh hidden layer
/// fed by lagged samples, with a linear output neuron.
struct NarLayout {
    std::vector<int> lags = {1, 2}; ///< strictly increasing, >= 1
    int hidden_units = 10;

    int max_lag() const { return lags.empty() ? 0 : lags.back(); }
    int lag_count() const { return static_cast<int>(lags.size()); }

    /// hidden*(lags + 1) + hidden + 1 trainable parameters.
    int param_count() const { return hidden_units * (lag_count() + 2) + 1; }

    void validate() const;
};

/// Trainable parameters of the network.
///
/// The canonical flat order is: input_weights row-major (hidden-major),
/// hidden_bias, output_weights, output_bias. init_weights draws in exactly
/// this order so seeded streams agree across implementations.
struct NarWeights {
    Eigen::MatrixXd input_weights;  ///< hidden x |lags|
    Eigen::VectorXd hidden_bias;    ///< hidden
    Eigen::VectorXd output_weights; ///< hidden
    double output_bias = 0.0;

    Eigen::VectorXd flatten() const;
    static NarWeights unflatten(const NarLayout& layout, const Eigen::VectorXd& params);
};

/// Min-max range mapping bpm to [-1, 1].
struct NormParams {
    double y_min = 0.0;
    double y_max = 0.0;
};

/// Joint predictions and parameter Jacobian over a batch of lag rows.
struct BatchEval {
    Eigen::VectorXd predictions; ///< N
    Eigen::MatrixXd jacobian;    ///< N x param_count, d prediction / d parameter
};

// ============================================================================
// Operations
// ============================================================================

/// Seeded uniform [-0.5, 0.5) initialization, drawn in canonical flat order.
NarWeights init_weights(const NarLayout& layout, std::uint64_t seed);

/// Fit the min-max range of a value span. Throws DegenerateSeries when the
/// span is empty or constant.
NormParams fit_normalization(std::span<const double> values);

/// Map values into [-1, 1] with the given range. Out-of-range inputs map
/// outside [-1, 1]; nothing is clipped.
std::vector<double> apply_normalization(std::span<const double> values, const NormParams& norm);

/// Fit on the whole series and map it; convenience for standalone use.
std::pair<std::vector<double>, NormParams> normalize(const SeriesData& series);

/// Inverse of apply_normalization.
std::vector<double> denormalize(std::span<const double> normalized, const NormParams& norm);

/// Single forward pass:
/// output_bias + sum_h output_weights[h] * tanh(hidden_bias[h] + sum_j W(h,j) * lag[j]).
double forward(const NarWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& lag_vector);

/// Batch forward pass over an N x |lags| matrix of lag rows.
Eigen::VectorXd predict_batch(const NarWeights& weights, const Eigen::Ref<const Eigen::MatrixXd>& lag_rows);

/// Analytic predictions + Jacobian, column order matching NarWeights::flatten.
BatchEval batch_jacobian(const NarWeights& weights, const Eigen::Ref<const Eigen::MatrixXd>& lag_rows);

/// Open-loop one-step-ahead predictions for every embedded row.
Eigen::VectorXd one_step_predictions(const NarWeights& weights, const LagEmbedding& embedding);

} // namespace lmforecast
