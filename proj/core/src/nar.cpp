#include "lmforecast/nar.hpp"

#include <cmath>
#include <string>

#include "lmforecast/rng.hpp"

namespace lmforecast {

void NarLayout::validate() const {
    if (hidden_units < 1) {
        throw ConfigError("layout needs at least one hidden unit");
    }
    if (lags.empty()) {
        throw ConfigError("layout needs at least one lag");
    }
    int previous = 0;
    for (int lag : lags) {
        if (lag <= previous) {
            throw ConfigError("lags must be strictly increasing positive integers");
        }
        previous = lag;
    }
}

Eigen::VectorXd NarWeights::flatten() const {
    const Eigen::Index hidden = input_weights.rows();
    const Eigen::Index lag_count = input_weights.cols();
    Eigen::VectorXd params(hidden * (lag_count + 2) + 1);
    Eigen::Index at = 0;
    for (Eigen::Index h = 0; h < hidden; ++h) {
        for (Eigen::Index j = 0; j < lag_count; ++j) {
            params(at++) = input_weights(h, j);
        }
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        params(at++) = hidden_bias(h);
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        params(at++) = output_weights(h);
    }
    params(at) = output_bias;
    return params;
}

NarWeights NarWeights::unflatten(const NarLayout& layout, const Eigen::VectorXd& params) {
    layout.validate();
    if (params.size() != layout.param_count()) {
        throw ConfigError("parameter vector of length " + std::to_string(params.size()) +
                          " does not match layout param count " +
                          std::to_string(layout.param_count()));
    }
    const Eigen::Index hidden = layout.hidden_units;
    const Eigen::Index lag_count = layout.lag_count();
    NarWeights weights;
    weights.input_weights.resize(hidden, lag_count);
    weights.hidden_bias.resize(hidden);
    weights.output_weights.resize(hidden);
    Eigen::Index at = 0;
    for (Eigen::Index h = 0; h < hidden; ++h) {
        for (Eigen::Index j = 0; j < lag_count; ++j) {
            weights.input_weights(h, j) = params(at++);
        }
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        weights.hidden_bias(h) = params(at++);
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        weights.output_weights(h) = params(at++);
    }
    weights.output_bias = params(at);
    return weights;
}

NarWeights init_weights(const NarLayout& layout, std::uint64_t seed) {
    layout.validate();
    SplitMix64 rng(seed);
    const Eigen::Index hidden = layout.hidden_units;
    const Eigen::Index lag_count = layout.lag_count();
    NarWeights weights;
    weights.input_weights.resize(hidden, lag_count);
    weights.hidden_bias.resize(hidden);
    weights.output_weights.resize(hidden);
    // Draw order matches the canonical flat order exactly.
    for (Eigen::Index h = 0; h < hidden; ++h) {
        for (Eigen::Index j = 0; j < lag_count; ++j) {
            weights.input_weights(h, j) = rng.next_uniform(-0.5, 0.5);
        }
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        weights.hidden_bias(h) = rng.next_uniform(-0.5, 0.5);
    }
    for (Eigen::Index h = 0; h < hidden; ++h) {
        weights.output_weights(h) = rng.next_uniform(-0.5, 0.5);
    }
    weights.output_bias = rng.next_uniform(-0.5, 0.5);
    return weights;
}

NormParams fit_normalization(std::span<const double> values) {
    if (values.empty()) {
        throw DegenerateSeries("cannot fit a normalization range on an empty span");
    }
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        throw DegenerateSeries("normalization range is degenerate: all values equal " +
                               std::to_string(lo));
    }
    return {lo, hi};
}

std::vector<double> apply_normalization(std::span<const double> values, const NormParams& norm) {
    if (!(norm.y_max > norm.y_min)) {
        throw DegenerateSeries("normalization range must satisfy y_min < y_max");
    }
    const double span = norm.y_max - norm.y_min;
    std::vector<double> normalized(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        normalized[i] = 2.0 * (values[i] - norm.y_min) / span - 1.0;
    }
    return normalized;
}

std::pair<std::vector<double>, NormParams> normalize(const SeriesData& series) {
    const NormParams norm = fit_normalization(series.values);
    return {apply_normalization(series.values, norm), norm};
}

std::vector<double> denormalize(std::span<const double> normalized, const NormParams& norm) {
    if (!(norm.y_max > norm.y_min)) {
        throw DegenerateSeries("normalization range must satisfy y_min < y_max");
    }
    const double span = norm.y_max - norm.y_min;
    std::vector<double> values(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        values[i] = (normalized[i] + 1.0) * span / 2.0 + norm.y_min;
    }
    return values;
}

double forward(const NarWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& lag_vector) {
    if (lag_vector.size() != weights.input_weights.cols()) {
        throw ConfigError("lag vector length does not match the network's lag count");
    }
    double output = weights.output_bias;
    for (Eigen::Index h = 0; h < weights.input_weights.rows(); ++h) {
        double activation = weights.hidden_bias(h);
        for (Eigen::Index j = 0; j < lag_vector.size(); ++j) {
            activation += weights.input_weights(h, j) * lag_vector(j);
        }
        output += weights.output_weights(h) * std::tanh(activation);
    }
    return output;
}

Eigen::VectorXd predict_batch(const NarWeights& weights,
                              const Eigen::Ref<const Eigen::MatrixXd>& lag_rows) {
    if (lag_rows.cols() != weights.input_weights.cols()) {
        throw ConfigError("lag matrix width does not match the network's lag count");
    }
    // N x H pre-activations, tanh, then the linear output layer.
    Eigen::MatrixXd activation = lag_rows * weights.input_weights.transpose();
    activation.rowwise() += weights.hidden_bias.transpose();
    return (activation.array().tanh().matrix() * weights.output_weights).array() +
           weights.output_bias;
}

BatchEval batch_jacobian(const NarWeights& weights,
                         const Eigen::Ref<const Eigen::MatrixXd>& lag_rows) {
    if (lag_rows.cols() != weights.input_weights.cols()) {
        throw ConfigError("lag matrix width does not match the network's lag count");
    }
    const Eigen::Index n = lag_rows.rows();
    const Eigen::Index hidden = weights.input_weights.rows();
    const Eigen::Index lag_count = weights.input_weights.cols();
    const Eigen::Index param_count = hidden * (lag_count + 2) + 1;

    Eigen::MatrixXd activation = lag_rows * weights.input_weights.transpose();
    activation.rowwise() += weights.hidden_bias.transpose();
    const Eigen::MatrixXd hidden_out = activation.array().tanh().matrix(); // N x H

    BatchEval eval;
    eval.predictions = (hidden_out * weights.output_weights).array() + weights.output_bias;
    eval.jacobian.resize(n, param_count);

    // d prediction / d hidden_bias[h] = w_out[h] * (1 - tanh(a_h)^2)
    const Eigen::MatrixXd bias_sens =
        ((1.0 - hidden_out.array().square()).rowwise() *
         weights.output_weights.transpose().array())
            .matrix(); // N x H

    for (Eigen::Index h = 0; h < hidden; ++h) {
        for (Eigen::Index j = 0; j < lag_count; ++j) {
            eval.jacobian.col(h * lag_count + j) =
                bias_sens.col(h).array() * lag_rows.col(j).array();
        }
    }
    eval.jacobian.middleCols(hidden * lag_count, hidden) = bias_sens;
    eval.jacobian.middleCols(hidden * lag_count + hidden, hidden) = hidden_out;
    eval.jacobian.col(param_count - 1).setOnes();
    return eval;
}

Eigen::VectorXd one_step_predictions(const NarWeights& weights, const LagEmbedding& embedding) {
    return predict_batch(weights, embedding.inputs);
}

} // namespace lmforecast
