#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lmforecast/errors.hpp"

namespace lmforecast {

/// Aligned target/prediction vectors, both in bpm.
struct EvaluationPair {
    std::span<const double> targets;
    std::span<const double> predictions;

    /// Throws ConfigError unless both spans are equally sized, non-empty, and finite.
    void validate() const;
};

/// Mean squared error, bpm^2.
double mse(const EvaluationPair& pair);

/// Mean absolute error, bpm.
double mae(const EvaluationPair& pair);

/// Mean absolute percentage error, percent. Throws ZeroTarget on a zero target.
double mape(const EvaluationPair& pair);

/// Accuracy defined as the exact complement of MAPE: 100 - mape_value.
double accuracy(double mape_value);

/// Transmission-reduction ratio n_total / t_train (exact; display-layer
/// truncation is separate). Requires 1 <= t_train <= n_total.
double efficiency(std::size_t n_total, std::size_t t_train);

/// Pearson correlation coefficient. Throws ZeroVariance on constant input.
double pearson_r(const EvaluationPair& pair);

/// Coefficient of determination 1 - RSS/TSS (can be negative).
/// Throws ZeroVariance when the targets are constant.
double r_squared(const EvaluationPair& pair);

/// One histogram bin: [lower, upper) except the last bin, which is inclusive.
struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

/// Equal-width histogram spanning [min, max] of the errors. A single distinct
/// value widens to [v - 0.5, v + 0.5]. Counts sum to the sample count.
std::vector<HistogramBin> error_histogram(std::span<const double> errors, int bins = 20);

/// Raw (non-mean-removed) autocovariance sequence of prediction errors.
struct Autocorrelation {
    /// covariance[k] = (1/N) * sum_i e[i] * e[i+k]; covariance[0] equals the error MSE.
    std::vector<double> covariance;
    /// White-noise 95% band in covariance units: 1.96 * covariance[0] / sqrt(N).
    double confidence_limit = 0.0;
};

Autocorrelation error_autocorrelation(std::span<const double> errors, int max_lag);

/// Sample counts a report was computed against.
struct MetricsCounts {
    std::size_t n_total = 0;
    std::size_t t_train = 0;
};

/// Full per-split metric bundle.
struct MetricsReport {
    double mse = 0.0;
    double mae = 0.0;
    double mape = 0.0;
    double pearson_r = 0.0;
    double r_squared = 0.0;
    double accuracy = 0.0;
    double efficiency = 0.0;
    MetricsCounts counts;
};

MetricsReport evaluate(const EvaluationPair& pair, std::size_t n_total, std::size_t t_train);

} // namespace lmforecast
