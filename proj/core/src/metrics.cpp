#include "lmforecast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lmforecast {

void EvaluationPair::validate() const {
    if (targets.empty() || targets.size() != predictions.size()) {
        throw ConfigError("evaluation pair needs equal non-zero lengths, got " +
                          std::to_string(targets.size()) + " and " +
                          std::to_string(predictions.size()));
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!std::isfinite(targets[i]) || !std::isfinite(predictions[i])) {
            throw ConfigError("evaluation pair contains a non-finite value at row " +
                              std::to_string(i));
        }
    }
}

double mse(const EvaluationPair& pair) {
    pair.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.targets.size(); ++i) {
        const double e = pair.targets[i] - pair.predictions[i];
        sum += e * e;
    }
    return sum / static_cast<double>(pair.targets.size());
}

double mae(const EvaluationPair& pair) {
    pair.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.targets.size(); ++i) {
        sum += std::abs(pair.targets[i] - pair.predictions[i]);
    }
    return sum / static_cast<double>(pair.targets.size());
}

double mape(const EvaluationPair& pair) {
    pair.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.targets.size(); ++i) {
        if (pair.targets[i] == 0.0) {
            throw ZeroTarget("percentage error undefined: target is zero at row " +
                             std::to_string(i));
        }
        sum += std::abs((pair.targets[i] - pair.predictions[i]) / pair.targets[i]);
    }
    return sum / static_cast<double>(pair.targets.size()) * 100.0;
}

double accuracy(double mape_value) {
    return 100.0 - mape_value;
}

double efficiency(std::size_t n_total, std::size_t t_train) {
    if (t_train < 1 || t_train > n_total) {
        throw ConfigError("efficiency needs 1 <= t_train <= n_total");
    }
    return static_cast<double>(n_total) / static_cast<double>(t_train);
}

double pearson_r(const EvaluationPair& pair) {
    pair.validate();
    const std::size_t n = pair.targets.size();
    double mean_t = 0.0;
    double mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_t += pair.targets[i];
        mean_p += pair.predictions[i];
    }
    mean_t /= static_cast<double>(n);
    mean_p /= static_cast<double>(n);

    double cov = 0.0;
    double var_t = 0.0;
    double var_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = pair.targets[i] - mean_t;
        const double dp = pair.predictions[i] - mean_p;
        cov += dt * dp;
        var_t += dt * dt;
        var_p += dp * dp;
    }
    if (var_t == 0.0 || var_p == 0.0) {
        throw ZeroVariance("correlation undefined on constant data");
    }
    return cov / std::sqrt(var_t * var_p);
}

double r_squared(const EvaluationPair& pair) {
    pair.validate();
    const std::size_t n = pair.targets.size();
    double mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_t += pair.targets[i];
    }
    mean_t /= static_cast<double>(n);

    double rss = 0.0;
    double tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = pair.targets[i] - pair.predictions[i];
        const double d = pair.targets[i] - mean_t;
        rss += r * r;
        tss += d * d;
    }
    if (tss == 0.0) {
        throw ZeroVariance("coefficient of determination undefined on constant targets");
    }
    return 1.0 - rss / tss;
}

std::vector<HistogramBin> error_histogram(std::span<const double> errors, int bins) {
    if (errors.empty()) {
        throw ConfigError("histogram needs at least one error value");
    }
    if (bins < 1) {
        throw ConfigError("histogram needs at least one bin");
    }
    double lo = errors[0];
    double hi = errors[0];
    for (double e : errors) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<HistogramBin> result(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        result[static_cast<std::size_t>(b)].lower = lo + width * static_cast<double>(b);
        result[static_cast<std::size_t>(b)].upper =
            (b + 1 == bins) ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double e : errors) {
        auto bin = static_cast<long long>(std::floor((e - lo) / width));
        bin = std::clamp<long long>(bin, 0, bins - 1);
        ++result[static_cast<std::size_t>(bin)].count;
    }
    return result;
}

Autocorrelation error_autocorrelation(std::span<const double> errors, int max_lag) {
    if (errors.empty()) {
        throw ConfigError("autocorrelation needs at least one error value");
    }
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= errors.size()) {
        throw ConfigError("autocorrelation max_lag must lie in [0, N)");
    }
    const std::size_t n = errors.size();
    Autocorrelation result;
    result.covariance.resize(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i + static_cast<std::size_t>(k) < n; ++i) {
            sum += errors[i] * errors[i + static_cast<std::size_t>(k)];
        }
        // 1/N normalization at every lag keeps covariance[0] equal to the MSE.
        result.covariance[static_cast<std::size_t>(k)] = sum / static_cast<double>(n);
    }
    result.confidence_limit = 1.96 * result.covariance[0] / std::sqrt(static_cast<double>(n));
    return result;
}

MetricsReport evaluate(const EvaluationPair& pair, std::size_t n_total, std::size_t t_train) {
    MetricsReport report;
    report.mse = mse(pair);
    report.mae = mae(pair);
    report.mape = mape(pair);
    report.pearson_r = pearson_r(pair);
    report.r_squared = r_squared(pair);
    report.accuracy = accuracy(report.mape);
    report.efficiency = efficiency(n_total, t_train);
    report.counts = {n_total, t_train};
    return report;
}

} // namespace lmforecast
