#include "lmforecast/session.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <utility>

namespace lmforecast {

// ============================================================================
// ValidationStopper
// ============================================================================

ValidationStopper::ValidationStopper(int max_fail) : max_fail_(max_fail) {
    if (max_fail < 1) {
        throw ConfigError("max_fail must be at least 1");
    }
}

ValidationStopper::Decision ValidationStopper::observe(int epoch, double validation_mse) {
    if (validation_mse < best_value_) {
        best_value_ = validation_mse;
        best_epoch_ = epoch;
        fail_streak_ = 0;
        return {true, false};
    }
    ++fail_streak_;
    return {false, fail_streak_ >= max_fail_};
}

// ============================================================================
// fit_with_validation
// ============================================================================

ValidatedFit fit_with_validation(
    const LeastSquaresProblem& problem, const Eigen::VectorXd& initial_params,
    const LmConfig& config, int max_fail,
    const std::function<double(const Eigen::VectorXd&)>& validation_mse_fn) {
    if (!validation_mse_fn) {
        throw ConfigError("fit_with_validation needs a validation_mse_fn");
    }
    const bool stopping_enabled = max_fail != kNoEarlyStop;
    const double residual_count = static_cast<double>(problem.residual_count);

    ValidatedFit fit;
    ValidationStopper stopper(stopping_enabled ? max_fail : 1);

    // Epoch 0: the untouched initial parameters are the baseline candidate.
    {
        const Eigen::VectorXd residual0 = problem.residual_fn(initial_params);
        const Eigen::MatrixXd jacobian0 = problem.jacobian_fn(initial_params);
        const double sse0 = residual0.squaredNorm();
        const double gradient0 = (jacobian0.transpose() * residual0).lpNorm<Eigen::Infinity>();
        const double validation0 = validation_mse_fn(initial_params);
        fit.trace.rows.push_back({0, sse0 / residual_count, validation0, config.mu_init, gradient0});
        stopper.observe(0, validation0);
        fit.best_params = initial_params;
    }

    const EpochCallback callback = [&](const EpochInfo& info) -> bool {
        const double validation = validation_mse_fn(info.params);
        fit.trace.rows.push_back(
            {info.epoch, info.sse / residual_count, validation, info.mu, info.gradient_inf_norm});
        const ValidationStopper::Decision decision = stopper.observe(info.epoch, validation);
        if (decision.improved) {
            fit.best_params = info.params;
        }
        return stopping_enabled && decision.stop;
    };

    fit.outcome = lm_fit(problem, initial_params, config, callback);

    if (stopping_enabled) {
        fit.best_epoch = stopper.best_epoch();
    } else {
        fit.best_params = fit.outcome.params;
        fit.best_epoch = fit.outcome.epochs_run;
    }
    fit.trace.best_epoch = fit.best_epoch;
    fit.trace.stop_epoch = fit.outcome.epochs_run;
    fit.trace.stop_reason = fit.outcome.stop_reason;
    return fit;
}

// ============================================================================
// run_session
// ============================================================================

namespace {

std::vector<double> slice_raw_targets(const SeriesData& series, std::size_t first_target_index,
                                      const IndexRange& range) {
    std::vector<double> targets;
    targets.reserve(range.count());
    for (std::size_t i = range.begin; i < range.end; ++i) {
        targets.push_back(series.values[first_target_index + i]);
    }
    return targets;
}

} // namespace

SessionResult run_session(const SeriesData& series, const SessionConfig& config) {
    config.layout.validate();
    config.lm.validate();
    config.split.validate();
    if (config.max_fail < 1) {
        throw ConfigError("max_fail must be at least 1");
    }

    const std::size_t max_lag = static_cast<std::size_t>(config.layout.max_lag());
    const std::size_t n_raw = series.size();
    if (n_raw <= max_lag) {
        throw SeriesTooShort("series of length " + std::to_string(n_raw) +
                             " cannot feed max lag " + std::to_string(max_lag));
    }
    const std::size_t n_embedded = n_raw - max_lag;

    // The row partition lives on the embedded axis; the same rule applied to
    // the raw length feeds the reported, table-comparable counts.
    const SplitIndices rows = split_block(n_embedded, config.split);
    const SplitIndices reported = split_block(n_raw, config.split);

    // Normalization range comes from the samples the training rows can see:
    // the raw prefix covering every training input and target.
    const std::size_t train_prefix = max_lag + rows.train.count();
    const NormParams norm =
        fit_normalization(std::span(series.values).first(train_prefix));
    const std::vector<double> normalized = apply_normalization(series.values, norm);
    const LagEmbedding embedding = embed_values(normalized, config.layout.lags);

    const auto input_rows = [&](const IndexRange& range) {
        return embedding.inputs.middleRows(static_cast<Eigen::Index>(range.begin),
                                           static_cast<Eigen::Index>(range.count()));
    };
    const auto target_rows = [&](const IndexRange& range) {
        return embedding.targets.segment(static_cast<Eigen::Index>(range.begin),
                                         static_cast<Eigen::Index>(range.count()));
    };

    const Eigen::MatrixXd train_inputs = input_rows(rows.train);
    const Eigen::VectorXd train_targets = target_rows(rows.train);
    const Eigen::MatrixXd validation_inputs = input_rows(rows.validation);
    const Eigen::VectorXd validation_targets = target_rows(rows.validation);

    LeastSquaresProblem problem;
    problem.param_count = config.layout.param_count();
    problem.residual_count = static_cast<int>(rows.train.count());
    problem.residual_fn = [&](const Eigen::VectorXd& params) -> Eigen::VectorXd {
        const NarWeights weights = NarWeights::unflatten(config.layout, params);
        return predict_batch(weights, train_inputs) - train_targets;
    };
    problem.jacobian_fn = [&](const Eigen::VectorXd& params) -> Eigen::MatrixXd {
        const NarWeights weights = NarWeights::unflatten(config.layout, params);
        return batch_jacobian(weights, train_inputs).jacobian;
    };

    const auto validation_mse_fn = [&](const Eigen::VectorXd& params) -> double {
        const NarWeights weights = NarWeights::unflatten(config.layout, params);
        return (predict_batch(weights, validation_inputs) - validation_targets).squaredNorm() /
               static_cast<double>(rows.validation.count());
    };

    const Eigen::VectorXd initial_params = init_weights(config.layout, config.seed).flatten();
    ValidatedFit fit = fit_with_validation(problem, initial_params, config.lm, config.max_fail,
                                           validation_mse_fn);

    SessionResult result;
    result.weights = NarWeights::unflatten(config.layout, fit.best_params);
    result.norm = norm;
    result.trace = std::move(fit.trace);
    result.n_raw = n_raw;
    result.n_embedded = n_embedded;
    result.first_target_index = embedding.first_target_index;
    result.rows = rows;
    result.reported = reported;

    const auto evaluate_split = [&](const IndexRange& range) {
        SplitEvaluation evaluation;
        const Eigen::VectorXd predicted_norm = predict_batch(result.weights, input_rows(range));
        evaluation.predictions = denormalize(
            std::span(predicted_norm.data(), static_cast<std::size_t>(predicted_norm.size())),
            norm);
        evaluation.targets = slice_raw_targets(series, embedding.first_target_index, range);
        evaluation.report = evaluate(EvaluationPair{evaluation.targets, evaluation.predictions},
                                     n_raw, reported.train.count());
        return evaluation;
    };
    result.train = evaluate_split(rows.train);
    result.validation = evaluate_split(rows.validation);
    result.test = evaluate_split(rows.test);

    std::vector<double> test_errors(result.test.targets.size());
    for (std::size_t i = 0; i < test_errors.size(); ++i) {
        test_errors[i] = result.test.targets[i] - result.test.predictions[i];
    }
    result.diagnostics.error_histogram = error_histogram(test_errors, 20);
    const int autocorr_lags =
        static_cast<int>(std::min<std::size_t>(50, test_errors.size() - 1));
    result.diagnostics.error_autocorrelation = error_autocorrelation(test_errors, autocorr_lags);
    return result;
}

// ============================================================================
// run_scenarios
// ============================================================================

std::vector<ScenarioOutcome> run_scenarios(const SeriesData& series, const SessionConfig& base,
                                           std::span<const SplitSpec> scenarios, bool parallel) {
    if (scenarios.empty()) {
        throw ConfigError("at least one scenario is required");
    }
    const auto run_one = [&](std::size_t index) -> ScenarioOutcome {
        ScenarioOutcome outcome;
        outcome.id = static_cast<int>(index) + 1;
        outcome.spec = scenarios[index];
        try {
            SessionConfig scenario_config = base;
            scenario_config.split = scenarios[index];
            outcome.result = run_session(series, scenario_config);
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        return outcome;
    };

    std::vector<ScenarioOutcome> outcomes(scenarios.size());
    if (parallel) {
        std::vector<std::future<ScenarioOutcome>> futures;
        futures.reserve(scenarios.size());
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run_one, i));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) {
            outcomes[i] = futures[i].get();
        }
    } else {
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            outcomes[i] = run_one(i);
        }
    }
    return outcomes;
}

} // namespace lmforecast
