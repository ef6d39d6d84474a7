#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmforecast/lm.hpp"
#include "lmforecast/metrics.hpp"
#include "lmforecast/nar.hpp"
#include "lmforecast/series.hpp"

namespace lmforecast {

/// Sentinel max_fail value that disables validation-based early stopping;
/// the session then returns the final training weights unrestored.
inline constexpr int kNoEarlyStop = std::numeric_limits<int>::max();

/// Everything needed to train and evaluate one forecasting session.
struct SessionConfig {
    NarLayout layout;
    LmConfig lm;
    SplitSpec split;
    int max_fail = 6;       ///< consecutive validation non-improvements tolerated
    std::uint64_t seed = 1; ///< weight-initialization seed
};

/// Consecutive-failure early-stopping bookkeeping. Improvement is a strict
/// decrease against the best validation MSE seen so far.
class ValidationStopper {
public:
    explicit ValidationStopper(int max_fail);

    struct Decision {
        bool improved = false;
        bool stop = false;
    };

    /// Feed one validation MSE observation; epoch 0 is the pre-training state.
    Decision observe(int epoch, double validation_mse);

    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_value_; }
    int fail_streak() const { return fail_streak_; }

private:
    int max_fail_;
    double best_value_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = 0;
    int fail_streak_ = 0;
};

/// One epoch of the training trace; MSE values are in normalized space.
struct TraceRow {
    int epoch = 0; ///< 0 = initial weights, then accepted epochs 1..stop_epoch
    double train_mse = 0.0;
    double validation_mse = 0.0;
    double mu = 0.0;
    double gradient_inf_norm = 0.0;
};

/// Per-epoch training history plus the stopping summary.
struct TrainTrace {
    std::vector<TraceRow> rows; ///< rows[k].epoch == k
    int best_epoch = 0;         ///< epoch whose weights the session returned
    int stop_epoch = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
};

/// Result of fitting with validation tracking: the raw optimizer outcome plus
/// the best-validation snapshot.
struct ValidatedFit {
    LmOutcome outcome;
    Eigen::VectorXd best_params;
    int best_epoch = 0;
    TrainTrace trace;
};

/// @brief lm_fit plus validation-driven early stopping.
///
/// validation_mse_fn is evaluated on the initial parameters (epoch 0) and
/// after every accepted epoch; max_fail consecutive non-improvements stop the
/// fit. best_params snapshots the lowest-validation-MSE parameters. Pass
/// kNoEarlyStop to track validation without ever stopping on it.
ValidatedFit fit_with_validation(const LeastSquaresProblem& problem,
                                 const Eigen::VectorXd& initial_params, const LmConfig& config,
                                 int max_fail,
                                 const std::function<double(const Eigen::VectorXd&)>& validation_mse_fn);

/// Targets and predictions of one split, both in bpm, plus its metric bundle.
struct SplitEvaluation {
    std::vector<double> targets;
    std::vector<double> predictions;
    MetricsReport report;
};

/// Diagnostics computed from the test-split errors (target - prediction, bpm).
struct SessionDiagnostics {
    std::vector<HistogramBin> error_histogram;
    Autocorrelation error_autocorrelation;
};

/// Full outcome of one training session.
struct SessionResult {
    NarWeights weights; ///< best-validation weights (final weights if restoring is off)
    NormParams norm;    ///< fitted on the training prefix of the raw series
    TrainTrace trace;

    SplitEvaluation train;
    SplitEvaluation validation;
    SplitEvaluation test;
    SessionDiagnostics diagnostics;

    std::size_t n_raw = 0;      ///< raw series length
    std::size_t n_embedded = 0; ///< usable one-step rows (n_raw - max_lag)
    std::size_t first_target_index = 0;
    SplitIndices rows;          ///< embedded-axis partition actually trained on
    SplitIndices reported;      ///< raw-axis partition used for reported counts
};

/// @brief Train one network and evaluate it on all three splits.
///
/// Pipeline: embed -> block split (embedded axis) -> min-max range fitted on
/// the training prefix of the raw series -> damped least-squares fit with
/// validation early stopping -> best-validation weights restored -> per-split
/// bpm-space metrics. Reported counts come from the same split rule applied
/// to the raw length, so summary tables stay comparable across lag
/// configurations; the actual row partition sits alongside in `rows`.
SessionResult run_session(const SeriesData& series, const SessionConfig& config);

/// One row of a scenario sweep; `error` is set when that scenario failed.
struct ScenarioOutcome {
    int id = 0; ///< 1-based position in the requested list
    SplitSpec spec;
    std::optional<SessionResult> result;
    std::string error;
};

/// @brief Run the same session under several split scenarios.
///
/// Every scenario uses the identical seed and layout; failures are recorded
/// per row without aborting the sweep, and output order follows input order
/// regardless of the execution mode.
std::vector<ScenarioOutcome> run_scenarios(const SeriesData& series, const SessionConfig& base,
                                           std::span<const SplitSpec> scenarios,
                                           bool parallel = false);

} // namespace lmforecast
