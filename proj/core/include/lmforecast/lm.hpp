#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "lmforecast/errors.hpp"

namespace lmforecast {

// ============================================================================
// Problem description
// ============================================================================

/// Nonlinear least-squares problem: minimize ||residual(params)||^2.
///
/// jacobian_fn returns d residual / d params, residual_count x param_count.
struct LeastSquaresProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual_fn;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian_fn;
    int param_count = 0;
    int residual_count = 0;
};

/// Damped-update optimizer settings.
struct LmConfig {
    double mu_init = 1e-3;     ///< initial damping
    double mu_increase = 10.0; ///< factor applied after a rejected step
    double mu_decrease = 0.1;  ///< factor applied after an accepted step
    double mu_max = 1e10;      ///< giving-up threshold
    int max_epochs = 1000;     ///< accepted-update budget
    double gradient_tol = 1e-7;
    double step_tol = 1e-12;

    void validate() const;
};

/// Why the fit loop stopped.
enum class StopReason {
    GradientTol,  ///< ||J^T r||_inf <= gradient_tol
    StepTol,      ///< ||step|| <= step_tol * (||params|| + step_tol)
    MuMax,        ///< damping exceeded mu_max without an acceptable step
    MaxEpochs,    ///< accepted-update budget exhausted
    ExternalStop, ///< per-epoch callback requested a stop
};

std::string to_string(StopReason reason);

/// One accepted epoch: its SSE, the damping used for the step, and the
/// gradient infinity norm at the updated parameters.
struct EpochRecord {
    int epoch = 0;
    double sse = 0.0;
    double mu = 0.0;
    double gradient_inf_norm = 0.0;
};

/// Fit result. params holds the best-SSE parameters seen (with strict-decrease
/// acceptance these are the last accepted ones).
struct LmOutcome {
    Eigen::VectorXd params;
    double final_sse = 0.0;
    int epochs_run = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    std::vector<EpochRecord> trace; ///< accepted epochs only, 1-based
};

/// Snapshot passed to the per-epoch callback after each accepted update.
struct EpochInfo {
    int epoch = 0;
    const Eigen::VectorXd& params;
    double sse = 0.0;
    double mu = 0.0; ///< damping used for the accepted step
    double gradient_inf_norm = 0.0;
};

/// Returns true to stop the fit (reported as StopReason::ExternalStop).
using EpochCallback = std::function<bool(const EpochInfo&)>;

// ============================================================================
// Operations
// ============================================================================

/// @brief Solve (jtj + mu*I) x = rhs via a symmetric positive-definite
/// factorization.
///
/// On factorization failure retries with jitter 1e-12, 1e-9, 1e-6 added to the
/// diagonal, then throws SolveFailure. mu must be positive.
Eigen::VectorXd solve_damped_normal(const Eigen::MatrixXd& jtj, double mu,
                                    const Eigen::VectorXd& rhs);

/// @brief One damped update candidate at fixed parameters:
/// solves (J^T J + mu*I) step = -J^T r.
Eigen::VectorXd lm_step(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                        double mu);

/// @brief Full damped least-squares fit.
///
/// An epoch is one accepted (strict SSE decrease) update; rejected attempts
/// raise mu by mu_increase and retry without advancing the epoch counter.
/// Accepted steps scale mu by mu_decrease. Identical problem, config, and
/// initial parameters produce a bit-identical outcome.
LmOutcome lm_fit(const LeastSquaresProblem& problem, const Eigen::VectorXd& initial_params,
                 const LmConfig& config = {}, const EpochCallback& external_stop = {});

} // namespace lmforecast
