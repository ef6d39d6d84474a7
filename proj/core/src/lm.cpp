#include "lmforecast/lm.hpp"

#include <Eigen/Cholesky>

#include <string>
#include <utility>

namespace lmforecast {

void LmConfig::validate() const {
    if (!(mu_init > 0.0)) {
        throw ConfigError("mu_init must be positive");
    }
    if (!(mu_increase > 1.0)) {
        throw ConfigError("mu_increase must exceed 1");
    }
    if (!(mu_decrease > 0.0 && mu_decrease < 1.0)) {
        throw ConfigError("mu_decrease must lie in (0, 1)");
    }
    if (!(mu_max >= mu_init)) {
        throw ConfigError("mu_max must be at least mu_init");
    }
    if (max_epochs < 1) {
        throw ConfigError("max_epochs must be at least 1");
    }
    if (gradient_tol < 0.0 || step_tol < 0.0) {
        throw ConfigError("tolerances must be non-negative");
    }
}

std::string to_string(StopReason reason) {
    switch (reason) {
    case StopReason::GradientTol: return "gradient_tol";
    case StopReason::StepTol: return "step_tol";
    case StopReason::MuMax: return "mu_max";
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::ExternalStop: return "external_stop";
    }
    return "unknown";
}

Eigen::VectorXd solve_damped_normal(const Eigen::MatrixXd& jtj, double mu,
                                    const Eigen::VectorXd& rhs) {
    if (jtj.rows() != jtj.cols() || jtj.rows() != rhs.size()) {
        throw ConfigError("damped normal system has mismatched dimensions");
    }
    if (!(mu > 0.0)) {
        throw ConfigError("damping mu must be positive");
    }
    // mu*I keeps the system positive definite for any finite J^T J; the jitter
    // ladder only matters for near-degenerate or non-finite input.
    static constexpr double kJitter[] = {0.0, 1e-12, 1e-9, 1e-6};
    for (double jitter : kJitter) {
        Eigen::MatrixXd system = jtj;
        system.diagonal().array() += mu + jitter;
        const Eigen::LLT<Eigen::MatrixXd> llt(system);
        if (llt.info() != Eigen::Success) {
            continue;
        }
        Eigen::VectorXd solution = llt.solve(rhs);
        if (solution.allFinite()) {
            return solution;
        }
    }
    throw SolveFailure("damped normal system is not positive definite after jitter escalation");
}

namespace {

Eigen::VectorXd eval_residual(const LeastSquaresProblem& problem, const Eigen::VectorXd& params) {
    Eigen::VectorXd residual = problem.residual_fn(params);
    if (residual.size() != problem.residual_count) {
        throw ConfigError("residual_fn returned " + std::to_string(residual.size()) +
                          " values, expected " + std::to_string(problem.residual_count));
    }
    return residual;
}

Eigen::MatrixXd eval_jacobian(const LeastSquaresProblem& problem, const Eigen::VectorXd& params) {
    Eigen::MatrixXd jacobian = problem.jacobian_fn(params);
    if (jacobian.rows() != problem.residual_count || jacobian.cols() != problem.param_count) {
        throw ConfigError("jacobian_fn returned a " + std::to_string(jacobian.rows()) + "x" +
                          std::to_string(jacobian.cols()) + " matrix, expected " +
                          std::to_string(problem.residual_count) + "x" +
                          std::to_string(problem.param_count));
    }
    return jacobian;
}

void check_problem(const LeastSquaresProblem& problem, const Eigen::VectorXd& params) {
    if (!problem.residual_fn || !problem.jacobian_fn) {
        throw ConfigError("problem needs both residual_fn and jacobian_fn");
    }
    if (problem.param_count < 1 || problem.residual_count < 1) {
        throw ConfigError("problem needs positive param_count and residual_count");
    }
    if (params.size() != problem.param_count) {
        throw ConfigError("initial parameter vector length " + std::to_string(params.size()) +
                          " does not match param_count " + std::to_string(problem.param_count));
    }
}

} // namespace

Eigen::VectorXd lm_step(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                        double mu) {
    check_problem(problem, params);
    const Eigen::VectorXd residual = eval_residual(problem, params);
    const Eigen::MatrixXd jacobian = eval_jacobian(problem, params);
    return solve_damped_normal(jacobian.transpose() * jacobian, mu,
                               -(jacobian.transpose() * residual));
}

LmOutcome lm_fit(const LeastSquaresProblem& problem, const Eigen::VectorXd& initial_params,
                 const LmConfig& config, const EpochCallback& external_stop) {
    config.validate();
    check_problem(problem, initial_params);

    Eigen::VectorXd params = initial_params;
    Eigen::VectorXd residual = eval_residual(problem, params);
    Eigen::MatrixXd jacobian = eval_jacobian(problem, params);
    double sse = residual.squaredNorm();
    Eigen::VectorXd gradient = jacobian.transpose() * residual;
    double gradient_norm = gradient.lpNorm<Eigen::Infinity>();

    LmOutcome outcome;
    double mu = config.mu_init;
    int epoch = 0;
    StopReason reason = StopReason::MaxEpochs;
    bool done = gradient_norm <= config.gradient_tol;
    if (done) {
        reason = StopReason::GradientTol; // already at a stationary point
    }

    while (!done && epoch < config.max_epochs) {
        const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
        // Retry at fixed parameters until a step is accepted or a limit hits.
        for (;;) {
            const Eigen::VectorXd step = solve_damped_normal(jtj, mu, -gradient);
            if (step.norm() <= config.step_tol * (params.norm() + config.step_tol)) {
                reason = StopReason::StepTol;
                done = true;
                break;
            }
            Eigen::VectorXd candidate = params + step;
            Eigen::VectorXd candidate_residual = eval_residual(problem, candidate);
            const double candidate_sse = candidate_residual.squaredNorm();
            if (candidate_sse < sse) {
                const double mu_used = mu;
                params = std::move(candidate);
                residual = std::move(candidate_residual);
                sse = candidate_sse;
                jacobian = eval_jacobian(problem, params);
                gradient = jacobian.transpose() * residual;
                gradient_norm = gradient.lpNorm<Eigen::Infinity>();
                ++epoch;
                outcome.trace.push_back({epoch, sse, mu_used, gradient_norm});
                // Floor keeps mu positive through long accept streaks.
                mu = std::max(mu * config.mu_decrease, 1e-300);
                if (external_stop &&
                    external_stop({epoch, params, sse, mu_used, gradient_norm})) {
                    reason = StopReason::ExternalStop;
                    done = true;
                } else if (gradient_norm <= config.gradient_tol) {
                    reason = StopReason::GradientTol;
                    done = true;
                }
                break;
            }
            mu *= config.mu_increase;
            if (mu > config.mu_max) {
                reason = StopReason::MuMax;
                done = true;
                break;
            }
        }
    }

    outcome.params = std::move(params);
    outcome.final_sse = sse;
    outcome.epochs_run = epoch;
    outcome.stop_reason = reason;
    return outcome;
}

} // namespace lmforecast
