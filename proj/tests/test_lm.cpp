#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "lmforecast/lm.hpp"
#include "test_util.hpp"

using namespace lmforecast;

namespace {

// Fixed full-rank 5x2 design for the linear least-squares cases.
Eigen::MatrixXd linear_design() {
    Eigen::MatrixXd a(5, 2);
    a << 1.0, 0.5, 2.0, -1.0, 0.5, 3.0, -1.5, 2.0, 4.0, 1.0;
    return a;
}

Eigen::VectorXd linear_target() {
    Eigen::VectorXd b(5);
    b << 2.0, 1.0, -0.5, 3.0, 0.25;
    return b;
}

LeastSquaresProblem linear_problem() {
    LeastSquaresProblem problem;
    problem.param_count = 2;
    problem.residual_count = 5;
    problem.residual_fn = [](const Eigen::VectorXd& theta) {
        return Eigen::VectorXd(linear_design() * theta - linear_target());
    };
    problem.jacobian_fn = [](const Eigen::VectorXd&) { return linear_design(); };
    return problem;
}

// Least-squares solution of the linear problem from the elimination oracle.
Eigen::VectorXd linear_solution() {
    const Eigen::MatrixXd a = linear_design();
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::VectorXd atb = a.transpose() * linear_target();
    oracle::Matrix m(2, std::vector<double>(2));
    std::vector<double> rhs(2);
    for (int i = 0; i < 2; ++i) {
        rhs[i] = atb(i);
        for (int j = 0; j < 2; ++j) {
            m[i][j] = ata(i, j);
        }
    }
    const auto solved = oracle::gauss_solve(m, rhs);
    Eigen::VectorXd x(2);
    x << solved[0], solved[1];
    return x;
}

LeastSquaresProblem rosenbrock_problem() {
    LeastSquaresProblem problem;
    problem.param_count = 2;
    problem.residual_count = 2;
    problem.residual_fn = [](const Eigen::VectorXd& theta) {
        Eigen::VectorXd r(2);
        r << 10.0 * (theta(1) - theta(0) * theta(0)), 1.0 - theta(0);
        return r;
    };
    problem.jacobian_fn = [](const Eigen::VectorXd& theta) {
        Eigen::MatrixXd j(2, 2);
        j << -20.0 * theta(0), 10.0, -1.0, 0.0;
        return j;
    };
    return problem;
}

LeastSquaresProblem exp_decay_problem() {
    LeastSquaresProblem problem;
    const int n = 21;
    problem.param_count = 1;
    problem.residual_count = n;
    problem.residual_fn = [n](const Eigen::VectorXd& theta) {
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) {
            const double t = 0.1 * i;
            r(i) = std::exp(-theta(0) * t) - std::exp(-0.5 * t);
        }
        return r;
    };
    problem.jacobian_fn = [n](const Eigen::VectorXd& theta) {
        Eigen::MatrixXd j(n, 1);
        for (int i = 0; i < n; ++i) {
            const double t = 0.1 * i;
            j(i, 0) = -t * std::exp(-theta(0) * t);
        }
        return j;
    };
    return problem;
}

} // namespace

TEST_SUITE("lm") {

TEST_CASE("damped normal solve inverts a diagonal system") {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd rhs(2);
    rhs << 2.0, 4.0;
    const Eigen::VectorXd x = solve_damped_normal(jtj, 1.0, rhs);
    CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("damped normal solve handles pure damping") {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd rhs(1);
    rhs << 4.0;
    const Eigen::VectorXd x = solve_damped_normal(jtj, 2.0, rhs);
    CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("damped normal solve matches an elimination oracle on a random SPD system") {
    const auto entries = oracle::random_vector(25, -1.0, 1.0, 99);
    Eigen::MatrixXd g(5, 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            g(i, j) = entries[static_cast<std::size_t>(5 * i + j)];
        }
    }
    const Eigen::MatrixXd spd = g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
    const auto rhs_values = oracle::random_vector(5, -2.0, 2.0, 100);
    Eigen::VectorXd rhs(5);
    const double mu = 0.75;
    oracle::Matrix m(5, std::vector<double>(5));
    std::vector<double> rhs_copy(5);
    for (int i = 0; i < 5; ++i) {
        rhs(i) = rhs_values[static_cast<std::size_t>(i)];
        rhs_copy[static_cast<std::size_t>(i)] = rhs(i);
        for (int j = 0; j < 5; ++j) {
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                spd(i, j) + (i == j ? mu : 0.0);
        }
    }
    const Eigen::VectorXd x = solve_damped_normal(spd, mu, rhs);
    const auto expected = oracle::gauss_solve(m, rhs_copy);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::fabs(x(i) - expected[static_cast<std::size_t>(i)]) < 1e-10);
    }
}

TEST_CASE("damped normal solve succeeds on rank-deficient curvature for any positive damping") {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(3, 3);
    jtj(0, 0) = 1.0; // rank 1
    Eigen::VectorXd rhs(3);
    rhs << 1.0, 1.0, 1.0;
    CHECK_NOTHROW(solve_damped_normal(jtj, 1e-6, rhs));
}

TEST_CASE("step is zero when residuals vanish") {
    auto problem = linear_problem();
    problem.residual_fn = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(5).eval(); };
    const Eigen::VectorXd step = lm_step(problem, Eigen::VectorXd::Zero(2), 0.5);
    CHECK(step.norm() == 0.0);
}

TEST_CASE("vanishing damping recovers the normal-equation solution") {
    const auto problem = linear_problem();
    const Eigen::VectorXd step = lm_step(problem, Eigen::VectorXd::Zero(2), 1e-13);
    const Eigen::VectorXd expected = linear_solution();
    CHECK((step - expected).norm() <= 1e-10 * expected.norm());
}

TEST_CASE("huge damping reduces the step to scaled steepest descent") {
    const auto problem = linear_problem();
    Eigen::VectorXd theta(2);
    theta << 1.0, -2.0;
    const double mu = 1e12;
    const Eigen::VectorXd step = lm_step(problem, theta, mu);
    const Eigen::MatrixXd j = problem.jacobian_fn(theta);
    const Eigen::VectorXd gradient_step = -(j.transpose() * problem.residual_fn(theta)) / mu;
    CHECK((step - gradient_step).norm() <= 1e-6 * gradient_step.norm());
}

TEST_CASE("gradient-descent limit holds once damping dominates the curvature") {
    const auto problem = rosenbrock_problem();
    Eigen::VectorXd theta(2);
    theta << -1.2, 1.0;
    const Eigen::MatrixXd j = problem.jacobian_fn(theta);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const double mu = 1e10 * jtj.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::VectorXd step = lm_step(problem, theta, mu);
    const Eigen::VectorXd gradient_step = -(j.transpose() * problem.residual_fn(theta)) / mu;
    CHECK((step - gradient_step).norm() <= 1e-4 * gradient_step.norm());
}

TEST_CASE("linear fit reaches the least-squares solution within three accepted epochs") {
    LmConfig config;
    config.gradient_tol = 0.0;
    config.step_tol = 0.0;
    config.max_epochs = 3;
    const LmOutcome outcome = lm_fit(linear_problem(), Eigen::VectorXd::Zero(2), config);
    const Eigen::VectorXd expected = linear_solution();
    CHECK(outcome.epochs_run <= 3);
    CHECK((outcome.params - expected).norm() <= 1e-8 * expected.norm());
}

TEST_CASE("rosenbrock fit converges to the global minimum") {
    Eigen::VectorXd init(2);
    init << -1.2, 1.0;
    LmConfig config;
    config.max_epochs = 500;
    const LmOutcome outcome = lm_fit(rosenbrock_problem(), init, config);
    CHECK(std::fabs(outcome.params(0) - 1.0) < 1e-6);
    CHECK(std::fabs(outcome.params(1) - 1.0) < 1e-6);
}

TEST_CASE("exponential-decay fit recovers the generating rate") {
    Eigen::VectorXd init(1);
    init << 0.1;
    const LmOutcome outcome = lm_fit(exp_decay_problem(), init);
    CHECK(std::fabs(outcome.params(0) - 0.5) < 1e-6);
}

TEST_CASE("accepted-epoch SSE trace is strictly decreasing and 1-based") {
    Eigen::VectorXd init(2);
    init << -1.2, 1.0;
    const LmOutcome outcome = lm_fit(rosenbrock_problem(), init);
    REQUIRE(!outcome.trace.empty());
    for (std::size_t k = 0; k < outcome.trace.size(); ++k) {
        CHECK(outcome.trace[k].epoch == static_cast<int>(k) + 1);
        if (k > 0) {
            CHECK(outcome.trace[k].sse < outcome.trace[k - 1].sse);
        }
        CHECK(outcome.trace[k].mu > 0.0);
    }
}

TEST_CASE("final SSE is recomputable from the returned parameters") {
    Eigen::VectorXd init(1);
    init << 0.1;
    const auto problem = exp_decay_problem();
    const LmOutcome outcome = lm_fit(problem, init);
    const double recomputed = problem.residual_fn(outcome.params).squaredNorm();
    CHECK(outcome.final_sse == doctest::Approx(recomputed).epsilon(1e-14));
}

TEST_CASE("identical inputs yield bit-identical outcomes") {
    Eigen::VectorXd init(2);
    init << -1.2, 1.0;
    const LmOutcome a = lm_fit(rosenbrock_problem(), init);
    const LmOutcome b = lm_fit(rosenbrock_problem(), init);
    REQUIRE(a.params.size() == b.params.size());
    CHECK(std::memcmp(a.params.data(), b.params.data(),
                      sizeof(double) * static_cast<std::size_t>(a.params.size())) == 0);
    CHECK(a.final_sse == b.final_sse);
    CHECK(a.epochs_run == b.epochs_run);
    CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("zero initial gradient stops before any epoch runs") {
    LeastSquaresProblem problem;
    problem.param_count = 1;
    problem.residual_count = 1;
    problem.residual_fn = [](const Eigen::VectorXd& theta) { return theta; };
    problem.jacobian_fn = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1).eval();
    };
    const LmOutcome outcome = lm_fit(problem, Eigen::VectorXd::Zero(1));
    CHECK(outcome.epochs_run == 0);
    CHECK(outcome.stop_reason == StopReason::GradientTol);
    CHECK(outcome.trace.empty());
}

TEST_CASE("vanishing step at the optimum reports the step tolerance") {
    LmConfig config;
    config.gradient_tol = 0.0; // force the step check to be the one that fires
    const LmOutcome outcome = lm_fit(linear_problem(), linear_solution(), config);
    CHECK(outcome.stop_reason == StopReason::StepTol);
    CHECK(outcome.epochs_run == 0);
}

TEST_CASE("perpetual rejection climbs the damping to its cap") {
    // The deliberately wrong-signed Jacobian makes every candidate step
    // increase the SSE, so no step is ever accepted.
    LeastSquaresProblem problem;
    problem.param_count = 1;
    problem.residual_count = 1;
    problem.residual_fn = [](const Eigen::VectorXd& theta) { return theta; };
    problem.jacobian_fn = [](const Eigen::VectorXd&) {
        return (-Eigen::MatrixXd::Identity(1, 1)).eval();
    };
    Eigen::VectorXd init(1);
    init << 1.0;
    LmConfig config;
    config.mu_max = 1e6;
    const LmOutcome outcome = lm_fit(problem, init, config);
    CHECK(outcome.stop_reason == StopReason::MuMax);
    CHECK(outcome.epochs_run == 0);
    CHECK(outcome.params(0) == 1.0);
}

TEST_CASE("epoch budget of one stops after a single accepted update") {
    Eigen::VectorXd init(2);
    init << -1.2, 1.0;
    LmConfig config;
    config.max_epochs = 1;
    const LmOutcome outcome = lm_fit(rosenbrock_problem(), init, config);
    CHECK(outcome.epochs_run == 1);
    CHECK(outcome.stop_reason == StopReason::MaxEpochs);
}

TEST_CASE("external callback stops the fit and is reported as such") {
    Eigen::VectorXd init(2);
    init << -1.2, 1.0;
    const LmOutcome outcome =
        lm_fit(rosenbrock_problem(), init, LmConfig{},
               [](const EpochInfo& info) { return info.epoch >= 2; });
    CHECK(outcome.epochs_run == 2);
    CHECK(outcome.stop_reason == StopReason::ExternalStop);
}

TEST_CASE("invalid configurations are rejected") {
    LmConfig config;
    config.mu_init = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = LmConfig{};
    config.mu_decrease = 1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = LmConfig{};
    config.mu_increase = 1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = LmConfig{};
    config.mu_max = config.mu_init / 2.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = LmConfig{};
    config.max_epochs = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("dimension mismatches from the problem functions are rejected") {
    auto problem = linear_problem();
    problem.residual_fn = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(4).eval(); };
    CHECK_THROWS_AS(lm_fit(problem, Eigen::VectorXd::Zero(2)), ConfigError);

    auto bad_jacobian = linear_problem();
    bad_jacobian.jacobian_fn = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(5, 3).eval();
    };
    CHECK_THROWS_AS(lm_fit(bad_jacobian, Eigen::VectorXd::Zero(2)), ConfigError);
}

} // TEST_SUITE
