#pragma once

// Limited-memory BFGS with a backtracking Armijo line search.

#include <functional>

#include <Eigen/Dense>

namespace pgprisk {

struct OptimizerSettings {
    int max_iterations = 200;
    /// Stop when the gradient infinity norm falls below this.
    double gradient_tol = 1e-6;
    /// Stop when |f_new - f| <= relative_tol * max(1, |f|).
    double relative_tol = 1e-10;
    int history = 10;
    int max_backtracks = 40;
    /// Largest per-coordinate move of a single step.
    double max_step = 5.0;
};

enum class OptimizerStatus { GradientConverged, ValueConverged, LineSearchStalled, MaxIterations };

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int evaluations = 0;
    OptimizerStatus status = OptimizerStatus::MaxIterations;
};

/// Objective: returns f(x) and writes the gradient. May throw pgprisk::Error,
/// which the line search treats like a non-finite value.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Deterministic minimization. The returned value is never above f(x0).
/// Throws OptimizerDiverged when f(x0) is not finite or when every
/// backtracking trial of a step produced a non-finite value.
MinimizeResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const OptimizerSettings& settings);

}  // namespace pgprisk
