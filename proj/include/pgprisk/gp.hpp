#pragma once

// Gaussian-process regression with an ARD squared-exponential covariance
//
//     c(a, b) = signal_var * exp(-1/2 sum_d (a_d - b_d)^2 / s_d^2)
//
// and iid observation noise: the training covariance is C = K + noise_var I.
// The predictive variance is for a noisy observation, so it includes
// noise_var.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pgprisk/pattern_index.hpp"
#include "pgprisk/quasi_newton.hpp"

namespace pgprisk {

struct GpHyperparams {
    double signal_var = 1.0;
    double noise_var = 0.1;
    std::vector<double> length_scales;

    /// Throws ConfigError unless every entry is positive and finite and,
    /// when dimension > 0, length_scales has that many entries.
    void validate(std::size_t dimension = 0) const;

    /// Packs [log signal_var, log noise_var, log s_1, ..., log s_d].
    Eigen::VectorXd to_log() const;
    static GpHyperparams from_log(const Eigen::VectorXd& log_params);
};

/// k training inputs (rows), their targets, and the query input.
struct GpProblem {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    Eigen::VectorXd query;

    static GpProblem from_training_set(const TrainingSet& ts);

    Eigen::Index size() const noexcept { return inputs.rows(); }
    Eigen::Index dimension() const noexcept { return inputs.cols(); }
};

struct GpPosterior {
    double mean = 0.0;
    double variance = 0.0;
    double log_likelihood = 0.0;
    /// Diagonal jitter that was added to C before factorization.
    double jitter = 0.0;
};

struct LikelihoodValue {
    double value = 0.0;
    /// d value / d log-parameter, same packing as GpHyperparams::to_log().
    Eigen::VectorXd gradient;
    double jitter = 0.0;
};

/// Relative jitter ladder: 1e-10, 1e-9, ..., 1e-4 times the mean diagonal of C.
inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;

double covariance(std::span<const double> a, std::span<const double> b, const GpHyperparams& hp);

/// Predictive mean and variance at the query plus the log marginal likelihood.
/// Throws NonPositiveDefinite when the jitter ladder is exhausted.
GpPosterior posterior(const GpProblem& problem, const GpHyperparams& hp);
GpPosterior posterior(const TrainingSet& ts, const GpHyperparams& hp);

/// Log marginal likelihood -1/2 log det C - 1/2 y' C^-1 y - k/2 log(2 pi) and
/// its analytic gradient with respect to the log hyperparameters.
LikelihoodValue log_marginal_likelihood(const GpProblem& problem, const GpHyperparams& hp);
LikelihoodValue log_marginal_likelihood(const TrainingSet& ts, const GpHyperparams& hp);

struct FitResult {
    GpHyperparams hyperparams;
    double log_likelihood = 0.0;
    /// Index into the list of starting points that produced the result.
    int restart_index = 0;
    int iterations = 0;
};

/// Single-start maximization of the log marginal likelihood over
/// log-parameters. Never returns a point with lower likelihood than `init`.
FitResult fit_hyperparams(const GpProblem& problem, const GpHyperparams& init,
                          const OptimizerSettings& settings = {});

/// The fixed restart set: signal_var 1, noise_var 0.1, all length scales
/// equal to 1, 0.3 and 3 respectively.
std::vector<GpHyperparams> default_starts(std::size_t dimension);

/// Runs fit_hyperparams from each start and keeps the highest likelihood,
/// ties going to the lower restart index. Restarts that fail numerically are
/// skipped; if all fail the last error is rethrown.
FitResult fit_best(const GpProblem& problem, std::span<const GpHyperparams> starts,
                   const OptimizerSettings& settings = {});

}  // namespace pgprisk
