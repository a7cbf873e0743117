#pragma once

// Reference implementations used to check the library: slow, independent
// routes to the same quantities. Nothing here calls the library's erf,
// Cholesky factorization or neighbor search.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace pgprisk::oracle {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Integral (moment 0 or 1) of x^moment * exp(-(x - mean)^2 / (2 std^2)) over [lower, upper]
/// by 31-point Gauss-Kronrod on half-std-dev pieces in extended precision.
/// `upper` may be +inf.
/// `tol` is relative to the integral. Throws std::runtime_error when the
/// error estimate exceeds tol.
QuadratureResult quad_truncated_gaussian(int moment, double lower, double upper, double mean, double std,
                                         double tol = 1e-15);

/// Extended-precision variant used internally by the other oracles.
long double quad_gaussian_ld(int moment, long double lower, long double upper, long double mean,
                             long double std, long double rel_tol = 1e-17L);

/// Alpha quantile of N(mean, std^2) truncated to [0, inf), by bisection on the
/// quadrature CDF until the bracket is narrower than `tol`.
double bisect_quantile(double alpha, double mean, double std, double tol);

/// Mean of N(mean, std^2) restricted to [0, upper], as a ratio of quadratures.
double truncated_mean(double mean, double std, double upper = std::numeric_limits<double>::infinity());

struct DenseGpResult {
    double mean = 0.0;
    double variance = 0.0;
    double log_likelihood = 0.0;
};

/// GP posterior and log likelihood from an explicit Gauss-Jordan inverse in
/// long double. `jitter` is added to the training covariance diagonal.
DenseGpResult dense_gp_solve(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
                             std::span<const double> query, double signal_var, double noise_var,
                             std::span<const double> length_scales, double jitter);

struct Neighbor {
    std::size_t start = 0;
    double distance = 0.0;
    double target = 0.0;
};

/// All candidate windows scored, then the k best picked by repeated linear
/// minimum scans. Returns nullopt when the prefix is too short, the query is
/// degenerate or fewer than k candidates exist.
std::optional<std::vector<Neighbor>> exhaustive_knn(std::span<const double> prefix, std::size_t window_len,
                                                    std::size_t k);

/// Central differences of f at x with step h in every coordinate.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, double h);

/// P[Bin(n, p) >= x] evaluated in exact rational arithmetic (p taken exactly
/// as its double value), rounded to double at the end.
double binomial_upper_tail_exact(std::size_t n, std::size_t x, double p);

struct CountBand {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

/// Exact two-sided acceptance band for Bin(n, p): the narrowest [lo, hi] with
/// P[X < lo] <= (1 - level)/2 and P[X > hi] <= (1 - level)/2.
CountBand binomial_acceptance_band(std::size_t n, double p, double level);

}  // namespace pgprisk::oracle
