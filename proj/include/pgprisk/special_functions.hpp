#pragma once

namespace pgprisk {

double erf(double x) noexcept;
double erfc(double x) noexcept;

/// Inverse of erf on (-1, 1). Throws DomainError for |p| >= 1 or NaN.
double erf_inv(double p);

/// Inverse of erfc on (0, 2). Accurate in the tails where 1 - p would round.
/// Throws DomainError outside (0, 2).
double erfc_inv(double q);

/// Standard normal quantile, via erfc_inv.
double normal_quantile(double p);

}  // namespace pgprisk
