#include "pgprisk/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pgprisk/errors.hpp"

namespace pgprisk {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;  // 2/sqrt(pi)

// Acklam's rational approximation to the standard normal quantile
// (relative error ~1.2e-9); refined by Newton steps below.
double acklam_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549671010115197e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) return -acklam_quantile(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double erf(double x) noexcept { return std::erf(x); }
double erfc(double x) noexcept { return std::erfc(x); }

double erfc_inv(double q) {
    if (!(q > 0.0 && q < 2.0)) throw DomainError("erfc_inv argument must lie in (0, 2)");
    if (q > 1.0) return -erfc_inv(2.0 - q);
    // erfc(x) = q  <=>  x = -Phi^{-1}(q/2) / sqrt(2)
    double x = -acklam_quantile(0.5 * q) / std::numbers::sqrt2;
    for (int i = 0; i < 2; ++i) {
        const double slope = -kTwoOverSqrtPi * std::exp(-x * x);
        if (slope == 0.0) break;
        x -= (std::erfc(x) - q) / slope;
    }
    return x;
}

double erf_inv(double p) {
    if (!(std::abs(p) < 1.0)) throw DomainError("erf_inv argument must lie in (-1, 1)");
    if (p == 0.0) return 0.0;
    if (std::abs(p) > 0.5) {
        const double x = erfc_inv(1.0 - std::abs(p));
        return p > 0 ? x : -x;
    }
    double x = acklam_quantile(0.5 * (1.0 + p)) / std::numbers::sqrt2;
    for (int i = 0; i < 2; ++i) x -= (std::erf(x) - p) / (kTwoOverSqrtPi * std::exp(-x * x));
    return x;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile argument must lie in (0, 1)");
    return -std::numbers::sqrt2 * erfc_inv(2.0 * p);
}

}  // namespace pgprisk
