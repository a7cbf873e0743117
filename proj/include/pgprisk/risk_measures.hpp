#pragma once

// Value at Risk and Expected Shortfall for a Gaussian price forecast that is
// truncated to positive prices.
//
// With m = V / (sqrt(2) s) for forecast mean V and std-dev s, the alpha
// quantile of the truncated law is
//
//     q = V - sqrt(2) s erfinv(lambda),   lambda = (1 - alpha) erf(m) - alpha
//
// and the conditional mean below q is
//
//     ESV = V - sqrt(2/pi) s [exp(-u^2) - exp(-m^2)] / [erf(m) - erf(u)]
//
// with u = erfinv(lambda). Both are reported as simple returns against the
// last observed price.

namespace pgprisk {

struct PredictiveDistribution {
    double price_mean = 0.0;  ///< forecast price mean
    double price_std = 1.0;   ///< forecast price std-dev, > 0
    double last_price = 1.0;  ///< last observed price, > 0

    /// Throws DomainError when price_std or last_price is not positive and finite.
    void validate() const;
};

struct RiskForecast {
    double expected_return = 0.0;
    double return_vol = 0.0;
    double var_alpha = 0.0;
    double es_alpha = 0.0;
    double alpha = 0.01;
};

/// lambda = (1 - alpha) erf(V/(sqrt(2) s)) - alpha.
double truncation_lambda(const PredictiveDistribution& pd, double alpha);

/// Price below which the truncated forecast falls with probability alpha.
double truncated_quantile(const PredictiveDistribution& pd, double alpha);

/// VaR as a simple return: expected_return - sqrt(2) s erfinv(lambda) / last_price.
double var_estimate(const PredictiveDistribution& pd, double alpha);

/// ES as a simple return. Throws TailMassUnderflow when the tail mass
/// erf(m) - erf(u) drops below 1e-300.
double es_estimate(const PredictiveDistribution& pd, double alpha);

/// All four risk fields at once.
RiskForecast risk_forecast(const PredictiveDistribution& pd, double alpha);

}  // namespace pgprisk
