#include "pgprisk/risk_measures.hpp"

#include <cmath>
#include <numbers>

#include "pgprisk/errors.hpp"
#include "pgprisk/special_functions.hpp"

namespace pgprisk {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

struct QuantileTerms {
    double m;       // V / (sqrt(2) s)
    double u;       // erfinv(lambda) = (V - q) / (sqrt(2) s)
    double lambda;
};

// 1 - lambda and 1 + lambda have cancellation-free forms in erfc, so the
// tails of erfinv are taken through erfc_inv.
QuantileTerms quantile_terms(const PredictiveDistribution& pd, double alpha) {
    pd.validate();
    check_alpha(alpha);
    QuantileTerms t{};
    t.m = pd.price_mean / (std::numbers::sqrt2 * pd.price_std);
    t.lambda = (1.0 - alpha) * pgprisk::erf(t.m) - alpha;
    const double one_minus = (1.0 - alpha) * pgprisk::erfc(t.m) + 2.0 * alpha;
    const double one_plus = (1.0 - alpha) * pgprisk::erfc(-t.m);
    if (!(one_minus > 0.0) || !(one_plus > 0.0)) {
        throw DomainError("|lambda| >= 1; the forecast has no mass on positive prices");
    }
    if (t.lambda > 0.5) {
        t.u = erfc_inv(one_minus);
    } else if (t.lambda < -0.5) {
        t.u = -erfc_inv(one_plus);
    } else {
        t.u = erf_inv(t.lambda);
    }
    return t;
}

}  // namespace

void PredictiveDistribution::validate() const {
    if (!std::isfinite(price_mean)) throw DomainError("price_mean must be finite");
    if (!(price_std > 0.0) || !std::isfinite(price_std)) {
        throw DomainError("price_std must be positive and finite");
    }
    if (!(last_price > 0.0) || !std::isfinite(last_price)) {
        throw DomainError("last_price must be positive and finite");
    }
}

double truncation_lambda(const PredictiveDistribution& pd, double alpha) {
    return quantile_terms(pd, alpha).lambda;
}

double truncated_quantile(const PredictiveDistribution& pd, double alpha) {
    const auto t = quantile_terms(pd, alpha);
    return pd.price_mean - std::numbers::sqrt2 * pd.price_std * t.u;
}

double var_estimate(const PredictiveDistribution& pd, double alpha) {
    const auto t = quantile_terms(pd, alpha);
    const double expected_return = pd.price_mean / pd.last_price - 1.0;
    return expected_return - std::numbers::sqrt2 * pd.price_std / pd.last_price * t.u;
}

double es_estimate(const PredictiveDistribution& pd, double alpha) {
    const auto t = quantile_terms(pd, alpha);
    // erf(m) - erf(u) = erf(m) - lambda = alpha (1 + erf(m))
    const double tail_mass = alpha * pgprisk::erfc(-t.m);
    if (!(tail_mass >= 1e-300)) {
        throw TailMassUnderflow("tail mass " + std::to_string(tail_mass) + " below 1e-300");
    }
    // exp(-u^2) - exp(-m^2) without forming two underflowing exponentials
    const double density_gap = std::exp(-t.u * t.u) * -std::expm1(t.u * t.u - t.m * t.m);
    const double expected_return = pd.price_mean / pd.last_price - 1.0;
    constexpr double sqrt_two_over_pi = std::numbers::sqrt2 / 1.7724538509055160273;
    return expected_return - sqrt_two_over_pi * pd.price_std / pd.last_price * density_gap / tail_mass;
}

RiskForecast risk_forecast(const PredictiveDistribution& pd, double alpha) {
    RiskForecast r;
    r.alpha = alpha;
    r.expected_return = pd.price_mean / pd.last_price - 1.0;
    r.return_vol = pd.price_std / pd.last_price;
    r.var_alpha = var_estimate(pd, alpha);
    r.es_alpha = es_estimate(pd, alpha);
    return r;
}

}  // namespace pgprisk
