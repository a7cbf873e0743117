#pragma once

#include <optional>
#include <span>

#include "pgprisk/gp.hpp"
#include "pgprisk/pattern_index.hpp"
#include "pgprisk/risk_measures.hpp"

namespace pgprisk {

struct ForecastConfig {
    std::size_t window_len = 10;
    std::size_t neighbors = 25;
    double alpha = 0.01;
    OptimizerSettings optimizer;
    /// Start each fit from the previous step's hyperparameters instead of the
    /// fixed restart set. Makes rolling evaluation sequential.
    bool warm_start = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct OneStepForecast {
    /// Prefix length the forecast was built from; the forecast is for index t.
    std::size_t t = 0;
    PredictiveDistribution distribution;
    RiskForecast risk;
    GpHyperparams hyperparams;
    GpPosterior posterior;
};

/// prefix -> neighbor training set -> fitted GP -> de-standardized price
/// forecast -> VaR / ES. Deterministic given its inputs.
///
/// `warm` replaces the restart set with a single start when given.
OneStepForecast forecast_one_step(std::span<const double> prefix, const ForecastConfig& cfg,
                                  const std::optional<GpHyperparams>& warm = std::nullopt);

/// Same pipeline with the hyperparameters taken as given (no fitting).
OneStepForecast forecast_with_hyperparams(std::span<const double> prefix, const ForecastConfig& cfg,
                                          const GpHyperparams& hp);

}  // namespace pgprisk
