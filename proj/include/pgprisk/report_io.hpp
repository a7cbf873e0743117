#pragma once

#include <string>

#include <json.hpp>

#include "pgprisk/backtest.hpp"
#include "pgprisk/forecaster.hpp"

namespace pgprisk {

/// Per-step table with header `t,realized_return,r_hat,vol,var,es,exception`.
/// Reals are printed with 17 significant digits.
std::string steps_csv(const BacktestReport& report);

/// {n, x, alpha, p_value, reject, es_nrmse, rule, from, to}; es_nrmse is null when absent.
nlohmann::ordered_json summary_json(const BacktestSummary& summary);

nlohmann::ordered_json hyperparams_json(const GpHyperparams& hp);

/// {t, v_hat, sigma_hat, r_hat, vol, var, es, hyperparams}.
nlohmann::ordered_json forecast_json(const OneStepForecast& fc);

nlohmann::ordered_json config_json(const ForecastConfig& cfg);

}  // namespace pgprisk
