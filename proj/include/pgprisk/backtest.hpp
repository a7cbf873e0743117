#pragma once

// Rolling out-of-sample evaluation of VaR / ES forecasts: exception counting,
// the binomial exception test, and the normalized ES error over exceptions.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgprisk/forecaster.hpp"
#include "pgprisk/risk_measures.hpp"

namespace pgprisk {

/// True iff var - realized_return > 0 (strict; a return equal to VaR is not an exception).
bool exception_indicator(double var, double realized_return) noexcept;

/// P[Bin(n, p) >= x] as the regularized incomplete beta I_p(x, n - x + 1).
double binomial_upper_tail(std::size_t n, std::size_t x, double p);

enum class RejectionRule {
    /// Fixed threshold when n = 250 and alpha = 0.01, binomial test otherwise.
    Auto,
    /// Reject iff x > fixed_threshold.
    FixedThreshold,
    /// Reject iff P[Bin(n, alpha) >= x] < 1 - confidence.
    Binomial,
};

struct BacktestOptions {
    RejectionRule rule = RejectionRule::Auto;
    std::size_t fixed_threshold = 5;
    double confidence = 0.95;
    /// Worker threads for per-step forecasts; 0 means hardware concurrency.
    unsigned jobs = 1;
};

struct BacktestStep {
    /// Index of the realized price; the forecast used prices [0, t).
    std::size_t t = 0;
    double realized_return = 0.0;
    double r_hat = 0.0;
    double vol = 0.0;
    double var = 0.0;
    double es = 0.0;
    bool exception = false;
};

struct BacktestSummary {
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t n = 0;
    std::size_t x = 0;
    double alpha = 0.0;
    double binomial_pvalue = 1.0;
    bool reject = false;
    /// Describes the rejection rule that was applied.
    std::string rule;
    /// Absent when fewer than two exceptions or their returns have no spread.
    std::optional<double> es_nrmse;
};

struct BacktestReport {
    std::vector<BacktestStep> steps;
    BacktestSummary summary;
};

/// Decides rejection for x exceptions out of n at level alpha.
bool reject_exceptions(std::size_t n, std::size_t x, double alpha, const BacktestOptions& options,
                       std::string* rule_description = nullptr);

/// sqrt(sum (ES_i - R_i)^2) / sqrt(sum (R_i - mean R)^2) over exception steps.
std::optional<double> es_nrmse(std::span<const BacktestStep> steps);

/// Summary statistics over a contiguous run of steps.
BacktestSummary summarize(std::span<const BacktestStep> steps, double alpha, const BacktestOptions& options);

/// Consecutive full windows of `window` steps from the start of the report.
std::vector<BacktestSummary> window_summaries(const BacktestReport& report, std::size_t window,
                                              const BacktestOptions& options);

/// Maps a price prefix to a risk forecast for the next price. Must be pure
/// when BacktestOptions::jobs > 1.
using StepForecaster = std::function<RiskForecast(std::span<const double> prefix)>;

/// Evaluates realized indices [from, to). Each step only sees prices strictly
/// before its realized value. Per-step errors are rethrown with the index of
/// the earliest failing step.
BacktestReport run_backtest(std::span<const double> prices, std::size_t from, std::size_t to,
                            double alpha, const StepForecaster& forecaster,
                            const BacktestOptions& options = {});

/// Backtest of the GP forecaster itself.
BacktestReport run_backtest(std::span<const double> prices, const ForecastConfig& cfg, std::size_t from,
                            std::size_t to, const BacktestOptions& options = {});

/// Earliest realized index at which forecast_one_step can run: max(2l, l + k).
std::size_t first_evaluable_index(const ForecastConfig& cfg);

}  // namespace pgprisk
