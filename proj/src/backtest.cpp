#include "pgprisk/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "pgprisk/errors.hpp"

namespace pgprisk {

bool exception_indicator(double var, double realized_return) noexcept {
    return var - realized_return > 0.0;
}

double binomial_upper_tail(std::size_t n, std::size_t x, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
    if (x == 0) return 1.0;
    if (x > n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;

    // P[X >= x] = I_p(x, n - x + 1)
    return boost::math::ibeta(static_cast<double>(x), static_cast<double>(n - x + 1), p);
}

bool reject_exceptions(std::size_t n, std::size_t x, double alpha, const BacktestOptions& options,
                       std::string* rule_description) {
    RejectionRule rule = options.rule;
    if (rule == RejectionRule::Auto) {
        rule = (n == 250 && alpha == 0.01) ? RejectionRule::FixedThreshold : RejectionRule::Binomial;
    }
    if (rule == RejectionRule::FixedThreshold) {
        if (rule_description) *rule_description = "x>" + std::to_string(options.fixed_threshold);
        return x > options.fixed_threshold;
    }
    if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
        throw ConfigError("confidence must lie in (0, 1)");
    }
    if (rule_description) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "binomial upper tail < %g", 1.0 - options.confidence);
        *rule_description = buf;
    }
    return binomial_upper_tail(n, x, alpha) < 1.0 - options.confidence;
}

std::optional<double> es_nrmse(std::span<const BacktestStep> steps) {
    double sum_r = 0.0;
    std::size_t count = 0;
    for (const auto& s : steps) {
        if (!s.exception) continue;
        sum_r += s.realized_return;
        ++count;
    }
    if (count <= 1) return std::nullopt;
    const double mean_r = sum_r / static_cast<double>(count);
    double err = 0.0;
    double spread = 0.0;
    for (const auto& s : steps) {
        if (!s.exception) continue;
        err += (s.es - s.realized_return) * (s.es - s.realized_return);
        spread += (s.realized_return - mean_r) * (s.realized_return - mean_r);
    }
    if (!(spread > 0.0)) return std::nullopt;
    return std::sqrt(err) / std::sqrt(spread);
}

BacktestSummary summarize(std::span<const BacktestStep> steps, double alpha, const BacktestOptions& options) {
    BacktestSummary s;
    s.alpha = alpha;
    s.n = steps.size();
    if (!steps.empty()) {
        s.from = steps.front().t;
        s.to = steps.back().t + 1;
    }
    s.x = static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const BacktestStep& st) { return st.exception; }));
    s.binomial_pvalue = binomial_upper_tail(s.n, s.x, alpha);
    s.reject = reject_exceptions(s.n, s.x, alpha, options, &s.rule);
    s.es_nrmse = es_nrmse(steps);
    return s;
}

std::vector<BacktestSummary> window_summaries(const BacktestReport& report, std::size_t window,
                                              const BacktestOptions& options) {
    if (window == 0) throw ConfigError("window size must be >= 1");
    std::vector<BacktestSummary> out;
    const std::span<const BacktestStep> all(report.steps);
    for (std::size_t start = 0; start + window <= all.size(); start += window) {
        out.push_back(summarize(all.subspan(start, window), report.summary.alpha, options));
    }
    return out;
}

BacktestReport run_backtest(std::span<const double> prices, std::size_t from, std::size_t to, double alpha,
                            const StepForecaster& forecaster, const BacktestOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (from < 1) throw ConfigError("evaluation must start at index >= 1");
    if (to > prices.size()) throw ConfigError("evaluation end beyond the series");
    if (from >= to) throw ConfigError("empty evaluation range");

    const std::size_t count = to - from;
    std::vector<BacktestStep> steps(count);
    std::vector<std::exception_ptr> errors(count);

    auto run_step = [&](std::size_t i) {
        const std::size_t t = from + i;
        try {
            const RiskForecast rf = forecaster(prices.first(t));
            BacktestStep& s = steps[i];
            s.t = t;
            s.realized_return = prices[t] / prices[t - 1] - 1.0;
            s.r_hat = rf.expected_return;
            s.vol = rf.return_vol;
            s.var = rf.var_alpha;
            s.es = rf.es_alpha;
            s.exception = exception_indicator(rf.var_alpha, s.realized_return);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            run_step(i);
            if (errors[i]) break;
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) run_step(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < count; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            throw Error(e.kind(), e.name(), "at t=" + std::to_string(from + i) + ": " + e.message());
        }
    }

    BacktestReport report;
    report.steps = std::move(steps);
    report.summary = summarize(report.steps, alpha, options);
    return report;
}

std::size_t first_evaluable_index(const ForecastConfig& cfg) {
    return std::max(2 * cfg.window_len, cfg.window_len + cfg.neighbors);
}

BacktestReport run_backtest(std::span<const double> prices, const ForecastConfig& cfg, std::size_t from,
                            std::size_t to, const BacktestOptions& options) {
    cfg.validate();
    if (!cfg.warm_start) {
        const StepForecaster f = [&cfg](std::span<const double> prefix) {
            return forecast_one_step(prefix, cfg).risk;
        };
        return run_backtest(prices, from, to, cfg.alpha, f, options);
    }
    // Warm starts chain each fit to the previous step, so steps run in order.
    std::optional<GpHyperparams> previous;
    const StepForecaster chained = [&](std::span<const double> prefix) {
        const auto fc = forecast_one_step(prefix, cfg, previous);
        previous = fc.hyperparams;
        return fc.risk;
    };
    BacktestOptions sequential = options;
    sequential.jobs = 1;
    return run_backtest(prices, from, to, cfg.alpha, chained, sequential);
}

}  // namespace pgprisk
