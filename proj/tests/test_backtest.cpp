#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "oracles.hpp"
#include "pgprisk/backtest.hpp"
#include "pgprisk/errors.hpp"
#include "pgprisk/synth.hpp"

using namespace pgprisk;

namespace {

ForecastConfig small_config() {
    ForecastConfig cfg;
    cfg.window_len = 5;
    cfg.neighbors = 12;
    cfg.alpha = 0.05;
    return cfg;
}

BacktestStep step(bool exception, double realized, double es) {
    BacktestStep s;
    s.exception = exception;
    s.realized_return = realized;
    s.es = es;
    return s;
}

bool same_steps(const BacktestReport& a, const BacktestReport& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto& x = a.steps[i];
        const auto& y = b.steps[i];
        if (x.t != y.t || x.realized_return != y.realized_return || x.r_hat != y.r_hat || x.vol != y.vol ||
            x.var != y.var || x.es != y.es || x.exception != y.exception) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("exception indicator") {
    CHECK(exception_indicator(-0.02, -0.05));
    CHECK_FALSE(exception_indicator(-0.02, 0.01));
    CHECK_FALSE(exception_indicator(-0.02, -0.02));
    CHECK(exception_indicator(-0.02, std::nextafter(-0.02, -1.0)));
}

TEST_CASE("fixed threshold at 250 steps and 1%") {
    const BacktestOptions opts;
    std::string rule;
    CHECK_FALSE(reject_exceptions(250, 5, 0.01, opts, &rule));
    CHECK(rule == "x>5");
    CHECK(reject_exceptions(250, 6, 0.01, opts));
    // elsewhere the default is the binomial test
    CHECK_FALSE(reject_exceptions(251, 5, 0.01, opts, &rule));
    CHECK(rule == "binomial upper tail < 0.05");
    CHECK(reject_exceptions(251, 6, 0.01, opts));

    BacktestOptions binomial;
    binomial.rule = RejectionRule::Binomial;
    // P[X >= 6] ~ 0.04 < 0.05 at n = 250
    CHECK(reject_exceptions(250, 6, 0.01, binomial));
    CHECK_FALSE(reject_exceptions(250, 5, 0.01, binomial));
    binomial.confidence = 0.99;
    CHECK_FALSE(reject_exceptions(250, 6, 0.01, binomial));
    binomial.confidence = 1.0;
    CHECK_THROWS_AS(reject_exceptions(250, 6, 0.01, binomial), ConfigError);

    BacktestOptions fixed;
    fixed.rule = RejectionRule::FixedThreshold;
    fixed.fixed_threshold = 10;
    CHECK_FALSE(reject_exceptions(1000, 10, 0.01, fixed));
    CHECK(reject_exceptions(1000, 11, 0.01, fixed));
}

TEST_CASE("binomial tail matches exact rational arithmetic") {
    for (std::size_t n : {1u, 10u, 50u, 250u, 500u}) {
        for (double p : {0.01, 0.05, 0.3}) {
            for (std::size_t x = 0; x <= n; x += std::max<std::size_t>(1, n / 25)) {
                const double ref = oracle::binomial_upper_tail_exact(n, x, p);
                CHECK(std::abs(binomial_upper_tail(n, x, p) - ref) <= 1e-12);
            }
        }
    }
    CHECK(binomial_upper_tail(250, 0, 0.01) == 1.0);
    CHECK(binomial_upper_tail(250, 251, 0.01) == 0.0);
    CHECK_THROWS_AS(binomial_upper_tail(10, 1, 1.5), DomainError);
}

TEST_CASE("perfect foresight stub never breaches") {
    const auto prices = random_walk(300, 3);
    const StepForecaster stub = [](std::span<const double>) {
        RiskForecast r;
        r.var_alpha = -std::numeric_limits<double>::infinity();
        r.es_alpha = -std::numeric_limits<double>::infinity();
        return r;
    };
    const auto report = run_backtest(prices, 50, 300, 0.01, stub);
    CHECK(report.summary.n == 250);
    CHECK(report.summary.x == 0);
    CHECK_FALSE(report.summary.reject);
    CHECK(report.summary.binomial_pvalue == 1.0);
    CHECK_FALSE(report.summary.es_nrmse.has_value());
}

TEST_CASE("true VaR on iid Gaussian returns is calibrated") {
    const double vol = 0.01;
    const double alpha = 0.05;
    NormalSource normal(99);
    std::vector<double> prices{100.0};
    for (int i = 0; i < 2000; ++i) prices.push_back(prices.back() * (1.0 + vol * normal()));
    const StepForecaster truth = [&](std::span<const double>) {
        RiskForecast r;
        r.var_alpha = -1.6448536269514722 * vol;
        r.es_alpha = -std::exp(-0.5 * 1.6448536269514722 * 1.6448536269514722) / std::sqrt(2 * M_PI) / alpha * vol;
        return r;
    };
    const auto report = run_backtest(prices, 1, prices.size(), alpha, truth);
    REQUIRE(report.summary.n == 2000);
    const auto band = oracle::binomial_acceptance_band(2000, alpha, 0.99);
    CHECK(report.summary.x >= band.lo);
    CHECK(report.summary.x <= band.hi);
    CHECK_FALSE(report.summary.reject);
}

TEST_CASE("forecasts never see the price they are scored against") {
    const auto prices = regime_switch(120, 5);
    const auto cfg = small_config();
    const std::size_t from = 60;
    const std::size_t to = 70;
    const auto base = run_backtest(prices, cfg, from, to);

    std::vector<std::size_t> seen;
    const StepForecaster probe = [&](std::span<const double> prefix) {
        seen.push_back(prefix.size());
        return RiskForecast{};
    };
    run_backtest(prices, from, to, 0.05, probe);
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == from + i);

    for (std::size_t k = from; k < to; ++k) {
        auto mutated = prices;
        for (std::size_t j = k; j < mutated.size(); ++j) mutated[j] *= 1.0 + 0.05 * std::sin(static_cast<double>(j));
        const auto m = run_backtest(mutated, cfg, from, to);
        for (std::size_t i = 0; from + i <= k; ++i) {
            CHECK(m.steps[i].var == base.steps[i].var);
            CHECK(m.steps[i].es == base.steps[i].es);
        }
    }
}

TEST_CASE("ES error over exceptions") {
    std::vector<BacktestStep> none{step(false, 0.0, 0.0), step(false, 0.1, -0.1)};
    CHECK_FALSE(es_nrmse(none).has_value());
    std::vector<BacktestStep> one{step(true, -0.05, -0.04), step(false, 0.0, 0.0)};
    CHECK_FALSE(es_nrmse(one).has_value());
    std::vector<BacktestStep> equal{step(true, -0.05, -0.04), step(true, -0.05, -0.04)};
    CHECK_FALSE(es_nrmse(equal).has_value());

    // exceptions at -0.03 and -0.05 (mean -0.04), ES -0.04 and -0.04
    std::vector<BacktestStep> two{step(true, -0.03, -0.04), step(false, 0.2, -9.0), step(true, -0.05, -0.04)};
    CHECK(*es_nrmse(two) == doctest::Approx(1.0).epsilon(1e-12));
    two[0].es = -0.03;
    two[2].es = -0.05;
    CHECK(*es_nrmse(two) == 0.0);
    two[0].es = -0.01;
    two[2].es = -0.05;
    // sqrt(0.02^2) / sqrt(2 * 0.01^2)
    CHECK(*es_nrmse(two) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("window summaries split the report") {
    std::vector<BacktestStep> steps;
    for (std::size_t i = 0; i < 10; ++i) {
        auto s = step(i % 3 == 0, -0.01 * static_cast<double>(i), -0.02);
        s.t = 100 + i;
        steps.push_back(s);
    }
    BacktestReport report;
    report.steps = steps;
    report.summary = summarize(steps, 0.01, {});
    CHECK(report.summary.from == 100);
    CHECK(report.summary.to == 110);
    CHECK(report.summary.x == 4);

    const auto windows = window_summaries(report, 4, {});
    REQUIRE(windows.size() == 2);  // the trailing partial window is dropped
    CHECK(windows[0].from == 100);
    CHECK(windows[0].to == 104);
    CHECK(windows[0].x == 2);
    CHECK(windows[1].from == 104);
    CHECK(windows[1].x == 1);
    CHECK_THROWS_AS(window_summaries(report, 0, {}), ConfigError);
}

TEST_CASE("parallel runs match sequential runs bit for bit") {
    const auto prices = regime_switch(150, 8);
    const auto cfg = small_config();
    BacktestOptions seq;
    BacktestOptions par;
    par.jobs = 3;
    const auto a = run_backtest(prices, cfg, 40, 150, seq);
    const auto b = run_backtest(prices, cfg, 40, 150, par);
    const auto c = run_backtest(prices, cfg, 40, 150, seq);
    CHECK(same_steps(a, b));
    CHECK(same_steps(a, c));
    CHECK(a.summary.x == b.summary.x);
    CHECK(a.summary.binomial_pvalue == b.summary.binomial_pvalue);
}

TEST_CASE("warm starts run in order and stay valid") {
    const auto prices = random_walk(140, 21);
    auto cfg = small_config();
    cfg.warm_start = true;
    BacktestOptions par;
    par.jobs = 4;
    const auto a = run_backtest(prices, cfg, 60, 140, par);
    const auto b = run_backtest(prices, cfg, 60, 140);
    CHECK(same_steps(a, b));
    for (const auto& s : a.steps) CHECK(std::isfinite(s.var));
}

TEST_CASE("the earliest failing step is reported") {
    const auto prices = random_walk(60, 1);
    const StepForecaster failing = [](std::span<const double> prefix) -> RiskForecast {
        if (prefix.size() == 23) throw InsufficientHistory("first");
        if (prefix.size() == 31) throw DomainError("second");
        return RiskForecast{};
    };
    for (unsigned jobs : {1u, 4u}) {
        BacktestOptions opts;
        opts.jobs = jobs;
        try {
            run_backtest(prices, 20, 60, 0.01, failing, opts);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Data);
            CHECK(e.name() == "InsufficientHistory");
            CHECK(std::string(e.what()).find("t=23") != std::string::npos);
        }
    }
}

TEST_CASE("range validation") {
    const auto prices = random_walk(60, 1);
    const StepForecaster stub = [](std::span<const double>) { return RiskForecast{}; };
    CHECK_THROWS_AS(run_backtest(prices, 0, 10, 0.01, stub), ConfigError);
    CHECK_THROWS_AS(run_backtest(prices, 10, 61, 0.01, stub), ConfigError);
    CHECK_THROWS_AS(run_backtest(prices, 10, 10, 0.01, stub), ConfigError);
    CHECK_THROWS_AS(run_backtest(prices, 10, 20, 1.0, stub), ConfigError);
}

TEST_CASE("first evaluable index") {
    ForecastConfig cfg;
    CHECK(first_evaluable_index(cfg) == 35);  // l + k with l = 10, k = 25
    cfg.neighbors = 3;
    CHECK(first_evaluable_index(cfg) == 20);  // 2l
    cfg = small_config();
    const auto prices = random_walk(200, 6);
    CHECK_NOTHROW(run_backtest(prices, cfg, first_evaluable_index(cfg), first_evaluable_index(cfg) + 3));
    CHECK_THROWS_AS(run_backtest(prices, cfg, first_evaluable_index(cfg) - 1, first_evaluable_index(cfg)), Error);
}
