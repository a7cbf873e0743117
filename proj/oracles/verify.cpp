#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "oracles.hpp"
#include "pgprisk/backtest.hpp"
#include "pgprisk/errors.hpp"
#include "pgprisk/forecaster.hpp"
#include "pgprisk/gp.hpp"
#include "pgprisk/pattern_index.hpp"
#include "pgprisk/report_io.hpp"
#include "pgprisk/risk_measures.hpp"
#include "pgprisk/synth.hpp"

namespace pgprisk::verify {

namespace {

using Clock = std::chrono::steady_clock;

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, static_cast<double>(args)...);
    return buf;
}

// Times `body`, which fills passed/detail.
CriterionResult timed(int id, std::string title, double limit, const std::function<void(CriterionResult&)>& body) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    r.time_limit = limit;
    const auto start = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("unexpected error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit > 0.0 && r.seconds >= limit) {
        r.passed = false;
        r.detail += fmt(" [runtime %.1f s exceeds %.0f s]", r.seconds, limit);
    }
    return r;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / double(count - 1));
    return g;
}

double log_uniform(NormalSource& rng, double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

std::size_t uniform_int(NormalSource& rng, std::size_t lo, std::size_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return std::min(hi, lo + static_cast<std::size_t>(rng.uniform() * span));
}

// Truncated-quantile / ES grid: V/s over [0.2, 50], alpha over [0.001, 0.5].
struct GridCase {
    double mean;
    double std;
    double alpha;
};

std::vector<GridCase> risk_grid() {
    std::vector<GridCase> cases;
    for (double ratio : log_grid(0.2, 50.0, 25)) {
        for (double alpha : log_grid(0.001, 0.5, 20)) cases.push_back({100.0, 100.0 / ratio, alpha});
    }
    return cases;
}

struct RandomGp {
    TrainingSet ts;
    GpHyperparams hp;
};

RandomGp random_gp_instance(NormalSource& rng, std::size_t k_lo, std::size_t k_hi) {
    const std::size_t l = uniform_int(rng, 2, 6);
    const std::size_t k = uniform_int(rng, k_lo, k_hi);
    const auto seed = static_cast<std::uint64_t>(rng.uniform() * 1e15);
    const auto prices = random_walk(2 * l + k + 20, seed);
    RandomGp inst;
    inst.ts = build_training_set(prices, l, k);
    inst.hp.signal_var = log_uniform(rng, 0.1, 10.0);
    inst.hp.noise_var = log_uniform(rng, 0.01, 1.0);
    for (std::size_t d = 0; d < l; ++d) inst.hp.length_scales.push_back(log_uniform(rng, 0.3, 3.0));
    return inst;
}

std::vector<std::vector<double>> pattern_rows(const TrainingSet& ts) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : ts.inputs) rows.push_back(p.values);
    return rows;
}

// Lower Cholesky factor by the textbook triple loop; used only to sample GP draws.
std::vector<std::vector<double>> sampling_cholesky(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) a[j][j] -= a[j][k] * a[j][k];
        a[j][j] = std::sqrt(a[j][j]);
        for (std::size_t i = j + 1; i < n; ++i) {
            for (std::size_t k = 0; k < j; ++k) a[i][j] -= a[i][k] * a[j][k];
            a[i][j] /= a[j][j];
        }
        for (std::size_t i = 0; i < j; ++i) a[i][j] = 0.0;
    }
    return a;
}

}  // namespace

CriterionResult truncated_quantile_grid() {
    return timed(1, "Truncated-quantile correctness", 10.0, [](CriterionResult& r) {
        double worst = 0.0;
        std::size_t failures = 0;
        const auto cases = risk_grid();
        for (const auto& c : cases) {
            const PredictiveDistribution pd{c.mean, c.std, c.mean};
            const double closed = truncated_quantile(pd, c.alpha);
            const double reference = oracle::bisect_quantile(c.alpha, c.mean, c.std, 1e-13 * c.std);
            const double err = std::abs(closed - reference) / c.std;
            worst = std::max(worst, err);
            if (!(err <= 1e-8)) ++failures;
        }
        r.passed = failures == 0;
        r.detail = fmt("%.0f cases, max |q - q_oracle| / sigma = %.3g (tol 1e-8), failures %.0f",
                       static_cast<double>(cases.size()), worst, static_cast<double>(failures));
    });
}

CriterionResult expected_shortfall_grid() {
    return timed(2, "Expected-shortfall correctness", 30.0, [](CriterionResult& r) {
        double worst = 0.0;
        std::size_t failures = 0;
        const auto cases = risk_grid();
        for (const auto& c : cases) {
            const PredictiveDistribution pd{c.mean, c.std, c.mean};
            const double closed = es_estimate(pd, c.alpha);
            const double q = oracle::bisect_quantile(c.alpha, c.mean, c.std, 1e-13 * c.std);
            const double reference = oracle::truncated_mean(c.mean, c.std, q) / c.mean - 1.0;
            const double err = std::abs(closed - reference);
            const double allowed = std::max(1e-8 * std::abs(reference), 1e-10);
            worst = std::max(worst, err / allowed);
            if (!(err <= allowed)) ++failures;
        }
        r.passed = failures == 0;
        r.detail = fmt("%.0f cases, max error / allowed = %.3g (rel 1e-8, abs floor 1e-10), failures %.0f",
                       static_cast<double>(cases.size()), worst, static_cast<double>(failures));
    });
}

CriterionResult gp_dense_equivalence() {
    return timed(3, "GP dense-inverse equivalence", 5.0, [](CriterionResult& r) {
        NormalSource rng(3);
        double worst = 0.0;
        std::size_t failures = 0;
        for (int i = 0; i < 200; ++i) {
            const auto inst = random_gp_instance(rng, 1, 12);
            const GpPosterior post = posterior(inst.ts, inst.hp);
            const double lml = log_marginal_likelihood(inst.ts, inst.hp).value;
            const auto ref = oracle::dense_gp_solve(pattern_rows(inst.ts), inst.ts.targets, inst.ts.query.values,
                                                    inst.hp.signal_var, inst.hp.noise_var,
                                                    inst.hp.length_scales, post.jitter);
            const double errs[] = {
                std::abs(post.mean - ref.mean) / std::max(1.0, std::abs(ref.mean)),
                std::abs(post.variance - ref.variance) / std::max(1.0, std::abs(ref.variance)),
                std::abs(post.log_likelihood - ref.log_likelihood) / std::max(1.0, std::abs(ref.log_likelihood)),
                std::abs(lml - ref.log_likelihood) / std::max(1.0, std::abs(ref.log_likelihood)),
            };
            const double e = *std::max_element(std::begin(errs), std::end(errs));
            worst = std::max(worst, e);
            if (!(e <= 1e-10)) ++failures;
        }
        r.passed = failures == 0;
        r.detail = fmt("200 instances (k<=12), max scaled error %.3g (tol 1e-10), failures %.0f", worst,
                       static_cast<double>(failures));
    });
}

CriterionResult gradient_check() {
    return timed(4, "Log-likelihood gradient check", 10.0, [](CriterionResult& r) {
        NormalSource rng(4);
        double worst = 0.0;
        std::size_t failures = 0;
        for (int i = 0; i < 100; ++i) {
            const auto inst = random_gp_instance(rng, 2, 15);
            const auto rows = pattern_rows(inst.ts);
            const Eigen::VectorXd analytic = log_marginal_likelihood(inst.ts, inst.hp).gradient;

            const Eigen::VectorXd x0 = inst.hp.to_log();
            const std::vector<double> x(x0.data(), x0.data() + x0.size());
            auto value = [&](const std::vector<double>& lp) {
                const double sv = std::exp(lp[0]);
                const double nv = std::exp(lp[1]);
                std::vector<double> scales;
                for (std::size_t d = 2; d < lp.size(); ++d) scales.push_back(std::exp(lp[d]));
                return oracle::dense_gp_solve(rows, inst.ts.targets, inst.ts.query.values, sv, nv, scales,
                                              kInitialJitter * (sv + nv))
                    .log_likelihood;
            };
            const auto fd = oracle::fd_gradient(value, x, 1e-5);
            double diff = 0.0;
            double norm = 0.0;
            for (std::size_t j = 0; j < fd.size(); ++j) {
                diff += (analytic(static_cast<Eigen::Index>(j)) - fd[j]) * (analytic(static_cast<Eigen::Index>(j)) - fd[j]);
                norm += fd[j] * fd[j];
            }
            const double rel = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-8);
            worst = std::max(worst, rel);
            if (!(rel <= 1e-5)) ++failures;
        }
        r.passed = failures == 0;
        r.detail = fmt("100 instances, max relative error %.3g (tol 1e-5), failures %.0f", worst,
                       static_cast<double>(failures));
    });
}

RecoveryTrial recovery_trial(std::uint64_t seed) {
    constexpr std::size_t k = 40;
    constexpr std::size_t dim = 2;
    constexpr double true_noise = 0.01;
    NormalSource rng(seed);

    GpProblem problem;
    problem.inputs.resize(k, dim);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t d = 0; d < dim; ++d) problem.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = -2.5 + 5.0 * rng.uniform();
    }
    std::vector<std::vector<double>> cov(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double r2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = problem.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) -
                                    problem.inputs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d));
                r2 += diff * diff;
            }
            cov[i][j] = std::exp(-0.5 * r2) + (i == j ? 1e-10 : 0.0);
        }
    }
    const auto chol = sampling_cholesky(cov);
    std::vector<double> z(k);
    for (auto& v : z) v = rng();
    problem.targets.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j <= i; ++j) f += chol[i][j] * z[j];
        problem.targets(static_cast<Eigen::Index>(i)) = f + std::sqrt(true_noise) * rng();
    }
    problem.query = Eigen::VectorXd::Zero(dim);

    const auto starts = default_starts(dim);
    const FitResult fit = fit_best(problem, starts);
    RecoveryTrial out;
    const Eigen::VectorXd fitted = fit.hyperparams.to_log();
    Eigen::VectorXd truth(2 + dim);
    truth << 0.0, std::log(true_noise), 0.0, 0.0;
    out.max_log_error = (fitted - truth).lpNorm<Eigen::Infinity>();
    for (Eigen::Index i = 0; i < truth.size(); ++i) out.log_errors.push_back(std::abs(fitted[i] - truth[i]));
    out.within = out.max_log_error <= 0.5;
    return out;
}

CriterionResult hyperparameter_recovery() {
    return timed(5, "Hyperparameter recovery", 60.0, [](CriterionResult& r) {
        int hits = 0;
        int signal_hits = 0;
        int noise_hits = 0;
        int scale_hits = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto trial = recovery_trial(seed);
            hits += trial.within ? 1 : 0;
            worst = std::max(worst, trial.max_log_error);
            signal_hits += trial.log_errors[0] <= 0.5 ? 1 : 0;
            noise_hits += trial.log_errors[1] <= 0.5 ? 1 : 0;
            scale_hits += std::all_of(trial.log_errors.begin() + 2, trial.log_errors.end(),
                                      [](double e) { return e <= 0.5; })
                              ? 1
                              : 0;
        }
        r.passed = hits >= 18;
        r.detail = fmt("%.0f/20 trials within +-0.5 in log space (need 18), worst max-log-error %.3f; "
                       "per parameter: signal %.0f/20, noise %.0f/20, scales %.0f/20",
                       static_cast<double>(hits), worst, static_cast<double>(signal_hits),
                       static_cast<double>(noise_hits), static_cast<double>(scale_hits));
    });
}

CriterionResult neighbor_search_equivalence() {
    return timed(6, "Neighbor-search equivalence", 10.0, [](CriterionResult& r) {
        NormalSource rng(6);
        std::size_t failures = 0;
        std::size_t compared = 0;
        std::size_t rejected_both = 0;
        for (int i = 0; i < 500; ++i) {
            const std::size_t l = uniform_int(rng, 2, 12);
            const std::size_t len = uniform_int(rng, 2 * l, 300);
            auto prices = random_walk(len, static_cast<std::uint64_t>(rng.uniform() * 1e15) + 1);
            if (i % 5 == 0) {
                // flat stretch makes some windows degenerate
                const std::size_t at = uniform_int(rng, 0, len - 1);
                const std::size_t run = uniform_int(rng, 1, 2 * l);
                for (std::size_t j = at; j < std::min(len, at + run); ++j) prices[j] = prices[at];
            }
            const std::size_t max_k = len > l + 1 ? std::min<std::size_t>(30, len - l) : 1;
            const std::size_t k = uniform_int(rng, 1, max_k);

            const auto expected = oracle::exhaustive_knn(prices, l, k);
            bool ok = true;
            try {
                const TrainingSet ts = build_training_set(prices, l, k);
                if (!expected || expected->size() != ts.size()) {
                    ok = false;
                } else {
                    for (std::size_t j = 0; j < ts.size(); ++j) {
                        const auto& e = (*expected)[j];
                        ok = ok && ts.inputs[j].source_start == e.start &&
                             std::abs(ts.distances[j] - e.distance) <= 1e-12 &&
                             std::abs(ts.targets[j] - e.target) <= 1e-12 * std::max(1.0, std::abs(e.target));
                    }
                }
                ++compared;
            } catch (const InsufficientHistory&) {
                ok = !expected.has_value();
                ++rejected_both;
            } catch (const DegenerateWindow&) {
                ok = !expected.has_value();
                ++rejected_both;
            }
            if (!ok) ++failures;
        }
        r.passed = failures == 0;
        r.detail = fmt("500 series (%.0f compared, %.0f rejected by both), mismatches %.0f",
                       static_cast<double>(compared), static_cast<double>(rejected_both),
                       static_cast<double>(failures));
    });
}

std::size_t calibration_exceptions(std::uint64_t seed, const CalibrationOptions& options) {
    ForecastConfig cfg;
    cfg.window_len = 10;
    cfg.neighbors = 25;
    cfg.alpha = 0.05;
    const auto prices = random_walk(options.length, seed);
    BacktestOptions bo;
    bo.jobs = options.jobs;
    const auto report = run_backtest(prices, cfg, options.length - options.steps, options.length, bo);
    return report.summary.x;
}

CriterionResult backtest_calibration(const CalibrationOptions& options) {
    return timed(7, "Backtest calibration", 900.0, [&](CriterionResult& r) {
        const auto band = oracle::binomial_acceptance_band(options.steps, 0.05, 0.99);
        int inside = 0;
        std::string counts;
        for (int s = 1; s <= options.seeds; ++s) {
            const std::size_t x = calibration_exceptions(static_cast<std::uint64_t>(s), options);
            inside += (x >= band.lo && x <= band.hi) ? 1 : 0;
            counts += (counts.empty() ? "" : ",") + std::to_string(x);
        }
        r.passed = inside >= options.required;
        r.detail = fmt("%.0f/%.0f seeds inside 99%% band", inside, options.seeds) +
                   fmt(" [%.0f, %.0f]", static_cast<double>(band.lo), static_cast<double>(band.hi)) +
                   " (need " + std::to_string(options.required) + "); counts " + counts;
    });
}

CriterionResult rejection_protocol() {
    return timed(8, "Exception-count rejection rule (n=250, alpha=0.01)", 0.0, [](CriterionResult& r) {
        const auto prices = random_walk(251, 8);
        std::size_t mismatches = 0;
        std::string pattern;
        for (std::size_t target = 0; target <= 10; ++target) {
            // exception on the first `target` steps only
            const StepForecaster stub = [target](std::span<const double> prefix) {
                RiskForecast rf;
                rf.alpha = 0.01;
                const bool hit = prefix.size() - 1 < target;
                rf.var_alpha = hit ? 10.0 : -10.0;
                rf.es_alpha = rf.var_alpha - 0.01;
                return rf;
            };
            const auto report = run_backtest(prices, 1, 251, 0.01, stub);
            const auto& s = report.summary;
            const double exact = oracle::binomial_upper_tail_exact(250, target, 0.01);
            const bool ok = s.n == 250 && s.x == target && s.reject == (target > 5) &&
                            std::abs(s.binomial_pvalue - exact) <= 1e-12;
            if (!ok) ++mismatches;
            pattern += s.reject ? 'R' : '.';
        }
        r.passed = mismatches == 0;
        r.detail = "x=0..10 reject pattern " + pattern + " (expected ......RRRRR), mismatches " +
                   std::to_string(mismatches);
    });
}

CriterionResult report_determinism() {
    return timed(9, "Backtest output determinism (in-process)", 0.0, [](CriterionResult& r) {
        const auto prices = random_walk(260, 9);
        ForecastConfig cfg;
        cfg.window_len = 5;
        cfg.neighbors = 12;
        cfg.alpha = 0.05;
        auto render = [&](unsigned jobs) {
            BacktestOptions bo;
            bo.jobs = jobs;
            const auto report = run_backtest(prices, cfg, 60, 260, bo);
            return steps_csv(report) + summary_json(report.summary).dump(2);
        };
        const std::string a = render(1);
        const std::string b = render(2);
        r.passed = a == b;
        r.detail = r.passed ? "identical CSV + JSON across runs (" + std::to_string(a.size()) + " bytes)"
                            : "outputs differ";
    });
}

CriterionResult affine_invariance() {
    return timed(10, "Scale invariance of risk forecasts", 0.0, [](CriterionResult& r) {
        NormalSource rng(10);
        double worst = 0.0;
        double worst_fixed = 0.0;
        std::size_t failures = 0;
        auto gap = [](const RiskForecast& x, const RiskForecast& y) {
            return std::max({std::abs(x.expected_return - y.expected_return), std::abs(x.var_alpha - y.var_alpha),
                             std::abs(x.es_alpha - y.es_alpha)});
        };
        for (int i = 0; i < 50; ++i) {
            const std::size_t len = uniform_int(rng, 150, 300);
            const auto seed = static_cast<std::uint64_t>(rng.uniform() * 1e15) + 1;
            const auto base = (i % 2 == 0) ? random_walk(len, seed) : regime_switch(len, seed);
            ForecastConfig cfg;
            cfg.window_len = uniform_int(rng, 3, 10);
            cfg.neighbors = uniform_int(rng, cfg.window_len + 2, 25);
            cfg.alpha = 0.01 + 0.09 * rng.uniform();
            const auto ref = forecast_one_step(base, cfg);
            for (double a : {0.01, 1.0, 100.0}) {
                std::vector<double> scaled(base.size());
                for (std::size_t j = 0; j < base.size(); ++j) scaled[j] = a * base[j];
                const double e = gap(forecast_one_step(scaled, cfg).risk, ref.risk);
                worst = std::max(worst, e);
                if (!(e <= 1e-10)) ++failures;
                // same comparison with the fitted hyperparameters held fixed
                worst_fixed = std::max(worst_fixed,
                                       gap(forecast_with_hyperparams(scaled, cfg, ref.hyperparams).risk, ref.risk));
            }
        }
        r.passed = failures == 0;
        r.detail = fmt("50 configs x a in {0.01, 1, 100}, max abs difference %.3g (tol 1e-10), failures %.0f; "
                       "with hyperparameters held fixed %.3g",
                       worst, static_cast<double>(failures), worst_fixed);
    });
}

std::vector<CriterionResult> run_all(bool quick, unsigned jobs) {
    std::vector<CriterionResult> out;
    out.push_back(truncated_quantile_grid());
    out.push_back(expected_shortfall_grid());
    out.push_back(gp_dense_equivalence());
    out.push_back(gradient_check());
    out.push_back(hyperparameter_recovery());
    out.push_back(neighbor_search_equivalence());
    if (!quick) {
        CalibrationOptions co;
        co.jobs = jobs;
        out.push_back(backtest_calibration(co));
    }
    out.push_back(rejection_protocol());
    out.push_back(report_determinism());
    out.push_back(affine_invariance());
    return out;
}

std::string format(const CriterionResult& r) {
    char head[160];
    if (r.time_limit > 0.0) {
        std::snprintf(head, sizeof head, "[%s] %2d %s (%.2f s, limit %.0f s): ", r.passed ? "PASS" : "FAIL", r.id,
                      r.title.c_str(), r.seconds, r.time_limit);
    } else {
        std::snprintf(head, sizeof head, "[%s] %2d %s (%.2f s): ", r.passed ? "PASS" : "FAIL", r.id,
                      r.title.c_str(), r.seconds);
    }
    return head + r.detail;
}

}  // namespace pgprisk::verify
