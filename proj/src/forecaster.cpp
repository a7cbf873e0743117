#include "pgprisk/forecaster.hpp"

#include <cmath>

#include "pgprisk/errors.hpp"

namespace pgprisk {

void ForecastConfig::validate() const {
    if (window_len < 2) throw ConfigError("window_len must be >= 2");
    if (neighbors < 1) throw ConfigError("neighbors must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (optimizer.max_iterations < 0) throw ConfigError("optimizer max_iterations must be >= 0");
    if (optimizer.history < 1) throw ConfigError("optimizer history must be >= 1");
}

namespace {

OneStepForecast assemble(std::span<const double> prefix, const ForecastConfig& cfg, const TrainingSet& ts,
                         const GpProblem& problem, const GpHyperparams& hp) {
    OneStepForecast out;
    out.t = prefix.size();
    out.hyperparams = hp;
    out.posterior = posterior(problem, hp);

    const double scale = ts.query.window_std;
    out.distribution.price_mean = scale * out.posterior.mean + ts.query.window_mean;
    out.distribution.price_std = scale * std::sqrt(out.posterior.variance);
    out.distribution.last_price = prefix.back();
    out.risk = risk_forecast(out.distribution, cfg.alpha);
    return out;
}

}  // namespace

OneStepForecast forecast_one_step(std::span<const double> prefix, const ForecastConfig& cfg,
                                  const std::optional<GpHyperparams>& warm) {
    cfg.validate();
    const TrainingSet ts = build_training_set(prefix, cfg.window_len, cfg.neighbors);
    const GpProblem problem = GpProblem::from_training_set(ts);

    FitResult fit;
    if (warm) {
        fit = fit_hyperparams(problem, *warm, cfg.optimizer);
    } else {
        const auto starts = default_starts(cfg.window_len);
        fit = fit_best(problem, starts, cfg.optimizer);
    }
    return assemble(prefix, cfg, ts, problem, fit.hyperparams);
}

OneStepForecast forecast_with_hyperparams(std::span<const double> prefix, const ForecastConfig& cfg,
                                          const GpHyperparams& hp) {
    cfg.validate();
    hp.validate(cfg.window_len);
    const TrainingSet ts = build_training_set(prefix, cfg.window_len, cfg.neighbors);
    return assemble(prefix, cfg, ts, GpProblem::from_training_set(ts), hp);
}

}  // namespace pgprisk
