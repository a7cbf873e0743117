"""Pattern-matching Gaussian-process forecasts of Value at Risk and Expected Shortfall."""

from ._core import (
    ConfigError,
    DataError,
    GpHyperparams,
    NumericalError,
    PgpRiskError,
    backtest,
    binomial_upper_tail,
    build_training_set,
    fit_hyperparams,
    forecast,
    load_csv,
    log_marginal_likelihood,
    posterior,
    risk_forecast,
    synthesize,
    truncated_quantile,
)

__all__ = [
    "ConfigError",
    "DataError",
    "GpHyperparams",
    "NumericalError",
    "PgpRiskError",
    "backtest",
    "binomial_upper_tail",
    "build_training_set",
    "fit_hyperparams",
    "forecast",
    "load_csv",
    "log_marginal_likelihood",
    "posterior",
    "risk_forecast",
    "synthesize",
    "truncated_quantile",
]
