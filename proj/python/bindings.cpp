#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pgprisk/backtest.hpp"
#include "pgprisk/errors.hpp"
#include "pgprisk/forecaster.hpp"
#include "pgprisk/gp.hpp"
#include "pgprisk/pattern_index.hpp"
#include "pgprisk/report_io.hpp"
#include "pgprisk/risk_measures.hpp"
#include "pgprisk/series.hpp"
#include "pgprisk/synth.hpp"

namespace py = pybind11;
using namespace pgprisk;

namespace {

py::dict to_dict(const RiskForecast& r) {
    py::dict d;
    d["expected_return"] = r.expected_return;
    d["return_vol"] = r.return_vol;
    d["var"] = r.var_alpha;
    d["es"] = r.es_alpha;
    d["alpha"] = r.alpha;
    return d;
}

py::dict to_dict(const BacktestSummary& s) {
    py::dict d;
    d["from"] = s.from;
    d["to"] = s.to;
    d["n"] = s.n;
    d["x"] = s.x;
    d["alpha"] = s.alpha;
    d["p_value"] = s.binomial_pvalue;
    d["reject"] = s.reject;
    d["rule"] = s.rule;
    d["es_nrmse"] = s.es_nrmse ? py::object(py::float_(*s.es_nrmse)) : py::object(py::none());
    return d;
}

GpProblem make_problem(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const Eigen::VectorXd& query) {
    GpProblem p;
    p.inputs = inputs;
    p.targets = targets;
    p.query = query;
    return p;
}

PredictiveDistribution make_pd(double v_hat, double sigma_hat, double last_price) {
    PredictiveDistribution pd{v_hat, sigma_hat, last_price};
    pd.validate();
    return pd;
}

ForecastConfig make_config(std::size_t window_len, std::size_t neighbors, double alpha, bool warm_start) {
    ForecastConfig cfg;
    cfg.window_len = window_len;
    cfg.neighbors = neighbors;
    cfg.alpha = alpha;
    cfg.warm_start = warm_start;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pattern-matching Gaussian-process VaR and ES forecasts";

    auto base = py::register_exception<Error>(m, "PgpRiskError");
    static py::exception<Error> config_error(m, "ConfigError", base.ptr());
    static py::exception<Error> data_error(m, "DataError", base.ptr());
    static py::exception<Error> numerical_error(m, "NumericalError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            switch (e.kind()) {
                case ErrorKind::Config: PyErr_SetString(config_error.ptr(), e.what()); break;
                case ErrorKind::Data: PyErr_SetString(data_error.ptr(), e.what()); break;
                case ErrorKind::Numerical: PyErr_SetString(numerical_error.ptr(), e.what()); break;
            }
        }
    });

    py::class_<GpHyperparams>(m, "GpHyperparams")
        .def(py::init([](double signal_var, double noise_var, std::vector<double> length_scales) {
                 GpHyperparams hp{signal_var, noise_var, std::move(length_scales)};
                 hp.validate();
                 return hp;
             }),
             py::arg("signal_var"), py::arg("noise_var"), py::arg("length_scales"))
        .def_readwrite("signal_var", &GpHyperparams::signal_var)
        .def_readwrite("noise_var", &GpHyperparams::noise_var)
        .def_readwrite("length_scales", &GpHyperparams::length_scales)
        .def("__repr__", [](const GpHyperparams& hp) {
            return "GpHyperparams(signal_var=" + std::to_string(hp.signal_var) +
                   ", noise_var=" + std::to_string(hp.noise_var) + ", length_scales=[" +
                   std::to_string(hp.length_scales.size()) + " values])";
        });

    m.def("synthesize",
          [](const std::string& kind, std::size_t length, std::uint64_t seed) {
              return synthesize(parse_synth_kind(kind), length, seed);
          },
          py::arg("kind"), py::arg("length"), py::arg("seed"),
          "Seeded synthetic prices: 'random-walk' or 'regime-switch'.");

    m.def("load_csv",
          [](const std::string& path, const std::string& date_column, const std::string& price_column) {
              const PriceSeries s = load_csv(path, CsvColumns{date_column, price_column});
              std::vector<std::string> labels;
              for (const auto& o : s.observations()) labels.push_back(o.label);
              return py::make_tuple(labels, s.prices());
          },
          py::arg("path"), py::arg("date_column") = "date", py::arg("price_column") = "price",
          "Returns (labels, prices) sorted by timestamp.");

    m.def("build_training_set",
          [](const std::vector<double>& prices, std::size_t window_len, std::size_t neighbors) {
              const TrainingSet ts = build_training_set(prices, window_len, neighbors);
              const GpProblem p = GpProblem::from_training_set(ts);
              std::vector<std::size_t> starts;
              for (const auto& in : ts.inputs) starts.push_back(in.source_start);
              py::dict d;
              d["inputs"] = p.inputs;
              d["targets"] = p.targets;
              d["query"] = p.query;
              d["distances"] = ts.distances;
              d["starts"] = starts;
              d["query_mean"] = ts.query.window_mean;
              d["query_std"] = ts.query.window_std;
              return d;
          },
          py::arg("prices"), py::arg("window_len"), py::arg("neighbors"));

    m.def("posterior",
          [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
             const GpHyperparams& hp) {
              const GpPosterior post = posterior(make_problem(inputs, targets, query), hp);
              py::dict d;
              d["mean"] = post.mean;
              d["variance"] = post.variance;
              d["log_likelihood"] = post.log_likelihood;
              d["jitter"] = post.jitter;
              return d;
          },
          py::arg("inputs"), py::arg("targets"), py::arg("query"), py::arg("hyperparams"));

    m.def("log_marginal_likelihood",
          [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const GpHyperparams& hp) {
              const auto lv =
                  log_marginal_likelihood(make_problem(inputs, targets, Eigen::VectorXd::Zero(inputs.cols())), hp);
              return py::make_tuple(lv.value, Eigen::VectorXd(lv.gradient));
          },
          py::arg("inputs"), py::arg("targets"), py::arg("hyperparams"),
          "(value, gradient over [log signal_var, log noise_var, log s_1..s_d]).");

    m.def("fit_hyperparams",
          [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
             std::optional<std::vector<GpHyperparams>> starts) {
              const GpProblem p = make_problem(inputs, targets, Eigen::VectorXd::Zero(inputs.cols()));
              const auto s = starts ? *starts : default_starts(static_cast<std::size_t>(inputs.cols()));
              const FitResult fit = fit_best(p, s);
              return py::make_tuple(fit.hyperparams, fit.log_likelihood);
          },
          py::arg("inputs"), py::arg("targets"), py::arg("starts") = py::none(),
          "Best of the restarts; returns (hyperparams, log_likelihood).");

    m.def("truncated_quantile",
          [](double v_hat, double sigma_hat, double alpha) {
              return truncated_quantile(make_pd(v_hat, sigma_hat, 1.0), alpha);
          },
          py::arg("v_hat"), py::arg("sigma_hat"), py::arg("alpha"));

    m.def("risk_forecast",
          [](double v_hat, double sigma_hat, double last_price, double alpha) {
              return to_dict(risk_forecast(make_pd(v_hat, sigma_hat, last_price), alpha));
          },
          py::arg("v_hat"), py::arg("sigma_hat"), py::arg("last_price"), py::arg("alpha"));

    m.def("forecast",
          [](const std::vector<double>& prices, std::size_t window_len, std::size_t neighbors, double alpha) {
              const auto fc = forecast_one_step(prices, make_config(window_len, neighbors, alpha, false));
              return py::module_::import("json").attr("loads")(forecast_json(fc).dump());
          },
          py::arg("prices"), py::arg("window_len") = 10, py::arg("neighbors") = 25, py::arg("alpha") = 0.01,
          "One-step forecast from the end of `prices`.");

    m.def("backtest",
          [](const std::vector<double>& prices, std::size_t window_len, std::size_t neighbors, double alpha,
             std::optional<std::size_t> start, std::optional<std::size_t> stop, bool warm_start, unsigned jobs) {
              const ForecastConfig cfg = make_config(window_len, neighbors, alpha, warm_start);
              BacktestOptions options;
              options.jobs = jobs;
              BacktestReport report;
              {
                  py::gil_scoped_release release;
                  report = run_backtest(prices, cfg, start.value_or(first_evaluable_index(cfg)),
                                        stop.value_or(prices.size()), options);
              }
              py::list steps;
              for (const auto& s : report.steps) {
                  py::dict d;
                  d["t"] = s.t;
                  d["realized_return"] = s.realized_return;
                  d["r_hat"] = s.r_hat;
                  d["vol"] = s.vol;
                  d["var"] = s.var;
                  d["es"] = s.es;
                  d["exception"] = s.exception;
                  steps.append(d);
              }
              return py::make_tuple(steps, to_dict(report.summary));
          },
          py::arg("prices"), py::arg("window_len") = 10, py::arg("neighbors") = 25, py::arg("alpha") = 0.01,
          py::arg("start") = py::none(), py::arg("stop") = py::none(), py::arg("warm_start") = false,
          py::arg("jobs") = 1, "Rolling evaluation over realized indices [start, stop); returns (steps, summary).");

    m.def("binomial_upper_tail", &binomial_upper_tail, py::arg("n"), py::arg("x"), py::arg("p"),
          "P[Bin(n, p) >= x].");
}
