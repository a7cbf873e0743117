#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgprisk/backtest.hpp"
#include "pgprisk/errors.hpp"
#include "pgprisk/forecaster.hpp"
#include "pgprisk/report_io.hpp"
#include "pgprisk/series.hpp"
#include "pgprisk/synth.hpp"
#include "verify.hpp"

namespace pgprisk::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct ModelFlags {
    ForecastConfig cfg;
    std::string input;
    CsvColumns columns;
    std::string synth_kind;
    std::size_t synth_length = 1000;
    std::uint64_t seed = 1;
};

void add_model_flags(CLI::App& cmd, ModelFlags& f) {
    cmd.add_option("--input", f.input, "Price CSV with a header row");
    cmd.add_option("--date-column", f.columns.timestamp, "Timestamp column name")->capture_default_str();
    cmd.add_option("--price-column", f.columns.price, "Price column name")->capture_default_str();
    cmd.add_option("--window-len", f.cfg.window_len, "Pattern length l")->capture_default_str();
    cmd.add_option("--neighbors", f.cfg.neighbors, "Number of nearest patterns k")->capture_default_str();
    cmd.add_option("--alpha", f.cfg.alpha, "Tail probability of VaR and ES")->capture_default_str();
    cmd.add_flag("--warm-start", f.cfg.warm_start, "Start each fit from the previous step's hyperparameters");
    cmd.add_option("--max-iter", f.cfg.optimizer.max_iterations, "Optimizer iteration cap")->capture_default_str();
    cmd.add_option("--grad-tol", f.cfg.optimizer.gradient_tol, "Gradient infinity-norm tolerance")
        ->capture_default_str();
    cmd.add_option("--rel-tol", f.cfg.optimizer.relative_tol, "Relative likelihood change tolerance")
        ->capture_default_str();
}

void add_synth_flags(CLI::App& cmd, ModelFlags& f, bool required) {
    auto* kind = cmd.add_option(required ? "--kind" : "--synth", f.synth_kind,
                                "Synthetic series kind: random-walk or regime-switch");
    if (required) kind->required();
    cmd.add_option("--length", f.synth_length, "Synthetic series length")->capture_default_str();
    cmd.add_option("--seed", f.seed, "Synthetic series seed")->capture_default_str();
}

PriceSeries load_prices(const ModelFlags& f) {
    if (!f.input.empty() && !f.synth_kind.empty()) throw ConfigError("give either --input or --synth, not both");
    if (!f.synth_kind.empty()) {
        const SynthKind kind = parse_synth_kind(f.synth_kind);
        return PriceSeries::from_prices(synthesize(kind, f.synth_length, f.seed));
    }
    if (f.input.empty()) throw ConfigError("no price series given (use --input)");
    return load_csv(f.input, f.columns);
}

ordered_json source_json(const ModelFlags& f) {
    if (!f.synth_kind.empty()) {
        return {{"synth", f.synth_kind}, {"length", f.synth_length}, {"seed", f.seed}};
    }
    return {{"input", f.input}, {"date_column", f.columns.timestamp}, {"price_column", f.columns.price}};
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
    if (!os) throw ConfigError("failed writing " + path.string());
}

std::optional<RejectionRule> parse_rule(const std::string& name) {
    if (name == "auto") return RejectionRule::Auto;
    if (name == "fixed") return RejectionRule::FixedThreshold;
    if (name == "binomial") return RejectionRule::Binomial;
    return std::nullopt;
}

int cmd_forecast(const ModelFlags& f, std::optional<std::size_t> to, std::ostream& out) {
    f.cfg.validate();
    const PriceSeries series = load_prices(f);
    const std::size_t end = to.value_or(series.size());
    if (end < 1 || end > series.size()) {
        throw ConfigError("--to must lie in [1, " + std::to_string(series.size()) + "]");
    }
    const std::span<const double> prefix(series.prices().data(), end);
    const OneStepForecast fc = forecast_one_step(prefix, f.cfg);
    ordered_json j = forecast_json(fc);
    j["as_of"] = series.observations()[end - 1].label;
    out << j.dump(2) << '\n';
    return kExitOk;
}

struct BacktestFlags {
    std::optional<std::size_t> from;
    std::optional<std::size_t> to;
    std::string out_dir = ".";
    unsigned jobs = 0;
    std::size_t window = 0;
    std::string rule = "auto";
    double confidence = 0.95;
};

int cmd_backtest(const ModelFlags& f, const BacktestFlags& b, std::ostream& out) {
    f.cfg.validate();
    BacktestOptions options;
    const auto rule = parse_rule(b.rule);
    if (!rule) throw ConfigError("--rule must be auto, fixed or binomial");
    options.rule = *rule;
    options.confidence = b.confidence;
    options.jobs = b.jobs;

    const PriceSeries series = load_prices(f);
    const std::size_t from = b.from.value_or(first_evaluable_index(f.cfg));
    const std::size_t to = b.to.value_or(series.size());
    const BacktestReport report = run_backtest(series.prices(), f.cfg, from, to, options);

    ordered_json summary = summary_json(report.summary);
    ordered_json config = config_json(f.cfg);
    config["source"] = source_json(f);
    config["confidence"] = b.confidence;
    summary["config"] = std::move(config);
    if (b.window > 0) {
        ordered_json windows = ordered_json::array();
        for (const auto& w : window_summaries(report, b.window, options)) windows.push_back(summary_json(w));
        summary["windows"] = std::move(windows);
    }

    std::error_code ec;
    fs::create_directories(b.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + b.out_dir + ": " + ec.message());
    const fs::path dir(b.out_dir);
    write_file(dir / "steps.csv", steps_csv(report));
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    const auto& s = report.summary;
    out << "steps " << s.from << ".." << s.to << ": n=" << s.n << " x=" << s.x << " p=" << s.binomial_pvalue
        << (s.reject ? " REJECT" : " accept") << " (" << s.rule << ")\n";
    if (summary.contains("windows")) {
        for (const auto& w : summary["windows"]) {
            out << "  window " << w["from"].get<std::size_t>() << ".." << w["to"].get<std::size_t>()
                << ": x=" << w["x"].get<std::size_t>() << (w["reject"].get<bool>() ? " REJECT" : " accept") << '\n';
        }
    }
    out << "wrote " << (dir / "steps.csv").string() << " and " << (dir / "summary.json").string() << '\n';
    return kExitOk;
}

int cmd_synth(const ModelFlags& f, const std::string& out_path, std::ostream& out) {
    const SynthKind kind = parse_synth_kind(f.synth_kind);
    const std::string csv = to_csv(PriceSeries::from_prices(synthesize(kind, f.synth_length, f.seed)));
    if (out_path.empty() || out_path == "-") {
        out << csv;
    } else {
        write_file(out_path, csv);
    }
    return kExitOk;
}

int cmd_verify(bool quick, unsigned jobs, std::ostream& out) {
    bool all = true;
    for (const auto& r : verify::run_all(quick, jobs)) {
        out << verify::format(r) << std::endl;
        all = all && r.passed;
    }
    return all ? kExitOk : kExitVerifyFailed;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Data: return kExitData;
        case ErrorKind::Numerical: return kExitNumerical;
    }
    return kExitNumerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pattern-matching Gaussian-process VaR and ES forecasts", "pgp-risk"};
    app.require_subcommand(1);

    ModelFlags model;
    std::optional<std::size_t> forecast_to;
    auto* forecast = app.add_subcommand("forecast", "One-step forecast from the end of a price series (JSON)");
    add_model_flags(*forecast, model);
    add_synth_flags(*forecast, model, false);
    forecast->add_option("--to", forecast_to, "Use only the first N prices");

    BacktestFlags bt;
    auto* backtest = app.add_subcommand("backtest", "Rolling evaluation; writes steps.csv and summary.json");
    add_model_flags(*backtest, model);
    add_synth_flags(*backtest, model, false);
    backtest->add_option("--from", bt.from, "First realized index (default: earliest evaluable)");
    backtest->add_option("--to", bt.to, "One past the last realized index (default: series length)");
    backtest->add_option("--out", bt.out_dir, "Output directory")->capture_default_str();
    backtest->add_option("--jobs", bt.jobs, "Worker threads, 0 = available parallelism")->capture_default_str();
    backtest->add_option("--window", bt.window, "Also summarize consecutive windows of this many steps");
    backtest->add_option("--rule", bt.rule, "Rejection rule: auto, fixed or binomial")->capture_default_str();
    backtest->add_option("--confidence", bt.confidence, "Binomial test confidence")->capture_default_str();

    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic price series as CSV");
    add_synth_flags(*synth, model, true);
    synth->add_option("--out", synth_out, "Output file (default: stdout)");

    bool quick = false;
    unsigned verify_jobs = 0;
    auto* verify = app.add_subcommand("verify", "Check the library against its reference oracles");
    verify->add_flag("--quick", quick, "Skip the long calibration run");
    verify->add_option("--jobs", verify_jobs, "Worker threads for the calibration run")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*forecast) return cmd_forecast(model, forecast_to, out);
        if (*backtest) return cmd_backtest(model, bt, out);
        if (*synth) return cmd_synth(model, synth_out, out);
        return cmd_verify(quick, verify_jobs, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace pgprisk::cli
