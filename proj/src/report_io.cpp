#include "pgprisk/report_io.hpp"

#include <charconv>

namespace pgprisk {

namespace {

void append_real(std::string& out, double v) {
    // shortest form that reads back to the same double
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

std::string steps_csv(const BacktestReport& report) {
    std::string out = "t,realized_return,r_hat,vol,var,es,exception\n";
    for (const auto& s : report.steps) {
        out += std::to_string(s.t);
        for (double v : {s.realized_return, s.r_hat, s.vol, s.var, s.es}) {
            out += ',';
            append_real(out, v);
        }
        out += s.exception ? ",1\n" : ",0\n";
    }
    return out;
}

nlohmann::ordered_json summary_json(const BacktestSummary& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    j["x"] = s.x;
    j["alpha"] = s.alpha;
    j["p_value"] = s.binomial_pvalue;
    j["reject"] = s.reject;
    j["es_nrmse"] = s.es_nrmse ? nlohmann::ordered_json(*s.es_nrmse) : nlohmann::ordered_json(nullptr);
    j["rule"] = s.rule;
    j["from"] = s.from;
    j["to"] = s.to;
    return j;
}

nlohmann::ordered_json hyperparams_json(const GpHyperparams& hp) {
    return {{"signal_var", hp.signal_var}, {"noise_var", hp.noise_var}, {"length_scales", hp.length_scales}};
}

nlohmann::ordered_json forecast_json(const OneStepForecast& fc) {
    nlohmann::ordered_json j;
    j["t"] = fc.t;
    j["v_hat"] = fc.distribution.price_mean;
    j["sigma_hat"] = fc.distribution.price_std;
    j["r_hat"] = fc.risk.expected_return;
    j["vol"] = fc.risk.return_vol;
    j["var"] = fc.risk.var_alpha;
    j["es"] = fc.risk.es_alpha;
    j["alpha"] = fc.risk.alpha;
    j["hyperparams"] = hyperparams_json(fc.hyperparams);
    return j;
}

nlohmann::ordered_json config_json(const ForecastConfig& cfg) {
    nlohmann::ordered_json j;
    j["window_len"] = cfg.window_len;
    j["neighbors"] = cfg.neighbors;
    j["alpha"] = cfg.alpha;
    j["warm_start"] = cfg.warm_start;
    j["optimizer"] = {{"max_iterations", cfg.optimizer.max_iterations},
                      {"gradient_tol", cfg.optimizer.gradient_tol},
                      {"relative_tol", cfg.optimizer.relative_tol},
                      {"history", cfg.optimizer.history}};
    return j;
}

}  // namespace pgprisk
