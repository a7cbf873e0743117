#include <doctest.h>

#include <json.hpp>

#include "pgprisk/report_io.hpp"

using namespace pgprisk;

TEST_CASE("steps table") {
    BacktestReport r;
    BacktestStep s;
    s.t = 42;
    s.realized_return = -0.031;
    s.r_hat = 0.001;
    s.vol = 0.0125;
    s.var = -0.028;
    s.es = -0.035;
    s.exception = true;
    r.steps.push_back(s);
    s.t = 43;
    s.exception = false;
    s.realized_return = 0.1;
    r.steps.push_back(s);
    const std::string csv = steps_csv(r);
    CHECK(csv.rfind("t,realized_return,r_hat,vol,var,es,exception\n", 0) == 0);
    CHECK(csv.find("\n42,-0.031,0.001,0.0125,-0.028,-0.035,1\n") != std::string::npos);
    CHECK(csv.find("\n43,0.1,") != std::string::npos);
    CHECK(csv.back() == '\n');
    CHECK(steps_csv(BacktestReport{{BacktestStep{1, 1.0 / 3.0}}, {}}).find("1,0.3333333333333333,") !=
          std::string::npos);
}

TEST_CASE("summary keys and nulls") {
    BacktestSummary s;
    s.from = 10;
    s.to = 260;
    s.n = 250;
    s.x = 1;
    s.alpha = 0.01;
    s.binomial_pvalue = 0.9189;
    s.rule = "x>5";
    const auto j = summary_json(s);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"n", "x", "alpha", "p_value", "reject", "es_nrmse", "rule", "from", "to"});
    CHECK(j["es_nrmse"].is_null());
    s.es_nrmse = 0.75;
    CHECK(summary_json(s)["es_nrmse"].get<double>() == 0.75);
}

TEST_CASE("forecast and config documents") {
    OneStepForecast fc;
    fc.t = 500;
    fc.hyperparams = {1.5, 0.2, {0.5, 2.0}};
    fc.risk.alpha = 0.01;
    const auto j = forecast_json(fc);
    CHECK(j["t"] == 500);
    CHECK(j["hyperparams"]["length_scales"].size() == 2);
    CHECK(j.begin().key() == "t");
    const auto c = config_json(ForecastConfig{});
    CHECK(c["window_len"] == 10);
    CHECK(c["neighbors"] == 25);
    CHECK(c["optimizer"]["max_iterations"] == 200);
    CHECK(c["optimizer"]["gradient_tol"] == 1e-6);
    CHECK(c["optimizer"]["relative_tol"] == 1e-10);
}
