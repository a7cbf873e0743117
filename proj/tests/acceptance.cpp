// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance --cli <pgp-risk> [--jobs N] [--expect-fail 5,7,10]
//
// Exits 0 when every criterion not listed under --expect-fail passes. Listed
// criteria are still run and reported.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "verify.hpp"

namespace fs = std::filesystem;
using pgprisk::verify::CriterionResult;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Criterion 9 against the built pgp-risk binary: two backtests of the same input
// (sequential and two workers) must write byte-identical files.
CriterionResult cli_determinism(const std::string& cli) {
    CriterionResult r;
    r.id = 9;
    r.title = "Backtest output determinism (pgp-risk backtest)";
    const auto start = std::chrono::steady_clock::now();

    const fs::path dir = fs::temp_directory_path() / "pgprisk_acceptance_9";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path prices = dir / "prices.csv";
    const std::string bin = shell_quote(cli);
    const std::string model = " --input " + shell_quote(prices) + " --from 150 --window-len 6 --neighbors 15 --alpha 0.05";
    const std::string cmds[] = {
        bin + " synth --kind regime-switch --length 450 --seed 9 --out " + shell_quote(prices),
        bin + " backtest" + model + " --jobs 1 --out " + shell_quote(dir / "a") + " > /dev/null",
        bin + " backtest" + model + " --jobs 2 --out " + shell_quote(dir / "b") + " > /dev/null",
    };
    for (const auto& c : cmds) {
        if (const int rc = std::system(c.c_str()); rc != 0) {
            r.detail = "command failed (" + std::to_string(rc) + "): " + c;
            return r;
        }
    }
    const std::string csv_a = slurp(dir / "a" / "steps.csv");
    const std::string json_a = slurp(dir / "a" / "summary.json");
    const bool same_csv = !csv_a.empty() && csv_a == slurp(dir / "b" / "steps.csv");
    const bool same_json = !json_a.empty() && json_a == slurp(dir / "b" / "summary.json");
    r.passed = same_csv && same_json;
    std::ostringstream os;
    os << "steps.csv " << (same_csv ? "identical" : "DIFFERS") << " (" << csv_a.size() << " bytes), summary.json "
       << (same_json ? "identical" : "DIFFERS") << " (" << json_a.size() << " bytes)";
    r.detail = os.str();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::remove_all(dir);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string cli;
    unsigned jobs = 0;
    std::vector<int> expect_fail;
    app.add_option("--cli", cli, "Path to the pgp-risk executable")->required();
    app.add_option("--jobs", jobs, "Worker threads for the calibration run");
    app.add_option("--expect-fail", expect_fail, "Criteria whose failure does not fail the run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    const std::set<int> tolerated(expect_fail.begin(), expect_fail.end());

    namespace v = pgprisk::verify;
    v::CalibrationOptions calibration;
    calibration.jobs = jobs;

    int unexpected = 0;
    auto report = [&](const CriterionResult& r) {
        std::cout << v::format(r);
        if (!r.passed && tolerated.count(r.id)) std::cout << " (known failure)";
        std::cout << std::endl;
        if (!r.passed && !tolerated.count(r.id)) ++unexpected;
    };
    report(v::truncated_quantile_grid());
    report(v::expected_shortfall_grid());
    report(v::gp_dense_equivalence());
    report(v::gradient_check());
    report(v::hyperparameter_recovery());
    report(v::neighbor_search_equivalence());
    report(v::backtest_calibration(calibration));
    report(v::rejection_protocol());
    report(cli_determinism(cli));
    report(v::affine_invariance());

    std::cout << (unexpected == 0 ? "acceptance: ok" : "acceptance: " + std::to_string(unexpected) + " unexpected failure(s)")
              << std::endl;
    return unexpected == 0 ? 0 : 1;
}
