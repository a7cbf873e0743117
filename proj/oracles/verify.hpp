#pragma once

// Acceptance checks: each runs one criterion against the oracles and
// reports pass/fail, a one-line detail, and its runtime.

#include <cstdint>
#include <string>
#include <vector>

namespace pgprisk::verify {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0;  ///< seconds; 0 means unbounded
};

CriterionResult truncated_quantile_grid();   // 1
CriterionResult expected_shortfall_grid();   // 2
CriterionResult gp_dense_equivalence();      // 3
CriterionResult gradient_check();            // 4
CriterionResult hyperparameter_recovery();   // 5
CriterionResult neighbor_search_equivalence();  // 6

struct CalibrationOptions {
    int seeds = 20;
    int required = 18;
    std::size_t length = 1500;
    std::size_t steps = 1000;
    unsigned jobs = 0;  ///< 0 = hardware concurrency
};
CriterionResult backtest_calibration(const CalibrationOptions& options = {});  // 7

CriterionResult rejection_protocol();        // 8
/// In-process variant: renders CSV + JSON twice and compares bytes.
CriterionResult report_determinism();        // 9
CriterionResult affine_invariance();         // 10

/// Outcome of one generate-and-refit trial (exposed for tests).
struct RecoveryTrial {
    bool within = false;
    double max_log_error = 0.0;
    /// |fitted - truth| per log-parameter: signal, noise, then each scale.
    std::vector<double> log_errors;
};
RecoveryTrial recovery_trial(std::uint64_t seed);

/// Exception count of one calibration run (exposed for tests).
std::size_t calibration_exceptions(std::uint64_t seed, const CalibrationOptions& options);

/// Runs every criterion in order; the calibration run is skipped when `quick`.
std::vector<CriterionResult> run_all(bool quick = false, unsigned jobs = 0);

/// "[PASS] 3 GP dense-inverse equivalence (0.41 s): ..." style line.
std::string format(const CriterionResult& r);

}  // namespace pgprisk::verify
