#pragma once

// Behavior patterns: standardized length-l price windows, and the nearest
// neighbor search that turns a price prefix into a GP training set.

#include <cstddef>
#include <span>
#include <vector>

namespace pgprisk {

/// A standardized price window. `values` has zero sample mean and unit
/// (l-1 divisor) sample standard deviation.
struct Pattern {
    std::vector<double> values;
    std::size_t source_start = 0;
    double window_mean = 0.0;
    double window_std = 1.0;

    std::size_t size() const noexcept { return values.size(); }
};

/// Nearest historical patterns to the current window, each paired with the
/// standardized price that followed it. Entries are ordered by distance,
/// ties broken by earlier source_start. Distances within kDistanceTieTol of
/// each other count as tied, so the order is non-decreasing up to that slack.
struct TrainingSet {
    std::vector<Pattern> inputs;
    std::vector<double> targets;
    std::vector<double> distances;
    Pattern query;

    std::size_t size() const noexcept { return inputs.size(); }
    std::size_t dimension() const noexcept { return query.size(); }
};

/// A window is degenerate when its std-dev is below this fraction of max(1, |mean|).
inline constexpr double kDegeneracyRelTol = 1e-12;

/// Absolute slack under which two pattern distances are treated as equal.
inline constexpr double kDistanceTieTol = 1e-12;

bool is_degenerate(double window_mean, double window_std) noexcept;

/// Throws ConfigError when prices.size() < 2, DegenerateWindow on (near) constant input.
Pattern standardize_window(std::span<const double> prices, std::size_t source_start = 0);

/// Euclidean distance between pattern values. Throws ConfigError on length mismatch.
double pattern_distance(const Pattern& a, const Pattern& b);
double pattern_distance(std::span<const double> a, std::span<const double> b);

/// Builds the k-nearest-neighbor training set from a price prefix of length t.
///
/// The query is the last `window_len` prices. Candidates are every window
/// start tau in [0, t - window_len - 1] (0-based) whose window is not
/// degenerate; the target of tau is the standardized price at tau + window_len.
/// Candidates may overlap each other and the query window.
///
/// Throws InsufficientHistory when t < 2 * window_len or fewer than k usable
/// candidates exist, and DegenerateWindow when the query window is degenerate.
TrainingSet build_training_set(std::span<const double> prefix, std::size_t window_len,
                               std::size_t neighbors);

}  // namespace pgprisk
