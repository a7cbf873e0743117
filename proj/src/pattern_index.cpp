#include "pgprisk/pattern_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pgprisk/errors.hpp"

namespace pgprisk {

namespace {

// Moments are taken about the first price so that nearly flat windows at a
// high price level do not lose their digits to cancellation.
struct WindowStats {
    double anchor;
    double offset;  // mean - anchor
    double mean;
    double std;

    double standardize(double v) const noexcept { return ((v - anchor) - offset) / std; }
};

WindowStats window_stats(std::span<const double> w) {
    const double anchor = w[0];
    double sum = 0.0;
    for (double v : w) sum += v - anchor;
    const double offset = sum / static_cast<double>(w.size());
    double ss = 0.0;
    for (double v : w) {
        const double d = (v - anchor) - offset;
        ss += d * d;
    }
    return {anchor, offset, anchor + offset, std::sqrt(ss / static_cast<double>(w.size() - 1))};
}

struct Candidate {
    double distance;
    std::size_t start;
};

}  // namespace

bool is_degenerate(double window_mean, double window_std) noexcept {
    return !(window_std >= kDegeneracyRelTol * std::max(1.0, std::abs(window_mean)));
}

Pattern standardize_window(std::span<const double> prices, std::size_t source_start) {
    if (prices.size() < 2) throw ConfigError("window_len must be >= 2");
    const WindowStats st = window_stats(prices);
    if (is_degenerate(st.mean, st.std)) {
        throw DegenerateWindow("window starting at " + std::to_string(source_start) +
                               " has (near) zero standard deviation");
    }
    Pattern p;
    p.source_start = source_start;
    p.window_mean = st.mean;
    p.window_std = st.std;
    p.values.resize(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) p.values[i] = st.standardize(prices[i]);
    return p;
}

double pattern_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ConfigError("pattern length mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

double pattern_distance(const Pattern& a, const Pattern& b) {
    return pattern_distance(std::span<const double>(a.values), std::span<const double>(b.values));
}

TrainingSet build_training_set(std::span<const double> prefix, std::size_t window_len,
                               std::size_t neighbors) {
    if (window_len < 2) throw ConfigError("window_len must be >= 2");
    if (neighbors < 1) throw ConfigError("neighbors must be >= 1");
    const std::size_t t = prefix.size();
    if (t < 2 * window_len) {
        throw InsufficientHistory("prefix of length " + std::to_string(t) +
                                  " is shorter than 2 * window_len = " +
                                  std::to_string(2 * window_len));
    }

    TrainingSet ts;
    ts.query = standardize_window(prefix.subspan(t - window_len), t - window_len);

    // tau + window_len <= t - 1 so the target price is known
    const std::size_t last_start = t - window_len - 1;
    std::vector<Candidate> candidates;
    candidates.reserve(last_start + 1);
    std::vector<double> z(window_len);
    for (std::size_t tau = 0; tau <= last_start; ++tau) {
        auto w = prefix.subspan(tau, window_len);
        const WindowStats st = window_stats(w);
        if (is_degenerate(st.mean, st.std)) continue;
        for (std::size_t i = 0; i < window_len; ++i) z[i] = st.standardize(w[i]);
        candidates.push_back({pattern_distance(z, ts.query.values), tau});
    }
    if (candidates.size() < neighbors) {
        throw InsufficientHistory("only " + std::to_string(candidates.size()) +
                                  " usable candidate windows for " + std::to_string(neighbors) +
                                  " neighbors");
    }

    auto by_distance = [](const Candidate& a, const Candidate& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.start < b.start);
    };
    std::sort(candidates.begin(), candidates.end(), by_distance);

    // Each pick takes the earliest start among the remaining candidates within
    // kDistanceTieTol of the smallest remaining distance.
    std::vector<Candidate> chosen;
    chosen.reserve(neighbors);
    std::vector<bool> taken(candidates.size(), false);
    std::size_t head = 0;
    while (chosen.size() < neighbors) {
        while (taken[head]) ++head;
        const double limit = candidates[head].distance + kDistanceTieTol;
        std::size_t pick = head;
        for (std::size_t i = head + 1; i < candidates.size() && candidates[i].distance <= limit; ++i) {
            if (!taken[i] && candidates[i].start < candidates[pick].start) pick = i;
        }
        taken[pick] = true;
        chosen.push_back(candidates[pick]);
    }

    ts.inputs.reserve(neighbors);
    ts.targets.reserve(neighbors);
    ts.distances.reserve(neighbors);
    for (std::size_t i = 0; i < neighbors; ++i) {
        const auto& c = chosen[i];
        auto w = prefix.subspan(c.start, window_len);
        Pattern p = standardize_window(w, c.start);
        ts.targets.push_back(window_stats(w).standardize(prefix[c.start + window_len]));
        ts.distances.push_back(c.distance);
        ts.inputs.push_back(std::move(p));
    }
    return ts;
}

}  // namespace pgprisk
