#pragma once

// Seeded synthetic price series. Output depends only on the arguments; the
// normal variates come from Box-Muller over raw mt19937_64 words so results
// do not depend on the standard library's distribution implementations.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pgprisk {

class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
    double operator()();
    double uniform();  ///< in (0, 1)

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

enum class SynthKind { RandomWalk, RegimeSwitch };

/// Parses "random-walk" or "regime-switch"; throws ConfigError otherwise.
SynthKind parse_synth_kind(std::string_view name);

/// Log-price Gaussian random walk from 100 with 1% daily volatility.
std::vector<double> random_walk(std::size_t length, std::uint64_t seed, double start = 100.0,
                                double volatility = 0.01);

/// Log-price random walk whose volatility switches between 0.5% and 2% under
/// a two-state Markov chain with 2% switching probability per step.
std::vector<double> regime_switch(std::size_t length, std::uint64_t seed, double start = 100.0);

std::vector<double> synthesize(SynthKind kind, std::size_t length, std::uint64_t seed);

}  // namespace pgprisk
