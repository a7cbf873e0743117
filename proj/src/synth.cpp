#include "pgprisk/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pgprisk/errors.hpp"

namespace pgprisk {

double NormalSource::uniform() {
    // 53 random bits, shifted off zero
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalSource::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

SynthKind parse_synth_kind(std::string_view name) {
    if (name == "random-walk") return SynthKind::RandomWalk;
    if (name == "regime-switch") return SynthKind::RegimeSwitch;
    throw ConfigError("unknown synthetic series kind '" + std::string(name) +
                      "' (expected random-walk or regime-switch)");
}

std::vector<double> random_walk(std::size_t length, std::uint64_t seed, double start, double volatility) {
    NormalSource normal(seed);
    std::vector<double> prices(length);
    double log_price = std::log(start);
    for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) log_price += volatility * normal();
        prices[i] = i == 0 ? start : std::exp(log_price);
    }
    return prices;
}

std::vector<double> regime_switch(std::size_t length, std::uint64_t seed, double start) {
    NormalSource normal(seed);
    constexpr double vols[2] = {0.005, 0.02};
    constexpr double switch_prob = 0.02;
    int state = 0;
    std::vector<double> prices(length);
    double log_price = std::log(start);
    for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) {
            if (normal.uniform() < switch_prob) state = 1 - state;
            log_price += vols[state] * normal();
        }
        prices[i] = i == 0 ? start : std::exp(log_price);
    }
    return prices;
}

std::vector<double> synthesize(SynthKind kind, std::size_t length, std::uint64_t seed) {
    if (length < 2) throw ConfigError("synthetic series length must be >= 2");
    return kind == SynthKind::RandomWalk ? random_walk(length, seed) : regime_switch(length, seed);
}

}  // namespace pgprisk
