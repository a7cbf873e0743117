#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"

using namespace pgprisk;

TEST_CASE("quadrature closed forms") {
    const double inf = std::numeric_limits<double>::infinity();
    const double half_mass = std::sqrt(2.0 * std::numbers::pi) / 2.0;
    CHECK(oracle::quad_truncated_gaussian(0, 0.0, inf, 0.0, 1.0).value == doctest::Approx(half_mass).epsilon(1e-14));
    // integral_0^inf x exp(-x^2/2) dx = 1
    CHECK(oracle::quad_truncated_gaussian(1, 0.0, inf, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(oracle::quad_truncated_gaussian(0, 0.0, inf, 50.0, 3.0).value ==
          doctest::Approx(3.0 * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("bisection and truncated mean in the untruncated limit") {
    CHECK(oracle::bisect_quantile(0.5, 1000.0, 1.0, 1e-12) == doctest::Approx(1000.0).epsilon(1e-14));
    CHECK(oracle::bisect_quantile(0.01, 1000.0, 1.0, 1e-12) ==
          doctest::Approx(1000.0 - 2.3263478740408408).epsilon(1e-13));
    CHECK(oracle::truncated_mean(1000.0, 1.0) == doctest::Approx(1000.0).epsilon(1e-14));
    // half-normal mean sqrt(2/pi)
    CHECK(oracle::truncated_mean(0.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("dense solve with one training point") {
    const std::vector<std::vector<double>> x{{0.0, 0.0}};
    const std::vector<double> y{2.0};
    const std::vector<double> q{1.0, 0.0};
    const std::vector<double> s{1.0, 1.0};
    const auto r = oracle::dense_gp_solve(x, y, q, 1.5, 0.5, s, 0.0);
    const double c = 1.5 * std::exp(-0.5);
    CHECK(r.mean == doctest::Approx(c / 2.0 * 2.0).epsilon(1e-15));
    CHECK(r.variance == doctest::Approx(2.0 - c * c / 2.0).epsilon(1e-15));
    CHECK(r.log_likelihood ==
          doctest::Approx(-0.5 * std::log(2.0) - 1.0 - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("finite differences of a polynomial") {
    const auto f = [](const std::vector<double>& x) { return x[0] * x[0] * x[1] + 3.0 * x[1]; };
    const auto g = oracle::fd_gradient(f, {2.0, -1.0}, 1e-5);
    CHECK(g[0] == doctest::Approx(-4.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("exact binomial tails") {
    CHECK(oracle::binomial_upper_tail_exact(3, 2, 0.5) == 0.5);
    CHECK(oracle::binomial_upper_tail_exact(10, 0, 0.3) == 1.0);
    CHECK(oracle::binomial_upper_tail_exact(4, 4, 0.5) == 0.0625);
    // 1 - 0.99^250 - 250 * 0.01 * 0.99^249
    const double p2 = 1.0 - std::pow(0.99, 250) - 2.5 * std::pow(0.99, 249);
    CHECK(oracle::binomial_upper_tail_exact(250, 2, 0.01) == doctest::Approx(p2).epsilon(1e-13));
}

TEST_CASE("acceptance band") {
    const auto band = oracle::binomial_acceptance_band(250, 0.01, 0.99);
    CHECK(band.lo == 0);
    CHECK(band.hi >= 6);
    CHECK(band.hi <= 8);
    CHECK(oracle::binomial_upper_tail_exact(250, band.hi + 1, 0.01) <= 0.005);
    CHECK(oracle::binomial_upper_tail_exact(250, band.hi, 0.01) > 0.005);

    const auto wide = oracle::binomial_acceptance_band(750, 0.05, 0.99);
    CHECK(wide.lo < 37);
    CHECK(wide.hi > 38);
    CHECK(1.0 - oracle::binomial_upper_tail_exact(750, wide.lo, 0.05) <= 0.005);
}
