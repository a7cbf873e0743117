#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace pgprisk::oracle {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<long double, 31>;

constexpr long double kTailSpan = 40.0L;  // integrand below e^-800 beyond this many std-devs

// Integrates over pieces no wider than half a std-dev. On such a piece the
// 31-point Kronrod rule is exact to extended precision, so each piece gets a
// single non-adaptive application and its |Kronrod - Gauss| error estimate.
long double integrate_pieces(int moment, long double lo, long double hi, long double mean, long double std,
                             long double rel_tol, long double* total_error) {
    auto f = [=](long double x) {
        const long double z = (x - mean) / std;
        const long double g = expl(-0.5L * z * z);
        return moment == 0 ? g : x * g;
    };
    if (!(lo < hi)) return 0.0L;
    const long double width = 0.5L * std;
    const auto pieces = static_cast<long>(ceill((hi - lo) / width));
    long double sum = 0.0L;
    long double err_sum = 0.0L;
    for (long i = 0; i < pieces; ++i) {
        const long double a = lo + (hi - lo) * static_cast<long double>(i) / static_cast<long double>(pieces);
        const long double b = (i + 1 == pieces) ? hi
                                                : lo + (hi - lo) * static_cast<long double>(i + 1) /
                                                           static_cast<long double>(pieces);
        long double err = 0.0L;
        sum += Kronrod::integrate(f, a, b, 0, rel_tol, &err);
        err_sum += err;
    }
    if (total_error) *total_error = err_sum;
    return sum;
}

}  // namespace

long double quad_gaussian_ld(int moment, long double lower, long double upper, long double mean, long double std,
                             long double rel_tol) {
    if (moment != 0 && moment != 1) throw std::invalid_argument("moment must be 0 or 1");
    if (!(std > 0)) throw std::invalid_argument("std must be positive");
    const long double lo = std::max(lower, mean - kTailSpan * std);
    const long double hi = std::min(upper, mean + kTailSpan * std);
    return integrate_pieces(moment, lo, hi, mean, std, rel_tol, nullptr);
}

QuadratureResult quad_truncated_gaussian(int moment, double lower, double upper, double mean, double std,
                                         double tol) {
    if (moment != 0 && moment != 1) throw std::invalid_argument("moment must be 0 or 1");
    if (!(std > 0)) throw std::invalid_argument("std must be positive");
    if (!(lower < upper)) throw std::invalid_argument("lower must be below upper");
    if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
    const long double m = mean;
    const long double s = std;
    const long double lo = std::max<long double>(lower, m - kTailSpan * s);
    const long double hi = std::min<long double>(upper, m + kTailSpan * s);
    long double err = 0.0L;
    const long double v = integrate_pieces(moment, lo, hi, m, s, std::min<long double>(tol, 1e-17L), &err);
    QuadratureResult r{static_cast<double>(v), static_cast<double>(err)};
    if (r.error_estimate > tol * std::max(std::abs(r.value), 1e-300)) {
        throw std::runtime_error("quadrature tolerance not reached: error estimate " +
                                 std::to_string(r.error_estimate));
    }
    return r;
}

double bisect_quantile(double alpha, double mean, double std, double tol) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
    const long double m = mean;
    const long double s = std;
    const long double inf = std::numeric_limits<long double>::infinity();
    const long double target = static_cast<long double>(alpha) * quad_gaussian_ld(0, 0.0L, inf, m, s);

    long double lo = 0.0L;
    long double hi = std::max(m, 0.0L) + kTailSpan * s;
    long double mass_lo = 0.0L;  // integral over [0, lo]
    while (hi - lo > static_cast<long double>(tol)) {
        const long double mid = 0.5L * (lo + hi);
        const long double piece = quad_gaussian_ld(0, lo, mid, m, s);
        if (mass_lo + piece < target) {
            lo = mid;
            mass_lo += piece;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(0.5L * (lo + hi));
}

double truncated_mean(double mean, double std, double upper) {
    const long double num = quad_gaussian_ld(1, 0.0L, upper, mean, std);
    const long double den = quad_gaussian_ld(0, 0.0L, upper, mean, std);
    return static_cast<double>(num / den);
}

DenseGpResult dense_gp_solve(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
                             std::span<const double> query, double signal_var, double noise_var,
                             std::span<const double> length_scales, double jitter) {
    const std::size_t k = inputs.size();
    const std::size_t d = query.size();
    auto kernel = [&](std::span<const double> a, std::span<const double> b) {
        long double r2 = 0.0L;
        for (std::size_t i = 0; i < d; ++i) {
            const long double diff = static_cast<long double>(a[i]) - b[i];
            const long double s = length_scales[i];
            r2 += diff * diff / (s * s);
        }
        return static_cast<long double>(signal_var) * expl(-0.5L * r2);
    };

    // augmented [C | I], reduced to [I | C^-1]
    std::vector<std::vector<long double>> aug(k, std::vector<long double>(2 * k, 0.0L));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) aug[i][j] = kernel(inputs[i], inputs[j]);
        aug[i][i] += static_cast<long double>(noise_var) + jitter;
        aug[i][k + i] = 1.0L;
    }
    long double log_det = 0.0L;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (fabsl(aug[r][col]) > fabsl(aug[pivot][col])) pivot = r;
        }
        std::swap(aug[col], aug[pivot]);
        const long double pv = aug[col][col];
        if (pv == 0.0L) throw std::runtime_error("singular matrix in dense_gp_solve");
        log_det += logl(fabsl(pv));
        for (auto& v : aug[col]) v /= pv;
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const long double factor = aug[r][col];
            if (factor == 0.0L) continue;
            for (std::size_t c = 0; c < 2 * k; ++c) aug[r][c] -= factor * aug[col][c];
        }
    }

    std::vector<long double> cross(k);
    for (std::size_t i = 0; i < k; ++i) cross[i] = kernel(query, inputs[i]);
    long double mean = 0.0L;
    long double quad_cross = 0.0L;
    long double quad_y = 0.0L;
    for (std::size_t i = 0; i < k; ++i) {
        long double inv_y = 0.0L;
        long double inv_c = 0.0L;
        for (std::size_t j = 0; j < k; ++j) {
            inv_y += aug[i][k + j] * targets[j];
            inv_c += aug[i][k + j] * cross[j];
        }
        mean += cross[i] * inv_y;
        quad_cross += cross[i] * inv_c;
        quad_y += targets[i] * inv_y;
    }
    const long double pi = 3.141592653589793238462643383279502884L;
    DenseGpResult out;
    out.mean = static_cast<double>(mean);
    out.variance = static_cast<double>(static_cast<long double>(signal_var) + noise_var - quad_cross);
    out.log_likelihood = static_cast<double>(-0.5L * log_det - 0.5L * quad_y -
                                             0.5L * static_cast<long double>(k) * logl(2.0L * pi));
    return out;
}

std::optional<std::vector<Neighbor>> exhaustive_knn(std::span<const double> prefix, std::size_t window_len,
                                                    std::size_t k) {
    const std::size_t t = prefix.size();
    if (window_len < 2 || k < 1 || t < 2 * window_len) return std::nullopt;

    struct Standardized {
        bool ok;
        long double mean;
        long double sd;
        std::vector<long double> z;
        long double anchor = 0.0L;
        long double offset = 0.0L;
    };
    // shifted by the first price of the window to avoid cancellation
    auto standardize = [&](std::size_t start) {
        Standardized s{false, 0.0L, 0.0L, std::vector<long double>(window_len)};
        const long double anchor = prefix[start];
        long double sum = 0.0L;
        for (std::size_t i = 0; i < window_len; ++i) sum += prefix[start + i] - anchor;
        const long double offset = sum / static_cast<long double>(window_len);
        s.mean = anchor + offset;
        long double ss = 0.0L;
        for (std::size_t i = 0; i < window_len; ++i) {
            const long double dv = (prefix[start + i] - anchor) - offset;
            ss += dv * dv;
        }
        s.sd = sqrtl(ss / static_cast<long double>(window_len - 1));
        s.ok = s.sd >= 1e-12L * std::max(1.0L, fabsl(s.mean));
        s.anchor = anchor;
        s.offset = offset;
        if (s.ok) {
            for (std::size_t i = 0; i < window_len; ++i) s.z[i] = ((prefix[start + i] - anchor) - offset) / s.sd;
        }
        return s;
    };

    const Standardized query = standardize(t - window_len);
    if (!query.ok) return std::nullopt;

    std::vector<Neighbor> all;
    std::vector<long double> exact;
    for (std::size_t tau = 0; tau + window_len < t; ++tau) {
        const Standardized c = standardize(tau);
        if (!c.ok) continue;
        long double ss = 0.0L;
        for (std::size_t i = 0; i < window_len; ++i) {
            const long double dv = c.z[i] - query.z[i];
            ss += dv * dv;
        }
        exact.push_back(sqrtl(ss));
        all.push_back({tau, static_cast<double>(exact.back()),
                       static_cast<double>(((prefix[tau + window_len] - c.anchor) - c.offset) / c.sd)});
    }
    if (all.size() < k) return std::nullopt;

    // ties: anything within 1e-12 of the smallest remaining distance; earliest start wins
    std::vector<bool> taken(all.size(), false);
    std::vector<Neighbor> picked;
    for (std::size_t round = 0; round < k; ++round) {
        long double smallest = std::numeric_limits<long double>::infinity();
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (!taken[i]) smallest = std::min(smallest, exact[i]);
        }
        std::size_t best = all.size();
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (taken[i] || exact[i] > smallest + 1e-12L) continue;
            if (best == all.size() || all[i].start < all[best].start) best = i;
        }
        taken[best] = true;
        picked.push_back(all[best]);
    }
    return picked;
}

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, double h) {
    std::vector<double> g(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double binomial_upper_tail_exact(std::size_t n, std::size_t x, double p) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (x == 0) return 1.0;
    if (x > n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;

    // p = a / 2^e exactly
    int exponent = 0;
    const double mantissa = std::frexp(p, &exponent);
    const cpp_int a = static_cast<cpp_int>(static_cast<std::int64_t>(std::ldexp(mantissa, 53)));
    const unsigned e = static_cast<unsigned>(53 - exponent);
    const cpp_int one = cpp_int(1) << e;
    const cpp_int b = one - a;

    cpp_int numerator = 0;
    cpp_int binom = 1;  // C(n, j), built up incrementally
    for (std::size_t j = 0; j <= n; ++j) {
        if (j > 0) binom = binom * (n - j + 1) / j;
        if (j < x) continue;
        numerator += binom * boost::multiprecision::pow(a, static_cast<unsigned>(j)) *
                     boost::multiprecision::pow(b, static_cast<unsigned>(n - j));
    }
    const cpp_int denominator = cpp_int(1) << (e * static_cast<unsigned>(n));
    return cpp_rational(numerator, denominator).convert_to<double>();
}

CountBand binomial_acceptance_band(std::size_t n, double p, double level) {
    const long double beta = (1.0L - level) / 2.0L;
    std::vector<long double> pmf(n + 1);
    pmf[0] = powl(1.0L - p, static_cast<long double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        pmf[j + 1] = pmf[j] * static_cast<long double>(n - j) / static_cast<long double>(j + 1) * p / (1.0L - p);
    }
    CountBand band;
    long double below = 0.0L;  // P[X < lo]
    while (band.lo < n && below + pmf[band.lo] <= beta) below += pmf[band.lo++];
    band.hi = n;
    long double above = 0.0L;  // P[X > hi]
    while (band.hi > 0 && above + pmf[band.hi] <= beta) above += pmf[band.hi--];
    return band;
}

}  // namespace pgprisk::oracle
