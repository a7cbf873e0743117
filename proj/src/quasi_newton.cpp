#include "pgprisk/quasi_newton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pgprisk/errors.hpp"

namespace pgprisk {

namespace {

struct Correction {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd two_loop(const std::deque<Correction>& hist, const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> a(hist.size());
    for (std::size_t i = hist.size(); i-- > 0;) {
        a[i] = hist[i].rho * hist[i].s.dot(q);
        q -= a[i] * hist[i].y;
    }
    const auto& last = hist.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const double b = hist[i].rho * hist[i].y.dot(q);
        q += (a[i] - b) * hist[i].s;
    }
    return -q;
}

}  // namespace

MinimizeResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const OptimizerSettings& settings) {
    MinimizeResult res;
    res.x = std::move(x0);
    res.gradient.resize(res.x.size());
    res.value = f(res.x, res.gradient);
    res.evaluations = 1;
    if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
        throw OptimizerDiverged("objective is not finite at the starting point");
    }

    std::deque<Correction> hist;
    Eigen::VectorXd g_new(res.x.size());
    Eigen::VectorXd x_new;
    for (res.iterations = 0; res.iterations < settings.max_iterations; ++res.iterations) {
        if (res.gradient.lpNorm<Eigen::Infinity>() < settings.gradient_tol) {
            res.status = OptimizerStatus::GradientConverged;
            return res;
        }

        Eigen::VectorXd dir = hist.empty() ? Eigen::VectorXd(-res.gradient) : two_loop(hist, res.gradient);
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            hist.clear();
            dir = -res.gradient;
            slope = res.gradient.dot(dir);
        }
        double step = 1.0;
        const double longest = dir.lpNorm<Eigen::Infinity>();
        if (hist.empty()) step = std::min(1.0, 1.0 / longest);
        step = std::min(step, settings.max_step / longest);

        bool accepted = false;
        bool any_finite = false;
        double f_new = 0.0;
        for (int bt = 0; bt <= settings.max_backtracks; ++bt, step *= 0.5) {
            x_new = res.x + step * dir;
            bool finite = false;
            try {
                f_new = f(x_new, g_new);
                ++res.evaluations;
                finite = std::isfinite(f_new) && g_new.allFinite();
            } catch (const Error&) {
                ++res.evaluations;
            }
            if (!finite) continue;
            any_finite = true;
            if (f_new <= res.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_finite) throw OptimizerDiverged("no finite objective value along the search direction");
            res.status = OptimizerStatus::LineSearchStalled;
            return res;
        }

        Correction c{x_new - res.x, g_new - res.gradient, 0.0};
        const double sy = c.s.dot(c.y);
        if (sy > 1e-12 * c.s.norm() * c.y.norm()) {
            c.rho = 1.0 / sy;
            hist.push_back(std::move(c));
            if (static_cast<int>(hist.size()) > settings.history) hist.pop_front();
        }

        const double change = std::abs(res.value - f_new);
        res.x = x_new;
        res.gradient = g_new;
        const double previous = res.value;
        res.value = f_new;
        if (change <= settings.relative_tol * std::max(1.0, std::abs(previous))) {
            ++res.iterations;
            res.status = OptimizerStatus::ValueConverged;
            return res;
        }
    }
    res.status = OptimizerStatus::MaxIterations;
    return res;
}

}  // namespace pgprisk
