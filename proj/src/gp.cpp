#include "pgprisk/gp.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "pgprisk/errors.hpp"

namespace pgprisk {

namespace {

// Per-dimension squared input differences, computed once per problem.
class GramCache {
public:
    explicit GramCache(const GpProblem& p) : sqdiff_(static_cast<std::size_t>(p.dimension())) {
        const Eigen::Index k = p.size();
        for (Eigen::Index d = 0; d < p.dimension(); ++d) {
            auto& m = sqdiff_[static_cast<std::size_t>(d)];
            m.resize(k, k);
            for (Eigen::Index j = 0; j < k; ++j) {
                for (Eigen::Index i = 0; i < k; ++i) {
                    const double diff = p.inputs(i, d) - p.inputs(j, d);
                    m(i, j) = diff * diff;
                }
            }
        }
    }

    Eigen::MatrixXd gram(const GpHyperparams& hp) const {
        const Eigen::Index k = sqdiff_.empty() ? 0 : sqdiff_.front().rows();
        Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t d = 0; d < sqdiff_.size(); ++d) {
            const double s = hp.length_scales[d];
            r2 += sqdiff_[d] / (s * s);
        }
        return hp.signal_var * (-0.5 * r2.array()).exp().matrix();
    }

    const Eigen::MatrixXd& sqdiff(std::size_t d) const { return sqdiff_[d]; }

private:
    std::vector<Eigen::MatrixXd> sqdiff_;
};

struct Factorized {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    double jitter_factor = 0.0;
};

Factorized factorize(const Eigen::MatrixXd& gram, double noise_var) {
    const Eigen::Index k = gram.rows();
    Eigen::MatrixXd c = gram;
    c.diagonal().array() += noise_var;
    const double mean_diag = c.diagonal().mean();
    Factorized f;
    for (double factor = kInitialJitter; factor <= kMaxJitter * 1.0000001; factor *= 10.0) {
        Eigen::MatrixXd cj = c;
        cj.diagonal().array() += factor * mean_diag;
        f.llt.compute(cj);
        if (f.llt.info() == Eigen::Success) {
            const auto diag = f.llt.matrixLLT().diagonal();
            if (diag.allFinite() && (diag.array() > 0.0).all()) {
                f.jitter = factor * mean_diag;
                f.jitter_factor = factor;
                return f;
            }
        }
    }
    throw NonPositiveDefinite("covariance matrix of size " + std::to_string(k) +
                              " is not positive definite even with jitter " +
                              std::to_string(kMaxJitter) + " x mean diagonal");
}

double log_det(const Factorized& f) {
    return 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
}

LikelihoodValue lml_with_cache(const GpProblem& problem, const GramCache& cache, const GpHyperparams& hp) {
    const Eigen::Index k = problem.size();
    const Eigen::MatrixXd gram = cache.gram(hp);
    const Factorized f = factorize(gram, hp.noise_var);
    const Eigen::VectorXd alpha = f.llt.solve(problem.targets);

    LikelihoodValue out;
    out.jitter = f.jitter;
    out.value = -0.5 * log_det(f) - 0.5 * problem.targets.dot(alpha) -
                0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);

    // dL/dp = 1/2 tr((alpha alpha' - C^-1) dC/dp)
    const Eigen::MatrixXd c_inv = f.llt.solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd w = alpha * alpha.transpose() - c_inv;
    const Eigen::Index dim = problem.dimension();
    out.gradient.resize(2 + dim);
    // The jitter is jitter_factor * (signal_var + noise_var) on the diagonal.
    const double w_trace = w.trace();
    out.gradient(0) = 0.5 * ((w.array() * gram.array()).sum() + f.jitter_factor * hp.signal_var * w_trace);
    out.gradient(1) = 0.5 * (1.0 + f.jitter_factor) * hp.noise_var * w_trace;
    const Eigen::ArrayXXd wk = w.array() * gram.array();
    for (Eigen::Index d = 0; d < dim; ++d) {
        const double s = hp.length_scales[static_cast<std::size_t>(d)];
        out.gradient(2 + d) = 0.5 * (wk * cache.sqdiff(static_cast<std::size_t>(d)).array()).sum() / (s * s);
    }
    return out;
}

void check_problem(const GpProblem& p, const GpHyperparams& hp) {
    if (p.size() < 1) throw ConfigError("GP problem needs at least one training input");
    if (p.targets.size() != p.size()) throw ConfigError("GP targets and inputs differ in length");
    if (p.query.size() != p.dimension()) throw ConfigError("GP query dimension mismatch");
    hp.validate(static_cast<std::size_t>(p.dimension()));
}

}  // namespace

void GpHyperparams::validate(std::size_t dimension) const {
    auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!ok(signal_var)) throw ConfigError("signal_var must be positive and finite");
    if (!ok(noise_var)) throw ConfigError("noise_var must be positive and finite");
    if (dimension > 0 && length_scales.size() != dimension) {
        throw ConfigError("expected " + std::to_string(dimension) + " length scales, got " +
                          std::to_string(length_scales.size()));
    }
    for (double s : length_scales) {
        if (!ok(s)) throw ConfigError("length scales must be positive and finite");
    }
}

Eigen::VectorXd GpHyperparams::to_log() const {
    Eigen::VectorXd v(2 + static_cast<Eigen::Index>(length_scales.size()));
    v(0) = std::log(signal_var);
    v(1) = std::log(noise_var);
    for (std::size_t d = 0; d < length_scales.size(); ++d) v(2 + static_cast<Eigen::Index>(d)) = std::log(length_scales[d]);
    return v;
}

GpHyperparams GpHyperparams::from_log(const Eigen::VectorXd& log_params) {
    GpHyperparams hp;
    hp.signal_var = std::exp(log_params(0));
    hp.noise_var = std::exp(log_params(1));
    hp.length_scales.resize(static_cast<std::size_t>(log_params.size() - 2));
    for (std::size_t d = 0; d < hp.length_scales.size(); ++d) {
        hp.length_scales[d] = std::exp(log_params(2 + static_cast<Eigen::Index>(d)));
    }
    return hp;
}

GpProblem GpProblem::from_training_set(const TrainingSet& ts) {
    const auto k = static_cast<Eigen::Index>(ts.size());
    const auto dim = static_cast<Eigen::Index>(ts.dimension());
    GpProblem p;
    p.inputs.resize(k, dim);
    p.targets.resize(k);
    p.query.resize(dim);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& v = ts.inputs[static_cast<std::size_t>(i)].values;
        if (static_cast<Eigen::Index>(v.size()) != dim) throw ConfigError("training pattern length mismatch");
        for (Eigen::Index d = 0; d < dim; ++d) p.inputs(i, d) = v[static_cast<std::size_t>(d)];
        p.targets(i) = ts.targets[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index d = 0; d < dim; ++d) p.query(d) = ts.query.values[static_cast<std::size_t>(d)];
    return p;
}

double covariance(std::span<const double> a, std::span<const double> b, const GpHyperparams& hp) {
    if (a.size() != b.size() || a.size() != hp.length_scales.size()) {
        throw ConfigError("covariance: dimension mismatch");
    }
    double r2 = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double z = (a[d] - b[d]) / hp.length_scales[d];
        r2 += z * z;
    }
    return hp.signal_var * std::exp(-0.5 * r2);
}

GpPosterior posterior(const GpProblem& problem, const GpHyperparams& hp) {
    check_problem(problem, hp);
    const Eigen::Index k = problem.size();
    const GramCache cache(problem);
    const Eigen::MatrixXd gram = cache.gram(hp);
    const Factorized f = factorize(gram, hp.noise_var);
    const Eigen::VectorXd alpha = f.llt.solve(problem.targets);

    Eigen::VectorXd cross(k);
    const std::span<const double> q(problem.query.data(), static_cast<std::size_t>(problem.dimension()));
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd row = problem.inputs.row(i).transpose();
        cross(i) = covariance(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), q, hp);
    }
    const Eigen::VectorXd v = f.llt.matrixL().solve(cross);

    GpPosterior out;
    out.jitter = f.jitter;
    out.mean = cross.dot(alpha);
    out.variance = std::max(0.0, hp.signal_var + hp.noise_var - v.squaredNorm());
    out.log_likelihood = -0.5 * log_det(f) - 0.5 * problem.targets.dot(alpha) -
                         0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);
    return out;
}

GpPosterior posterior(const TrainingSet& ts, const GpHyperparams& hp) {
    return posterior(GpProblem::from_training_set(ts), hp);
}

LikelihoodValue log_marginal_likelihood(const GpProblem& problem, const GpHyperparams& hp) {
    check_problem(problem, hp);
    return lml_with_cache(problem, GramCache(problem), hp);
}

LikelihoodValue log_marginal_likelihood(const TrainingSet& ts, const GpHyperparams& hp) {
    return log_marginal_likelihood(GpProblem::from_training_set(ts), hp);
}

FitResult fit_hyperparams(const GpProblem& problem, const GpHyperparams& init, const OptimizerSettings& settings) {
    check_problem(problem, init);
    const GramCache cache(problem);
    const Objective negated = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        // points whose exponentials overflow or underflow are rejected like non-finite values
        const GpHyperparams hp = GpHyperparams::from_log(x);
        hp.validate(static_cast<std::size_t>(problem.dimension()));
        const auto lv = lml_with_cache(problem, cache, hp);
        grad = -lv.gradient;
        return -lv.value;
    };
    const auto res = minimize_lbfgs(negated, init.to_log(), settings);
    FitResult out;
    out.hyperparams = GpHyperparams::from_log(res.x);
    out.log_likelihood = -res.value;
    out.iterations = res.iterations;
    return out;
}

std::vector<GpHyperparams> default_starts(std::size_t dimension) {
    std::vector<GpHyperparams> starts;
    for (double s : {1.0, 0.3, 3.0}) {
        starts.push_back(GpHyperparams{1.0, 0.1, std::vector<double>(dimension, s)});
    }
    return starts;
}

FitResult fit_best(const GpProblem& problem, std::span<const GpHyperparams> starts, const OptimizerSettings& settings) {
    if (starts.empty()) throw ConfigError("fit_best needs at least one starting point");
    std::optional<FitResult> best;
    std::exception_ptr last_error;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        try {
            FitResult r = fit_hyperparams(problem, starts[i], settings);
            r.restart_index = static_cast<int>(i);
            if (!best || r.log_likelihood > best->log_likelihood) best = std::move(r);
        } catch (const NonPositiveDefinite&) {
            last_error = std::current_exception();
        } catch (const OptimizerDiverged&) {
            last_error = std::current_exception();
        }
    }
    if (!best) std::rethrow_exception(last_error);
    return *best;
}

}  // namespace pgprisk
