#include "twinbridge/bo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "twinbridge/errors.hpp"

namespace twinbridge {

void KernelConfig::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw DomainError("kernel signal variance must be > 0");
    }
    if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
        throw DomainError("kernel length scale must be > 0");
    }
}

namespace {

const double kSqrt5 = std::sqrt(5.0);

double kernel_from_sqdist(const KernelConfig& c, double d2) {
    const double l2 = c.length_scale * c.length_scale;
    if (c.family == KernelFamily::Rbf) return c.signal_variance * std::exp(-0.5 * d2 / l2);
    const double t = kSqrt5 * std::sqrt(d2) / c.length_scale;
    return c.signal_variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
}

}  // namespace

double kernel_eval(const KernelConfig& config, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("kernel inputs differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return kernel_from_sqdist(config, d2);
}

Eigen::MatrixXd kernel_matrix(const KernelConfig& config, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw DomainError("kernel inputs differ in dimension");
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            k(i, j) = kernel_from_sqdist(config, (a.row(i) - b.row(j)).squaredNorm());
        }
    }
    return k;
}

double GPModel::best_target() const {
    if (targets.size() == 0) throw DomainError("GP has no observations");
    return targets.maxCoeff();
}

GPModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
               const KernelConfig& kernel, double noise_variance, bool standardize) {
    kernel.validate();
    if (inputs.rows() == 0) throw DomainError("gp_fit needs at least one observation");
    if (inputs.rows() != targets.size()) throw DomainError("inputs and targets differ in length");
    if (!(noise_variance > 0.0)) throw DomainError("noise variance must be > 0");
    if (!targets.allFinite() || !inputs.allFinite()) throw DomainError("non-finite GP data");
    {
        std::set<std::vector<double>> seen;
        for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(inputs.cols()));
            for (Eigen::Index j = 0; j < inputs.cols(); ++j) row[static_cast<std::size_t>(j)] = inputs(i, j);
            if (!seen.insert(std::move(row)).second) throw DomainError("duplicate state in GP data");
        }
    }

    GPModel m;
    m.kernel = kernel;
    m.inputs = inputs;
    m.targets = targets;
    m.noise_variance = noise_variance;
    m.standardized = standardize;
    const auto n = targets.size();
    if (standardize) {
        m.target_mean = targets.mean();
        const double var = (targets.array() - m.target_mean).square().sum() / static_cast<double>(n);
        m.target_scale = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    const Eigen::VectorXd y = (targets.array() - m.target_mean) / m.target_scale;

    Eigen::MatrixXd k = kernel_matrix(kernel, inputs, inputs);
    k.diagonal().array() += noise_variance;

    Eigen::LLT<Eigen::MatrixXd> llt(k);
    double jitter = 0.0;
    for (double j = 1e-8; llt.info() != Eigen::Success; j *= 10.0) {
        if (j > 1e-4 * 1.0000001) {
            throw NumericalError("GP covariance not positive definite after jitter 1e-4");
        }
        jitter = j;
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += j;
        llt.compute(kj);
    }
    m.jitter = jitter;
    m.chol = llt.matrixL();
    m.alpha_vec = llt.solve(y);
    m.log_marginal_likelihood = -0.5 * y.dot(m.alpha_vec) -
                                m.chol.diagonal().array().log().sum() -
                                0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return m;
}

Eigen::MatrixXd normalized_matrix(std::span<const NetworkState> states) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(kStateDims));
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto v = normalize(states[i]);
        for (std::size_t j = 0; j < kStateDims; ++j) {
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
        }
    }
    return z;
}

GPModel gp_fit(const std::vector<Observation>& observations, const KernelConfig& kernel,
               double noise_variance, bool standardize) {
    std::vector<NetworkState> states;
    Eigen::VectorXd y(static_cast<Eigen::Index>(observations.size()));
    for (std::size_t i = 0; i < observations.size(); ++i) {
        observations[i].validate();
        states.push_back(observations[i].state);
        y(static_cast<Eigen::Index>(i)) = observations[i].discrepancy;
    }
    return gp_fit(normalized_matrix(states), y, kernel, noise_variance, standardize);
}

void gp_posterior_batch(const GPModel& model, const Eigen::MatrixXd& z, Eigen::VectorXd& mean,
                        Eigen::VectorXd& variance) {
    const Eigen::MatrixXd ks = kernel_matrix(model.kernel, model.inputs, z);  // n x m
    const Eigen::MatrixXd v = model.chol.triangularView<Eigen::Lower>().solve(ks);
    mean = (ks.transpose() * model.alpha_vec).array() * model.target_scale + model.target_mean;
    variance = (model.kernel.signal_variance - v.colwise().squaredNorm().transpose().array())
                   .max(0.0) *
               (model.target_scale * model.target_scale);
}

Posterior gp_posterior(const GPModel& model, std::span<const double> z) {
    if (static_cast<Eigen::Index>(z.size()) != model.inputs.cols()) {
        throw DomainError("query point dimension mismatch");
    }
    Eigen::MatrixXd row(1, model.inputs.cols());
    for (std::size_t j = 0; j < z.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = z[j];
    Eigen::VectorXd mean, var;
    gp_posterior_batch(model, row, mean, var);
    return {mean(0), var(0)};
}

Posterior gp_posterior(const GPModel& model, const NetworkState& s) {
    const auto z = normalize(s);
    return gp_posterior(model, z);
}

KernelConfig fit_hyperparameters(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                 KernelFamily family, double noise_variance,
                                 const HyperparameterGrid& grid) {
    if (grid.points < 1) throw DomainError("hyperparameter grid needs at least one point");
    auto logspace = [&](double lo, double hi, int i) {
        if (grid.points == 1) return lo;
        return lo * std::pow(hi / lo, static_cast<double>(i) / (grid.points - 1));
    };
    KernelConfig best{family, 1.0, 0.3};
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.points; ++a) {
        for (int b = 0; b < grid.points; ++b) {
            const KernelConfig k{family, logspace(grid.signal_variance_min, grid.signal_variance_max, a),
                                 logspace(grid.length_scale_min, grid.length_scale_max, b)};
            try {
                const auto m = gp_fit(inputs, targets, k, noise_variance, true);
                if (m.log_marginal_likelihood > best_lml) {
                    best_lml = m.log_marginal_likelihood;
                    best = k;
                }
            } catch (const NumericalError&) {
                // skip unusable grid points
            }
        }
    }
    return best;
}

double expected_improvement(double mean, double std, double best) {
    if (!(std >= 0.0)) throw DomainError("EI needs std >= 0");
    const double diff = mean - best;
    if (std == 0.0) return std::max(diff, 0.0);
    const double z = diff / std;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(diff * cdf + std * pdf, 0.0);
}

double cost_aware_ei(double ei, double cost, double alpha) {
    if (!(cost > 0.0)) throw DomainError("cost must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    if (alpha == 0.0) return ei;
    return ei / std::pow(cost, alpha);
}

void AlphaControllerConfig::validate() const {
    if (window == 0) throw DomainError("alpha window must be >= 1");
    if (!(reference_rate > 0.0)) throw DomainError("alpha reference rate must be > 0");
    if (!(alpha_min >= 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0)) {
        throw DomainError("need 0 <= alpha_min <= alpha_max <= 1");
    }
}

double update_alpha(std::span<const double> history, const AlphaControllerConfig& config) {
    config.validate();
    const std::size_t w = config.window;
    if (history.size() < 2 * w) return config.alpha_min;
    const auto recent = history.last(2 * w);
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        first += recent[i];
        second += recent[w + i];
    }
    first /= static_cast<double>(w);
    second /= static_cast<double>(w);
    const double rate = (first - second) / std::max(first, 1e-12);
    const double a = config.alpha_min + (config.alpha_max - config.alpha_min) * rate / config.reference_rate;
    if (!std::isfinite(a)) return config.alpha_min;
    return std::clamp(a, config.alpha_min, config.alpha_max);
}

std::size_t select_next_index(const GPModel& model, std::span<const NetworkState> candidates,
                              std::span<const double> costs, double alpha) {
    if (candidates.empty()) throw ExhaustedSpace();
    if (costs.size() != candidates.size()) throw DomainError("costs must align with candidates");

    std::vector<double> score(candidates.size());
    if (model.size() == 0) {
        // no surrogate yet: EI is the same everywhere, cost decides
        for (std::size_t i = 0; i < candidates.size(); ++i) score[i] = cost_aware_ei(1.0, costs[i], alpha);
    } else {
        Eigen::VectorXd mean, var;
        gp_posterior_batch(model, normalized_matrix(candidates), mean, var);
        const double best = model.best_target();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            score[i] = cost_aware_ei(expected_improvement(mean(ii), std::sqrt(var(ii)), best),
                                     costs[i], alpha);
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (score[i] != score[best]) {
            if (score[i] > score[best]) best = i;
        } else if (costs[i] != costs[best]) {
            if (costs[i] < costs[best]) best = i;
        } else if (candidates[i] < candidates[best]) {
            best = i;
        }
    }
    return best;
}

NetworkState select_next_state(const GPModel& model, std::span<const NetworkState> candidates,
                               std::span<const double> costs, double alpha) {
    return candidates[select_next_index(model, candidates, costs, alpha)];
}

}  // namespace twinbridge
