#pragma once

// Cost-aware Bayesian optimisation over the discrete state grid: a GP
// surrogate of the per-state discrepancy, Expected Improvement, its
// cost-discounted variant and the adaptive cost exponent.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "twinbridge/core.hpp"

namespace twinbridge {

enum class KernelFamily { Rbf, Matern25 };

struct KernelConfig {
    KernelFamily family = KernelFamily::Matern25;
    double signal_variance = 1.0;
    double length_scale = 0.3;

    void validate() const;
};

/// RBF: s2 exp(-r^2 / 2l^2).  Matern 5/2: s2 (1 + sqrt5 r/l + 5r^2/3l^2) exp(-sqrt5 r/l).
[[nodiscard]] double kernel_eval(const KernelConfig& config, std::span<const double> x,
                                 std::span<const double> y);

/// Gram matrix between the rows of a and the rows of b.
[[nodiscard]] Eigen::MatrixXd kernel_matrix(const KernelConfig& config, const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b);

/// Fitted GP surrogate. Targets are z-scored before fitting (zero prior mean on
/// the standardised scale) unless `standardized` is false.
struct GPModel {
    KernelConfig kernel;
    Eigen::MatrixXd inputs;   // n x d, normalised states
    Eigen::VectorXd targets;  // raw discrepancy values
    bool standardized = true;
    double target_mean = 0.0;
    double target_scale = 1.0;
    double noise_variance = 1e-4;
    double jitter = 0.0;      // extra diagonal added during factorisation, 0 if none was needed
    Eigen::MatrixXd chol;     // lower factor of K + (noise + jitter) I
    Eigen::VectorXd alpha_vec;
    double log_marginal_likelihood = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(targets.size()); }
    [[nodiscard]] double best_target() const;
};

/// Throws DomainError on empty/duplicate inputs and NumericalError when the
/// factorisation fails after jitter escalation from 1e-8 to 1e-4.
[[nodiscard]] GPModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                             const KernelConfig& kernel, double noise_variance,
                             bool standardize = true);
[[nodiscard]] GPModel gp_fit(const std::vector<Observation>& observations,
                             const KernelConfig& kernel, double noise_variance,
                             bool standardize = true);

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

[[nodiscard]] Posterior gp_posterior(const GPModel& model, std::span<const double> z);
[[nodiscard]] Posterior gp_posterior(const GPModel& model, const NetworkState& s);

/// Predictive mean and variance for every row of `z` (m x d).
void gp_posterior_batch(const GPModel& model, const Eigen::MatrixXd& z, Eigen::VectorXd& mean,
                        Eigen::VectorXd& variance);

struct HyperparameterGrid {
    double signal_variance_min = 0.1;
    double signal_variance_max = 10.0;
    double length_scale_min = 0.05;
    double length_scale_max = 2.0;
    int points = 8;
};

/// Kernel maximising the log marginal likelihood over a log-spaced grid.
[[nodiscard]] KernelConfig fit_hyperparameters(const Eigen::MatrixXd& inputs,
                                               const Eigen::VectorXd& targets,
                                               KernelFamily family, double noise_variance,
                                               const HyperparameterGrid& grid = {});

/// Standard maximisation EI of a Gaussian N(mean, std^2) over `best`.
[[nodiscard]] double expected_improvement(double mean, double std, double best);

/// ei / cost^alpha.
[[nodiscard]] double cost_aware_ei(double ei, double cost, double alpha);

struct AlphaControllerConfig {
    std::size_t window = 5;
    double reference_rate = 0.1;
    double alpha_min = 0.5;
    double alpha_max = 1.0;

    void validate() const;
};

/// Maps the relative decrease of the global discrepancy between the two most
/// recent windows linearly onto [alpha_min, alpha_max]. Fewer than 2W entries
/// yield alpha_min.
[[nodiscard]] double update_alpha(std::span<const double> recent_global_discrepancy,
                                  const AlphaControllerConfig& config);

/// Position of the cEI argmax; ties go to the lower cost, then the
/// lexicographically smaller state. Throws ExhaustedSpace on empty input.
[[nodiscard]] std::size_t select_next_index(const GPModel& model,
                                            std::span<const NetworkState> candidates,
                                            std::span<const double> costs, double alpha);

[[nodiscard]] NetworkState select_next_state(const GPModel& model,
                                             std::span<const NetworkState> candidates,
                                             std::span<const double> costs, double alpha);

/// Stacks normalised states as rows.
[[nodiscard]] Eigen::MatrixXd normalized_matrix(std::span<const NetworkState> states);

}  // namespace twinbridge
