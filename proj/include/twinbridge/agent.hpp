#pragma once

// Bayes-by-backprop network mapping (state, quantile level) to a latency
// offset, plus the small training and persistence machinery around it.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "twinbridge/core.hpp"

namespace twinbridge {

struct BnnArchitecture {
    std::size_t input_dim = 8;
    std::vector<std::size_t> hidden{128, 256, 256, 128};
    std::size_t output_dim = 1;

    /// input, hidden..., output
    [[nodiscard]] std::vector<std::size_t> widths() const;
    [[nodiscard]] std::size_t parameter_count() const;
    void validate() const;

    /// 8 -> 128 -> 256 -> 256 -> 128 -> 1, the offset agent.
    [[nodiscard]] static BnnArchitecture offset_agent() { return {}; }
    /// Same hidden stack over the 7 state dims only, for the discrepancy head.
    [[nodiscard]] static BnnArchitecture discrepancy_regressor() { return {7, {128, 256, 256, 128}, 1}; }
};

/// Flat variational parameters. Per layer, weights are stored row-major as
/// [out][in] followed by the biases; layers follow in network order. The
/// posterior std of every parameter is softplus(rho).
struct VariationalParams {
    BnnArchitecture arch;
    Eigen::VectorXd mu;
    Eigen::VectorXd rho;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(mu.size()); }
    /// Offset of layer l's weight block in the flat vectors.
    [[nodiscard]] std::size_t layer_offset(std::size_t layer) const;
};

[[nodiscard]] double softplus(double x) noexcept;

/// mu_w ~ N(0, 1/sqrt(fan_in)) for weights, 0 for biases, rho = -5 everywhere.
[[nodiscard]] VariationalParams bnn_init(const BnnArchitecture& arch, std::uint64_t seed);

/// Standard normal draws, one per parameter.
[[nodiscard]] Eigen::VectorXd sample_weight_noise(std::size_t count, Rng& rng);

/// Forward pass with w = mu + softplus(rho) * noise. Tanh on hidden layers.
[[nodiscard]] double bnn_forward(const VariationalParams& params, std::span<const double> input,
                                 const Eigen::VectorXd& weight_noise);

/// Same weight draw applied to every row of `inputs` (batch x input_dim).
[[nodiscard]] Eigen::VectorXd bnn_forward_batch(const VariationalParams& params,
                                                const Eigen::MatrixXd& inputs,
                                                const Eigen::VectorXd& weight_noise);

/// KL(N(mu_q, sigma_q^2) || N(mu_p, sigma_p^2)).
[[nodiscard]] double gaussian_kl(double mu_q, double sigma_q, double mu_p, double sigma_p);

/// Closed-form KL of the factorised posterior to the N(0, prior_std^2) prior.
[[nodiscard]] double kl_to_prior(const VariationalParams& params, double prior_std);

enum class OptimizerKind { Adam, Adadelta };

struct TrainConfig {
    double prior_std = 1.0;
    double learning_rate = 1e-3;
    double lr_decay = 0.95;
    std::size_t decay_step = 50;  // epochs
    std::size_t epochs = 500;
    std::size_t mc_samples = 2;
    double noise_std = 0.1;  // likelihood std, scaled-target units
    std::size_t batch_size = 128;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ElboGradient {
    Eigen::VectorXd mu;
    Eigen::VectorXd rho;
};

/// kl_weight * KL(q || prior) + sum over the batch of the Gaussian negative log
/// likelihood, averaged over the supplied noise draws (one per MC sample).
/// Fills `grad` when non-null.
[[nodiscard]] double elbo_loss(const VariationalParams& params, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets,
                               std::span<const Eigen::VectorXd> weight_noise, double kl_weight,
                               double prior_std, double noise_std, ElboGradient* grad);

/// Residuals are heavy-tailed (a few ms to hundreds), so they are compressed
/// with sign(x) log1p(|x|) before z-scoring.
struct TargetScaler {
    bool signed_log = true;
    double mean = 0.0;
    double scale = 1.0;

    [[nodiscard]] static TargetScaler fit(std::span<const double> values, bool signed_log = true);
    [[nodiscard]] double transform(double x) const noexcept;
    [[nodiscard]] double inverse(double y) const noexcept;
};

/// One supervised example of the offset agent.
struct ResidualSample {
    NetworkState state;
    double level = 0.5;
    double residual = 0.0;  // ms
};

/// Rows of normalised state followed by the quantile level.
[[nodiscard]] Eigen::MatrixXd agent_inputs(std::span<const ResidualSample> data);

/// Stateful trainer: keeps optimiser moments and the global epoch count so
/// that training can be resumed on a growing dataset.
class BnnTrainer {
public:
    BnnTrainer(VariationalParams params, TrainConfig config);

    /// Runs `epochs` passes over (inputs, scaled targets); returns the mean
    /// loss per epoch. Throws TrainingError on non-finite or diverging loss.
    std::vector<double> train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                              std::size_t epochs);

    [[nodiscard]] const VariationalParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }
    [[nodiscard]] double current_learning_rate() const;

private:
    void step(const ElboGradient& g, double lr);

    VariationalParams params_;
    TrainConfig config_;
    Rng rng_;
    std::size_t epoch_ = 0;
    std::size_t steps_ = 0;
    double reference_loss_ = 0.0;
    Eigen::VectorXd m_mu_, m_rho_, v_mu_, v_rho_;
};

struct TrainedAgent {
    VariationalParams params;
    TargetScaler scaler;
    std::vector<double> loss_history;
};

/// Fits the scaler on the residuals and trains for config.epochs epochs
/// starting from `init`.
[[nodiscard]] TrainedAgent bnn_train(const VariationalParams& init,
                                     std::span<const ResidualSample> data,
                                     const TrainConfig& config);

/// n offsets in ms, each from an independent weight draw and level ~ U(0,1).
/// Weight draws use the local reparameterisation: per row, each layer's
/// pre-activations are sampled from their exact Gaussian given the layer input.
[[nodiscard]] std::vector<double> predict_offsets(const VariationalParams& params,
                                                  const TargetScaler& scaler,
                                                  const NetworkState& state, std::size_t n,
                                                  std::uint64_t seed);

/// Mean and std of the discrepancy head over `passes` stochastic forward passes.
[[nodiscard]] std::pair<double, double> predict_discrepancy(const VariationalParams& params,
                                                            const TargetScaler& scaler,
                                                            const NetworkState& state,
                                                            std::uint64_t seed,
                                                            std::size_t passes = 32);

/// TWB1 format: magic, u32 layer-width count, u32 widths, f64 mu[], f64 rho[],
/// all little-endian.
void save_params(const std::filesystem::path& path, const VariationalParams& params);
[[nodiscard]] VariationalParams load_params(const std::filesystem::path& path);

}  // namespace twinbridge
