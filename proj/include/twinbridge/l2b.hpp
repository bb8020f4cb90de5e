#pragma once

// The querying/bridging loop, the comparison methods and the evaluation
// metrics built on top of it.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twinbridge/agent.hpp"
#include "twinbridge/bo.hpp"
#include "twinbridge/core.hpp"
#include "twinbridge/divergence.hpp"
#include "twinbridge/envs.hpp"

namespace twinbridge {

enum class Method { L2B, L2BLite, GridSearch, RandomBaseline };

[[nodiscard]] const char* to_string(Method m) noexcept;
/// Accepts the names printed by to_string (case-insensitive); throws DomainError otherwise.
[[nodiscard]] Method parse_method(std::string_view name);

// ---------------------------------------------------------------- bridgers

/// Anything that produces latency offsets for simulator samples.
class Bridger {
public:
    virtual ~Bridger() = default;

    [[nodiscard]] virtual std::vector<double> offsets(const NetworkState& state, std::size_t n,
                                                      std::uint64_t seed) const = 0;
    /// Null bridgers leave the simulator untouched and skip augmentation.
    [[nodiscard]] virtual bool is_null() const noexcept { return false; }
};

class NullBridger final : public Bridger {
public:
    [[nodiscard]] std::vector<double> offsets(const NetworkState&, std::size_t n,
                                              std::uint64_t) const override {
        return std::vector<double>(n, 0.0);
    }
    [[nodiscard]] bool is_null() const noexcept override { return true; }
};

/// The trained BNN offset agent.
class AgentBridger final : public Bridger {
public:
    AgentBridger(VariationalParams params, TargetScaler scaler)
        : params_(std::move(params)), scaler_(scaler) {}

    [[nodiscard]] std::vector<double> offsets(const NetworkState& state, std::size_t n,
                                              std::uint64_t seed) const override {
        return predict_offsets(params_, scaler_, state, n, seed);
    }

private:
    VariationalParams params_;
    TargetScaler scaler_;
};

/// Predicts the residual at each training quantile level and samples offsets
/// by drawing a level uniformly and interpolating between neighbouring levels.
class QuantileCurveBridger : public Bridger {
public:
    [[nodiscard]] std::vector<double> offsets(const NetworkState& state, std::size_t n,
                                              std::uint64_t seed) const override;

    /// Residual curve in ms at the training levels.
    [[nodiscard]] virtual std::vector<double> residual_curve(const NetworkState& state) const = 0;

protected:
    std::vector<double> levels_ = quantile_levels();
};

/// Multi-output GP regression of the residual curve on the state (the
/// grid-search baseline's bridge). One shared kernel for all levels, picked by
/// summed log marginal likelihood.
class GpCurveBridger final : public QuantileCurveBridger {
public:
    GpCurveBridger(std::span<const ResidualSample> data, KernelFamily family, double noise_variance);

    [[nodiscard]] std::vector<double> residual_curve(const NetworkState& state) const override;
    [[nodiscard]] const KernelConfig& kernel() const noexcept { return kernel_; }

private:
    KernelConfig kernel_;
    TargetScaler scaler_;
    Eigen::MatrixXd inputs_;
    Eigen::RowVectorXd level_means_;
    Eigen::MatrixXd alpha_;  // n x levels
};

/// Ordinary least squares of each level's residual on the normalised state
/// plus intercept (the random baseline's bridge).
class LinearCurveBridger final : public QuantileCurveBridger {
public:
    explicit LinearCurveBridger(std::span<const ResidualSample> data);

    [[nodiscard]] std::vector<double> residual_curve(const NetworkState& state) const override;

private:
    TargetScaler scaler_;
    Eigen::MatrixXd coef_;  // (1 + dims) x levels
};

/// Offsets drawn from the exact residual distribution of the synthetic pair:
/// q_real(u) - q_sim(u) with u ~ U(0,1). Used as a reference in tests.
class SyntheticOracleBridger final : public Bridger {
public:
    SyntheticOracleBridger(SyntheticEnvConfig real, SyntheticEnvConfig sim)
        : real_(real), sim_(sim) {}

    [[nodiscard]] std::vector<double> offsets(const NetworkState& state, std::size_t n,
                                              std::uint64_t seed) const override;

private:
    SyntheticEnvConfig real_;
    SyntheticEnvConfig sim_;
};

/// Groups flat residual samples by state into (states, n x levels matrix).
/// Every state must carry the same level set.
struct ResidualTable {
    std::vector<NetworkState> states;
    std::vector<double> levels;
    Eigen::MatrixXd residuals;
};
[[nodiscard]] ResidualTable residual_table(std::span<const ResidualSample> data);

// -------------------------------------------------------------- evaluation

struct EvaluationSet {
    std::vector<NetworkState> states;
    std::vector<PerformanceCollection> real;
    std::vector<PerformanceCollection> sim;
    std::vector<double> pre;  // raw KL per state
    std::uint64_t seed = 0;
};

/// Queries both environments once per state with `samples` draws each.
[[nodiscard]] EvaluationSet make_evaluation_set(const Environment& real, const Environment& sim,
                                                std::span<const NetworkState> states,
                                                std::size_t samples, std::uint64_t seed,
                                                const KlEstimatorConfig& estimator);

/// Post-bridging KL for every state of the set.
[[nodiscard]] std::vector<double> evaluate_per_state(const Bridger& bridger,
                                                     const EvaluationSet& set,
                                                     const KlEstimatorConfig& estimator);

/// Mean over eval_states of KL(real || augment(sim)); raw KL for a null bridger.
[[nodiscard]] double evaluate_global_discrepancy(const Bridger& bridger, const Environment& real,
                                                 const Environment& sim,
                                                 std::span<const NetworkState> eval_states,
                                                 const KlEstimatorConfig& estimator,
                                                 std::size_t samples = 1000,
                                                 std::uint64_t seed = 0);

/// reduced / cumulative_cost. Negative reductions (a bridge that made things
/// worse) pass through unchanged.
[[nodiscard]] double cost_efficiency(double reduced_discrepancy, double cumulative_cost);

struct TrafficBreakdown {
    int traffic = 0;
    std::size_t states = 0;
    double pre = 0.0;
    double post = 0.0;
    /// Empty when pre < kMinReportableKl.
    std::optional<double> reduction_pct;
};

inline constexpr double kMinReportableKl = 0.02;

/// One entry per traffic level present among the states, ascending.
[[nodiscard]] std::vector<TrafficBreakdown> per_traffic_breakdown(
    std::span<const NetworkState> states, std::span<const double> pre,
    std::span<const double> post);

// -------------------------------------------------------------------- runs

struct RunConfig {
    Method method = Method::L2B;
    ExperimentBudget budget;
    /// Stop after this many queries; 0 means no limit besides the budget.
    std::size_t max_queries = 0;
    StateSpace space = StateSpace::default_grid();
    CostModelConfig cost;

    std::size_t eval_state_count = 256;
    std::size_t eval_samples = 1000;
    std::size_t samples_per_query = 200;
    /// Eval states (and samples per state) used to feed the alpha controller.
    std::size_t alpha_eval_states = 64;
    std::size_t alpha_eval_samples = 200;
    /// Evaluate the bridge every time this percentage of the grid has been queried.
    double checkpoint_percent = 5.0;
    std::uint64_t seed = 1;

    std::size_t candidate_pool = 1024;
    KernelConfig kernel;
    double gp_noise = 1e-4;
    std::size_t gp_refit_every = 10;
    bool gp_standardize = true;
    AlphaControllerConfig alpha;

    TrainConfig train;
    /// Epochs per bridging stage: max(stage_epochs, ceil(min_stage_steps / batches)).
    std::size_t stage_epochs = 2;
    std::size_t min_stage_steps = 64;
    /// Steps spent fitting the discrepancy head at the end of a BNN run; 0 disables it.
    std::size_t discrepancy_head_steps = 2000;

    KlEstimatorConfig kl;

    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    NetworkState state;
    double discrepancy = 0.0;
    double cost = 0.0;
    double cumulative_cost = 0.0;
    double alpha = 0.0;
};

struct Checkpoint {
    std::size_t queries = 0;
    double cumulative_cost = 0.0;
    double pre = 0.0;
    double post = 0.0;

    [[nodiscard]] double reduction_pct() const noexcept {
        return pre > 0.0 ? 100.0 * (pre - post) / pre : 0.0;
    }
};

enum class StopReason { Budget, Exhausted, MaxQueries };
[[nodiscard]] const char* to_string(StopReason r) noexcept;

struct RunResult {
    Method method = Method::L2B;
    std::vector<IterationRecord> iterations;
    std::vector<Checkpoint> checkpoints;  // always ends with the final state of the run
    std::vector<NetworkState> eval_states;
    std::vector<double> pre_per_state;
    std::vector<double> post_per_state;
    /// Discrepancy-head predictions per eval state (BNN methods only).
    std::vector<double> predicted_discrepancy;
    std::vector<TrafficBreakdown> per_traffic;
    double pre_global = 0.0;
    double post_global = 0.0;
    StopReason stop = StopReason::Budget;
    double wall_seconds = 0.0;

    [[nodiscard]] std::size_t queried() const noexcept { return iterations.size(); }
    [[nodiscard]] double cumulative_cost() const noexcept {
        return iterations.empty() ? 0.0 : iterations.back().cumulative_cost;
    }
    [[nodiscard]] double reduction_pct() const noexcept {
        return pre_global > 0.0 ? 100.0 * (pre_global - post_global) / pre_global : 0.0;
    }
};

/// Query counts at which the bridge is evaluated: for every multiple of
/// checkpoint_percent, the largest multiple of the batch size not above that
/// share of the grid.
[[nodiscard]] std::vector<std::size_t> checkpoint_counts(std::size_t grid_size,
                                                         double checkpoint_percent,
                                                         std::size_t batch_size);

/// Runs one method on the grid of config.space.
[[nodiscard]] RunResult run(const RunConfig& config, const Environment& real_env,
                            const Environment& sim_env);

/// Same, over an explicit list of candidate states (e.g. a replayed dataset).
[[nodiscard]] RunResult run(const RunConfig& config, const Environment& real_env,
                            const Environment& sim_env, std::vector<NetworkState> grid);

}  // namespace twinbridge
