#pragma once

// Black-box performance oracles standing in for the real network and its
// simulator: an analytic synthetic pair and a CSV replay database.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twinbridge/core.hpp"

namespace twinbridge {

enum class Source { Real, Sim, AugmentedSim };
enum class Role { Real, Sim };

[[nodiscard]] const char* to_string(Source s) noexcept;
[[nodiscard]] const char* to_string(Role r) noexcept;

/// Minimum collection length accepted by the KL estimators.
inline constexpr std::size_t kMinKlSamples = 50;

/// End-to-end frame latencies (ms) observed for one state.
struct PerformanceCollection {
    std::vector<double> samples;
    NetworkState state;
    Source source = Source::Real;

    /// Nonempty, every sample finite and > 0.
    void validate() const;
};

struct QueryResult {
    PerformanceCollection collection;
    double cost = 0.0;
};

/// Interface shared by every environment. Implementations are immutable after
/// construction; query() is a pure function of (state, n, seed).
class Environment {
public:
    virtual ~Environment() = default;

    [[nodiscard]] virtual Role role() const noexcept = 0;
    [[nodiscard]] virtual QueryResult query(const NetworkState& state, std::size_t n_samples,
                                            std::uint64_t seed) const = 0;
};

struct SyntheticEnvConfig {
    Role role = Role::Real;
    double noise_sigma = 0.25;
    double bias_strength = 0.3;
    /// Sim-role log-latency sigma as a fraction of noise_sigma.
    double sim_dispersion = 0.4;
    std::uint64_t seed = 11;

    void validate() const;
};

/// Real: 20 + F * [400/(1 + U(Mu+1)/21) + 400/(1 + D(Md+1)/29)] / (0.5 + 2CR).
/// Sim:  m(s) * (1 - bias * Mu/20) + 15 * bias.
[[nodiscard]] double synthetic_latency_mean(const NetworkState& s, Role role,
                                            double bias_strength = 0.3);

/// Log-latency dispersion for the given role.
[[nodiscard]] double synthetic_sigma(const SyntheticEnvConfig& config, Role role) noexcept;

/// samples_i = mean(s, role) * exp(eps_i), eps_i ~ N(0, sigma_role^2).
/// The noise stream depends on (config.seed, seed, state) but not on the role,
/// so a Real and a Sim environment built with the same seed share their draws.
[[nodiscard]] PerformanceCollection synthetic_sample(const NetworkState& s, Role role,
                                                     std::size_t n, std::uint64_t seed,
                                                     const SyntheticEnvConfig& config);

/// Closed-form q-quantile of the synthetic latency distribution.
[[nodiscard]] double synthetic_quantile(const NetworkState& s, Role role, double level,
                                        const SyntheticEnvConfig& config);

class SyntheticEnvironment final : public Environment {
public:
    SyntheticEnvironment(SyntheticEnvConfig config, CostModelConfig cost);

    [[nodiscard]] Role role() const noexcept override { return config_.role; }
    [[nodiscard]] QueryResult query(const NetworkState& state, std::size_t n_samples,
                                    std::uint64_t seed) const override;

    [[nodiscard]] const SyntheticEnvConfig& config() const noexcept { return config_; }

private:
    SyntheticEnvConfig config_;
    CostModelConfig cost_;
};

struct DatasetRecord {
    NetworkState state;
    std::vector<double> real_samples;
    std::vector<double> sim_samples;
};

/// Reads the `U,D,C,R,Mu,Md,F,source,latency_ms` CSV. Rows of one state must
/// be contiguous; a state reappearing later raises DuplicateError.
[[nodiscard]] std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

/// Writes records in the same format; values use shortest round-trip form.
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

/// Replays a stored database in one role.
class DatasetEnvironment final : public Environment {
public:
    DatasetEnvironment(std::shared_ptr<const std::vector<DatasetRecord>> records, Role role,
                       CostModelConfig cost);

    [[nodiscard]] Role role() const noexcept override { return role_; }

    /// Stored samples verbatim when n equals the stored count; a seeded subset
    /// without replacement when fewer; draws with replacement when more.
    [[nodiscard]] QueryResult query(const NetworkState& state, std::size_t n_samples,
                                    std::uint64_t seed) const override;

    [[nodiscard]] std::vector<NetworkState> states() const;

private:
    std::shared_ptr<const std::vector<DatasetRecord>> records_;
    std::map<NetworkState, std::size_t> index_;
    Role role_;
    CostModelConfig cost_;
};

}  // namespace twinbridge
