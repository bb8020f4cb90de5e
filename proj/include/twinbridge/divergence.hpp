#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "twinbridge/envs.hpp"

namespace twinbridge {

enum class KlMethod { Histogram, Knn };

struct KlEstimatorConfig {
    KlMethod method = KlMethod::Histogram;
    int bins = 64;
    /// Pseudo-count added to every bin of both histograms.
    double smoothing = 1e-3;
    int k = 5;

    void validate() const;
};

/// Estimate of KL(p || q) in nats, clamped at 0. Both inputs need at least
/// kMinKlSamples values.
[[nodiscard]] double kl_divergence(std::span<const double> p, std::span<const double> q,
                                   const KlEstimatorConfig& config = {});

[[nodiscard]] inline double kl_divergence(const PerformanceCollection& p,
                                          const PerformanceCollection& q,
                                          const KlEstimatorConfig& config = {}) {
    return kl_divergence(p.samples, q.samples, config);
}

/// Adds a seeded permutation of `offsets` to the simulator samples, flooring
/// each result at kMinLatencyMs.
inline constexpr double kMinLatencyMs = 0.1;
[[nodiscard]] PerformanceCollection augment_collection(const PerformanceCollection& sim,
                                                       std::span<const double> offsets,
                                                       std::uint64_t seed);

/// Linear-interpolation (type 7) empirical quantile of unsorted data.
[[nodiscard]] double empirical_quantile(std::span<const double> data, double level);

/// (level, quantile(real) - quantile(sim)) for each strictly increasing level.
[[nodiscard]] std::vector<std::pair<double, double>> quantile_residuals(
    const PerformanceCollection& real, const PerformanceCollection& sim,
    std::span<const double> levels);

/// n evenly spaced levels on [lo, hi]; the default is the 21-level training grid.
[[nodiscard]] std::vector<double> quantile_levels(std::size_t n = 21, double lo = 0.025,
                                                  double hi = 0.975);

}  // namespace twinbridge
