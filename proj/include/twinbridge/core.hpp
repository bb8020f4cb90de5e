#pragma once

// State space, querying-cost model and observation bookkeeping shared by all
// other modules.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "twinbridge/random.hpp"

namespace twinbridge {

inline constexpr std::size_t kStateDims = 7;

/// One configurable operating point of the network.
///
/// Field order is the lexicographic order used for grid enumeration and
/// tie-breaking: uplink PRBs, downlink PRBs, CPU ratio, RAM ratio, uplink MCS,
/// downlink MCS, user traffic.
struct NetworkState {
    int uplink_bw = 0;    // PRBs, [0, 50]
    int downlink_bw = 0;  // PRBs, [0, 50]
    double cpu_ratio = 1.0;
    double ram_ratio = 1.0;
    int mcs_up = 0;    // [0, 20]
    int mcs_down = 0;  // [0, 28]
    int traffic = 1;   // users, [1, 4]

    friend auto operator<=>(const NetworkState&, const NetworkState&) = default;
    friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

using NormalizedState = std::array<double, kStateDims>;

/// Closed domain of each state dimension.
struct DimensionRange {
    double lower;
    double upper;
    bool integral;
};

/// Domain ranges, in NetworkState field order.
inline constexpr std::array<DimensionRange, kStateDims> kStateDomain{{
    {0.0, 50.0, true},
    {0.0, 50.0, true},
    {0.0, 1.0, false},
    {0.0, 1.0, false},
    {0.0, 20.0, true},
    {0.0, 28.0, true},
    {1.0, 4.0, true},
}};

inline constexpr std::array<const char*, kStateDims> kStateFieldNames{
    "U", "D", "C", "R", "Mu", "Md", "F"};

/// Throws DomainError naming the first field outside its range.
void validate_state(const NetworkState& s);
[[nodiscard]] bool is_valid_state(const NetworkState& s) noexcept;

[[nodiscard]] std::array<double, kStateDims> state_values(const NetworkState& s) noexcept;

/// Builds a state from raw values; integer fields must be exactly integral.
[[nodiscard]] NetworkState state_from_values(const std::array<double, kStateDims>& v);

/// Affine map of each field onto [0, 1] by its domain range.
[[nodiscard]] NormalizedState normalize(const NetworkState& s) noexcept;
[[nodiscard]] NetworkState denormalize(const NormalizedState& z);

[[nodiscard]] std::string to_string(const NetworkState& s);

struct GridAxis {
    double lower;
    double upper;
    double stride;

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] double value(std::size_t i) const { return lower + stride * static_cast<double>(i); }
};

/// Discrete search domain: one strided axis per state dimension.
struct StateSpace {
    std::array<GridAxis, kStateDims> axes;
    std::size_t max_cardinality = 1'000'000;

    /// Coarse 6x6x2x2x2x2x4 grid (2304 states).
    [[nodiscard]] static StateSpace default_grid();

    void validate() const;
    [[nodiscard]] std::size_t cardinality() const;
    [[nodiscard]] bool contains(const NetworkState& s) const;
};

struct CostModelConfig {
    double base_cost = 1.0;
    double per_user_cost = 0.5;
    double per_prb_cost = 1.0;

    void validate() const;
};

/// base + per_user * F + per_prb * (U + D) / 100.
[[nodiscard]] double state_cost(const NetworkState& s, const CostModelConfig& config);

/// Every grid point once, lexicographic in field order.
[[nodiscard]] std::vector<NetworkState> enumerate_state_grid(const StateSpace& space);

/// n distinct grid states not in `exclude`, or all remaining ones if fewer.
/// Throws ExhaustedSpace if nothing remains.
[[nodiscard]] std::vector<NetworkState> sample_candidates(const StateSpace& space, std::size_t n,
                                                          const std::set<NetworkState>& exclude,
                                                          std::uint64_t seed);

/// Index form used by the run loop: picks up to n indices i with !excluded[i].
[[nodiscard]] std::vector<std::size_t> sample_candidate_indices(const std::vector<bool>& excluded,
                                                                std::size_t n, Rng& rng);

struct Observation {
    NetworkState state;
    double discrepancy = 0.0;  // nats
    double cost = 0.0;
    std::size_t iteration = 0;

    void validate() const;
};

struct ExperimentBudget {
    double max_cumulative_cost = 2000.0;
    std::size_t batch_size = 10;

    void validate() const;
};

}  // namespace twinbridge

template <>
struct std::hash<twinbridge::NetworkState> {
    std::size_t operator()(const twinbridge::NetworkState& s) const noexcept;
};
