#include "twinbridge/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twinbridge/errors.hpp"

namespace twinbridge {

namespace {

constexpr double kGridTolerance = 1e-9;

bool within(double v, const DimensionRange& r) { return v >= r.lower && v <= r.upper; }

}  // namespace

std::array<double, kStateDims> state_values(const NetworkState& s) noexcept {
    return {static_cast<double>(s.uplink_bw), static_cast<double>(s.downlink_bw),
            s.cpu_ratio,
            s.ram_ratio,
            static_cast<double>(s.mcs_up),
            static_cast<double>(s.mcs_down),
            static_cast<double>(s.traffic)};
}

bool is_valid_state(const NetworkState& s) noexcept {
    const auto v = state_values(s);
    for (std::size_t i = 0; i < kStateDims; ++i) {
        if (!std::isfinite(v[i]) || !within(v[i], kStateDomain[i])) return false;
    }
    return true;
}

void validate_state(const NetworkState& s) {
    const auto v = state_values(s);
    for (std::size_t i = 0; i < kStateDims; ++i) {
        if (!std::isfinite(v[i]) || !within(v[i], kStateDomain[i])) {
            std::ostringstream msg;
            msg << "state field " << kStateFieldNames[i] << " = " << v[i] << " outside ["
                << kStateDomain[i].lower << ", " << kStateDomain[i].upper << "]";
            throw DomainError(msg.str());
        }
    }
}

NetworkState state_from_values(const std::array<double, kStateDims>& v) {
    for (std::size_t i = 0; i < kStateDims; ++i) {
        if (kStateDomain[i].integral && v[i] != std::floor(v[i])) {
            throw DomainError(std::string("state field ") + kStateFieldNames[i] +
                              " must be integral");
        }
    }
    NetworkState s{static_cast<int>(v[0]), static_cast<int>(v[1]), v[2], v[3],
                   static_cast<int>(v[4]), static_cast<int>(v[5]), static_cast<int>(v[6])};
    validate_state(s);
    return s;
}

NormalizedState normalize(const NetworkState& s) noexcept {
    const auto v = state_values(s);
    NormalizedState z{};
    for (std::size_t i = 0; i < kStateDims; ++i) {
        const auto& r = kStateDomain[i];
        z[i] = (v[i] - r.lower) / (r.upper - r.lower);
    }
    return z;
}

NetworkState denormalize(const NormalizedState& z) {
    std::array<double, kStateDims> v{};
    for (std::size_t i = 0; i < kStateDims; ++i) {
        const auto& r = kStateDomain[i];
        v[i] = z[i] * (r.upper - r.lower) + r.lower;
        if (r.integral) v[i] = std::round(v[i]);
    }
    return state_from_values(v);
}

std::string to_string(const NetworkState& s) {
    std::ostringstream out;
    out << "(U=" << s.uplink_bw << ", D=" << s.downlink_bw << ", C=" << s.cpu_ratio
        << ", R=" << s.ram_ratio << ", Mu=" << s.mcs_up << ", Md=" << s.mcs_down
        << ", F=" << s.traffic << ")";
    return out.str();
}

std::size_t GridAxis::count() const {
    return static_cast<std::size_t>(std::floor((upper - lower) / stride + kGridTolerance)) + 1;
}

StateSpace StateSpace::default_grid() {
    StateSpace s;
    s.axes = {{
        {0.0, 50.0, 10.0},
        {0.0, 50.0, 10.0},
        {0.5, 1.0, 0.5},
        {0.5, 1.0, 0.5},
        {10.0, 20.0, 10.0},
        {14.0, 28.0, 14.0},
        {1.0, 4.0, 1.0},
    }};
    return s;
}

void StateSpace::validate() const {
    for (std::size_t i = 0; i < kStateDims; ++i) {
        const auto& a = axes[i];
        const auto& r = kStateDomain[i];
        const std::string name = kStateFieldNames[i];
        if (!(a.stride > 0.0) || !std::isfinite(a.stride)) {
            throw DomainError("grid axis " + name + ": stride must be > 0");
        }
        if (!(a.lower <= a.upper)) throw DomainError("grid axis " + name + ": lower > upper");
        if (a.lower < r.lower || a.upper > r.upper) {
            throw DomainError("grid axis " + name + ": bounds outside the state domain");
        }
        if (r.integral && (a.lower != std::floor(a.lower) || a.stride != std::floor(a.stride))) {
            throw DomainError("grid axis " + name + ": integral field needs integral lower/stride");
        }
    }
    if (max_cardinality == 0) throw DomainError("grid cap must be > 0");
}

std::size_t StateSpace::cardinality() const {
    std::size_t n = 1;
    for (const auto& a : axes) {
        const std::size_t c = a.count();
        if (n > max_cardinality / c + 1) return max_cardinality + 1;
        n *= c;
    }
    return n;
}

bool StateSpace::contains(const NetworkState& s) const {
    if (!is_valid_state(s)) return false;
    const auto v = state_values(s);
    for (std::size_t i = 0; i < kStateDims; ++i) {
        const auto& a = axes[i];
        const double k = (v[i] - a.lower) / a.stride;
        const double kr = std::round(k);
        if (std::abs(k - kr) > kGridTolerance || kr < 0.0 ||
            static_cast<std::size_t>(kr) >= a.count()) {
            return false;
        }
    }
    return true;
}

void CostModelConfig::validate() const {
    for (double v : {base_cost, per_user_cost, per_prb_cost}) {
        if (!std::isfinite(v) || v < 0.0) throw DomainError("cost weights must be finite and >= 0");
    }
    if (base_cost == 0.0 && per_user_cost == 0.0 && per_prb_cost == 0.0) {
        throw DomainError("at least one cost weight must be > 0");
    }
}

double state_cost(const NetworkState& s, const CostModelConfig& config) {
    validate_state(s);
    config.validate();
    const double c = config.base_cost + config.per_user_cost * s.traffic +
                     config.per_prb_cost * (s.uplink_bw + s.downlink_bw) / 100.0;
    if (!(c > 0.0)) throw DomainError("querying cost must be strictly positive for " + to_string(s));
    return c;
}

std::vector<NetworkState> enumerate_state_grid(const StateSpace& space) {
    space.validate();
    const std::size_t n = space.cardinality();
    if (n > space.max_cardinality) {
        throw SizeError("grid cardinality exceeds cap of " + std::to_string(space.max_cardinality));
    }
    std::array<std::size_t, kStateDims> counts{};
    for (std::size_t i = 0; i < kStateDims; ++i) counts[i] = space.axes[i].count();

    std::vector<NetworkState> out;
    out.reserve(n);
    std::array<std::size_t, kStateDims> idx{};
    for (std::size_t k = 0; k < n; ++k) {
        std::array<double, kStateDims> v{};
        for (std::size_t i = 0; i < kStateDims; ++i) v[i] = space.axes[i].value(idx[i]);
        out.push_back(state_from_values(v));
        // odometer, last field fastest
        for (std::size_t i = kStateDims; i-- > 0;) {
            if (++idx[i] < counts[i]) break;
            idx[i] = 0;
        }
    }
    return out;
}

std::vector<std::size_t> sample_candidate_indices(const std::vector<bool>& excluded, std::size_t n,
                                                  Rng& rng) {
    std::vector<std::size_t> remaining;
    remaining.reserve(excluded.size());
    for (std::size_t i = 0; i < excluded.size(); ++i) {
        if (!excluded[i]) remaining.push_back(i);
    }
    if (remaining.empty()) throw ExhaustedSpace();
    if (remaining.size() <= n) return remaining;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + uniform_index(rng, remaining.size() - i);
        std::swap(remaining[i], remaining[j]);
    }
    remaining.resize(n);
    return remaining;
}

std::vector<NetworkState> sample_candidates(const StateSpace& space, std::size_t n,
                                            const std::set<NetworkState>& exclude,
                                            std::uint64_t seed) {
    if (n == 0) throw DomainError("candidate count must be positive");
    const auto grid = enumerate_state_grid(space);
    std::vector<bool> excluded(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) excluded[i] = exclude.contains(grid[i]);
    Rng rng(seed);
    const auto idx = sample_candidate_indices(excluded, n, rng);
    std::vector<NetworkState> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(grid[i]);
    return out;
}

void Observation::validate() const {
    validate_state(state);
    if (!(discrepancy >= 0.0) || !std::isfinite(discrepancy)) {
        throw DomainError("observation discrepancy must be finite and >= 0");
    }
    if (!(cost > 0.0)) throw DomainError("observation cost must be > 0");
}

void ExperimentBudget::validate() const {
    if (!(max_cumulative_cost > 0.0)) throw DomainError("budget must be > 0");
    if (batch_size == 0) throw DomainError("batch size must be >= 1");
}

}  // namespace twinbridge

std::size_t std::hash<twinbridge::NetworkState>::operator()(
    const twinbridge::NetworkState& s) const noexcept {
    std::uint64_t h = 0;
    for (double v : twinbridge::state_values(s)) {
        h = twinbridge::mix64(h ^ std::hash<double>{}(v));
    }
    return static_cast<std::size_t>(h);
}
