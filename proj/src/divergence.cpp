#include "twinbridge/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "twinbridge/errors.hpp"

namespace twinbridge {

void KlEstimatorConfig::validate() const {
    if (bins < 8) throw DomainError("histogram bins must be >= 8");
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
        throw DomainError("histogram smoothing must be > 0");
    }
    if (k < 1) throw DomainError("k must be >= 1");
}

namespace {

double histogram_kl(std::span<const double> p, std::span<const double> q, int bins,
                    double smoothing) {
    const auto [pmin, pmax] = std::minmax_element(p.begin(), p.end());
    const auto [qmin, qmax] = std::minmax_element(q.begin(), q.end());
    const double lo = std::min(*pmin, *qmin);
    const double hi = std::max(*pmax, *qmax);
    if (!(hi > lo)) return 0.0;

    const double scale = bins / (hi - lo);
    auto fill = [&](std::span<const double> xs) {
        std::vector<double> h(static_cast<std::size_t>(bins), smoothing);
        for (double x : xs) {
            const auto b = std::min(static_cast<int>((x - lo) * scale), bins - 1);
            h[static_cast<std::size_t>(b)] += 1.0;
        }
        const double total = static_cast<double>(xs.size()) + bins * smoothing;
        for (auto& v : h) v /= total;
        return h;
    };
    const auto hp = fill(p);
    const auto hq = fill(q);
    double kl = 0.0;
    for (std::size_t i = 0; i < hp.size(); ++i) kl += hp[i] * std::log(hp[i] / hq[i]);
    return std::max(kl, 0.0);
}

/// Distance from x to its k-th nearest neighbour in sorted `s`. When
/// `skip_self` is set, one element equal to x is ignored.
double kth_distance(const std::vector<double>& s, double x, int k, bool skip_self) {
    auto right = static_cast<std::ptrdiff_t>(std::lower_bound(s.begin(), s.end(), x) - s.begin());
    auto left = right - 1;
    const auto n = static_cast<std::ptrdiff_t>(s.size());
    if (skip_self) ++right;  // s[right] == x is the point itself
    double d = 0.0;
    for (int found = 0; found < k; ++found) {
        const double dl = left >= 0 ? x - s[static_cast<std::size_t>(left)]
                                    : std::numeric_limits<double>::infinity();
        const double dr = right < n ? s[static_cast<std::size_t>(right)] - x
                                    : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            d = dl;
            --left;
        } else {
            d = dr;
            ++right;
        }
    }
    return d;
}

// Perez-Cruz (2008) k-NN estimator, one-dimensional.
double knn_kl(std::span<const double> p, std::span<const double> q, int k) {
    std::vector<double> sp(p.begin(), p.end());
    std::vector<double> sq(q.begin(), q.end());
    std::sort(sp.begin(), sp.end());
    std::sort(sq.begin(), sq.end());
    if (static_cast<std::size_t>(k) >= sp.size() || static_cast<std::size_t>(k) > sq.size()) {
        throw DomainError("k exceeds the sample count");
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (double x : sp) {
        const double rho = kth_distance(sp, x, k, true);
        const double nu = kth_distance(sq, x, k, false);
        if (rho > 0.0 && nu > 0.0 && std::isfinite(rho) && std::isfinite(nu)) {
            sum += std::log(nu / rho);
            ++used;
        }
    }
    if (used == 0) return 0.0;
    const double n = static_cast<double>(sp.size());
    const double m = static_cast<double>(sq.size());
    return std::max(sum / static_cast<double>(used) + std::log(m / (n - 1.0)), 0.0);
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     const KlEstimatorConfig& config) {
    config.validate();
    if (p.size() < kMinKlSamples || q.size() < kMinKlSamples) {
        throw DomainError("KL estimation needs at least " + std::to_string(kMinKlSamples) +
                          " samples per collection");
    }
    for (auto xs : {p, q}) {
        for (double v : xs) {
            if (!std::isfinite(v)) throw DomainError("non-finite sample in KL input");
        }
    }
    return config.method == KlMethod::Histogram ? histogram_kl(p, q, config.bins, config.smoothing)
                                                : knn_kl(p, q, config.k);
}

PerformanceCollection augment_collection(const PerformanceCollection& sim,
                                         std::span<const double> offsets, std::uint64_t seed) {
    if (offsets.size() != sim.samples.size()) {
        throw DomainError("offset count must match the simulator sample count");
    }
    std::vector<double> shuffled(offsets.begin(), offsets.end());
    Rng rng(seed);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[uniform_index(rng, i)]);
    }
    PerformanceCollection out{sim.samples, sim.state, Source::AugmentedSim};
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = std::max(out.samples[i] + shuffled[i], kMinLatencyMs);
    }
    return out;
}

namespace {

double sorted_quantile(const std::vector<double>& sorted, double level) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_levels(std::span<const double> levels) {
    if (levels.empty()) throw DomainError("quantile levels must be nonempty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
            throw DomainError("quantile levels must lie in (0, 1)");
        }
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw DomainError("quantile levels must be strictly increasing");
        }
    }
}

}  // namespace

double empirical_quantile(std::span<const double> data, double level) {
    if (data.empty()) throw DomainError("quantile of empty data");
    if (!(level >= 0.0 && level <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted_quantile(sorted, level);
}

std::vector<std::pair<double, double>> quantile_residuals(const PerformanceCollection& real,
                                                          const PerformanceCollection& sim,
                                                          std::span<const double> levels) {
    check_levels(levels);
    for (const auto* c : {&real, &sim}) {
        if (c->samples.empty()) throw DomainError("quantile residuals need nonempty collections");
        for (double v : c->samples) {
            if (!std::isfinite(v)) throw DomainError("non-finite sample in quantile input");
        }
    }
    std::vector<double> r = real.samples;
    std::vector<double> s = sim.samples;
    std::sort(r.begin(), r.end());
    std::sort(s.begin(), s.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(levels.size());
    for (double q : levels) out.emplace_back(q, sorted_quantile(r, q) - sorted_quantile(s, q));
    return out;
}

std::vector<double> quantile_levels(std::size_t n, double lo, double hi) {
    if (n == 0) throw DomainError("need at least one level");
    if (n == 1) return {0.5 * (lo + hi)};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace twinbridge
