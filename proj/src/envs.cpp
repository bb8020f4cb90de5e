#include "twinbridge/envs.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "twinbridge/errors.hpp"
#include "text_io.hpp"

namespace twinbridge {

const char* to_string(Source s) noexcept {
    switch (s) {
        case Source::Real: return "real";
        case Source::Sim: return "sim";
        case Source::AugmentedSim: return "augmented";
    }
    return "?";
}

const char* to_string(Role r) noexcept { return r == Role::Real ? "real" : "sim"; }

void PerformanceCollection::validate() const {
    if (samples.empty()) throw DomainError("performance collection is empty");
    for (double v : samples) {
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw DomainError("latency samples must be finite and > 0");
        }
    }
}

void SyntheticEnvConfig::validate() const {
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
        throw DomainError("noise_sigma must be > 0");
    }
    if (!(sim_dispersion > 0.0) || !std::isfinite(sim_dispersion)) {
        throw DomainError("sim_dispersion must be > 0");
    }
    if (!std::isfinite(bias_strength)) throw DomainError("bias_strength must be finite");
}

double synthetic_latency_mean(const NetworkState& s, Role role, double bias_strength) {
    validate_state(s);
    const double up = 400.0 / (1.0 + s.uplink_bw * (s.mcs_up + 1.0) / 21.0);
    const double down = 400.0 / (1.0 + s.downlink_bw * (s.mcs_down + 1.0) / 29.0);
    const double compute = 0.5 + 2.0 * s.cpu_ratio * s.ram_ratio;
    const double real = 20.0 + s.traffic * (up + down) / compute;
    if (role == Role::Real) return real;
    const double sim = real * (1.0 - bias_strength * s.mcs_up / 20.0) + 15.0 * bias_strength;
    if (!(sim > 0.0)) throw DomainError("bias_strength drives the simulated mean non-positive");
    return sim;
}

double synthetic_sigma(const SyntheticEnvConfig& config, Role role) noexcept {
    return role == Role::Real ? config.noise_sigma : config.sim_dispersion * config.noise_sigma;
}

namespace {

std::uint64_t state_key(const NetworkState& s) { return std::hash<NetworkState>{}(s); }

}  // namespace

PerformanceCollection synthetic_sample(const NetworkState& s, Role role, std::size_t n,
                                       std::uint64_t seed, const SyntheticEnvConfig& config) {
    config.validate();
    if (n == 0) throw DomainError("sample count must be positive");
    const double mean = synthetic_latency_mean(s, role, config.bias_strength);
    const double sigma = synthetic_sigma(config, role);
    Rng rng(derive_seed({config.seed, seed, state_key(s)}));
    NormalSampler normal;
    PerformanceCollection out{{}, s, role == Role::Real ? Source::Real : Source::Sim};
    out.samples.resize(n);
    for (auto& v : out.samples) v = mean * std::exp(sigma * normal(rng));
    return out;
}

double synthetic_quantile(const NetworkState& s, Role role, double level,
                          const SyntheticEnvConfig& config) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), level);
    return synthetic_latency_mean(s, role, config.bias_strength) *
           std::exp(synthetic_sigma(config, role) * z);
}

SyntheticEnvironment::SyntheticEnvironment(SyntheticEnvConfig config, CostModelConfig cost)
    : config_(config), cost_(cost) {
    config_.validate();
    cost_.validate();
}

QueryResult SyntheticEnvironment::query(const NetworkState& state, std::size_t n_samples,
                                        std::uint64_t seed) const {
    if (n_samples == 0) throw DomainError("n_samples must be positive");
    QueryResult r{synthetic_sample(state, config_.role, n_samples, seed, config_), 0.0};
    if (config_.role == Role::Real) r.cost = state_cost(state, cost_);
    return r;
}

// ---------------------------------------------------------------------------
// Dataset CSV

namespace {

constexpr const char* kDatasetHeader = "U,D,C,R,Mu,Md,F,source,latency_ms";

}  // namespace

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset " + path.string());

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    ++lineno;
    if (io::trim(line) != kDatasetHeader) {
        throw ParseError(lineno, std::string("expected header '") + kDatasetHeader + "'");
    }

    std::vector<DatasetRecord> records;
    std::set<NetworkState> closed;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = io::trim(line);
        if (text.empty()) continue;
        const auto fields = io::split(text, ',');
        if (fields.size() != 9) throw ParseError(lineno, "expected 9 fields");

        std::array<double, kStateDims> v{};
        for (std::size_t i = 0; i < kStateDims; ++i) {
            const auto x = io::parse_double(fields[i]);
            if (!x) throw ParseError(lineno, std::string("bad number in column ") + kStateFieldNames[i]);
            v[i] = *x;
        }
        NetworkState state;
        try {
            state = state_from_values(v);
        } catch (const DomainError& e) {
            throw ParseError(lineno, e.what());
        }
        const auto source = io::trim(fields[7]);
        if (source != "real" && source != "sim") {
            throw ParseError(lineno, "source must be 'real' or 'sim'");
        }
        const auto latency = io::parse_double(fields[8]);
        if (!latency || !std::isfinite(*latency) || !(*latency > 0.0)) {
            throw ParseError(lineno, "latency_ms must be a finite number > 0");
        }

        if (records.empty() || records.back().state != state) {
            if (!records.empty()) closed.insert(records.back().state);
            if (closed.contains(state)) {
                throw DuplicateError(lineno, "duplicate state " + to_string(state));
            }
            records.push_back({state, {}, {}});
        }
        auto& rec = records.back();
        (source == "real" ? rec.real_samples : rec.sim_samples).push_back(*latency);
    }
    for (const auto& r : records) {
        if (r.real_samples.empty() || r.sim_samples.empty()) {
            throw ParseError(lineno, "state " + to_string(r.state) + " lacks real or sim samples");
        }
    }
    return records;
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset " + path.string());
    out << kDatasetHeader << '\n';
    std::string prefix;
    for (const auto& r : records) {
        prefix.clear();
        for (double v : state_values(r.state)) {
            prefix += io::format_double(v);
            prefix += ',';
        }
        for (double x : r.real_samples) out << prefix << "real," << io::format_double(x) << '\n';
        for (double x : r.sim_samples) out << prefix << "sim," << io::format_double(x) << '\n';
    }
    if (!out) throw Error("failed writing dataset " + path.string());
}

DatasetEnvironment::DatasetEnvironment(std::shared_ptr<const std::vector<DatasetRecord>> records,
                                       Role role, CostModelConfig cost)
    : records_(std::move(records)), role_(role), cost_(cost) {
    cost_.validate();
    for (std::size_t i = 0; i < records_->size(); ++i) {
        const auto [it, fresh] = index_.emplace((*records_)[i].state, i);
        if (!fresh) throw DuplicateError(0, "duplicate state " + to_string(it->first));
    }
}

std::vector<NetworkState> DatasetEnvironment::states() const {
    std::vector<NetworkState> out;
    out.reserve(index_.size());
    for (const auto& [s, i] : index_) out.push_back(s);
    return out;
}

QueryResult DatasetEnvironment::query(const NetworkState& state, std::size_t n_samples,
                                      std::uint64_t seed) const {
    if (n_samples == 0) throw DomainError("n_samples must be positive");
    const auto it = index_.find(state);
    if (it == index_.end()) throw UnknownState("state not in database: " + to_string(state));
    const auto& rec = (*records_)[it->second];
    const auto& stored = role_ == Role::Real ? rec.real_samples : rec.sim_samples;

    QueryResult r;
    r.collection.state = state;
    r.collection.source = role_ == Role::Real ? Source::Real : Source::Sim;
    if (n_samples == stored.size()) {
        r.collection.samples = stored;
    } else {
        Rng rng(derive_seed({seed, std::hash<NetworkState>{}(state)}));
        if (n_samples < stored.size()) {
            std::vector<double> pool = stored;
            for (std::size_t i = 0; i < n_samples; ++i) {
                std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
            }
            pool.resize(n_samples);
            r.collection.samples = std::move(pool);
        } else {
            r.collection.samples.resize(n_samples);
            for (auto& x : r.collection.samples) x = stored[uniform_index(rng, stored.size())];
        }
    }
    if (role_ == Role::Real) r.cost = state_cost(state, cost_);
    return r;
}

}  // namespace twinbridge
