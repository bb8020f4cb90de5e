#include "twinbridge/l2b.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "twinbridge/errors.hpp"

namespace twinbridge {

const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::L2B: return "L2B";
        case Method::L2BLite: return "L2B-Lite";
        case Method::GridSearch: return "GS";
        case Method::RandomBaseline: return "Random";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string s;
    for (char c : name) {
        if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (s == "l2b") return Method::L2B;
    if (s == "l2blite" || s == "lite") return Method::L2BLite;
    if (s == "gs" || s == "gridsearch") return Method::GridSearch;
    if (s == "random" || s == "randombaseline") return Method::RandomBaseline;
    throw DomainError("unknown method '" + std::string(name) + "'");
}

const char* to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::Budget: return "budget";
        case StopReason::Exhausted: return "exhausted";
        case StopReason::MaxQueries: return "max_queries";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Bridgers

std::vector<double> QuantileCurveBridger::offsets(const NetworkState& state, std::size_t n,
                                                  std::uint64_t seed) const {
    if (n == 0) throw DomainError("need at least one offset");
    const auto curve = residual_curve(state);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& o : out) {
        const double u = uniform01(rng);
        if (u <= levels_.front()) {
            o = curve.front();
        } else if (u >= levels_.back()) {
            o = curve.back();
        } else {
            const auto hi = static_cast<std::size_t>(
                std::upper_bound(levels_.begin(), levels_.end(), u) - levels_.begin());
            const double t = (u - levels_[hi - 1]) / (levels_[hi] - levels_[hi - 1]);
            o = curve[hi - 1] + t * (curve[hi] - curve[hi - 1]);
        }
    }
    return out;
}

ResidualTable residual_table(std::span<const ResidualSample> data) {
    ResidualTable t;
    std::map<NetworkState, std::vector<std::pair<double, double>>> by_state;
    std::vector<NetworkState> order;
    for (const auto& d : data) {
        auto [it, fresh] = by_state.try_emplace(d.state);
        if (fresh) order.push_back(d.state);
        it->second.emplace_back(d.level, d.residual);
    }
    if (order.empty()) return t;
    for (auto& [s, v] : by_state) std::sort(v.begin(), v.end());
    for (const auto& [lv, r] : by_state.at(order.front())) t.levels.push_back(lv);
    t.states = order;
    t.residuals.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(t.levels.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& v = by_state.at(order[i]);
        if (v.size() != t.levels.size()) throw DomainError("states carry different level sets");
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j].first != t.levels[j]) throw DomainError("states carry different level sets");
            t.residuals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j].second;
        }
    }
    return t;
}

namespace {

std::vector<double> flat_residuals(std::span<const ResidualSample> data) {
    std::vector<double> r;
    r.reserve(data.size());
    for (const auto& d : data) r.push_back(d.residual);
    return r;
}

}  // namespace

GpCurveBridger::GpCurveBridger(std::span<const ResidualSample> data, KernelFamily family,
                               double noise_variance) {
    const auto table = residual_table(data);
    if (table.states.empty()) throw DomainError("GP bridge needs at least one queried state");
    levels_ = table.levels;
    // plain z-score: the baseline regresses residuals in ms, no target warping
    scaler_ = TargetScaler::fit(flat_residuals(data), false);
    Eigen::MatrixXd y = table.residuals.unaryExpr([&](double r) { return scaler_.transform(r); });
    level_means_ = y.colwise().mean();
    y.rowwise() -= level_means_;
    inputs_ = normalized_matrix(table.states);

    const auto n = static_cast<double>(y.rows());
    const auto outputs = static_cast<double>(y.cols());
    const HyperparameterGrid grid;
    const std::array<double, 2> noises{noise_variance, 1e-2};
    double best = -std::numeric_limits<double>::infinity();
    auto logspace = [&](double lo, double hi, int i) {
        return lo * std::pow(hi / lo, static_cast<double>(i) / (grid.points - 1));
    };
    Eigen::MatrixXd best_alpha;
    for (double noise : noises) {
        for (int a = 0; a < grid.points; ++a) {
            for (int b = 0; b < grid.points; ++b) {
                const KernelConfig k{family, logspace(grid.signal_variance_min, grid.signal_variance_max, a),
                                     logspace(grid.length_scale_min, grid.length_scale_max, b)};
                Eigen::MatrixXd kk = kernel_matrix(k, inputs_, inputs_);
                kk.diagonal().array() += noise;
                Eigen::LLT<Eigen::MatrixXd> llt(kk);
                if (llt.info() != Eigen::Success) continue;
                Eigen::MatrixXd alpha = llt.solve(y);
                const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
                const double lml = -0.5 * (y.array() * alpha.array()).sum() - 0.5 * outputs * logdet -
                                   0.5 * outputs * n * std::log(2.0 * std::numbers::pi);
                if (lml > best) {
                    best = lml;
                    kernel_ = k;
                    best_alpha = std::move(alpha);
                }
            }
        }
    }
    if (best_alpha.size() == 0) throw NumericalError("GP bridge: no usable kernel on the grid");
    alpha_ = std::move(best_alpha);
}

std::vector<double> GpCurveBridger::residual_curve(const NetworkState& state) const {
    const auto z = normalize(state);
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(kStateDims));
    for (std::size_t j = 0; j < kStateDims; ++j) row(0, static_cast<Eigen::Index>(j)) = z[j];
    const Eigen::RowVectorXd pred = kernel_matrix(kernel_, row, inputs_) * alpha_ + level_means_;
    std::vector<double> out(static_cast<std::size_t>(pred.size()));
    for (Eigen::Index j = 0; j < pred.size(); ++j) out[static_cast<std::size_t>(j)] = scaler_.inverse(pred(j));
    return out;
}

LinearCurveBridger::LinearCurveBridger(std::span<const ResidualSample> data) {
    const auto table = residual_table(data);
    if (table.states.empty()) throw DomainError("linear bridge needs at least one queried state");
    levels_ = table.levels;
    scaler_ = TargetScaler::fit(flat_residuals(data), false);
    const Eigen::MatrixXd y = table.residuals.unaryExpr([&](double r) { return scaler_.transform(r); });
    Eigen::MatrixXd x(y.rows(), static_cast<Eigen::Index>(kStateDims + 1));
    x.col(0).setOnes();
    x.rightCols(static_cast<Eigen::Index>(kStateDims)) = normalized_matrix(table.states);
    // complete orthogonal decomposition gives the minimum-norm solution when
    // few states have been queried
    coef_ = x.completeOrthogonalDecomposition().solve(y);
}

std::vector<double> LinearCurveBridger::residual_curve(const NetworkState& state) const {
    const auto z = normalize(state);
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(kStateDims + 1));
    row(0) = 1.0;
    for (std::size_t j = 0; j < kStateDims; ++j) row(static_cast<Eigen::Index>(j + 1)) = z[j];
    const Eigen::RowVectorXd pred = row * coef_;
    std::vector<double> out(static_cast<std::size_t>(pred.size()));
    for (Eigen::Index j = 0; j < pred.size(); ++j) out[static_cast<std::size_t>(j)] = scaler_.inverse(pred(j));
    return out;
}

std::vector<double> SyntheticOracleBridger::offsets(const NetworkState& state, std::size_t n,
                                                    std::uint64_t seed) const {
    if (n == 0) throw DomainError("need at least one offset");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& o : out) {
        const double u = uniform_open01(rng);
        o = synthetic_quantile(state, Role::Real, u, real_) - synthetic_quantile(state, Role::Sim, u, sim_);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

constexpr std::uint64_t kOffsetStream = 0x6f6666;
constexpr std::uint64_t kShuffleStream = 0x736866;

}  // namespace

EvaluationSet make_evaluation_set(const Environment& real, const Environment& sim,
                                  std::span<const NetworkState> states, std::size_t samples,
                                  std::uint64_t seed, const KlEstimatorConfig& estimator) {
    if (states.empty()) throw DomainError("evaluation needs at least one state");
    EvaluationSet set;
    set.seed = seed;
    set.states.assign(states.begin(), states.end());
    for (const auto& s : states) {
        set.real.push_back(real.query(s, samples, seed).collection);
        set.sim.push_back(sim.query(s, samples, seed).collection);
        set.pre.push_back(kl_divergence(set.real.back(), set.sim.back(), estimator));
    }
    return set;
}

std::vector<double> evaluate_per_state(const Bridger& bridger, const EvaluationSet& set,
                                       const KlEstimatorConfig& estimator) {
    if (bridger.is_null()) return set.pre;
    std::vector<double> post(set.states.size());
    for (std::size_t i = 0; i < set.states.size(); ++i) {
        // keyed by state, not position, so the result ignores eval-state order
        const std::uint64_t key = std::hash<NetworkState>{}(set.states[i]);
        const auto& sim = set.sim[i];
        const auto off = bridger.offsets(set.states[i], sim.samples.size(),
                                         derive_seed({set.seed, kOffsetStream, key}));
        const auto aug = augment_collection(sim, off, derive_seed({set.seed, kShuffleStream, key}));
        post[i] = kl_divergence(set.real[i], aug, estimator);
    }
    return post;
}

double evaluate_global_discrepancy(const Bridger& bridger, const Environment& real,
                                   const Environment& sim,
                                   std::span<const NetworkState> eval_states,
                                   const KlEstimatorConfig& estimator, std::size_t samples,
                                   std::uint64_t seed) {
    const auto set = make_evaluation_set(real, sim, eval_states, samples, seed, estimator);
    const auto post = evaluate_per_state(bridger, set, estimator);
    return std::accumulate(post.begin(), post.end(), 0.0) / static_cast<double>(post.size());
}

double cost_efficiency(double reduced_discrepancy, double cumulative_cost) {
    if (!(cumulative_cost > 0.0)) throw DomainError("cost efficiency needs a positive cumulative cost");
    return reduced_discrepancy / cumulative_cost;
}

std::vector<TrafficBreakdown> per_traffic_breakdown(std::span<const NetworkState> states,
                                                    std::span<const double> pre,
                                                    std::span<const double> post) {
    if (states.size() != pre.size() || states.size() != post.size()) {
        throw DomainError("per-traffic inputs differ in length");
    }
    std::map<int, TrafficBreakdown> acc;
    for (std::size_t i = 0; i < states.size(); ++i) {
        auto& b = acc[states[i].traffic];
        b.traffic = states[i].traffic;
        ++b.states;
        b.pre += pre[i];
        b.post += post[i];
    }
    std::vector<TrafficBreakdown> out;
    for (auto& [f, b] : acc) {
        b.pre /= static_cast<double>(b.states);
        b.post /= static_cast<double>(b.states);
        if (b.pre >= kMinReportableKl) b.reduction_pct = 100.0 * (b.pre - b.post) / b.pre;
        out.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run loop

void RunConfig::validate() const {
    budget.validate();
    space.validate();
    cost.validate();
    kernel.validate();
    alpha.validate();
    train.validate();
    kl.validate();
    if (eval_state_count == 0) throw DomainError("eval_state_count must be >= 1");
    if (eval_samples < kMinKlSamples || samples_per_query < kMinKlSamples ||
        alpha_eval_samples < kMinKlSamples) {
        throw DomainError("sample counts must be >= " + std::to_string(kMinKlSamples));
    }
    if (alpha_eval_states == 0) throw DomainError("alpha_eval_states must be >= 1");
    if (!(checkpoint_percent > 0.0 && checkpoint_percent <= 100.0)) {
        throw DomainError("checkpoint_percent must lie in (0, 100]");
    }
    if (candidate_pool == 0) throw DomainError("candidate_pool must be >= 1");
    if (!(gp_noise > 0.0)) throw DomainError("gp noise must be > 0");
    if (gp_refit_every == 0) throw DomainError("gp refit interval must be >= 1");
    if (stage_epochs == 0) throw DomainError("stage_epochs must be >= 1");
}

std::vector<std::size_t> checkpoint_counts(std::size_t grid_size, double checkpoint_percent,
                                           std::size_t batch_size) {
    if (batch_size == 0) throw DomainError("batch size must be >= 1");
    std::vector<std::size_t> out;
    for (int k = 1;; ++k) {
        const double pct = checkpoint_percent * k;
        if (pct > 100.0 + 1e-9) break;
        const auto share = static_cast<std::size_t>(std::floor(pct / 100.0 * static_cast<double>(grid_size) + 1e-9));
        const std::size_t c = share / batch_size * batch_size;
        if (c > 0 && (out.empty() || out.back() != c)) out.push_back(c);
    }
    return out;
}

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616c;
constexpr std::uint64_t kAlphaStream = 0x616c7068;
constexpr std::uint64_t kCandidateStream = 0x63616e64;
constexpr std::uint64_t kQueryStream = 0x71727921;
constexpr std::uint64_t kTrainStream = 0x74726e;

bool uses_bnn(Method m) { return m == Method::L2B || m == Method::L2BLite; }

class RunState {
public:
    RunState(const RunConfig& config, const Environment& real, const Environment& sim,
             std::vector<NetworkState> grid)
        : cfg_(config), real_(real), sim_(sim), grid_(std::move(grid)) {}

    RunResult execute();

private:
    std::size_t pick_next();
    void bridging_stage();
    void train_agent();
    std::unique_ptr<Bridger> current_bridger() const;
    void checkpoint();

    const RunConfig& cfg_;
    const Environment& real_;
    const Environment& sim_;
    std::vector<NetworkState> grid_;
    std::vector<double> grid_cost_;
    std::vector<bool> observed_;

    Rng candidate_rng_{0};
    std::size_t grid_cursor_ = 0;
    GPModel gp_;
    KernelConfig kernel_;
    double alpha_ = 0.0;
    std::vector<double> alpha_history_;

    std::vector<Observation> observations_;
    std::vector<ResidualSample> residuals_;
    std::unique_ptr<BnnTrainer> trainer_;
    TargetScaler scaler_;
    bool agent_trained_ = false;

    EvaluationSet eval_;
    EvaluationSet alpha_eval_;
    std::vector<double> last_post_;
    std::size_t last_checkpoint_ = static_cast<std::size_t>(-1);

    RunResult result_;
};

std::size_t RunState::pick_next() {
    switch (cfg_.method) {
        case Method::GridSearch:
            while (grid_cursor_ < grid_.size() && observed_[grid_cursor_]) ++grid_cursor_;
            if (grid_cursor_ == grid_.size()) throw ExhaustedSpace();
            return grid_cursor_;
        case Method::RandomBaseline:
            return sample_candidate_indices(observed_, 1, candidate_rng_).front();
        case Method::L2B:
        case Method::L2BLite: {
            const auto idx = sample_candidate_indices(observed_, cfg_.candidate_pool, candidate_rng_);
            std::vector<NetworkState> cand;
            std::vector<double> costs;
            cand.reserve(idx.size());
            costs.reserve(idx.size());
            for (auto i : idx) {
                cand.push_back(grid_[i]);
                costs.push_back(grid_cost_[i]);
            }
            return idx[select_next_index(gp_, cand, costs, alpha_)];
        }
    }
    throw DomainError("unknown method");
}

void RunState::train_agent() {
    if (!trainer_) {
        auto p = bnn_init(BnnArchitecture::offset_agent(), derive_seed({cfg_.seed, kTrainStream}));
        TrainConfig tc = cfg_.train;
        tc.seed = derive_seed({cfg_.seed, kTrainStream, 1});
        trainer_ = std::make_unique<BnnTrainer>(std::move(p), tc);
    }
    std::vector<double> raw;
    raw.reserve(residuals_.size());
    for (const auto& r : residuals_) raw.push_back(r.residual);
    scaler_ = TargetScaler::fit(raw, true);
    Eigen::VectorXd y(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) y(static_cast<Eigen::Index>(i)) = scaler_.transform(raw[i]);

    const std::size_t n = raw.size();
    const std::size_t bs = std::min(cfg_.train.batch_size, n);
    const std::size_t batches = (n + bs - 1) / bs;
    const std::size_t epochs = std::max(cfg_.stage_epochs, (cfg_.min_stage_steps + batches - 1) / batches);
    trainer_->train(agent_inputs(residuals_), y, epochs);
    agent_trained_ = true;
}

std::unique_ptr<Bridger> RunState::current_bridger() const {
    if (observations_.empty()) return std::make_unique<NullBridger>();
    switch (cfg_.method) {
        case Method::L2B:
        case Method::L2BLite:
            if (!agent_trained_) return std::make_unique<NullBridger>();
            return std::make_unique<AgentBridger>(trainer_->params(), scaler_);
        case Method::GridSearch:
            return std::make_unique<GpCurveBridger>(residuals_, cfg_.kernel.family, cfg_.gp_noise);
        case Method::RandomBaseline:
            return std::make_unique<LinearCurveBridger>(residuals_);
    }
    throw DomainError("unknown method");
}

void RunState::bridging_stage() {
    // Only the BNN methods train on a schedule; the regression baselines have
    // no feedback into selection, so they are fitted when evaluated.
    if (!uses_bnn(cfg_.method)) return;
    train_agent();
    if (cfg_.method == Method::L2B) {
        const AgentBridger agent(trainer_->params(), scaler_);
        const auto post = evaluate_per_state(agent, alpha_eval_, cfg_.kl);
        alpha_history_.push_back(std::accumulate(post.begin(), post.end(), 0.0) /
                                 static_cast<double>(post.size()));
        alpha_ = update_alpha(alpha_history_, cfg_.alpha);
    }
}

void RunState::checkpoint() {
    const std::size_t q = observations_.size();
    if (q == last_checkpoint_) return;
    last_checkpoint_ = q;
    const auto bridger = current_bridger();
    last_post_ = evaluate_per_state(*bridger, eval_, cfg_.kl);
    Checkpoint c;
    c.queries = q;
    c.cumulative_cost = result_.cumulative_cost();
    c.pre = std::accumulate(eval_.pre.begin(), eval_.pre.end(), 0.0) / static_cast<double>(eval_.pre.size());
    c.post = std::accumulate(last_post_.begin(), last_post_.end(), 0.0) / static_cast<double>(last_post_.size());
    result_.checkpoints.push_back(c);
}

RunResult RunState::execute() {
    const auto t0 = std::chrono::steady_clock::now();
    cfg_.validate();
    if (grid_.empty()) throw DomainError("empty state grid");
    std::sort(grid_.begin(), grid_.end());
    if (std::adjacent_find(grid_.begin(), grid_.end()) != grid_.end()) {
        throw DomainError("state grid contains duplicates");
    }
    for (const auto& s : grid_) grid_cost_.push_back(state_cost(s, cfg_.cost));
    observed_.assign(grid_.size(), false);
    result_.method = cfg_.method;

    // evaluation states depend on the seed only, so every method sees the same ones
    {
        Rng rng(derive_seed({cfg_.seed, kEvalStream}));
        auto idx = sample_candidate_indices(std::vector<bool>(grid_.size(), false),
                                            cfg_.eval_state_count, rng);
        std::sort(idx.begin(), idx.end());
        for (auto i : idx) result_.eval_states.push_back(grid_[i]);
    }
    eval_ = make_evaluation_set(real_, sim_, result_.eval_states, cfg_.eval_samples,
                                derive_seed({cfg_.seed, kEvalStream, 1}), cfg_.kl);
    if (cfg_.method == Method::L2B) {
        const auto k = std::min(cfg_.alpha_eval_states, result_.eval_states.size());
        alpha_eval_ = make_evaluation_set(real_, sim_,
                                          std::span(result_.eval_states).first(k),
                                          cfg_.alpha_eval_samples,
                                          derive_seed({cfg_.seed, kAlphaStream}), cfg_.kl);
    }
    const std::uint64_t cand_stream = cfg_.method == Method::RandomBaseline ? 1 : 0;
    candidate_rng_.seed(derive_seed({cfg_.seed, kCandidateStream, cand_stream}));
    kernel_ = cfg_.kernel;
    alpha_ = cfg_.method == Method::L2B ? cfg_.alpha.alpha_min : 0.0;

    const auto checkpoints = checkpoint_counts(grid_.size(), cfg_.checkpoint_percent, cfg_.budget.batch_size);
    const auto levels = quantile_levels();
    const std::uint64_t query_seed = derive_seed({cfg_.seed, kQueryStream});
    double cumulative = 0.0;

    while (true) {
        if (cfg_.max_queries != 0 && observations_.size() >= cfg_.max_queries) {
            result_.stop = StopReason::MaxQueries;
            break;
        }
        std::size_t idx = 0;
        try {
            idx = pick_next();
        } catch (const ExhaustedSpace&) {
            result_.stop = StopReason::Exhausted;
            break;
        }
        const double c = grid_cost_[idx];
        if (cumulative + c > cfg_.budget.max_cumulative_cost) {
            result_.stop = StopReason::Budget;
            break;
        }
        const auto& s = grid_[idx];
        const auto real = real_.query(s, cfg_.samples_per_query, query_seed).collection;
        const auto sim = sim_.query(s, cfg_.samples_per_query, query_seed).collection;
        const double kl = kl_divergence(real, sim, cfg_.kl);
        cumulative += c;
        observed_[idx] = true;
        observations_.push_back({s, kl, c, observations_.size() + 1});
        for (const auto& [lv, r] : quantile_residuals(real, sim, levels)) residuals_.push_back({s, lv, r});
        result_.iterations.push_back({observations_.size(), s, kl, c, cumulative, alpha_});

        if (uses_bnn(cfg_.method)) {
            if (observations_.size() % cfg_.gp_refit_every == 0) {
                std::vector<NetworkState> st;
                Eigen::VectorXd y(static_cast<Eigen::Index>(observations_.size()));
                for (std::size_t i = 0; i < observations_.size(); ++i) {
                    st.push_back(observations_[i].state);
                    y(static_cast<Eigen::Index>(i)) = observations_[i].discrepancy;
                }
                kernel_ = fit_hyperparameters(normalized_matrix(st), y, cfg_.kernel.family, cfg_.gp_noise);
            }
            gp_ = gp_fit(observations_, kernel_, cfg_.gp_noise, cfg_.gp_standardize);
        }
        if (observations_.size() % cfg_.budget.batch_size == 0) bridging_stage();
        if (std::binary_search(checkpoints.begin(), checkpoints.end(), observations_.size())) checkpoint();
    }

    // A partial final batch still gets its bridging stage before the final evaluation.
    if (observations_.size() % cfg_.budget.batch_size != 0 && uses_bnn(cfg_.method)) train_agent();
    checkpoint();

    result_.pre_per_state = eval_.pre;
    result_.post_per_state = last_post_;
    result_.pre_global = result_.checkpoints.back().pre;
    result_.post_global = result_.checkpoints.back().post;
    result_.per_traffic = per_traffic_breakdown(result_.eval_states, result_.pre_per_state,
                                                result_.post_per_state);

    if (uses_bnn(cfg_.method) && cfg_.discrepancy_head_steps > 0 && !observations_.empty()) {
        // state -> KL regression head, used for reporting only
        std::vector<double> kls;
        std::vector<NetworkState> st;
        for (const auto& o : observations_) {
            kls.push_back(o.discrepancy);
            st.push_back(o.state);
        }
        const auto ds = TargetScaler::fit(kls, false);
        Eigen::VectorXd y(static_cast<Eigen::Index>(kls.size()));
        for (std::size_t i = 0; i < kls.size(); ++i) y(static_cast<Eigen::Index>(i)) = ds.transform(kls[i]);
        TrainConfig tc = cfg_.train;
        tc.seed = derive_seed({cfg_.seed, kTrainStream, 2});
        BnnTrainer head(bnn_init(BnnArchitecture::discrepancy_regressor(), tc.seed), tc);
        const std::size_t n = kls.size();
        const std::size_t bs = std::min(tc.batch_size, n);
        const std::size_t batches = (n + bs - 1) / bs;
        head.train(normalized_matrix(st), y, std::max<std::size_t>(1, cfg_.discrepancy_head_steps / batches));
        for (std::size_t i = 0; i < result_.eval_states.size(); ++i) {
            result_.predicted_discrepancy.push_back(
                predict_discrepancy(head.params(), ds, result_.eval_states[i],
                                    derive_seed({cfg_.seed, kTrainStream, 3, i}))
                    .first);
        }
    }
    result_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result_;
}

}  // namespace

RunResult run(const RunConfig& config, const Environment& real_env, const Environment& sim_env,
              std::vector<NetworkState> grid) {
    RunState state(config, real_env, sim_env, std::move(grid));
    return state.execute();
}

RunResult run(const RunConfig& config, const Environment& real_env, const Environment& sim_env) {
    config.space.validate();
    return run(config, real_env, sim_env, enumerate_state_grid(config.space));
}

}  // namespace twinbridge
