#include "twinbridge/agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "twinbridge/errors.hpp"

namespace twinbridge {

std::vector<std::size_t> BnnArchitecture::widths() const {
    std::vector<std::size_t> w{input_dim};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(output_dim);
    return w;
}

std::size_t BnnArchitecture::parameter_count() const {
    const auto w = widths();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += w[l] * w[l + 1] + w[l + 1];
    return n;
}

void BnnArchitecture::validate() const {
    if (input_dim == 0 || output_dim == 0) throw DomainError("layer widths must be positive");
    for (auto h : hidden) {
        if (h == 0) throw DomainError("layer widths must be positive");
    }
}

std::size_t VariationalParams::layer_offset(std::size_t layer) const {
    const auto w = arch.widths();
    if (layer + 1 >= w.size()) throw DomainError("layer index out of range");
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += w[l] * w[l + 1] + w[l + 1];
    return off;
}

double softplus(double x) noexcept {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct LayerShape {
    Eigen::Index in;
    Eigen::Index out;
    Eigen::Index offset;  // weights start; biases follow at offset + in*out
};

std::vector<LayerShape> shapes(const BnnArchitecture& arch) {
    const auto w = arch.widths();
    std::vector<LayerShape> out;
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const auto a = static_cast<Eigen::Index>(w[l]);
        const auto b = static_cast<Eigen::Index>(w[l + 1]);
        out.push_back({a, b, off});
        off += a * b + b;
    }
    return out;
}

// The [out][in] row-major weight block is exactly a column-major (in x out)
// matrix, i.e. W^T, which is what a row-batch forward pass multiplies by.
ConstMap weight_t(const Eigen::VectorXd& v, const LayerShape& s) {
    return ConstMap(v.data() + s.offset, s.in, s.out);
}
ConstVecMap bias(const Eigen::VectorXd& v, const LayerShape& s) {
    return ConstVecMap(v.data() + s.offset + s.in * s.out, s.out);
}

Eigen::VectorXd softplus_vec(const Eigen::VectorXd& rho) {
    return rho.unaryExpr([](double r) { return softplus(r); });
}

void check_input(const VariationalParams& p, Eigen::Index cols) {
    if (cols != static_cast<Eigen::Index>(p.arch.input_dim)) {
        throw DomainError("input width does not match the architecture");
    }
}

/// Sampled weights w = mu + sigma * eps, same layout as the params.
Eigen::VectorXd sampled_weights(const VariationalParams& p, const Eigen::VectorXd& noise) {
    if (noise.size() != p.mu.size()) throw DomainError("weight noise size mismatch");
    return p.mu + softplus_vec(p.rho).cwiseProduct(noise);
}

/// Forward pass on explicit weights, keeping every layer's output.
Eigen::VectorXd forward(const std::vector<LayerShape>& layers, const Eigen::VectorXd& w,
                        const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>* acts) {
    Eigen::MatrixXd h = x;
    if (acts) acts->assign(1, x);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = h * weight_t(w, layers[l]);
        z.rowwise() += bias(w, layers[l]).transpose();
        if (l + 1 < layers.size()) z = z.array().tanh();
        h = std::move(z);
        if (acts) acts->push_back(h);
    }
    return h.col(0);
}

}  // namespace

VariationalParams bnn_init(const BnnArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    VariationalParams p;
    p.arch = arch;
    const auto n = static_cast<Eigen::Index>(arch.parameter_count());
    p.mu = Eigen::VectorXd::Zero(n);
    p.rho = Eigen::VectorXd::Constant(n, -5.0);
    Rng rng(derive_seed({seed, 0x62'6e'6e}));
    NormalSampler normal;
    for (const auto& s : shapes(arch)) {
        const double sd = 1.0 / std::sqrt(static_cast<double>(s.in));
        for (Eigen::Index i = 0; i < s.in * s.out; ++i) p.mu(s.offset + i) = sd * normal(rng);
    }
    return p;
}

Eigen::VectorXd sample_weight_noise(std::size_t count, Rng& rng) {
    NormalSampler normal;
    Eigen::VectorXd e(static_cast<Eigen::Index>(count));
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
    return e;
}

Eigen::VectorXd bnn_forward_batch(const VariationalParams& params, const Eigen::MatrixXd& inputs,
                                  const Eigen::VectorXd& weight_noise) {
    check_input(params, inputs.cols());
    return forward(shapes(params.arch), sampled_weights(params, weight_noise), inputs, nullptr);
}

double bnn_forward(const VariationalParams& params, std::span<const double> input,
                   const Eigen::VectorXd& weight_noise) {
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = input[i];
    return bnn_forward_batch(params, x, weight_noise)(0);
}

double gaussian_kl(double mu_q, double sigma_q, double mu_p, double sigma_p) {
    if (!(sigma_q > 0.0) || !(sigma_p > 0.0)) throw DomainError("Gaussian std must be > 0");
    const double d = mu_q - mu_p;
    return std::log(sigma_p / sigma_q) + (sigma_q * sigma_q + d * d) / (2.0 * sigma_p * sigma_p) - 0.5;
}

double kl_to_prior(const VariationalParams& params, double prior_std) {
    if (!(prior_std > 0.0)) throw DomainError("prior std must be > 0");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < params.mu.size(); ++i) {
        kl += gaussian_kl(params.mu(i), softplus(params.rho(i)), 0.0, prior_std);
    }
    return std::max(kl, 0.0);
}

double elbo_loss(const VariationalParams& params, const Eigen::MatrixXd& inputs,
                 const Eigen::VectorXd& targets, std::span<const Eigen::VectorXd> weight_noise,
                 double kl_weight, double prior_std, double noise_std, ElboGradient* grad) {
    if (inputs.rows() == 0) throw DomainError("empty batch");
    if (inputs.rows() != targets.size()) throw DomainError("inputs and targets differ in length");
    if (weight_noise.empty()) throw DomainError("need at least one noise draw");
    if (!(noise_std > 0.0) || !(prior_std > 0.0)) throw DomainError("std parameters must be > 0");
    check_input(params, inputs.cols());

    const auto layers = shapes(params.arch);
    const Eigen::VectorXd sigma = softplus_vec(params.rho);
    const double s2 = noise_std * noise_std;
    const double p2 = prior_std * prior_std;
    const double m = static_cast<double>(weight_noise.size());
    const double nll_const = std::log(noise_std) + 0.5 * std::log(2.0 * std::numbers::pi);

    if (grad) {
        grad->mu = Eigen::VectorXd::Zero(params.mu.size());
        grad->rho = Eigen::VectorXd::Zero(params.mu.size());
    }

    double nll = 0.0;
    std::vector<Eigen::MatrixXd> acts;
    Eigen::VectorXd dw(params.mu.size());
    for (const auto& eps : weight_noise) {
        if (eps.size() != params.mu.size()) throw DomainError("weight noise size mismatch");
        const Eigen::VectorXd w = params.mu + sigma.cwiseProduct(eps);
        const Eigen::VectorXd out = forward(layers, w, inputs, grad ? &acts : nullptr);
        const Eigen::VectorXd r = out - targets;
        nll += (0.5 * r.squaredNorm() / s2 + nll_const * static_cast<double>(r.size())) / m;
        if (!grad) continue;

        // backward through the sampled network; dz holds dL/d(pre-activation)
        Eigen::MatrixXd dz = r / (s2 * m);
        for (std::size_t l = layers.size(); l-- > 0;) {
            const auto& s = layers[l];
            const Eigen::MatrixXd& h_in = acts[l];
            Eigen::Map<Eigen::MatrixXd>(dw.data() + s.offset, s.in, s.out) = h_in.transpose() * dz;
            Eigen::Map<Eigen::VectorXd>(dw.data() + s.offset + s.in * s.out, s.out) =
                dz.colwise().sum().transpose();
            if (l > 0) {
                Eigen::MatrixXd dh = dz * weight_t(w, s).transpose();
                dz = dh.array() * (1.0 - h_in.array().square());
            }
        }
        grad->mu += dw;
        grad->rho.array() += dw.array() * eps.array();
    }

    double kl = 0.0;
    for (Eigen::Index i = 0; i < params.mu.size(); ++i) {
        kl += gaussian_kl(params.mu(i), sigma(i), 0.0, prior_std);
    }
    if (grad) {
        // dw/dmu = 1, dw/drho = eps * sigmoid(rho); KL terms in closed form
        const Eigen::ArrayXd sig = params.rho.unaryExpr([](double x) { return sigmoid(x); }).array();
        grad->mu.array() += kl_weight * params.mu.array() / p2;
        grad->rho.array() = grad->rho.array() * sig +
                            kl_weight * (sigma.array() / p2 - 1.0 / sigma.array()) * sig;
    }
    return kl_weight * kl + nll;
}

void TrainConfig::validate() const {
    if (!(prior_std > 0.0)) throw DomainError("prior std must be > 0");
    if (!(learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw DomainError("lr decay must lie in (0, 1]");
    if (decay_step == 0) throw DomainError("decay step must be >= 1");
    if (epochs == 0) throw DomainError("epochs must be >= 1");
    if (mc_samples == 0) throw DomainError("mc samples must be >= 1");
    if (!(noise_std > 0.0)) throw DomainError("likelihood noise std must be > 0");
    if (batch_size == 0) throw DomainError("batch size must be >= 1");
}

TargetScaler TargetScaler::fit(std::span<const double> values, bool signed_log) {
    if (values.empty()) throw DomainError("cannot fit a scaler on no values");
    TargetScaler s;
    s.signed_log = signed_log;
    s.mean = 0.0;
    s.scale = 1.0;
    double sum = 0.0;
    for (double v : values) sum += s.transform(v);
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (s.transform(v) - mean) * (s.transform(v) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size()));
    s.mean = mean;
    s.scale = sd > 1e-12 ? sd : 1.0;
    return s;
}

double TargetScaler::transform(double x) const noexcept {
    const double t = signed_log ? std::copysign(std::log1p(std::abs(x)), x) : x;
    return (t - mean) / scale;
}

double TargetScaler::inverse(double y) const noexcept {
    const double t = y * scale + mean;
    return signed_log ? std::copysign(std::expm1(std::abs(t)), t) : t;
}

Eigen::MatrixXd agent_inputs(std::span<const ResidualSample> data) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(kStateDims + 1));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = normalize(data[i].state);
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < kStateDims; ++j) x(r, static_cast<Eigen::Index>(j)) = z[j];
        x(r, static_cast<Eigen::Index>(kStateDims)) = data[i].level;
    }
    return x;
}

BnnTrainer::BnnTrainer(VariationalParams params, TrainConfig config)
    : params_(std::move(params)), config_(config), rng_(derive_seed({config.seed, 0x74'72'6e})) {
    config_.validate();
    const auto n = params_.mu.size();
    m_mu_ = m_rho_ = v_mu_ = v_rho_ = Eigen::VectorXd::Zero(n);
}

double BnnTrainer::current_learning_rate() const {
    const auto k = static_cast<double>(epoch_ / config_.decay_step);
    return config_.learning_rate * std::pow(config_.lr_decay, k);
}

void BnnTrainer::step(const ElboGradient& g, double lr) {
    ++steps_;
    if (config_.optimizer == OptimizerKind::Adam) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
        auto update = [&](Eigen::VectorXd& p, Eigen::VectorXd& m, Eigen::VectorXd& v,
                          const Eigen::VectorXd& gr) {
            m = b1 * m + (1.0 - b1) * gr;
            v = b2 * v + (1.0 - b2) * gr.cwiseProduct(gr);
            p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
        };
        update(params_.mu, m_mu_, v_mu_, g.mu);
        update(params_.rho, m_rho_, v_rho_, g.rho);
    } else {
        // m_ holds the squared-gradient average, v_ the squared-update average
        constexpr double r = 0.9, eps = 1e-6;
        auto update = [&](Eigen::VectorXd& p, Eigen::VectorXd& sq, Eigen::VectorXd& acc,
                          const Eigen::VectorXd& gr) {
            sq = r * sq + (1.0 - r) * gr.cwiseProduct(gr);
            const Eigen::ArrayXd delta =
                (acc.array() + eps).sqrt() / (sq.array() + eps).sqrt() * gr.array();
            acc = r * acc.array() + (1.0 - r) * delta.square();
            p.array() -= lr * delta;
        };
        update(params_.mu, m_mu_, v_mu_, g.mu);
        update(params_.rho, m_rho_, v_rho_, g.rho);
    }
}

std::vector<double> BnnTrainer::train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                      std::size_t epochs) {
    if (inputs.rows() == 0) throw DomainError("training set is empty");
    if (inputs.rows() != targets.size()) throw DomainError("inputs and targets differ in length");
    check_input(params_, inputs.cols());

    const auto n = static_cast<std::size_t>(inputs.rows());
    const std::size_t bs = std::min(config_.batch_size, n);
    const std::size_t batches = (n + bs - 1) / bs;
    const double kl_weight = 1.0 / static_cast<double>(batches);

    std::vector<std::size_t> order(n);
    std::vector<Eigen::VectorXd> noise(config_.mc_samples);
    std::vector<double> history;
    ElboGradient g;
    Eigen::MatrixXd xb;
    Eigen::VectorXd yb;
    for (std::size_t e = 0; e < epochs; ++e) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng_, i)]);
        const double lr = current_learning_rate();
        double total = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = b * bs;
            const std::size_t hi = std::min(lo + bs, n);
            const auto rows = static_cast<Eigen::Index>(hi - lo);
            xb.resize(rows, inputs.cols());
            yb.resize(rows);
            for (std::size_t i = lo; i < hi; ++i) {
                xb.row(static_cast<Eigen::Index>(i - lo)) = inputs.row(static_cast<Eigen::Index>(order[i]));
                yb(static_cast<Eigen::Index>(i - lo)) = targets(static_cast<Eigen::Index>(order[i]));
            }
            for (auto& eps : noise) eps = sample_weight_noise(params_.size(), rng_);
            const double loss = elbo_loss(params_, xb, yb, noise, kl_weight, config_.prior_std,
                                          config_.noise_std, &g);
            if (!std::isfinite(loss) || !g.mu.allFinite() || !g.rho.allFinite()) {
                throw TrainingError(epoch_, "non-finite loss or gradient");
            }
            if (steps_ == 0) reference_loss_ = std::abs(loss);
            if (loss > 1e3 * std::max(reference_loss_, 1e-12)) {
                throw TrainingError(epoch_, "loss diverged (" + std::to_string(loss) + " vs initial " +
                                                std::to_string(reference_loss_) + ")");
            }
            step(g, lr);
            total += loss;
        }
        history.push_back(total / static_cast<double>(batches));
        ++epoch_;
    }
    return history;
}

TrainedAgent bnn_train(const VariationalParams& init, std::span<const ResidualSample> data,
                       const TrainConfig& config) {
    if (data.empty()) throw DomainError("training set is empty");
    std::vector<double> raw;
    raw.reserve(data.size());
    for (const auto& d : data) raw.push_back(d.residual);
    TrainedAgent out;
    out.scaler = TargetScaler::fit(raw, true);
    Eigen::VectorXd y(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) y(static_cast<Eigen::Index>(i)) = out.scaler.transform(raw[i]);
    BnnTrainer trainer(init, config);
    out.loss_history = trainer.train(agent_inputs(data), y, config.epochs);
    out.params = trainer.params();
    return out;
}

namespace {

/// Local-reparameterisation forward: every row gets its own weight draw.
Eigen::VectorXd forward_lrt(const VariationalParams& p, const Eigen::MatrixXd& x, Rng& rng) {
    const auto layers = shapes(p.arch);
    const Eigen::VectorXd var = softplus_vec(p.rho).array().square();
    NormalSampler normal;
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd mean = h * weight_t(p.mu, layers[l]);
        mean.rowwise() += bias(p.mu, layers[l]).transpose();
        Eigen::MatrixXd v = h.array().square().matrix() * weight_t(var, layers[l]);
        v.rowwise() += bias(var, layers[l]).transpose();
        for (Eigen::Index c = 0; c < mean.cols(); ++c) {
            for (Eigen::Index r = 0; r < mean.rows(); ++r) mean(r, c) += std::sqrt(v(r, c)) * normal(rng);
        }
        h = l + 1 < layers.size() ? Eigen::MatrixXd(mean.array().tanh()) : std::move(mean);
    }
    return h.col(0);
}

}  // namespace

std::vector<double> predict_offsets(const VariationalParams& params, const TargetScaler& scaler,
                                    const NetworkState& state, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("need at least one offset");
    check_input(params, static_cast<Eigen::Index>(kStateDims + 1));
    Rng rng(seed);
    const auto z = normalize(state);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kStateDims + 1));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < kStateDims; ++j) x(r, static_cast<Eigen::Index>(j)) = z[j];
        x(r, static_cast<Eigen::Index>(kStateDims)) = uniform01(rng);
    }
    const Eigen::VectorXd y = forward_lrt(params, x, rng);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = scaler.inverse(y(static_cast<Eigen::Index>(i)));
    return out;
}

std::pair<double, double> predict_discrepancy(const VariationalParams& params,
                                              const TargetScaler& scaler,
                                              const NetworkState& state, std::uint64_t seed,
                                              std::size_t passes) {
    if (passes == 0) throw DomainError("need at least one pass");
    check_input(params, static_cast<Eigen::Index>(kStateDims));
    Rng rng(seed);
    const auto z = normalize(state);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(passes), static_cast<Eigen::Index>(kStateDims));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < kStateDims; ++j) x(r, static_cast<Eigen::Index>(j)) = z[j];
    }
    const Eigen::VectorXd y = forward_lrt(params, x, rng);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) mean += scaler.inverse(y(i));
    mean /= static_cast<double>(passes);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ss += std::pow(scaler.inverse(y(i)) - mean, 2);
    return {mean, std::sqrt(ss / static_cast<double>(passes))};
}

namespace {

constexpr char kMagic[4] = {'T', 'W', 'B', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::ostream& os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw DomainError("truncated parameter file");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const VariationalParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    const auto w = params.arch.widths();
    put_u32(os, static_cast<std::uint32_t>(w.size()));
    for (auto v : w) put_u32(os, static_cast<std::uint32_t>(v));
    for (Eigen::Index i = 0; i < params.mu.size(); ++i) put_f64(os, params.mu(i));
    for (Eigen::Index i = 0; i < params.rho.size(); ++i) put_f64(os, params.rho(i));
    if (!os) throw Error("write failed for " + path.string());
}

VariationalParams load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
        throw DomainError("not a TWB1 parameter file");
    }
    const auto count = get_le(is, 4);
    if (count < 2 || count > 64) throw DomainError("implausible layer count in parameter file");
    std::vector<std::size_t> w(count);
    for (auto& v : w) v = get_le(is, 4);
    VariationalParams p;
    p.arch.input_dim = w.front();
    p.arch.output_dim = w.back();
    p.arch.hidden.assign(w.begin() + 1, w.end() - 1);
    p.arch.validate();
    const auto n = static_cast<Eigen::Index>(p.arch.parameter_count());
    p.mu.resize(n);
    p.rho.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) p.mu(i) = std::bit_cast<double>(get_le(is, 8));
    for (Eigen::Index i = 0; i < n; ++i) p.rho(i) = std::bit_cast<double>(get_le(is, 8));
    if (is.peek() != std::char_traits<char>::eof()) throw DomainError("trailing bytes in parameter file");
    return p;
}

}  // namespace twinbridge
