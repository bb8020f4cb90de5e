#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gp_oracles.hpp"
#include "twinbridge/bo.hpp"
#include "twinbridge/errors.hpp"

using namespace twinbridge;
using oracle::DenseGp;
using oracle::ei_oracle;
using oracle::kernel_oracle;

namespace {

std::vector<std::vector<double>> random_points(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(kStateDims));
    for (auto& row : out)
        for (auto& v : row) v = u(rng);
    return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<NetworkState> grid_states(std::size_t n, unsigned seed) {
    auto all = enumerate_state_grid(StateSpace::default_grid());
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(n);
    return all;
}

GPModel random_model(unsigned seed, std::size_t n = 20) {
    const auto states = grid_states(n, seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.5, 5.0);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < states.size(); ++i) obs.push_back({states[i], u(rng), 1.0, i + 1});
    return gp_fit(obs, KernelConfig{}, 1e-4);
}

}  // namespace

TEST_CASE("kernel values") {
    const std::vector<double> a(kStateDims, 0.2);
    for (auto fam : {KernelFamily::Rbf, KernelFamily::Matern25}) {
        const KernelConfig k{fam, 2.5, 0.4};
        CHECK(kernel_eval(k, a, a) == doctest::Approx(2.5));
    }
    auto b = a;
    b[3] += 0.4;
    CHECK(kernel_eval({KernelFamily::Rbf, 1.0, 0.4}, a, b) == doctest::Approx(std::exp(-0.5)));
    const double matern_at_l = (1 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0));
    CHECK(matern_at_l == doctest::Approx(0.52399).epsilon(1e-5));
    CHECK(kernel_eval({KernelFamily::Matern25, 1.0, 0.4}, a, b) == doctest::Approx(matern_at_l).epsilon(1e-12));

    const auto pts = random_points(10, 3);
    for (auto fam : {KernelFamily::Rbf, KernelFamily::Matern25}) {
        const KernelConfig k{fam, 1.7, 0.3};
        const auto km = kernel_matrix(k, to_matrix(pts), to_matrix(pts));
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j)
                CHECK(km(i, j) == doctest::Approx(kernel_oracle(k, pts[i], pts[j])).epsilon(1e-12));
    }
    CHECK_THROWS_AS((KernelConfig{KernelFamily::Rbf, 0.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((KernelConfig{KernelFamily::Rbf, 1.0, -1.0}.validate()), DomainError);
}

TEST_CASE("GP posterior agrees with the dense-inverse oracle") {
    for (bool standardize : {true, false}) {
        for (std::size_t n : {1u, 5u, 20u, 50u}) {
            for (auto fam : {KernelFamily::Rbf, KernelFamily::Matern25}) {
                const KernelConfig k{fam, 1.3, 0.35};
                const auto x = random_points(n, static_cast<unsigned>(n) * 7 + standardize);
                std::vector<double> y;
                std::mt19937_64 rng(n);
                std::normal_distribution<double> nd(2.0, 1.5);
                for (std::size_t i = 0; i < n; ++i) y.push_back(nd(rng));
                const auto m = gp_fit(to_matrix(x), to_vector(y), k, 1e-4, standardize);
                const DenseGp oracle(k, x, y, 1e-4, standardize);

                const Eigen::MatrixXd rec = m.chol * m.chol.transpose();
                Eigen::MatrixXd kn = kernel_matrix(k, to_matrix(x), to_matrix(x));
                kn.diagonal().array() += 1e-4;
                CHECK((rec - kn).norm() / kn.norm() < 1e-8);

                auto probes = random_points(10, 99);
                probes.push_back(x[0]);
                for (const auto& q : probes) {
                    const auto p = gp_posterior(m, q);
                    const auto [om, ov] = oracle.predict(q);
                    CHECK(std::abs(p.mean - om) < 1e-8);
                    CHECK(std::abs(p.variance - ov) < 1e-8);
                    CHECK(p.variance >= 0.0);
                }
            }
        }
    }
}

TEST_CASE("GP interpolation examples") {
    const auto x = random_points(1, 5);
    const auto one = gp_fit(to_matrix(x), to_vector({3.7}), KernelConfig{}, 1e-8);
    CHECK(std::abs(gp_posterior(one, x[0]).mean - 3.7) < 1e-6);
    CHECK(gp_posterior(one, x[0]).variance <= 1e-6);

    const auto xs = random_points(6, 8);
    const auto flat = gp_fit(to_matrix(xs), to_vector(std::vector<double>(6, 2.25)), KernelConfig{}, 1e-8);
    for (const auto& q : xs) CHECK(std::abs(gp_posterior(flat, q).mean - 2.25) < 1e-6);

    const auto raw = gp_fit(to_matrix(xs), to_vector({1, 2, 3, 1, 2, 3}), {KernelFamily::Rbf, 1.5, 0.05}, 1e-8, false);
    const std::vector<double> far(kStateDims, 25.0);
    CHECK(std::abs(gp_posterior(raw, far).mean) < 1e-9);
    CHECK(gp_posterior(raw, far).variance == doctest::Approx(1.5));
}

TEST_CASE("GP input errors and jitter") {
    CHECK_THROWS_AS((void)gp_fit(Eigen::MatrixXd(0, 7), Eigen::VectorXd(0), KernelConfig{}, 1e-4), DomainError);
    auto x = random_points(3, 2);
    x[2] = x[0];
    CHECK_THROWS_AS((void)gp_fit(to_matrix(x), to_vector({1, 2, 3}), KernelConfig{}, 1e-4), DomainError);
    CHECK_THROWS_AS((void)gp_fit(to_matrix(random_points(2, 2)), to_vector({1, NAN}), KernelConfig{}, 1e-4), DomainError);

    // Nearly coincident points under a very smooth kernel: singular without jitter.
    auto near = random_points(4, 3);
    for (std::size_t i = 1; i < near.size(); ++i) near[i] = near[0], near[i][0] += 1e-9 * static_cast<double>(i);
    const KernelConfig smooth{KernelFamily::Rbf, 1.0, 5.0};
    const auto m = gp_fit(to_matrix(near), to_vector({1, 1.5, 2, 2.5}), smooth, 1e-300);
    CHECK(m.jitter >= 1e-8);
    CHECK(m.jitter <= 1e-4);
    const DenseGp oracle(smooth, near, {1, 1.5, 2, 2.5}, 1e-300 + m.jitter, true);
    const auto q = random_points(1, 77)[0];
    CHECK(std::abs(gp_posterior(m, q).mean - oracle.predict(q).first) < 1e-6);
}

TEST_CASE("hyperparameter grid search picks a grid point with the best likelihood") {
    const auto x = random_points(25, 4);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(std::sin(6 * r[0]) + r[1]);
    const auto k = fit_hyperparameters(to_matrix(x), to_vector(y), KernelFamily::Matern25, 1e-4);
    const double chosen = gp_fit(to_matrix(x), to_vector(y), k, 1e-4).log_marginal_likelihood;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double s2 = 0.1 * std::pow(100.0, i / 7.0);
            const double l = 0.05 * std::pow(40.0, j / 7.0);
            CHECK(gp_fit(to_matrix(x), to_vector(y), {KernelFamily::Matern25, s2, l}, 1e-4).log_marginal_likelihood <=
                  chosen + 1e-9);
        }
    }
}

TEST_CASE("expected improvement against Monte Carlo") {
    CHECK(expected_improvement(1.0, 0.0, 2.0) == 0.0);
    CHECK(expected_improvement(2.0, 0.0, 2.0) == 0.0);
    CHECK(expected_improvement(3.5, 0.0, 2.0) == doctest::Approx(1.5));
    CHECK(std::abs(expected_improvement(0.0, 1.0, 0.0) - 1.0 / std::sqrt(2 * std::numbers::pi)) < 1e-12);
    CHECK(std::abs(expected_improvement(0.0, 1.0, 0.0) - ei_oracle(0.0, 1.0, 0.0)) < 1e-3);
    CHECK(std::abs(expected_improvement(3.0, 1.0, 0.0) - ei_oracle(3.0, 1.0, 0.0)) < 1e-3);
    CHECK(expected_improvement(3.0, 1.0, 0.0) == doctest::Approx(3.0004).epsilon(1e-4));

    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
        const double mean = -3.0 + 0.3 * i;
        const double ei = expected_improvement(mean, 0.7, 0.5);
        CHECK(ei >= 0.0);
        CHECK(ei >= prev);
        CHECK(std::abs(ei - ei_oracle(mean, 0.7, 0.5)) < 1e-3);
        prev = ei;
    }
}

TEST_CASE("cost-aware EI") {
    CHECK(cost_aware_ei(2.0, 4.0, 0.5) == doctest::Approx(1.0));
    CHECK(cost_aware_ei(1.0, 1.0, 0.3) == 1.0);
    for (double c : {0.2, 1.0, 7.0}) CHECK(cost_aware_ei(0.8, c, 0.0) == 0.8);
    CHECK_THROWS_AS((void)cost_aware_ei(1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS((void)cost_aware_ei(1.0, -1.0, 0.5), DomainError);
}

TEST_CASE("alpha controller") {
    const AlphaControllerConfig cfg;
    CHECK(update_alpha(std::vector<double>{}, cfg) == cfg.alpha_min);
    CHECK(update_alpha(std::vector<double>(9, 1.0), cfg) == cfg.alpha_min);
    CHECK(update_alpha(std::vector<double>(10, 1.0), cfg) == cfg.alpha_min);

    std::vector<double> halving(5, 2.0);
    halving.insert(halving.end(), 5, 1.0);
    CHECK(update_alpha(halving, cfg) == cfg.alpha_max);

    // r = 0.05 -> halfway between the bounds.
    std::vector<double> slow(5, 1.0);
    slow.insert(slow.end(), 5, 0.95);
    CHECK(update_alpha(slow, cfg) == doctest::Approx(0.75));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> h(5 + t % 20);
        for (auto& v : h) v = u(rng);
        const double a = update_alpha(h, cfg);
        CHECK(a >= cfg.alpha_min);
        CHECK(a <= cfg.alpha_max);
    }
    AlphaControllerConfig bad;
    bad.alpha_min = 0.9;
    bad.alpha_max = 0.2;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("selection rules") {
    const GPModel empty;
    const std::vector<NetworkState> two{{10, 10, 1.0, 1.0, 5, 5, 4}, {0, 0, 1.0, 1.0, 5, 5, 1}};
    CHECK(select_next_state(empty, std::span(two).first(1), std::vector<double>{3.0}, 1.0) == two[0]);
    CHECK(select_next_state(empty, two, std::vector<double>{4.0, 1.0}, 1.0) == two[1]);
    CHECK(select_next_state(empty, two, std::vector<double>{1.0, 4.0}, 1.0) == two[0]);
    // Equal score and cost: lexicographically smaller state wins.
    CHECK(select_next_state(empty, two, std::vector<double>{2.0, 2.0}, 1.0) == two[1]);
    CHECK_THROWS_AS((void)select_next_state(empty, std::vector<NetworkState>{}, std::vector<double>{}, 1.0),
                    ExhaustedSpace);
}

TEST_CASE("selection is order invariant and reduces to EI at alpha 0") {
    const CostModelConfig cost;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const auto model = random_model(seed);
        auto cands = grid_states(60, seed + 1000);
        std::vector<double> costs;
        for (const auto& s : cands) costs.push_back(state_cost(s, cost));

        for (double alpha : {0.0, 0.5, 1.0}) {
            const auto pick = select_next_state(model, cands, costs, alpha);
            auto perm = cands;
            std::mt19937_64 rng(seed);
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<double> pcost;
            for (const auto& s : perm) pcost.push_back(state_cost(s, cost));
            CHECK(select_next_state(model, perm, pcost, alpha) == pick);
        }

        std::size_t arg = 0;
        double best_ei = -1.0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const auto p = gp_posterior(model, cands[i]);
            const double ei = expected_improvement(p.mean, std::sqrt(p.variance), model.best_target());
            if (ei > best_ei) best_ei = ei, arg = i;
        }
        CHECK(select_next_state(model, cands, costs, 0.0) == cands[arg]);
        CHECK(select_next_state(model, cands, std::vector<double>(cands.size(), 2.0), 0.0) == cands[arg]);
        CHECK(select_next_state(model, cands, std::vector<double>(cands.size(), 2.0), 1.0) == cands[arg]);
    }
}
