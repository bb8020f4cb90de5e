#include <doctest.h>

#include <algorithm>
#include <set>

#include "twinbridge/core.hpp"
#include "twinbridge/errors.hpp"

using namespace twinbridge;

namespace {

NetworkState state(int u, int d, int f, int mu = 10, int md = 14, double c = 1.0, double r = 1.0) {
    return {u, d, c, r, mu, md, f};
}

StateSpace single_point_space() {
    StateSpace s;
    s.axes = {{{10, 10, 1}, {20, 20, 1}, {0.5, 0.5, 0.5}, {1, 1, 1}, {5, 5, 1}, {7, 7, 1}, {2, 2, 1}}};
    return s;
}

StateSpace ten_state_space() {
    auto s = single_point_space();
    s.axes[0] = {0, 9, 1};
    return s;
}

}  // namespace

TEST_CASE("state cost follows the linear cost model") {
    const CostModelConfig c;
    CHECK(state_cost(state(10, 10, 2), c) == doctest::Approx(2.2));
    CHECK(state_cost(state(0, 0, 1), c) == doctest::Approx(1.5));
    CHECK(state_cost(state(50, 50, 4), c) == doctest::Approx(4.0));
    CHECK_THROWS_AS((void)state_cost(state(51, 0, 1), c), DomainError);
    CHECK_THROWS_AS((void)state_cost(state(0, 0, 0), c), DomainError);
}

TEST_CASE("cost config validation") {
    CHECK_NOTHROW(CostModelConfig{}.validate());
    CHECK_THROWS_AS((CostModelConfig{0, 0, 0}.validate()), DomainError);
    CHECK_THROWS_AS((CostModelConfig{-1, 0.5, 1}.validate()), DomainError);
}

TEST_CASE("state cost is monotone in traffic and bandwidth") {
    const CostModelConfig c{0.3, 0.7, 2.0};
    const auto grid = enumerate_state_grid(StateSpace::default_grid());
    for (const auto& s : grid) {
        auto up = s;
        if (up.traffic < 4) {
            ++up.traffic;
            CHECK(state_cost(up, c) >= state_cost(s, c));
        }
        up = s;
        if (up.uplink_bw < 50) {
            ++up.uplink_bw;
            CHECK(state_cost(up, c) >= state_cost(s, c));
        }
        up = s;
        if (up.downlink_bw < 50) {
            ++up.downlink_bw;
            CHECK(state_cost(up, c) >= state_cost(s, c));
        }
    }
}

TEST_CASE("state validation") {
    CHECK(is_valid_state(state(0, 50, 4, 20, 28)));
    CHECK_FALSE(is_valid_state(state(0, 0, 5)));
    CHECK_FALSE(is_valid_state(state(0, 0, 1, 21)));
    CHECK_FALSE(is_valid_state(state(0, 0, 1, 10, 29)));
    CHECK_FALSE(is_valid_state(state(0, 0, 1, 10, 14, 1.5)));
    CHECK_THROWS_AS((void)state_from_values({1.5, 0, 1, 1, 10, 14, 1}), DomainError);
    const auto s = state_from_values({10, 20, 0.5, 1, 10, 14, 3});
    CHECK(s == state(10, 20, 3, 10, 14, 0.5, 1.0));
}

TEST_CASE("grid enumeration") {
    SUBCASE("one point per dimension") {
        const auto g = enumerate_state_grid(single_point_space());
        REQUIRE(g.size() == 1);
        CHECK(g.front() == state(10, 20, 2, 5, 7, 0.5, 1.0));
    }
    SUBCASE("default grid has 2304 states") {
        const auto space = StateSpace::default_grid();
        std::size_t product = 1;
        for (const auto& a : space.axes) product *= a.count();
        CHECK(product == 6 * 6 * 2 * 2 * 2 * 2 * 4);
        const auto g = enumerate_state_grid(space);
        CHECK(g.size() == 2304);
        CHECK(space.cardinality() == 2304);
    }
    SUBCASE("halving the points of one axis halves the grid") {
        auto space = StateSpace::default_grid();
        space.axes[0] = {0, 50, 20};  // 0, 20, 40
        CHECK(enumerate_state_grid(space).size() == 1152);
    }
    SUBCASE("unique, valid, lexicographic") {
        const auto g = enumerate_state_grid(StateSpace::default_grid());
        CHECK(std::is_sorted(g.begin(), g.end()));
        CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
        for (const auto& s : g) CHECK(is_valid_state(s));
        CHECK(g.front() == state(0, 0, 1, 10, 14, 0.5, 0.5));
        CHECK(g[1] == state(0, 0, 2, 10, 14, 0.5, 0.5));
    }
    SUBCASE("size cap") {
        auto space = StateSpace::default_grid();
        space.max_cardinality = 1000;
        CHECK_THROWS_AS((void)enumerate_state_grid(space), SizeError);
    }
    SUBCASE("invalid axes") {
        auto space = StateSpace::default_grid();
        space.axes[2].stride = 0;
        CHECK_THROWS_AS(space.validate(), DomainError);
        space = StateSpace::default_grid();
        space.axes[0] = {10, 0, 10};
        CHECK_THROWS_AS(space.validate(), DomainError);
        space = StateSpace::default_grid();
        space.axes[6] = {1, 5, 1};
        CHECK_THROWS_AS(space.validate(), DomainError);
    }
}

TEST_CASE("normalisation round trip on the grid") {
    for (const auto& s : enumerate_state_grid(StateSpace::default_grid())) {
        const auto z = normalize(s);
        for (double v : z) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(denormalize(z) == s);
    }
    const auto z = normalize(state(50, 0, 4, 20, 0, 1.0, 0.0));
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 0.0);
    CHECK(z[6] == 1.0);
    CHECK(z[3] == 0.0);
}

TEST_CASE("candidate sampling") {
    const auto space = ten_state_space();
    SUBCASE("n distinct states") {
        const auto c = sample_candidates(space, 5, {}, 42);
        CHECK(c.size() == 5);
        CHECK(std::set<NetworkState>(c.begin(), c.end()).size() == 5);
        for (const auto& s : c) CHECK(space.contains(s));
    }
    SUBCASE("whole grid excluded") {
        const auto g = enumerate_state_grid(space);
        const std::set<NetworkState> all(g.begin(), g.end());
        CHECK_THROWS_AS((void)sample_candidates(space, 3, all, 1), ExhaustedSpace);
    }
    SUBCASE("deterministic per seed") {
        CHECK(sample_candidates(space, 4, {}, 9) == sample_candidates(space, 4, {}, 9));
        CHECK(sample_candidates(StateSpace::default_grid(), 8, {}, 1) !=
              sample_candidates(StateSpace::default_grid(), 8, {}, 2));
    }
    SUBCASE("fewer remaining than requested") {
        const auto g = enumerate_state_grid(space);
        std::set<NetworkState> ex(g.begin(), g.begin() + 7);
        const auto c = sample_candidates(space, 5, ex, 3);
        CHECK(c.size() == 3);
        for (const auto& s : c) CHECK_FALSE(ex.contains(s));
    }
}

TEST_CASE("observation and budget invariants") {
    Observation o{state(0, 0, 1), 0.5, 1.5, 1};
    CHECK_NOTHROW(o.validate());
    o.discrepancy = -0.1;
    CHECK_THROWS_AS(o.validate(), DomainError);
    o.discrepancy = 0.1;
    o.cost = 0.0;
    CHECK_THROWS_AS(o.validate(), DomainError);

    CHECK_NOTHROW(ExperimentBudget{}.validate());
    CHECK_THROWS_AS((ExperimentBudget{0.0, 10}.validate()), DomainError);
    CHECK_THROWS_AS((ExperimentBudget{10.0, 0}.validate()), DomainError);
}
