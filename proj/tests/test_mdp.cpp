#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "respo/mdp.hpp"
#include "respo/rng.hpp"
#include "test_support.hpp"

using respo::FiniteMdp;

namespace {

FiniteMdp two_state_chain() {
    // s0 -> s1 deterministic under the single action; s1 absorbing.
    FiniteMdp m;
    m.n_states = 2;
    m.n_actions = 1;
    m.allocate();
    m.p(0, 0, 1) = 1.0;
    m.p(1, 0, 1) = 1.0;
    m.r(0, 0) = 1.0;
    m.cost[1] = 0.5;
    m.absorbing[1] = 1;
    m.initial_distribution[0] = 1.0;
    m.discount = 0.9;
    m.horizon = 10;
    return m;
}

}  // namespace

TEST_CASE("validation accepts a well-formed MDP and reports defects", "[mdp]") {
    FiniteMdp m = two_state_chain();
    REQUIRE_NOTHROW(m.validate());

    SECTION("row sum off by more than 1e-9") {
        m.p(0, 0, 1) = 1.0 + 1e-6;
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SECTION("negative transition entry") {
        m.p(0, 0, 0) = -0.1;
        m.p(0, 0, 1) = 1.1;
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SECTION("negative cost") {
        m.cost[0] = -1.0;
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SECTION("initial distribution off") {
        m.initial_distribution[0] = 0.5;
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SECTION("absorbing state without self-loop") {
        m.absorbing[0] = 1;
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    }
}

TEST_CASE("derived cost statistics", "[mdp]") {
    FiniteMdp m = two_state_chain();
    m.cost = {0.0, 0.5};
    REQUIRE(m.h_max() == 0.5);
    REQUIRE(m.h_min() == 0.5);
    REQUIRE(m.h_delta() == 0.5);

    m.n_states = 3;
    m.n_actions = 1;
    m.allocate();
    for (int s = 0; s < 3; ++s) m.p(s, 0, s) = 1.0;
    m.initial_distribution = {1.0, 0.0, 0.0};
    m.absorbing = {1, 1, 1};
    m.cost = {0.0, 0.5, 1.2};
    REQUIRE(m.h_min() == 0.5);
    REQUIRE(m.h_delta() == Catch::Approx(0.5).margin(1e-15));  // gap 0 -> 0.5
    m.cost = {0.0, 1.0, 1.25};
    REQUIRE(m.h_delta() == Catch::Approx(0.25).margin(1e-15));  // gap 1 -> 1.25

    SECTION("violation-free MDP has h_min = +inf") {
        m.cost = {0.0, 0.0, 0.0};
        REQUIRE(std::isinf(m.h_min()));
    }
}

TEST_CASE("violation indicator marks exactly the positive-cost states", "[mdp]") {
    FiniteMdp m = two_state_chain();
    auto ind = respo::violation_indicator(m);
    REQUIRE(ind[0] == 0);
    REQUIRE(ind[1] == 1);

    m.cost[1] = 0.0;
    ind = respo::violation_indicator(m);
    REQUIRE(ind[1] == 0);
}

TEST_CASE("text round-trip is exact", "[mdp]") {
    respo::StreamRng rng(2024);
    testsup::RandomMdpOptions opt;
    opt.n_states = 6;
    opt.n_actions = 3;
    opt.add_safe_sink = true;
    FiniteMdp m = testsup::random_mdp(opt, rng);

    std::string text = respo::to_text(m);
    std::istringstream in(text);
    FiniteMdp back = respo::mdp_from_text(in);

    REQUIRE(back.n_states == m.n_states);
    REQUIRE(back.n_actions == m.n_actions);
    REQUIRE(back.discount == m.discount);
    REQUIRE(back.horizon == m.horizon);
    REQUIRE(back.transition == m.transition);
    REQUIRE(back.reward == m.reward);
    REQUIRE(back.cost == m.cost);
    REQUIRE(back.initial_distribution == m.initial_distribution);
    REQUIRE(back.absorbing == m.absorbing);

    // Re-serialization is byte-identical.
    REQUIRE(respo::to_text(back) == text);
}

TEST_CASE("parse errors carry context", "[mdp]") {
    std::istringstream bad("not-a-header 1");
    REQUIRE_THROWS_AS(respo::mdp_from_text(bad), std::runtime_error);

    std::istringstream truncated("respo-mdp 1\nstates 2\nactions 1\ndiscount 0.9\nhorizon 5\ninitial 1 0\n");
    REQUIRE_THROWS_AS(respo::mdp_from_text(truncated), std::runtime_error);
}

TEST_CASE("reachability under full action support", "[mdp]") {
    FiniteMdp m;
    m.n_states = 3;
    m.n_actions = 2;
    m.allocate();
    // s0 -> s1 (a0) or s0 (a1); s1 absorbing; s2 unreachable.
    m.p(0, 0, 1) = 1.0;
    m.p(0, 1, 0) = 1.0;
    m.p(1, 0, 1) = 1.0;
    m.p(1, 1, 1) = 1.0;
    m.p(2, 0, 2) = 1.0;
    m.p(2, 1, 2) = 1.0;
    m.absorbing[1] = 1;
    m.initial_distribution = {1.0, 0.0, 0.0};
    m.validate();
    auto reach = m.reachable_any_action();
    REQUIRE(reach[0] == 1);
    REQUIRE(reach[1] == 1);
    REQUIRE(reach[2] == 0);
}
