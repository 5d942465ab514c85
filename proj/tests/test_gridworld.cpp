#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "respo/envs/gridworld.hpp"

using respo::build_gridworld;
using respo::GridWorld;
using respo::GridWorldSpec;

TEST_CASE("2x1 grid with no hazards is a deterministic two-state chain", "[gridworld]") {
    GridWorldSpec spec;
    spec.width = 2;
    spec.height = 1;
    spec.goal = {1, 0};
    spec.starts = {{0, 0}};
    GridWorld w = build_gridworld(spec);
    REQUIRE(w.mdp.n_states == 2);
    // Moving right from (0,0) reaches the goal with probability 1.
    REQUIRE(w.mdp.p(0, 3, 1) == 1.0);
    // Up/down/left bump and stay.
    REQUIRE(w.mdp.p(0, 0, 0) == 1.0);
    REQUIRE(w.mdp.p(0, 2, 0) == 1.0);
    REQUIRE(w.mdp.absorbing[1] == 1);
    // Arrival reward: stepping right earns the goal reward.
    REQUIRE(w.mdp.r(0, 3) == 1.0);
    REQUIRE(w.mdp.r(0, 0) == 0.0);
}

TEST_CASE("3x3 slip kernel matches a hand-enumerated row", "[gridworld]") {
    GridWorldSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.slip = 0.2;
    spec.goal = {2, 2};
    spec.hazards = {{{1, 1}, 1.0}};
    GridWorld w = build_gridworld(spec);

    // From the center (1,1), intending "up": actual action is up with
    // probability 1 - slip + slip/4 = 0.85 and each other direction 0.05.
    int c = w.index(1, 1);
    REQUIRE(w.mdp.p(c, 0, w.index(1, 0)) == Catch::Approx(0.85).margin(1e-12));
    REQUIRE(w.mdp.p(c, 0, w.index(1, 2)) == Catch::Approx(0.05).margin(1e-12));
    REQUIRE(w.mdp.p(c, 0, w.index(0, 1)) == Catch::Approx(0.05).margin(1e-12));
    REQUIRE(w.mdp.p(c, 0, w.index(2, 1)) == Catch::Approx(0.05).margin(1e-12));
    // Total off-intent mass is slip * 3/4.
    double off = 1.0 - w.mdp.p(c, 0, w.index(1, 0));
    REQUIRE(off == Catch::Approx(0.2 * 0.75).margin(1e-12));

    // Corner (0,0), intending "up" (blocked): stay mass collects blocked arms.
    int corner = w.index(0, 0);
    // up blocked (0.85), left blocked (0.05) -> stay 0.9; down 0.05; right 0.05
    REQUIRE(w.mdp.p(corner, 0, corner) == Catch::Approx(0.9).margin(1e-12));
    REQUIRE(w.mdp.p(corner, 0, w.index(0, 1)) == Catch::Approx(0.05).margin(1e-12));
    REQUIRE(w.mdp.p(corner, 0, w.index(1, 0)) == Catch::Approx(0.05).margin(1e-12));

    // All rows stochastic.
    for (int s = 0; s < w.mdp.n_states; ++s)
        for (int a = 0; a < 4; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < w.mdp.n_states; ++s2) sum += w.mdp.p(s, a, s2);
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
        }

    // Hazard magnitude lands on the cost table; a zero-magnitude hazard is
    // rejected rather than silently joining the violation set.
    REQUIRE(w.mdp.cost[c] == 1.0);
    GridWorldSpec bad = spec;
    bad.hazards = {{{1, 1}, 0.0}};
    REQUIRE_THROWS_AS(build_gridworld(bad), std::invalid_argument);
}

TEST_CASE("cost-free cells are outside the violation set", "[gridworld]") {
    GridWorldSpec spec;
    spec.width = 3;
    spec.height = 1;
    spec.goal = {2, 0};
    GridWorld w = build_gridworld(spec);
    auto ind = respo::violation_indicator(w.mdp);
    for (auto v : ind) REQUIRE(v == 0);
}

TEST_CASE("unreachable goal produces a warning, not an error", "[gridworld]") {
    GridWorldSpec spec;
    spec.width = 3;
    spec.height = 1;
    spec.walls = {{1, 0}};
    spec.goal = {2, 0};
    spec.starts = {{0, 0}};
    GridWorld w = build_gridworld(spec);
    REQUIRE_FALSE(w.warnings.empty());
}

TEST_CASE("benchmark layouts validate", "[gridworld]") {
    REQUIRE_NOTHROW(respo::make_two_room_world(5));
    REQUIRE_NOTHROW(respo::make_two_room_world(6));
    REQUIRE_NOTHROW(respo::make_lava_corridor());
    REQUIRE_NOTHROW(respo::make_risky_goal_world());

    GridWorld lava = respo::make_lava_corridor();
    // Gate is the only way out of the lava block and costs 1.0.
    REQUIRE(lava.mdp.cost[lava.index(2, 1)] == 1.0);
    REQUIRE(lava.mdp.cost[lava.index(0, 0)] == 0.5);
    REQUIRE(lava.mdp.h_delta() == 0.5);
    // Starts only inside the lava block.
    for (int s = 0; s < lava.mdp.n_states; ++s)
        if (lava.mdp.initial_distribution[s] > 0) REQUIRE(lava.cell(s).x < 2);
}
