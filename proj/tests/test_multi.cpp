#include <catch2/catch_amalgamated.hpp>

#include "respo/envs/drone_tunnel.hpp"
#include "respo/multi.hpp"

using respo::multi_policy_coefficient;

TEST_CASE("composite coefficient substitutions", "[multi]") {
    // p_hc1 = 1: the update reduces to pure first-hard-constraint
    // minimization regardless of every other term.
    double c = multi_policy_coefficient(3.0, 1.7, 0.4, 0.9, 1.0, 0.6, 11.0, 7.0, 3.0);
    REQUIRE(c == Catch::Approx(1.7));

    // p_hc1 = 0, p_hc2 = 1: reward and soft constraint drop out of the inner
    // block; remaining terms are Q_h2 + l_h1 Q_h1.
    c = multi_policy_coefficient(3.0, 1.7, 0.4, 0.9, 0.0, 1.0, 11.0, 7.0, 3.0);
    REQUIRE(c == Catch::Approx(0.4 + 11.0 * 1.7));

    // No gates, no multipliers: pure reward ascent.
    c = multi_policy_coefficient(3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    REQUIRE(c == Catch::Approx(-3.0));
}

TEST_CASE("cost-free training reduces to reward ascent with idle multipliers", "[multi][slow]") {
    // Wall band moved outside the arena and distance limits relaxed: the
    // tunnel env emits all-zero costs.
    respo::DroneTunnelSpec spec;
    spec.wall_y_lo = 100.0;
    spec.wall_y_hi = 101.0;
    spec.gap_x_lo = 0.0;
    spec.gap_x_hi = 0.0;
    spec.d_min = 0.0;
    spec.d_max = 1000.0;
    spec.horizon = 24;
    respo::DroneTunnelEnv env(spec);

    respo::TileCoder coder({0, 0, 0, 0}, {4, 4, 4, 4}, {5, 5, 5, 5}, 2);
    respo::MultiTrainerConfig cfg;
    cfg.iterations = 3000;
    cfg.eval_every = 500;
    cfg.eval_episodes = 4;
    cfg.schedules = respo::ScheduleSet::linear(0.2, 0.05, 0.02, 0.005, 3000);
    cfg.experiment_name = "multi-clean";
    respo::LinearRepr repr(coder, env.n_actions(), cfg.theta_box, cfg.lambda_max, cfg.p_init, 4, 2);

    auto res = respo::train_multi(env, repr, cfg, 2);
    REQUIRE_FALSE(res.diverged);
    // Multipliers stay at initialization scale (soft constraint is slack so
    // its multiplier can only shrink).
    REQUIRE(res.final_lambda < 0.05);
    // Reward improved over an untrained policy.
    respo::LinearRepr fresh(coder, env.n_actions(), cfg.theta_box, cfg.lambda_max, cfg.p_init, 4, 2);
    respo::StreamRng r1(1), r2(1);
    auto trained = respo::multi_eval_episode(env, repr, r1);
    auto untrained = respo::multi_eval_episode(env, fresh, r2);
    REQUIRE(trained.reward > untrained.reward);
    REQUIRE(trained.h1_steps == 0.0);
}

TEST_CASE("metric rows share the single-constraint schema", "[multi]") {
    respo::DroneTunnelSpec spec;
    spec.horizon = 16;
    respo::DroneTunnelEnv env(spec);
    respo::TileCoder coder({0, 0, 0, 0}, {4, 4, 4, 4}, {4, 4, 4, 4}, 2);
    respo::MultiTrainerConfig cfg;
    cfg.iterations = 40;
    cfg.eval_every = 20;
    cfg.eval_episodes = 2;
    cfg.experiment_name = "multi-schema";
    respo::LinearRepr repr(coder, env.n_actions(), cfg.theta_box, cfg.lambda_max, cfg.p_init, 4, 2);
    auto res = respo::train_multi(env, repr, cfg, 7);
    REQUIRE(res.metrics.size() == 40);
    for (const auto& row : res.metrics) {
        auto line = respo::metric_csv_line(row);
        REQUIRE(std::count(line.begin(), line.end(), ',') == respo::kMetricColumns - 1);
    }
}
