#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "respo/envs/gridworld.hpp"
#include "respo/trainer.hpp"

using respo::DiscretePolicy;
using respo::FiniteMdp;
using respo::LearnerKind;
using respo::MdpEnv;
using respo::ScheduleSet;
using respo::Signal;
using respo::TabularRepr;
using respo::TrainerConfig;

namespace {

respo::GridWorld clean_world() {
    respo::GridWorldSpec spec;
    spec.width = 4;
    spec.height = 3;
    spec.goal = {3, 1};
    spec.slip = 0.1;
    spec.horizon = 24;
    return respo::build_gridworld(spec);
}

TrainerConfig base_config(LearnerKind kind, long iters, const char* name) {
    TrainerConfig cfg;
    cfg.kind = kind;
    cfg.iterations = iters;
    cfg.eval_every = iters / 4;
    cfg.eval_episodes = 8;
    cfg.schedules = ScheduleSet::linear(0.4, 0.1, 0.03, 0.01, static_cast<double>(iters));
    cfg.experiment_name = name;
    return cfg;
}

double greedy_value(const respo::GridWorld& world, TabularRepr& repr) {
    std::vector<int> acts(world.mdp.n_states);
    for (int s = 0; s < world.mdp.n_states; ++s) acts[s] = repr.greedy_action(s);
    auto v = respo::policy_eval(world.mdp, DiscretePolicy::deterministic(acts, 4), Signal::reward, 1e-11);
    double out = 0;
    for (int s = 0; s < world.mdp.n_states; ++s) out += world.mdp.initial_distribution[s] * v[s];
    return out;
}

}  // namespace

TEST_CASE("cbf surrogate formula", "[baselines]") {
    // h identically zero: inactive.
    REQUIRE(respo::cbf_surrogate(0.0, 0.0, 1.0, 0.2) == 0.0);
    // h decays geometrically at rate >= nu: zero penalty (up to roundoff of
    // the boundary case).
    REQUIRE(respo::cbf_surrogate(1.0, 0.8, 1.0, 0.2) <= 1e-15);
    REQUIRE(respo::cbf_surrogate(1.0, 0.5, 1.0, 0.2) == 0.0);
    // Decay slower than nu: positive part activates.
    REQUIRE(respo::cbf_surrogate(1.0, 0.9, 1.0, 0.2) == Catch::Approx(0.1));
    // Increasing h is penalized by the rise plus nu h.
    REQUIRE(respo::cbf_surrogate(1.0, 1.5, 0.5, 0.2) == Catch::Approx(1.2));
}

TEST_CASE("slack budget behaves like the unconstrained learner", "[baselines][slow]") {
    auto world = clean_world();
    MdpEnv env(world.mdp);

    auto cfg_lag = base_config(LearnerKind::scalar_lagrangian, 4000, "slack-lag");
    cfg_lag.chi = 1e9;
    TabularRepr lag = respo::make_tabular_repr(world.mdp, cfg_lag);
    auto res = respo::train(env, lag, cfg_lag, 3);
    REQUIRE_FALSE(res.diverged);
    REQUIRE(res.final_lambda < 1e-6);  // slack constraint drives lambda to zero

    auto cfg_unc = base_config(LearnerKind::unconstrained, 4000, "slack-unc");
    TabularRepr unc = respo::make_tabular_repr(world.mdp, cfg_unc);
    respo::train(env, unc, cfg_unc, 3);

    // Hazard-free world: final rewards agree within 2%.
    double v_lag = greedy_value(world, lag);
    double v_unc = greedy_value(world, unc);
    REQUIRE(std::abs(v_lag - v_unc) <= 0.02 * std::abs(v_unc));
}

TEST_CASE("per-state multipliers vanish on a hazard-free world", "[baselines][slow]") {
    auto world = clean_world();
    MdpEnv env(world.mdp);
    auto cfg = base_config(LearnerKind::fac, 2000, "fac-clean");
    TabularRepr repr = respo::make_tabular_repr(world.mdp, cfg);
    auto res = respo::train(env, repr, cfg, 5);
    REQUIRE_FALSE(res.diverged);
    for (int s = 0; s < world.mdp.n_states; ++s) REQUIRE(repr.state_lambda(s) <= 1e-9);
}

TEST_CASE("hazard-adjacent multipliers dominate distant ones after training", "[baselines][slow]") {
    auto world = respo::make_two_room_world(5, 0.1);
    const FiniteMdp& m = world.mdp;
    MdpEnv env(m);
    auto cfg = base_config(LearnerKind::fac, 20000, "fac-ordering");
    cfg.schedules = ScheduleSet::linear(0.4, 0.1, 0.03, 0.02, 20000);
    TabularRepr repr = respo::make_tabular_repr(m, cfg);
    auto res = respo::train(env, repr, cfg, 9);
    REQUIRE_FALSE(res.diverged);

    // Oracle cost-value ordering: mean multiplier over the top-quartile
    // V_c* states exceeds the mean over zero-V_c* states.
    auto sol = respo::compute_oracle(m);
    auto reachable = m.reachable_any_action();
    double hi = 0, lo = 0;
    int nhi = 0, nlo = 0;
    for (int s = 0; s < m.n_states; ++s) {
        if (!reachable[s] || m.absorbing[s]) continue;
        if (sol.v_c_star[s] > 0.01) {
            hi += repr.state_lambda(s);
            ++nhi;
        } else {
            lo += repr.state_lambda(s);
            ++nlo;
        }
    }
    REQUIRE(nhi > 0);
    REQUIRE(nlo > 0);
    REQUIRE(hi / nhi > lo / nlo);
}

TEST_CASE("reachability-critic learner reduces to reward ascent when safe", "[baselines]") {
    auto world = clean_world();
    MdpEnv env(world.mdp);
    // Identical seeds and schedules: with zero costs everywhere the cost and
    // reachability critics both stay at zero, so the respo and respo_vh
    // parameter streams coincide step for step.
    auto cfg_a = base_config(LearnerKind::respo, 500, "vh-equiv");
    auto cfg_b = base_config(LearnerKind::respo_vh, 500, "vh-equiv");
    TabularRepr a = respo::make_tabular_repr(world.mdp, cfg_a);
    TabularRepr b = respo::make_tabular_repr(world.mdp, cfg_b);
    auto ra = respo::train(env, a, cfg_a, 11);
    auto rb = respo::train(env, b, cfg_b, 11);
    REQUIRE(ra.metrics.size() == rb.metrics.size());
    for (std::size_t i = 0; i < ra.metrics.size(); ++i)
        REQUIRE(respo::metric_csv_line(ra.metrics[i]) == respo::metric_csv_line(rb.metrics[i]));
}

TEST_CASE("sampling layer is identical across learners before updates differ", "[baselines]") {
    auto world = respo::make_two_room_world(5, 0.1);
    MdpEnv env(world.mdp);
    std::vector<double> first_rewards;
    for (auto kind : {LearnerKind::respo, LearnerKind::rcrl, LearnerKind::fac, LearnerKind::cbf,
                      LearnerKind::scalar_lagrangian, LearnerKind::unconstrained}) {
        auto cfg = base_config(kind, 1, "shared-sampling");
        cfg.eval_every = 1;
        cfg.eval_episodes = 1;
        TabularRepr repr = respo::make_tabular_repr(world.mdp, cfg);
        auto res = respo::train(env, repr, cfg, 77);
        first_rewards.push_back(res.metrics.at(0).train_reward);
    }
    for (std::size_t i = 1; i < first_rewards.size(); ++i) REQUIRE(first_rewards[i] == first_rewards[0]);
}

TEST_CASE("cbf learner trains without diverging and keeps lambda bounded", "[baselines][slow]") {
    auto world = respo::make_two_room_world(5, 0.1);
    MdpEnv env(world.mdp);
    auto cfg = base_config(LearnerKind::cbf, 3000, "cbf-run");
    cfg.lambda_max = 25.0;
    TabularRepr repr = respo::make_tabular_repr(world.mdp, cfg);
    auto res = respo::train(env, repr, cfg, 2);
    REQUIRE_FALSE(res.diverged);
    REQUIRE(res.final_lambda <= 25.0);
}
