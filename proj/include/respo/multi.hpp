#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "respo/metrics.hpp"
#include "respo/representation.hpp"
#include "respo/schedule.hpp"
#include "respo/trainer.hpp"

namespace respo {

// Critic slots for the three-channel environments.
inline constexpr int kMultiReward = 0;
inline constexpr int kMultiHc1 = 1;  // first hard constraint (prioritized)
inline constexpr int kMultiHc2 = 2;  // second hard constraint
inline constexpr int kMultiSc = 3;   // soft constraint with budget chi
inline constexpr int kRefHc1 = 0;
inline constexpr int kRefHc2 = 1;

enum class MultiKind {
    respo_multi,   // nested REF-gated composite objective
    scalar_multi,  // scalar multiplier per constraint, no gating
};

// Policy-gradient coefficient of the composite hard/soft objective. The first
// hard constraint's gate sits outermost so its satisfaction is prioritized:
//   ([-Q + l_sc Q_sc + l_h2 Q_h2] (1-p2) + Q_h2 p2 + l_h1 Q_h1) (1-p1) + Q_h1 p1.
inline double multi_policy_coefficient(double q, double q_h1, double q_h2, double q_sc, double p1, double p2,
                                       double l_h1, double l_h2, double l_sc) {
    double inner = (-q + l_sc * q_sc + l_h2 * q_h2) * (1.0 - p2) + q_h2 * p2 + l_h1 * q_h1;
    return inner * (1.0 - p1) + q_h1 * p1;
}

struct MultiTrainerConfig {
    MultiKind kind = MultiKind::respo_multi;
    double gamma = 0.99;
    double gamma_ref = 0.99;
    double lambda_max = 100.0;
    double lambda_init = 0.01;
    double theta_box = 20.0;
    double p_init = 0.5;
    double chi = 0.5;  // soft-constraint budget on the discounted return scale
    ScheduleSet schedules = ScheduleSet::polynomial(0.5, 0.1, 0.05, 0.01);
    long iterations = 20000;
    int eval_every = 200;
    int eval_episodes = 10;
    double divergence_limit = 1e8;
    std::string experiment_name = "multi";
};

struct MultiEvalStats {
    double reward = 0.0;
    double h1_steps = 0.0;
    double h2_steps = 0.0;
    double sc_steps = 0.0;
};

template <class Env, class Repr>
MultiEvalStats multi_eval_episode(const Env& env, const Repr& repr, StreamRng& rng) {
    MultiEvalStats st;
    auto s = env.reset(rng);
    for (int t = 0; t < env.horizon(); ++t) {
        auto obs = repr.obs(s);
        int a = repr.greedy_action(obs);
        auto step = env.step(s, a, rng);
        st.reward += step.reward;
        st.h1_steps += step.costs[0] > 0.0 ? 1.0 : 0.0;
        st.h2_steps += step.costs[1] > 0.0 ? 1.0 : 0.0;
        st.sc_steps += step.costs[2] > 0.0 ? 1.0 : 0.0;
        s = step.next;
        if (step.done) break;
    }
    return st;
}

// Multi-constraint actor-critic: four critics, one REF per hard constraint,
// and three multipliers. Metric rows fold the two hard channels into the
// violation columns so every learner shares one CSV schema.
template <class Env, class Repr>
TrainResult train_multi(const Env& env, Repr& repr, const MultiTrainerConfig& cfg, std::uint64_t seed) {
    if (env.n_cost_channels() != 3)
        throw std::invalid_argument("train_multi: environment must emit three cost channels");

    ScalarMultiplier l_h1 = ScalarMultiplier::init(cfg.lambda_init, cfg.lambda_max, false);
    ScalarMultiplier l_h2 = ScalarMultiplier::init(cfg.lambda_init, cfg.lambda_max, false);
    ScalarMultiplier l_sc = ScalarMultiplier::init(cfg.lambda_init, cfg.lambda_max, false);
    const bool gated = cfg.kind == MultiKind::respo_multi;

    RngFactory factory(cfg.experiment_name, seed);
    TrainResult result;
    result.metrics.reserve(static_cast<std::size_t>(cfg.iterations));
    MetricRow eval_snapshot;

    auto sample_act = [&repr](const typename Repr::Obs& o, StreamRng& rng) { return repr.sample_action(o, rng); };

    auto run_eval = [&](long iter) {
        MetricRow row;
        RunningStat rew, viol;
        for (int e = 0; e < cfg.eval_episodes; ++e) {
            StreamRng rng = factory.eval_episode(static_cast<std::uint64_t>(iter), e);
            auto st = multi_eval_episode(env, repr, rng);
            rew.add(st.reward);
            viol.add(st.h1_steps + st.h2_steps);
        }
        row.eval_reward_mean = rew.mean();
        row.eval_reward_std = rew.stddev();
        row.eval_violations_mean = viol.mean();
        row.eval_violations_std = viol.stddev();
        row.lambda = l_h1.value();
        return row;
    };

    for (long k = 0; k < cfg.iterations; ++k) {
        const double lr1 = cfg.schedules.at(1, k);
        const double lr2 = cfg.schedules.at(2, k);
        const double lr3 = cfg.schedules.at(3, k);
        const double lr4 = cfg.schedules.at(4, k);

        StreamRng rng = factory.episode(static_cast<std::uint64_t>(k));
        auto start = env.reset(rng);
        auto ro = detail::roll_episode(env, repr, sample_act, start, rng);
        int boot_action = repr.sample_action(ro.final_obs, rng);

        const std::size_t n_rows = ro.rows.size();
        double gamma_t = 1.0;
        double train_reward = 0.0, train_hard = 0.0, train_cost_disc = 0.0;
        for (std::size_t t = 0; t < n_rows; ++t) {
            const auto& row = ro.rows[t];
            const bool last = t + 1 == n_rows;
            const auto& obs2 = last ? ro.final_obs : ro.rows[t + 1].obs;
            const int a2 = last ? boot_action : ro.rows[t + 1].action;

            repr.q_step(kMultiReward, row.obs, row.action,
                        row.reward + cfg.gamma * repr.q(kMultiReward, obs2, a2), lr1);
            repr.q_step(kMultiHc1, row.obs, row.action, row.costs[0] + cfg.gamma * repr.q(kMultiHc1, obs2, a2), lr1);
            repr.q_step(kMultiHc2, row.obs, row.action, row.costs[1] + cfg.gamma * repr.q(kMultiHc2, obs2, a2), lr1);
            repr.q_step(kMultiSc, row.obs, row.action, row.costs[2] + cfg.gamma * repr.q(kMultiSc, obs2, a2), lr1);

            const double q = repr.q(kMultiReward, row.obs, row.action);
            const double qh1 = repr.q(kMultiHc1, row.obs, row.action);
            const double qh2 = repr.q(kMultiHc2, row.obs, row.action);
            const double qsc = repr.q(kMultiSc, row.obs, row.action);
            const double p1 = gated ? repr.ref(row.obs, kRefHc1) : 0.0;
            const double p2 = gated ? repr.ref(row.obs, kRefHc2) : 0.0;
            double coeff =
                multi_policy_coefficient(q, qh1, qh2, qsc, p1, p2, l_h1.value(), l_h2.value(), l_sc.value());
            repr.policy_step(row.obs, row.action, gamma_t * coeff, lr2);

            if (gated) {
                double t1 = std::max(row.costs[0] > 0.0 ? 1.0 : 0.0, cfg.gamma_ref * repr.ref(obs2, kRefHc1));
                repr.ref_step(row.obs, t1, lr3, kRefHc1);
                double t2 = std::max(row.costs[1] > 0.0 ? 1.0 : 0.0, cfg.gamma_ref * repr.ref(obs2, kRefHc2));
                repr.ref_step(row.obs, t2, lr3, kRefHc2);
            }

            // Dual ascent, gated by the same factors that weight each term in
            // the composite objective.
            double g1 = gated ? (1.0 - p1) : 1.0;
            double g2 = gated ? (1.0 - p1) * (1.0 - p2) : 1.0;
            l_h1.ascend(qh1 * g1, lr4);
            l_h2.ascend(qh2 * g2, lr4);
            l_sc.ascend((qsc - cfg.chi) * g2, lr4);

            train_reward += row.reward;
            train_hard += (row.costs[0] > 0.0 ? 1.0 : 0.0) + (row.costs[1] > 0.0 ? 1.0 : 0.0);
            train_cost_disc += gamma_t * (row.costs[0] + row.costs[1]);
            gamma_t *= cfg.gamma;
        }

        double mag = std::max({repr.max_abs_param(), std::abs(l_h1.omega), std::abs(l_h2.omega), std::abs(l_sc.omega)});
        if (!std::isfinite(mag) || mag > cfg.divergence_limit) {
            result.diverged = true;
            result.diverged_iter = k;
            break;
        }

        if (k % cfg.eval_every == 0 || k + 1 == cfg.iterations) eval_snapshot = run_eval(k);
        MetricRow row = eval_snapshot;
        row.iter = k;
        row.train_reward = train_reward;
        row.train_violations = train_hard;
        row.train_cost_disc = train_cost_disc;
        row.lambda = l_h1.value();
        result.metrics.push_back(row);
    }

    result.final_lambda = l_h1.value();
    result.final_eval = eval_snapshot;
    return result;
}

}  // namespace respo
