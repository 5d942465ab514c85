#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "respo/envs/env_core.hpp"
#include "respo/metrics.hpp"
#include "respo/oracle.hpp"
#include "respo/representation.hpp"
#include "respo/schedule.hpp"

namespace respo {

enum class LearnerKind {
    unconstrained,
    scalar_lagrangian,  // CMDP with scalar multiplier and budget chi
    fac,                // per-state multiplier on the cost value, chi = 0
    rcrl,               // per-state multiplier on the reachability value
    cbf,                // scalar multiplier on the discrete barrier surrogate
    respo,              // reachability-estimation-gated Lagrangian
    respo_vh,           // ablation: cost critic replaced by the reachability critic
};

inline const char* learner_kind_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::unconstrained: return "unconstrained";
        case LearnerKind::scalar_lagrangian: return "scalar_lagrangian";
        case LearnerKind::fac: return "fac";
        case LearnerKind::rcrl: return "rcrl";
        case LearnerKind::cbf: return "cbf";
        case LearnerKind::respo: return "respo";
        case LearnerKind::respo_vh: return "respo_vh";
    }
    return "?";
}

struct TrainerConfig {
    LearnerKind kind = LearnerKind::respo;
    double gamma = 0.99;
    double gamma_ref = 0.99;   // REF bootstrap discount (defaults to gamma)
    double gamma_h = 1.0;      // reachability critic discount
    double lambda_max = 100.0;
    double lambda_init = 0.01;
    bool freeze_multiplier = false;
    double theta_box = 20.0;
    double p_init = 0.5;
    double chi = 0.0;          // per-episode discounted cost budget
    double nu = 0.2;           // barrier decay rate
    ScheduleSet schedules = ScheduleSet::polynomial(0.5, 0.1, 0.05, 0.01);
    long iterations = 20000;
    int eval_every = 100;
    int eval_episodes = 20;
    double divergence_limit = 1e8;
    bool clamp_ref_to_oracle = false;  // freeze p at the oracle REF (ablation)
    std::string experiment_name = "train";
};

// Multiplier cap lower bound: lambda must exceed
//   R_max / ((1 - gamma) * gamma^T * H_delta * P_min)
// for cost reduction to dominate any possible reward gain. Evaluated in log
// space so gamma^T cannot underflow.
inline double lambda_max_bound(double r_max, double gamma, double horizon, double h_delta, double p_min) {
    if (!(r_max > 0.0) || !(gamma > 0.0 && gamma < 1.0) || !(horizon > 0.0) || !(h_delta > 0.0) || !(p_min > 0.0))
        throw std::invalid_argument("lambda_max_bound: all inputs must be positive with gamma in (0,1)");
    double log_bound =
        std::log(r_max) - std::log1p(-gamma) - horizon * std::log(gamma) - std::log(h_delta) - std::log(p_min);
    return std::exp(log_bound);
}

// Policy-gradient coefficient of Algorithm-style updates: the policy step is
// theta <- Gamma(theta - zeta2 * gamma^t * coeff * grad log pi(a|s)).
inline double respo_policy_coefficient(double q, double q_c, double p, double lambda) {
    return -q * (1.0 - p) + q_c * (lambda * (1.0 - p) + p);
}

// Positive part of the discrete barrier condition (h(s') - h(s))/dt + nu h(s) <= 0.
inline double cbf_surrogate(double h_now, double h_next, double dt, double nu) {
    return std::max(0.0, (h_next - h_now) / dt + nu * h_now);
}

struct ScalarMultiplier {
    double omega = 0.0;
    double lambda_max = 100.0;
    bool frozen = false;

    static ScalarMultiplier init(double lambda_init, double lambda_max, bool frozen) {
        ScalarMultiplier m;
        m.lambda_max = lambda_max;
        m.frozen = frozen;
        m.omega = softplus_inv(std::min(std::max(lambda_init, 1e-9), lambda_max));
        return m;
    }
    double value() const { return std::min(softplus(omega), lambda_max); }
    void ascend(double drive, double lr) {
        if (frozen) return;
        omega += lr * drive * sigmoid(omega);
        omega = std::min(std::max(omega, -30.0), softplus_inv(lambda_max));
    }
};

// Optional exact references attached to tabular training runs.
struct TrainOracle {
    const FiniteMdp* mdp = nullptr;
    const OracleSolution* sol = nullptr;
    std::vector<int> feasible_starts;        // feasible cells in the start support
    std::vector<std::uint8_t> reachable;     // restrict sup-norm reporting

    static TrainOracle attach(const FiniteMdp& mdp, const OracleSolution& sol) {
        TrainOracle o;
        o.mdp = &mdp;
        o.sol = &sol;
        o.reachable = mdp.reachable_any_action();
        for (int s : mdp.initial_support())
            if (sol.feasible[s]) o.feasible_starts.push_back(s);
        return o;
    }
};

struct TrainResult {
    std::vector<MetricRow> metrics;
    bool diverged = false;
    long diverged_iter = -1;
    double final_lambda = 0.0;
    MetricRow final_eval;  // last evaluation snapshot
};

namespace detail {

template <class Repr>
struct RolloutRow {
    typename Repr::Obs obs;
    int action = 0;
    double reward = 0.0;
    std::array<double, kMaxCostChannels> costs{};
    double cost_now = 0.0;
    double cost_next = 0.0;
};

template <class Env, class Repr>
struct Rollout {
    std::vector<RolloutRow<Repr>> rows;
    typename Env::State final_state{};
    typename Repr::Obs final_obs{};
    double final_state_cost = 0.0;
    bool ended_absorbing = false;
};

template <class Env, class Repr, class ActFn>
Rollout<Env, Repr> roll_episode(const Env& env, const Repr& repr, ActFn&& act, typename Env::State start,
                                StreamRng& rng) {
    Rollout<Env, Repr> out;
    out.rows.reserve(static_cast<std::size_t>(env.horizon()));
    typename Env::State s = start;
    for (int t = 0; t < env.horizon(); ++t) {
        if (env.start_absorbed(s)) {
            out.ended_absorbing = true;
            break;
        }
        auto obs = repr.obs(s);
        int a = act(obs, rng);
        auto step = env.step(s, a, rng);
        RolloutRow<Repr> row;
        row.obs = obs;
        row.action = a;
        row.reward = step.reward;
        row.costs = step.costs;
        row.cost_now = step.cost_state_now;
        row.cost_next = step.cost_state_next;
        out.rows.push_back(row);
        out.final_state_cost = step.cost_state_next;
        s = step.next;
        if (step.done) {
            out.ended_absorbing = true;
            break;
        }
    }
    out.final_state = s;
    out.final_obs = repr.obs(s);
    return out;
}

struct EpisodeStats {
    double reward_sum = 0.0;
    double violations = 0.0;
    double cost_disc = 0.0;
    double return_disc = 0.0;  // with absorbing tail
    bool zero_violation = true;
};

template <class Env, class Repr>
EpisodeStats episode_stats(const Env& env, const Rollout<Env, Repr>& ro, double gamma) {
    EpisodeStats st;
    double g = 1.0;
    for (const auto& row : ro.rows) {
        st.reward_sum += row.reward;
        if (row.costs[0] > 0.0) {
            st.violations += 1.0;
            st.zero_violation = false;
        }
        st.cost_disc += g * row.costs[0];
        st.return_disc += g * row.reward;
        g *= gamma;
    }
    if (ro.ended_absorbing) {
        auto tail = env.absorbing_tail(ro.final_state, gamma);
        st.return_disc += g * tail[0];
        st.cost_disc += g * tail[1];
    }
    if (ro.final_state_cost > 0.0) st.zero_violation = false;
    return st;
}

}  // namespace detail

// Algorithm loop: per iteration sample one on-policy episode, then apply the
// per-step updates in order critic -> policy -> REF -> multiplier with the
// four step-size timescales.
template <class Env, class Repr>
TrainResult train(const Env& env, Repr& repr, const TrainerConfig& cfg, std::uint64_t seed,
                  const TrainOracle* oracle = nullptr) {
    constexpr bool kTabular = std::is_same_v<Repr, TabularRepr>;
    constexpr bool kMdpEnv = std::is_same_v<Env, MdpEnv>;
    static_assert(kTabular ? kMdpEnv : true, "tabular representations train on MdpEnv");

    if (cfg.clamp_ref_to_oracle) {
        if constexpr (kTabular) {
            if (!oracle || !oracle->sol) throw std::invalid_argument("train: REF clamp requires an attached oracle");
            repr.set_ref_table(oracle->sol->phi_star_learner);
        } else {
            throw std::invalid_argument("train: REF clamp is tabular-only");
        }
    }

    const LearnerKind kind = cfg.kind;
    const bool uses_cost_critic = kind == LearnerKind::scalar_lagrangian || kind == LearnerKind::fac ||
                                  kind == LearnerKind::respo || kind == LearnerKind::respo_vh;
    const bool uses_aux_critic = kind == LearnerKind::rcrl || kind == LearnerKind::respo_vh || kind == LearnerKind::cbf;
    const bool uses_ref = kind == LearnerKind::respo || kind == LearnerKind::respo_vh;
    const bool scalar_multiplier = kind == LearnerKind::scalar_lagrangian || kind == LearnerKind::cbf ||
                                   kind == LearnerKind::respo || kind == LearnerKind::respo_vh;
    const bool state_multiplier = kind == LearnerKind::fac || kind == LearnerKind::rcrl;

    ScalarMultiplier lambda = ScalarMultiplier::init(cfg.lambda_init, cfg.lambda_max, cfg.freeze_multiplier);

    RngFactory factory(cfg.experiment_name, seed);
    TrainResult result;
    result.metrics.reserve(static_cast<std::size_t>(cfg.iterations));
    MetricRow eval_snapshot;

    auto sample_act = [&repr](const typename Repr::Obs& o, StreamRng& rng) { return repr.sample_action(o, rng); };
    auto greedy_act = [&repr](const typename Repr::Obs& o, StreamRng&) { return repr.greedy_action(o); };

    double visited_lambda_mean = 0.0;  // running mean of lambda(s) over visited states
    auto current_lambda = [&]() -> double {
        if (scalar_multiplier) return lambda.value();
        if (state_multiplier) return visited_lambda_mean;
        return 0.0;
    };

    auto run_eval = [&](long iter) {
        MetricRow row;
        RunningStat rew, viol, cost, ret;
        for (int e = 0; e < cfg.eval_episodes; ++e) {
            StreamRng rng = factory.eval_episode(static_cast<std::uint64_t>(iter), e);
            auto start = env.reset(rng);
            auto ro = detail::roll_episode(env, repr, greedy_act, start, rng);
            auto st = detail::episode_stats(env, ro, cfg.gamma);
            rew.add(st.reward_sum);
            viol.add(st.violations);
            cost.add(st.cost_disc);
            ret.add(st.return_disc);
        }
        row.eval_reward_mean = rew.mean();
        row.eval_reward_std = rew.stddev();
        row.eval_violations_mean = viol.mean();
        row.eval_violations_std = viol.stddev();
        row.eval_cost_disc_mean = cost.mean();
        row.eval_return_disc_mean = ret.mean();

        if constexpr (kMdpEnv) {
            if (oracle && !oracle->feasible_starts.empty()) {
                RunningStat fret;
                long zero = 0, total = 0;
                int n_starts = static_cast<int>(oracle->feasible_starts.size());
                int episodes = std::max(cfg.eval_episodes, n_starts);
                for (int e = 0; e < episodes; ++e) {
                    int start = oracle->feasible_starts[e % n_starts];
                    StreamRng rng = factory.eval_episode(static_cast<std::uint64_t>(iter), 1000 + e);
                    auto ro = detail::roll_episode(env, repr, greedy_act, start, rng);
                    auto st = detail::episode_stats(env, ro, cfg.gamma);
                    fret.add(st.return_disc);
                    zero += st.zero_violation ? 1 : 0;
                    ++total;
                }
                row.feas_return_disc_mean = fret.mean();
                row.feas_zero_violation_rate = total ? static_cast<double>(zero) / total : 1.0;
            }
        }
        if constexpr (kTabular) {
            if (oracle && oracle->sol) {
                double sup = 0.0;
                for (int s = 0; s < repr.n_states(); ++s) {
                    if (!oracle->reachable.empty() && !oracle->reachable[s]) continue;
                    sup = std::max(sup, std::abs(repr.ref(s) - oracle->sol->phi_star_learner[s]));
                }
                row.ref_sup_err = sup;
            }
        }
        row.lambda = current_lambda();
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
        for (std::size_t t = 0; t < n_rows; ++t) {
            const auto& row = ro.rows[t];
            const bool last = t + 1 == n_rows;
            const auto& obs2 = last ? ro.final_obs : ro.rows[t + 1].obs;
            const int a2 = last ? boot_action : ro.rows[t + 1].action;

            // Critic updates (fastest timescale).
            repr.q_step(kCriticReward, row.obs, row.action, row.reward + cfg.gamma * repr.q(kCriticReward, obs2, a2),
                        lr1);
            if (uses_cost_critic)
                repr.q_step(kCriticCost, row.obs, row.action,
                            row.costs[0] + cfg.gamma * repr.q(kCriticCost, obs2, a2), lr1);
            if (uses_aux_critic) {
                double target;
                if (kind == LearnerKind::cbf) {
                    double barrier = cbf_surrogate(row.cost_now, row.cost_next, env.dt(), cfg.nu);
                    target = barrier + cfg.gamma * repr.q(kCriticAux, obs2, a2);
                } else {
                    target = std::max(row.costs[0], cfg.gamma_h * repr.q(kCriticAux, obs2, a2));
                }
                repr.q_step(kCriticAux, row.obs, row.action, target, lr1);
            }

            // Policy update.
            const double q = repr.q(kCriticReward, row.obs, row.action);
            const double qc = uses_cost_critic ? repr.q(kCriticCost, row.obs, row.action) : 0.0;
            const double qh = uses_aux_critic ? repr.q(kCriticAux, row.obs, row.action) : 0.0;
            const double p = uses_ref ? repr.ref(row.obs) : 0.0;
            double coeff = 0.0;
            switch (kind) {
                case LearnerKind::unconstrained: coeff = -q; break;
                case LearnerKind::scalar_lagrangian: coeff = -q + lambda.value() * qc; break;
                case LearnerKind::fac: coeff = -q + repr.state_lambda(row.obs) * qc; break;
                case LearnerKind::rcrl: coeff = -q + repr.state_lambda(row.obs) * qh; break;
                case LearnerKind::cbf: coeff = -q + lambda.value() * qh; break;
                case LearnerKind::respo: coeff = respo_policy_coefficient(q, qc, p, lambda.value()); break;
                case LearnerKind::respo_vh: coeff = respo_policy_coefficient(q, qh, p, lambda.value()); break;
            }
            repr.policy_step(row.obs, row.action, gamma_t * coeff, lr2);

            // REF update (second slowest): bootstrapped target, bare indicator
            // at an absorbing termination.
            if (uses_ref && !cfg.clamp_ref_to_oracle) {
                double ind_now = row.costs[0] > 0.0 ? 1.0 : 0.0;
                double target;
                if (last && ro.ended_absorbing)
                    target = std::max(ind_now, ro.final_state_cost > 0.0 ? 1.0 : 0.0);
                else
                    target = std::max(ind_now, cfg.gamma_ref * repr.ref(obs2));
                repr.ref_step(row.obs, target, lr3);
            }

            // Multiplier update (slowest).
            if (scalar_multiplier) {
                double drive = 0.0;
                switch (kind) {
                    case LearnerKind::scalar_lagrangian:
                        // chi is a per-episode discounted budget, directly on
                        // the scale of the sampled cost critic.
                        drive = repr.q(kCriticCost, row.obs, row.action) - cfg.chi;
                        break;
                    case LearnerKind::cbf: drive = repr.q(kCriticAux, row.obs, row.action); break;
                    case LearnerKind::respo:
                        drive = repr.q(kCriticCost, row.obs, row.action) * (1.0 - repr.ref(row.obs));
                        break;
                    case LearnerKind::respo_vh:
                        drive = repr.q(kCriticAux, row.obs, row.action) * (1.0 - repr.ref(row.obs));
                        break;
                    default: break;
                }
                lambda.ascend(drive, lr4);
            } else if (state_multiplier) {
                double drive = kind == LearnerKind::fac ? repr.q(kCriticCost, row.obs, row.action)
                                                        : repr.q(kCriticAux, row.obs, row.action);
                repr.state_lambda_step(row.obs, drive, lr4);
                visited_lambda_mean += 0.001 * (repr.state_lambda(row.obs) - visited_lambda_mean);
            }
            gamma_t *= cfg.gamma;
        }

        // Absorbing tail: a synthetic self-loop update keeps the critics and
        // REF consistent with the infinite-horizon values.
        if constexpr (kMdpEnv) {
            if (ro.ended_absorbing && n_rows > 0) {
                const FiniteMdp& m = env.mdp();
                int sf = ro.final_state;
                auto of = ro.final_obs;
                repr.q_step(kCriticReward, of, boot_action,
                            m.r(sf, boot_action) + cfg.gamma * repr.q(kCriticReward, of, boot_action), lr1);
                if (uses_cost_critic)
                    repr.q_step(kCriticCost, of, boot_action,
                                m.cost[sf] + cfg.gamma * repr.q(kCriticCost, of, boot_action), lr1);
                if (uses_aux_critic && kind != LearnerKind::cbf)
                    repr.q_step(kCriticAux, of, boot_action,
                                std::max(m.cost[sf], cfg.gamma_h * repr.q(kCriticAux, of, boot_action)), lr1);
                if (uses_ref && !cfg.clamp_ref_to_oracle)
                    repr.ref_step(of, m.violating(sf) ? 1.0 : 0.0, lr3);
            }
        }

        // Divergence guard.
        double mag = std::max(repr.max_abs_param(), std::abs(lambda.omega));
        if (!std::isfinite(mag) || mag > cfg.divergence_limit) {
            result.diverged = true;
            result.diverged_iter = k;
            break;
        }

        auto train_stats = detail::episode_stats(env, ro, cfg.gamma);
        if (k % cfg.eval_every == 0 || k + 1 == cfg.iterations) eval_snapshot = run_eval(k);

        MetricRow row = eval_snapshot;
        row.iter = k;
        row.train_reward = train_stats.reward_sum;
        row.train_violations = train_stats.violations;
        row.train_cost_disc = train_stats.cost_disc;
        row.lambda = current_lambda();
        result.metrics.push_back(row);
    }

    result.final_lambda = current_lambda();
    result.final_eval = eval_snapshot;
    return result;
}

inline TabularRepr make_tabular_repr(const FiniteMdp& mdp, const TrainerConfig& cfg) {
    return TabularRepr(mdp.n_states, mdp.n_actions, cfg.theta_box, cfg.lambda_max, cfg.p_init);
}

}  // namespace respo
