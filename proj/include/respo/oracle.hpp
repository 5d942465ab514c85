#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "respo/mdp.hpp"
#include "respo/policy.hpp"
#include "respo/rng.hpp"
#include "respo/trajectory.hpp"

namespace respo {

enum class Signal { reward, cost };

inline constexpr double kTieTol = 1e-9;

namespace detail {

inline double signal_value(const FiniteMdp& m, Signal sig, int s, int a) {
    return sig == Signal::reward ? m.r(s, a) : m.cost[s];
}

// Per-(state,action) successor lists; dense kernels are mostly sparse here
// (gridworlds, discretized dynamics), and iteration dominates the oracle cost.
struct SparseKernel {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // [s*A+a]

    explicit SparseKernel(const FiniteMdp& m) : n_states(m.n_states), n_actions(m.n_actions) {
        rows.resize(static_cast<std::size_t>(n_states) * n_actions);
        for (int s = 0; s < n_states; ++s)
            for (int a = 0; a < n_actions; ++a) {
                auto& row = rows[static_cast<std::size_t>(s) * n_actions + a];
                for (int s2 = 0; s2 < n_states; ++s2) {
                    double p = m.p(s, a, s2);
                    if (p > 0.0) row.emplace_back(s2, p);
                }
            }
    }
    const std::vector<std::pair<int, double>>& row(int s, int a) const {
        return rows[static_cast<std::size_t>(s) * n_actions + a];
    }
    double expect(int s, int a, const std::vector<double>& v) const {
        double e = 0.0;
        for (const auto& [s2, p] : row(s, a)) e += p * v[s2];
        return e;
    }
};

}  // namespace detail

// Exact policy evaluation: V = sig_pi + gamma * P_pi V. Uses a dense LU solve
// up to 2000 states and fixed-point iteration beyond that.
inline std::vector<double> policy_eval(const FiniteMdp& mdp, const DiscretePolicy& pi, Signal sig,
                                       double tol = 1e-10, long max_iters = 2000000) {
    const int n = mdp.n_states;
    if (pi.n_states != n || pi.n_actions != mdp.n_actions)
        throw std::invalid_argument("policy_eval: policy shape does not match the MDP");
    std::vector<double> rpi(n, 0.0);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) rpi[s] += pi.at(s, a) * detail::signal_value(mdp, sig, s, a);

    if (n <= 2000) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < mdp.n_actions; ++a) {
                double w = pi.at(s, a);
                if (w == 0.0) continue;
                for (int s2 = 0; s2 < n; ++s2) A(s, s2) -= mdp.discount * w * mdp.p(s, a, s2);
            }
        Eigen::VectorXd b(n);
        for (int s = 0; s < n; ++s) b(s) = rpi[s];
        Eigen::VectorXd v = A.partialPivLu().solve(b);
        return std::vector<double>(v.data(), v.data() + n);
    }

    detail::SparseKernel kernel(mdp);
    std::vector<double> v(n, 0.0), nv(n, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double x = rpi[s];
            for (int a = 0; a < mdp.n_actions; ++a) {
                double w = pi.at(s, a);
                if (w > 0.0) x += mdp.discount * w * kernel.expect(s, a, v);
            }
            nv[s] = x;
            delta = std::max(delta, std::abs(nv[s] - v[s]));
        }
        v.swap(nv);
        if (delta <= tol) return v;
    }
    throw std::runtime_error("policy_eval: iteration did not converge");
}

inline std::vector<double> q_from_v(const FiniteMdp& mdp, const std::vector<double>& v, Signal sig) {
    std::vector<double> q(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double e = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) e += mdp.p(s, a, s2) * v[s2];
            q[static_cast<std::size_t>(s) * mdp.n_actions + a] = detail::signal_value(mdp, sig, s, a) + mdp.discount * e;
        }
    return q;
}

// One application of the REF Bellman operator
//   B[p](s) = max{ 1_{cost(s)>0}, ref_discount * E_{s'~pi,P}[p(s')] }.
inline std::vector<double> ref_bellman_apply(const FiniteMdp& mdp, const DiscretePolicy& pi, double ref_discount,
                                             const std::vector<double>& p) {
    std::vector<double> out(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double e = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double w = pi.at(s, a);
            if (w == 0.0) continue;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) e += w * mdp.p(s, a, s2) * p[s2];
        }
        out[s] = std::max(mdp.violating(s) ? 1.0 : 0.0, ref_discount * e);
    }
    return out;
}

// Fixed point of the REF Bellman operator. For ref_discount < 1 the operator
// is a contraction and the fixed point is unique; for ref_discount = 1 the
// least fixed point (the exact reach probability) is obtained by monotone
// iteration from the violation indicator.
inline std::vector<double> ref_fixed_point(const FiniteMdp& mdp, const DiscretePolicy& pi, double ref_discount,
                                           double tol = 1e-12, long max_iters = 2000000) {
    if (!(ref_discount > 0.0 && ref_discount <= 1.0))
        throw std::invalid_argument("ref_fixed_point: ref_discount must be in (0,1]");
    detail::SparseKernel kernel(mdp);
    std::vector<double> p(mdp.n_states, 0.0);
    if (ref_discount == 1.0)
        for (int s = 0; s < mdp.n_states; ++s) p[s] = mdp.violating(s) ? 1.0 : 0.0;
    std::vector<double> np(mdp.n_states, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            double e = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double w = pi.at(s, a);
                if (w > 0.0) e += w * kernel.expect(s, a, p);
            }
            np[s] = std::max(mdp.violating(s) ? 1.0 : 0.0, ref_discount * e);
            delta = std::max(delta, std::abs(np[s] - p[s]));
        }
        p.swap(np);
        if (delta <= tol) return p;
    }
    throw std::runtime_error("ref_fixed_point: iteration did not converge");
}

struct SafestPolicyResult {
    std::vector<int> actions;              // tie-broken representative
    std::vector<double> v_c_star;          // minimal cost value per state
    std::vector<std::vector<int>> optimal_action_sets;  // cost-optimal actions within kTieTol
};

namespace detail {

inline std::vector<double> min_cost_value(const FiniteMdp& mdp, const SparseKernel& kernel, double tol,
                                          long max_iters) {
    std::vector<double> v(mdp.n_states, 0.0), nv(mdp.n_states, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) best = std::min(best, kernel.expect(s, a, v));
            nv[s] = mdp.cost[s] + mdp.discount * best;
            delta = std::max(delta, std::abs(nv[s] - v[s]));
        }
        v.swap(nv);
        if (delta <= tol) return v;
    }
    throw std::runtime_error("safest_policy: value iteration did not converge");
}

// Least fixed point of phi(s) = max{ 1_v(s), min over allowed actions of
// E[phi(s')] } - the minimal reach probability within restricted action sets.
inline std::vector<double> min_reach_probability(const FiniteMdp& mdp, const SparseKernel& kernel,
                                                 const std::vector<std::vector<int>>& allowed, double ref_discount,
                                                 double tol, long max_iters) {
    std::vector<double> p(mdp.n_states, 0.0);
    if (ref_discount == 1.0)
        for (int s = 0; s < mdp.n_states; ++s) p[s] = mdp.violating(s) ? 1.0 : 0.0;
    std::vector<double> np(mdp.n_states, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (int a : allowed[s]) best = std::min(best, kernel.expect(s, a, p));
            np[s] = std::max(mdp.violating(s) ? 1.0 : 0.0, ref_discount * best);
            delta = std::max(delta, std::abs(np[s] - p[s]));
        }
        p.swap(np);
        if (delta <= tol) return p;
    }
    throw std::runtime_error("min_reach_probability: iteration did not converge");
}

}  // namespace detail

// Cost-minimizing policy with a reproducible tie-break: among actions whose
// cost backup ties with the minimum, pick the one minimizing the expected
// successor reach probability (least fixed point over the tied action sets),
// lowest action index last.
inline SafestPolicyResult safest_policy(const FiniteMdp& mdp, double tol = 1e-10, long max_iters = 2000000) {
    detail::SparseKernel kernel(mdp);
    SafestPolicyResult out;
    out.v_c_star = detail::min_cost_value(mdp, kernel, tol, max_iters);
    out.optimal_action_sets.resize(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> backup(mdp.n_actions);
        for (int a = 0; a < mdp.n_actions; ++a) {
            backup[a] = mdp.cost[s] + mdp.discount * kernel.expect(s, a, out.v_c_star);
            best = std::min(best, backup[a]);
        }
        for (int a = 0; a < mdp.n_actions; ++a)
            if (backup[a] <= best + kTieTol) out.optimal_action_sets[s].push_back(a);
    }
    std::vector<double> phi =
        detail::min_reach_probability(mdp, kernel, out.optimal_action_sets, 1.0, 1e-12, max_iters);
    out.actions.resize(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        double best = std::numeric_limits<double>::infinity();
        int pick = out.optimal_action_sets[s].front();
        for (int a : out.optimal_action_sets[s]) {
            double e = kernel.expect(s, a, phi);
            if (e < best - 1e-12) {
                best = e;
                pick = a;
            }
        }
        out.actions[s] = pick;
    }
    return out;
}

struct OracleParams {
    double ref_discount_learner = 0.99;  // discounted REF the learner targets
    double tol_feasible = 1e-6;
    double tol = 1e-10;
    long max_iters = 2000000;
};

struct OracleSolution {
    std::vector<double> v_safest_reward;   // reward value of the safest policy
    std::vector<double> v_c_star;          // minimal cost value
    std::vector<int> safest_actions;
    std::vector<std::vector<int>> safest_action_sets;
    std::vector<double> phi_star;          // optimal REF, ref_discount = 1 (exact)
    std::vector<double> phi_star_learner;  // optimal REF at the learner's discount
    std::vector<std::uint8_t> feasible;    // phi_star <= tol_feasible
    bool feasible_nonempty = false;
    std::vector<double> constrained_v;       // best zero-violation reward on feasible states (NaN elsewhere)
    std::vector<int> constrained_actions;    // -1 outside the feasible set
};

struct ConstrainedReference {
    bool feasible_nonempty = false;
    std::vector<double> value;        // NaN outside the feasible set
    std::vector<int> actions;         // -1 outside
    std::vector<std::uint8_t> mask;   // closure-refined feasible set actually used
    int dropped_from_mask = 0;        // tolerance stragglers removed by closure
};

// Best strictly-zero-violation reward: restrict feasible states to actions
// whose whole successor support stays feasible, then value-iterate reward.
// With an exact-zero mask every feasible state keeps its safest action; a
// tolerance mask can contain boundary stragglers with no closed action, which
// are peeled off until the remaining set is controlled-invariant.
inline ConstrainedReference constrained_optimal_reference(const FiniteMdp& mdp,
                                                          const std::vector<std::uint8_t>& feasible,
                                                          double tol = 1e-10, long max_iters = 2000000) {
    ConstrainedReference out;
    out.value.assign(mdp.n_states, std::numeric_limits<double>::quiet_NaN());
    out.actions.assign(mdp.n_states, -1);
    out.mask = feasible;
    detail::SparseKernel kernel(mdp);
    std::vector<std::vector<int>> allowed(mdp.n_states);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < mdp.n_states; ++s) {
            if (!out.mask[s]) continue;
            allowed[s].clear();
            for (int a = 0; a < mdp.n_actions; ++a) {
                bool ok = true;
                for (const auto& [s2, p] : kernel.row(s, a))
                    if (p > 0.0 && !out.mask[s2]) {
                        ok = false;
                        break;
                    }
                if (ok) allowed[s].push_back(a);
            }
            if (allowed[s].empty()) {
                out.mask[s] = 0;
                ++out.dropped_from_mask;
                changed = true;
            }
        }
    }
    for (int s = 0; s < mdp.n_states; ++s)
        if (out.mask[s]) out.feasible_nonempty = true;
    if (!out.feasible_nonempty) return out;

    std::vector<double> v(mdp.n_states, 0.0), nv(mdp.n_states, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            if (!out.mask[s]) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a : allowed[s]) best = std::max(best, mdp.r(s, a) + mdp.discount * kernel.expect(s, a, v));
            nv[s] = best;
            delta = std::max(delta, std::abs(nv[s] - v[s]));
        }
        v.swap(nv);
        if (delta <= tol) break;
        if (it + 1 == max_iters) throw std::runtime_error("constrained_optimal_reference: no convergence");
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        if (!out.mask[s]) continue;
        out.value[s] = v[s];
        double best = -std::numeric_limits<double>::infinity();
        for (int a : allowed[s]) {
            double b = mdp.r(s, a) + mdp.discount * kernel.expect(s, a, v);
            if (b > best + 1e-12) {
                best = b;
                out.actions[s] = a;
            }
        }
    }
    return out;
}

inline OracleSolution compute_oracle(const FiniteMdp& mdp, const OracleParams& params = {}) {
    OracleSolution sol;
    SafestPolicyResult sp = safest_policy(mdp, params.tol, params.max_iters);
    sol.v_c_star = std::move(sp.v_c_star);
    sol.safest_actions = std::move(sp.actions);
    sol.safest_action_sets = std::move(sp.optimal_action_sets);

    DiscretePolicy safest = DiscretePolicy::deterministic(sol.safest_actions, mdp.n_actions);
    sol.phi_star = ref_fixed_point(mdp, safest, 1.0, 1e-12, params.max_iters);
    sol.phi_star_learner = ref_fixed_point(mdp, safest, params.ref_discount_learner, 1e-12, params.max_iters);
    sol.v_safest_reward = policy_eval(mdp, safest, Signal::reward, params.tol, params.max_iters);

    sol.feasible.assign(mdp.n_states, 0);
    for (int s = 0; s < mdp.n_states; ++s) sol.feasible[s] = sol.phi_star[s] <= params.tol_feasible ? 1 : 0;

    ConstrainedReference ref = constrained_optimal_reference(mdp, sol.feasible, params.tol, params.max_iters);
    sol.feasible = ref.mask;  // closure-refined: every feasible state keeps an admissible action
    sol.feasible_nonempty = ref.feasible_nonempty;
    sol.constrained_v = std::move(ref.value);
    sol.constrained_actions = std::move(ref.actions);
    return sol;
}

// Reachability value function V_h(s) = max{h(s), gamma_h * V_h(succ(s))} for a
// deterministic MDP under a deterministic policy. Rejects stochastic inputs:
// the max-Bellman recursion has no expectation form.
inline std::vector<double> reachability_value(const FiniteMdp& mdp, const std::vector<int>& det_actions,
                                              double gamma_h = 1.0, long max_iters = 2000000) {
    if (!(gamma_h > 0.0 && gamma_h <= 1.0)) throw std::invalid_argument("reachability_value: gamma_h in (0,1]");
    std::vector<int> succ(mdp.n_states, -1);
    for (int s = 0; s < mdp.n_states; ++s) {
        int a = det_actions[s];
        if (a < 0 || a >= mdp.n_actions) throw std::invalid_argument("reachability_value: action out of range");
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
            double p = mdp.p(s, a, s2);
            if (p > 0.0) {
                if (p < 1.0 - 1e-12)
                    throw std::invalid_argument(
                        "reachability_value: stochastic transition at state " + std::to_string(s) +
                        "; the max-Bellman reachability backup is only defined for deterministic systems");
                succ[s] = s2;
            }
        }
    }
    std::vector<double> v(mdp.cost), nv(mdp.n_states, 0.0);
    for (long it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            nv[s] = std::max(mdp.cost[s], gamma_h * v[succ[s]]);
            delta = std::max(delta, std::abs(nv[s] - v[s]));
        }
        v.swap(nv);
        if (delta <= 1e-12) return v;
    }
    throw std::runtime_error("reachability_value: iteration did not converge");
}

struct ReentryCertificate {
    bool applicable = false;      // false when no policy reaches the feasible set
    int m = 0;                    // 1 + shortest step count to the feasible set
    bool has_non_entering = false;
    long w = -1;                  // max gap between violations on the min-cost non-entering path
    double lhs = 0.0;             // upper bound on the cost of entering
    double rhs = 0.0;             // lower bound on the cost of never entering
    bool satisfied = false;
};

// Evaluates the re-entry inequality
//   H_max (1 - gamma^{m-1}) / (1 - gamma)  <  H_min gamma^w / (1 - gamma^w)
// on a deterministic MDP: when it holds, a cost-minimizing policy from `state`
// prefers entering the feasible set over violating forever.
inline ReentryCertificate reentry_certificate(const FiniteMdp& mdp, int state, double gamma,
                                              const std::vector<std::uint8_t>& feasible) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("reentry_certificate: gamma in (0,1)");
    const int n = mdp.n_states;
    std::vector<int> succ(static_cast<std::size_t>(n) * mdp.n_actions, -1);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (int s2 = 0; s2 < n; ++s2) {
                double p = mdp.p(s, a, s2);
                if (p > 0.0) {
                    if (p < 1.0 - 1e-12)
                        throw std::invalid_argument("reentry_certificate: MDP must be deterministic");
                    succ[static_cast<std::size_t>(s) * mdp.n_actions + a] = s2;
                }
            }

    ReentryCertificate cert;
    // BFS for the shortest entering path.
    {
        std::vector<int> dist(n, -1);
        std::vector<int> queue;
        if (feasible[state]) {
            cert.m = 1;
        } else {
            dist[state] = 0;
            queue.push_back(state);
            for (std::size_t qi = 0; qi < queue.size() && cert.m == 0; ++qi) {
                int s = queue[qi];
                for (int a = 0; a < mdp.n_actions; ++a) {
                    int s2 = succ[static_cast<std::size_t>(s) * mdp.n_actions + a];
                    if (feasible[s2]) {
                        cert.m = dist[s] + 2;  // m-1 steps to enter
                        break;
                    }
                    if (dist[s2] < 0) {
                        dist[s2] = dist[s] + 1;
                        queue.push_back(s2);
                    }
                }
            }
        }
        if (cert.m == 0) return cert;  // not applicable: feasible set unreachable
        cert.applicable = true;
    }

    const double h_max = mdp.h_max();
    const double h_min = mdp.h_min();
    cert.lhs = h_max * (1.0 - std::pow(gamma, cert.m - 1)) / (1.0 - gamma);

    // Non-entering subgraph: keep only actions whose successor stays
    // infeasible, pruning states that are forced to enter.
    std::vector<std::uint8_t> alive(n, 0);
    for (int s = 0; s < n; ++s) alive[s] = feasible[s] ? 0 : 1;
    bool changed = true;
    auto has_move = [&](int s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            int s2 = succ[static_cast<std::size_t>(s) * mdp.n_actions + a];
            if (alive[s2]) return true;
        }
        return false;
    };
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s)
            if (alive[s] && !has_move(s)) {
                alive[s] = 0;
                changed = true;
            }
    }
    if (!alive[state]) {
        // Every continuation from `state` is eventually forced into the
        // feasible set; not entering is impossible.
        cert.has_non_entering = false;
        cert.rhs = std::numeric_limits<double>::infinity();
        cert.satisfied = true;
        return cert;
    }
    cert.has_non_entering = true;

    // Min discounted cost among non-entering policies.
    std::vector<double> v(n, 0.0), nv(n, 0.0);
    for (long it = 0; it < 2000000; ++it) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                int s2 = succ[static_cast<std::size_t>(s) * mdp.n_actions + a];
                if (alive[s2]) best = std::min(best, v[s2]);
            }
            nv[s] = mdp.cost[s] + gamma * best;
            delta = std::max(delta, std::abs(nv[s] - v[s]));
        }
        v.swap(nv);
        if (delta <= 1e-12) break;
    }
    std::vector<int> pick(n, -1);
    for (int s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.n_actions; ++a) {
            int s2 = succ[static_cast<std::size_t>(s) * mdp.n_actions + a];
            if (alive[s2] && v[s2] < best - 1e-15) {
                best = v[s2];
                pick[s] = a;
            }
        }
    }

    // Walk the lasso and measure the largest gap between violations.
    std::vector<int> visit_step(n, -1);
    std::vector<int> path;
    int s = state;
    while (visit_step[s] < 0) {
        visit_step[s] = static_cast<int>(path.size());
        path.push_back(s);
        s = succ[static_cast<std::size_t>(s) * mdp.n_actions + pick[s]];
    }
    int cycle_start = visit_step[s];
    int cycle_len = static_cast<int>(path.size()) - cycle_start;
    bool cycle_has_violation = false;
    for (int i = cycle_start; i < static_cast<int>(path.size()); ++i)
        if (mdp.violating(path[i])) cycle_has_violation = true;
    if (!cycle_has_violation) {
        // A violation-free non-entering cycle contradicts the feasible mask;
        // treat as no meaningful lower bound.
        cert.w = -1;
        cert.rhs = std::numeric_limits<double>::infinity();
        cert.satisfied = cert.lhs < cert.rhs;
        return cert;
    }
    std::vector<long> violation_steps;
    long horizon_unroll = static_cast<long>(path.size()) + 3L * cycle_len;
    for (long t = 0; t < horizon_unroll; ++t) {
        int st;
        if (t < static_cast<long>(path.size()))
            st = path[t];
        else
            st = path[cycle_start + static_cast<int>((t - cycle_start) % cycle_len)];
        if (mdp.violating(st)) violation_steps.push_back(t);
    }
    long w = 1;
    for (std::size_t i = 1; i < violation_steps.size(); ++i)
        w = std::max(w, violation_steps[i] - violation_steps[i - 1]);
    cert.w = w;
    cert.rhs = h_min * std::pow(gamma, w) / (1.0 - std::pow(gamma, w));
    cert.satisfied = cert.lhs < cert.rhs;
    return cert;
}

// States reachable from `start` with positive probability under the policy.
inline std::vector<std::uint8_t> reachable_under_policy(const FiniteMdp& mdp, const DiscretePolicy& pi, int start) {
    std::vector<std::uint8_t> seen(mdp.n_states, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (pi.at(s, a) <= 0.0) continue;
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                if (mdp.p(s, a, s2) > 0.0 && !seen[s2]) {
                    seen[s2] = 1;
                    stack.push_back(s2);
                }
        }
    }
    return seen;
}

// Monte-Carlo estimate of the reach probability from one state.
inline double mc_reach_probability(const FiniteMdp& mdp, const DiscretePolicy& pi, int start, int horizon,
                                   long n_trajectories, const RngFactory& factory, std::uint64_t stream_offset = 0) {
    long hits = 0;
    for (long i = 0; i < n_trajectories; ++i) {
        StreamRng rng = factory.episode(stream_offset + static_cast<std::uint64_t>(i));
        // Early exit at the first violation: the indicator max is already 1.
        int s = start;
        bool hit = mdp.violating(s);
        for (int t = 0; t < horizon && !hit; ++t) {
            if (mdp.absorbing[s]) break;
            int a = pi.sample(s, rng);
            s = rng.categorical({mdp.row(s, a), static_cast<std::size_t>(mdp.n_states)});
            hit = mdp.violating(s);
        }
        hits += hit ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n_trajectories);
}

// Collapses each transition row onto its most likely successor (lowest index
// wins ties), yielding the deterministic skeleton used by certificate checks.
inline FiniteMdp modal_deterministic(const FiniteMdp& mdp) {
    FiniteMdp out = mdp;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            int best = 0;
            for (int s2 = 1; s2 < mdp.n_states; ++s2)
                if (mdp.p(s, a, s2) > mdp.p(s, a, best)) best = s2;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) out.p(s, a, s2) = s2 == best ? 1.0 : 0.0;
        }
    return out;
}

// Discounted state occupancy sum_t gamma^t Pr(s_t = s) under the policy.
inline std::vector<double> discounted_occupancy(const FiniteMdp& mdp, const DiscretePolicy& pi) {
    const int n = mdp.n_states;
    if (n > 2000) throw std::invalid_argument("discounted_occupancy: direct solve limited to 2000 states");
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double w = pi.at(s, a);
            if (w == 0.0) continue;
            for (int s2 = 0; s2 < n; ++s2) A(s2, s) -= mdp.discount * w * mdp.p(s, a, s2);
        }
    Eigen::VectorXd b(n);
    for (int s = 0; s < n; ++s) b(s) = mdp.initial_distribution[s];
    Eigen::VectorXd d = A.partialPivLu().solve(b);
    return std::vector<double>(d.data(), d.data() + n);
}

}  // namespace respo
