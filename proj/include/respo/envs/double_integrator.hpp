#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "respo/envs/env_core.hpp"
#include "respo/rng.hpp"

namespace respo {

// Planar double integrator with a box constraint: state (x1, x2), dynamics
// x1' = x1 + x2'*dt, x2' = x2 + a*dt (semi-implicit Euler), |a| <= bound.
// Safety loss is 1 outside the infinity-norm box, 0 inside. Optional bounded
// process noise keeps the stoppable core exactly violation-free.
struct DoubleIntegratorSpec {
    double dt = 0.1;
    double action_bound = 0.5;
    double box = 5.0;
    double reward_coeff = 0.01;  // r(s) = -coeff * min(x1^2 + x2^2, reward_sat^2)
    double reward_sat = 6.0;     // saturation radius keeps rewards R_max-bounded
    int horizon = 200;           // integrator steps per episode
    double noise = 0.0;          // uniform half-width added to both coordinates
    int action_levels = 5;
    int action_repeat = 1;       // integrator steps per decision
    std::array<double, 2> start_lo{2.5, 2.5};
    std::array<double, 2> start_hi{2.5, 2.5};
};

class DoubleIntegratorEnv {
public:
    using State = std::array<double, 2>;

    explicit DoubleIntegratorEnv(const DoubleIntegratorSpec& spec) : spec_(spec) {
        if (!(spec.dt > 0.0)) throw std::invalid_argument("double integrator: dt must be positive");
        if (spec.action_levels < 2) throw std::invalid_argument("double integrator: need >= 2 action levels");
    }

    const DoubleIntegratorSpec& spec() const { return spec_; }
    int n_actions() const { return spec_.action_levels; }
    int horizon() const { return spec_.horizon / spec_.action_repeat; }
    int n_cost_channels() const { return 1; }
    double dt() const { return spec_.dt * spec_.action_repeat; }

    double action_value(int idx) const {
        if (idx < 0 || idx >= spec_.action_levels) throw std::out_of_range("double integrator: action index");
        return -spec_.action_bound + 2.0 * spec_.action_bound * idx / (spec_.action_levels - 1);
    }

    double state_cost(const State& s) const {
        return (std::abs(s[0]) > spec_.box || std::abs(s[1]) > spec_.box) ? 1.0 : 0.0;
    }

    double state_reward(const State& s) const {
        double r2 = s[0] * s[0] + s[1] * s[1];
        return -spec_.reward_coeff * std::min(r2, spec_.reward_sat * spec_.reward_sat);
    }

    State reset(StreamRng& rng) const {
        State s;
        for (int d = 0; d < 2; ++d)
            s[d] = spec_.start_lo[d] == spec_.start_hi[d] ? spec_.start_lo[d]
                                                          : rng.uniform(spec_.start_lo[d], spec_.start_hi[d]);
        return s;
    }

    // One decision: the chosen level held for `action_repeat` integrator
    // steps. Reward and arrival cost accumulate over the sub-steps.
    EnvStep<State> step(const State& s, int action_idx, StreamRng& rng) const {
        double a = action_value(action_idx);
        EnvStep<State> out = step_continuous(s, a, rng);
        for (int k = 1; k < spec_.action_repeat; ++k) {
            EnvStep<State> sub = step_continuous(out.next, a, rng);
            out.next = sub.next;
            out.reward += sub.reward;
            out.costs[0] += sub.costs[0];
            out.cost_state_next = sub.cost_state_next;
        }
        return out;
    }

    EnvStep<State> step_continuous(const State& s, double a, StreamRng& rng) const {
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
            throw std::invalid_argument("double integrator: non-finite state");
        a = std::min(std::max(a, -spec_.action_bound), spec_.action_bound);
        EnvStep<State> out;
        double x2 = s[1] + a * spec_.dt;
        double x1 = s[0] + x2 * spec_.dt;
        if (spec_.noise > 0.0) {
            x1 += rng.uniform(-spec_.noise, spec_.noise);
            x2 += rng.uniform(-spec_.noise, spec_.noise);
        }
        out.next = {x1, x2};
        out.reward = state_reward(s);
        out.cost_state_now = state_cost(s);
        out.cost_state_next = state_cost(out.next);
        out.costs[0] = out.cost_state_next;  // violation incurred by the move
        out.done = false;
        return out;
    }

    bool start_absorbed(const State&) const { return false; }
    std::array<double, 2> absorbing_tail(const State&, double) const { return {0.0, 0.0}; }

private:
    DoubleIntegratorSpec spec_;
};

// Closed-form membership in the stoppable set: from (x1, x2) with full
// braking, the overshoot is x2^2 / (2*bound); the state is persistently safe
// iff the whole braking arc stays inside the box.
inline bool double_integrator_stoppable(double x1, double x2, double bound, double box) {
    if (std::abs(x1) > box || std::abs(x2) > box) return false;
    if (x2 > 0.0) return x1 + x2 * x2 / (2.0 * bound) <= box;
    if (x2 < 0.0) return x1 - x2 * x2 / (2.0 * bound) >= -box;
    return true;
}

}  // namespace respo
