#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "respo/mdp.hpp"
#include "respo/rng.hpp"

namespace respo {

inline constexpr int kMaxCostChannels = 3;

template <class State>
struct EnvStep {
    State next{};
    double reward = 0.0;
    // Per-step cost channels consumed by critics, REF targets, and metrics.
    std::array<double, kMaxCostChannels> costs{0.0, 0.0, 0.0};
    // Safety loss evaluated at the pre- and post-step states (CBF surrogate).
    double cost_state_now = 0.0;
    double cost_state_next = 0.0;
    bool done = false;
};

// Simulation adapter over a FiniteMdp. Row cost is the safety loss of the
// current state, matching the cost-return and REF definitions.
class MdpEnv {
public:
    using State = int;

    explicit MdpEnv(const FiniteMdp& mdp) : mdp_(&mdp) {}

    const FiniteMdp& mdp() const { return *mdp_; }
    int n_actions() const { return mdp_->n_actions; }
    int horizon() const { return mdp_->horizon; }
    int n_cost_channels() const { return 1; }
    double dt() const { return 1.0; }

    State reset(StreamRng& rng) const { return rng.categorical(mdp_->initial_distribution); }

    EnvStep<State> step(State s, int a, StreamRng& rng) const {
        EnvStep<State> out;
        out.next = rng.categorical({mdp_->row(s, a), static_cast<std::size_t>(mdp_->n_states)});
        out.reward = mdp_->r(s, a);
        out.costs[0] = mdp_->cost[s];
        out.cost_state_now = mdp_->cost[s];
        out.cost_state_next = mdp_->cost[out.next];
        out.done = mdp_->absorbing[out.next] != 0;
        return out;
    }

    bool start_absorbed(State s) const { return mdp_->absorbing[s] != 0; }

    // Value of sitting in an absorbing state forever, discounted from its
    // first step (reward channel, cost channel).
    std::array<double, 2> absorbing_tail(State s, double gamma) const {
        if (!mdp_->absorbing[s]) return {0.0, 0.0};
        return {mdp_->r(s, 0) / (1.0 - gamma), mdp_->cost[s] / (1.0 - gamma)};
    }

private:
    const FiniteMdp* mdp_;
};

}  // namespace respo
