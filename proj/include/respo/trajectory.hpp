#pragma once

#include <cmath>
#include <concepts>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "respo/mdp.hpp"
#include "respo/policy.hpp"
#include "respo/rng.hpp"

namespace respo {

template <class State>
struct StepSample {
    State state;
    int action = 0;
    State next_state;
    double reward = 0.0;
    double cost = 0.0;  // safety loss at `state`
};

// Ordered transition record for one episode. `final_state` is the state the
// episode ended in (it is not a row), so reach checks can see it.
template <class State>
struct TrajectoryT {
    std::vector<StepSample<State>> steps;
    State final_state{};
    double final_cost = 0.0;
    bool ended_absorbing = false;

    std::size_t size() const { return steps.size(); }
    bool empty() const { return steps.empty(); }

    double episode_return() const {
        double sum = 0.0;
        for (const auto& st : steps) sum += st.reward;
        return sum;
    }
    double episode_cost_return() const {
        double sum = 0.0;
        for (const auto& st : steps) sum += st.cost;
        return sum;
    }
    int violation_count() const {
        int n = 0;
        for (const auto& st : steps) n += st.cost > 0.0 ? 1 : 0;
        return n;
    }
    // Whether any visited state, including the final one, violates.
    bool ever_violates() const {
        if (final_cost > 0.0) return true;
        return violation_count() > 0;
    }
};

using Trajectory = TrajectoryT<int>;

template <class State>
double discounted_reward_return(const TrajectoryT<State>& tau, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discounted_reward_return: gamma must be in (0,1)");
    double sum = 0.0, g = 1.0;
    for (const auto& st : tau.steps) {
        sum += g * st.reward;
        g *= gamma;
    }
    return sum;
}

template <class State>
double discounted_cost_return(const TrajectoryT<State>& tau, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discounted_cost_return: gamma must be in (0,1)");
    double sum = 0.0, g = 1.0;
    for (const auto& st : tau.steps) {
        sum += g * st.cost;
        g *= gamma;
    }
    return sum;
}

// Rolls an episode in a tabular MDP from `start`. Ends early when an
// absorbing state is reached. The policy callable must return a valid action.
template <class PolicyFn>
    requires std::invocable<PolicyFn&, int, StreamRng&>
Trajectory sample_trajectory_from(const FiniteMdp& mdp, PolicyFn&& policy, int start, int horizon, StreamRng& rng) {
    if (horizon < 1) throw std::invalid_argument("sample_trajectory: horizon must be >= 1");
    if (start < 0 || start >= mdp.n_states) throw std::invalid_argument("sample_trajectory: start state out of range");
    Trajectory tau;
    tau.steps.reserve(static_cast<std::size_t>(horizon));
    int s = start;
    for (int t = 0; t < horizon; ++t) {
        if (mdp.absorbing[s]) {
            tau.ended_absorbing = true;
            break;
        }
        int a = policy(s, rng);
        if (a < 0 || a >= mdp.n_actions)
            throw std::out_of_range("sample_trajectory: policy returned invalid action " + std::to_string(a) +
                                    " at state " + std::to_string(s));
        int s2 = rng.categorical({mdp.row(s, a), static_cast<std::size_t>(mdp.n_states)});
        tau.steps.push_back({s, a, s2, mdp.r(s, a), mdp.cost[s]});
        s = s2;
    }
    tau.final_state = s;
    tau.final_cost = mdp.cost[s];
    if (!tau.ended_absorbing && mdp.absorbing[s]) tau.ended_absorbing = true;
    return tau;
}

template <class PolicyFn>
    requires std::invocable<PolicyFn&, int, StreamRng&>
Trajectory sample_trajectory(const FiniteMdp& mdp, PolicyFn&& policy, int horizon, StreamRng& rng) {
    int start = rng.categorical(mdp.initial_distribution);
    return sample_trajectory_from(mdp, policy, start, horizon, rng);
}

inline Trajectory sample_trajectory_from(const FiniteMdp& mdp, const DiscretePolicy& pi, int start, int horizon,
                                         StreamRng& rng) {
    return sample_trajectory_from(
        mdp, [&pi](int s, StreamRng& r) { return pi.sample(s, r); }, start, horizon, rng);
}

inline Trajectory sample_trajectory(const FiniteMdp& mdp, const DiscretePolicy& pi, int horizon, StreamRng& rng) {
    return sample_trajectory(
        mdp, [&pi](int s, StreamRng& r) { return pi.sample(s, r); }, horizon, rng);
}

inline std::string to_text(const Trajectory& tau) {
    std::ostringstream os;
    for (const auto& st : tau.steps)
        os << st.state << ' ' << st.action << ' ' << st.next_state << ' ' << detail::format_double(st.reward) << ' '
           << detail::format_double(st.cost) << '\n';
    os << "final " << tau.final_state << ' ' << detail::format_double(tau.final_cost) << ' '
       << (tau.ended_absorbing ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace respo
