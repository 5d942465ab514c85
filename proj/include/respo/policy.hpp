#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "respo/mdp.hpp"
#include "respo/rng.hpp"

namespace respo {

// Stochastic tabular policy: one action distribution per state.
struct DiscretePolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs;  // [s][a]

    DiscretePolicy() = default;
    DiscretePolicy(int states, int actions, double fill)
        : n_states(states), n_actions(actions), probs(static_cast<std::size_t>(states) * actions, fill) {}

    static DiscretePolicy uniform(int states, int actions) {
        return DiscretePolicy(states, actions, 1.0 / actions);
    }

    static DiscretePolicy deterministic(std::span<const int> actions_per_state, int n_actions) {
        DiscretePolicy pi(static_cast<int>(actions_per_state.size()), n_actions, 0.0);
        for (int s = 0; s < pi.n_states; ++s) {
            int a = actions_per_state[s];
            if (a < 0 || a >= n_actions) throw std::invalid_argument("deterministic policy: action out of range");
            pi.at(s, a) = 1.0;
        }
        return pi;
    }

    double at(int s, int a) const { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
    double& at(int s, int a) { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
    std::span<const double> row(int s) const {
        return {probs.data() + static_cast<std::size_t>(s) * n_actions, static_cast<std::size_t>(n_actions)};
    }

    int sample(int s, StreamRng& rng) const { return rng.categorical(row(s)); }

    void validate() const {
        for (int s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                if (at(s, a) < 0.0) throw std::invalid_argument("DiscretePolicy: negative probability");
                sum += at(s, a);
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("DiscretePolicy: row " + std::to_string(s) + " sums to " + std::to_string(sum));
        }
    }

    // True when every row puts all mass (within tol) on one action.
    bool is_deterministic(double tol = 1e-12) const {
        for (int s = 0; s < n_states; ++s) {
            double top = 0.0;
            for (int a = 0; a < n_actions; ++a) top = std::max(top, at(s, a));
            if (top < 1.0 - tol) return false;
        }
        return true;
    }

    std::vector<int> greedy_actions() const {
        std::vector<int> out(n_states, 0);
        for (int s = 0; s < n_states; ++s) {
            int best = 0;
            for (int a = 1; a < n_actions; ++a)
                if (at(s, a) > at(s, best)) best = a;
            out[s] = best;
        }
        return out;
    }
};

inline DiscretePolicy random_policy(int n_states, int n_actions, StreamRng& rng) {
    DiscretePolicy pi(n_states, n_actions, 0.0);
    for (int s = 0; s < n_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            double w = -std::log(1.0 - rng.uniform01());
            pi.at(s, a) = w;
            sum += w;
        }
        for (int a = 0; a < n_actions; ++a) pi.at(s, a) /= sum;
    }
    return pi;
}

inline std::vector<int> random_deterministic_actions(int n_states, int n_actions, StreamRng& rng) {
    std::vector<int> out(n_states);
    for (int& a : out) a = rng.uniform_int(n_actions);
    return out;
}

}  // namespace respo
