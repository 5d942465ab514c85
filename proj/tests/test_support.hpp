#pragma once

// Shared generators and independent reference computations for the test
// suite. Everything here is deliberately naive so it can serve as an oracle
// for the library implementations.

#include <algorithm>
#include <cmath>
#include <vector>

#include "respo/mdp.hpp"
#include "respo/rng.hpp"

namespace testsup {

// Kahan-compensated discounted sum, evaluated back-to-front for an
// arbitrary-order cross-check against the library's forward accumulation.
inline double kahan_discounted(const std::vector<double>& xs, double gamma) {
    double sum = 0.0, comp = 0.0;
    for (int t = static_cast<int>(xs.size()) - 1; t >= 0; --t) {
        double term = std::pow(gamma, t) * xs[t] - comp;
        double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

struct RandomMdpOptions {
    int n_states = 8;
    int n_actions = 3;
    double violating_fraction = 0.25;  // expected fraction of states with positive cost
    int support = 0;                   // nonzero: sparse rows with this many successors
    bool add_safe_sink = false;        // make state 0 absorbing and cost-free
    double discount = 0.95;
    int horizon = 200;
};

// Dense (Dirichlet-like) or sparse random MDP.
inline respo::FiniteMdp random_mdp(const RandomMdpOptions& opt, respo::StreamRng& rng) {
    respo::FiniteMdp m;
    m.n_states = opt.n_states;
    m.n_actions = opt.n_actions;
    m.discount = opt.discount;
    m.horizon = opt.horizon;
    m.allocate();
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            if (opt.support > 0) {
                int k = std::min(opt.support, m.n_states);
                std::vector<int> succ;
                while (static_cast<int>(succ.size()) < k) {
                    int c = rng.uniform_int(m.n_states);
                    if (std::find(succ.begin(), succ.end(), c) == succ.end()) succ.push_back(c);
                }
                double total = 0.0;
                std::vector<double> w(succ.size());
                for (auto& v : w) {
                    v = 0.05 + rng.uniform01();
                    total += v;
                }
                for (std::size_t i = 0; i < succ.size(); ++i) m.p(s, a, succ[i]) = w[i] / total;
            } else {
                double total = 0.0;
                for (int s2 = 0; s2 < m.n_states; ++s2) {
                    double v = -std::log(1.0 - rng.uniform01());
                    m.p(s, a, s2) = v;
                    total += v;
                }
                for (int s2 = 0; s2 < m.n_states; ++s2) m.p(s, a, s2) /= total;
            }
            m.r(s, a) = rng.uniform(-1.0, 1.0);
        }
        if (rng.uniform01() < opt.violating_fraction) m.cost[s] = 0.25 + rng.uniform01();
    }
    if (opt.add_safe_sink) {
        int sink = 0;
        m.cost[sink] = 0.0;
        m.absorbing[sink] = 1;
        for (int a = 0; a < m.n_actions; ++a) {
            for (int s2 = 0; s2 < m.n_states; ++s2) m.p(sink, a, s2) = 0.0;
            m.p(sink, a, sink) = 1.0;
            m.r(sink, a) = 0.0;
        }
    }
    double d0 = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
        m.initial_distribution[s] = 0.1 + rng.uniform01();
        d0 += m.initial_distribution[s];
    }
    for (int s = 0; s < m.n_states; ++s) m.initial_distribution[s] /= d0;
    m.validate();
    return m;
}

}  // namespace testsup
