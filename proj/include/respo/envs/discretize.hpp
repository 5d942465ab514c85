#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "respo/mdp.hpp"
#include "respo/rng.hpp"

namespace respo {

struct DiscretizeSpec {
    std::vector<double> lo, hi;
    std::vector<int> cells;      // per dimension
    int n_mc_samples = 64;       // rollouts per (cell center, action)
    int substeps = 1;            // env steps composed into one model transition
    double discount = 0.99;
    int horizon = 200;
    long max_cells = 50000;
};

struct DiscretizedModel {
    FiniteMdp mdp;
    std::vector<double> lo, hi;
    std::vector<int> cells;
    std::vector<std::string> warnings;

    int dims() const { return static_cast<int>(cells.size()); }

    int n_cells() const {
        long n = 1;
        for (int c : cells) n *= c;
        return static_cast<int>(n);
    }

    double width(int d) const { return (hi[d] - lo[d]) / cells[d]; }

    template <class Point>
    int cell_of(const Point& x) const {
        int idx = 0;
        for (int d = 0; d < dims(); ++d) {
            double v = std::min(std::max(static_cast<double>(x[d]), lo[d]), hi[d]);
            int c = static_cast<int>(std::floor((v - lo[d]) / width(d)));
            c = std::min(std::max(c, 0), cells[d] - 1);
            idx = idx * cells[d] + c;
        }
        return idx;
    }

    std::vector<double> center(int s) const {
        std::vector<double> x(dims());
        for (int d = dims() - 1; d >= 0; --d) {
            int c = s % cells[d];
            s /= cells[d];
            x[d] = lo[d] + (c + 0.5) * width(d);
        }
        return x;
    }
};

// Grids a continuous environment into a FiniteMdp: transition rows are
// estimated from `n_mc_samples` one-step rollouts per (cell center, action);
// costs and rewards are taken at cell centers. Out-of-grid landings clamp to
// the boundary cell.
template <class Env>
DiscretizedModel discretize(const Env& env, const DiscretizeSpec& spec, StreamRng rng) {
    DiscretizedModel model;
    model.lo = spec.lo;
    model.hi = spec.hi;
    model.cells = spec.cells;
    if (spec.lo.size() != spec.hi.size() || spec.lo.size() != spec.cells.size())
        throw std::invalid_argument("discretize: dimension mismatch");
    long n_cells = 1;
    for (int c : spec.cells) {
        if (c < 1) throw std::invalid_argument("discretize: cells must be >= 1");
        n_cells *= c;
    }
    if (n_cells > spec.max_cells) {
        double gib = static_cast<double>(n_cells) * n_cells * env.n_actions() * 8.0 / (1024.0 * 1024.0 * 1024.0);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "discretize: %ld cells exceeds the %ld-cell limit (transition table ~%.1f GiB)",
                      n_cells, spec.max_cells, gib);
        throw std::invalid_argument(buf);
    }
    if (spec.n_mc_samples < 1) throw std::invalid_argument("discretize: n_mc_samples must be >= 1");

    FiniteMdp& m = model.mdp;
    m.n_states = static_cast<int>(n_cells);
    m.n_actions = env.n_actions();
    m.discount = spec.discount;
    m.horizon = spec.horizon;
    m.allocate();

    const int dims = model.dims();
    typename Env::State state{};
    for (int s = 0; s < m.n_states; ++s) {
        auto c = model.center(s);
        for (int d = 0; d < dims; ++d) state[d] = c[d];
        m.cost[s] = env.state_cost(state);
        for (int a = 0; a < m.n_actions; ++a) {
            double reward_sum = 0.0;
            long landed = 0;
            for (int i = 0; i < spec.n_mc_samples; ++i) {
                typename Env::State cur = state;
                for (int k = 0; k < spec.substeps; ++k) {
                    auto step = env.step(cur, a, rng);
                    reward_sum += step.reward / spec.substeps;
                    cur = step.next;
                }
                m.p(s, a, model.cell_of(cur)) += 1.0;
                ++landed;
            }
            if (landed == 0) {
                m.p(s, a, s) = 1.0;
                model.warnings.push_back("cell " + std::to_string(s) + " action " + std::to_string(a) +
                                         ": no sampled transitions, using self-loop");
                continue;
            }
            for (int s2 = 0; s2 < m.n_states; ++s2) m.p(s, a, s2) /= static_cast<double>(landed);
            m.r(s, a) = reward_sum / static_cast<double>(landed);
        }
        m.initial_distribution[s] = 1.0 / n_cells;
    }
    m.validate();
    return model;
}

}  // namespace respo
