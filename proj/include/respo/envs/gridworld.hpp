#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "respo/mdp.hpp"

namespace respo {

struct GridCell {
    int x = 0;
    int y = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

// Stochastic hazard gridworld. With probability `slip` the chosen action is
// replaced by a uniformly random one, so each off-intent neighbor receives
// slip/4 of the mass. Movement into walls or off the grid stays put.
struct GridWorldSpec {
    int width = 5;
    int height = 5;
    std::vector<GridCell> walls;
    std::vector<std::pair<GridCell, double>> hazards;  // cell -> cost magnitude > 0
    GridCell goal{0, 0};
    double goal_reward = 1.0;
    bool goal_absorbing = true;
    bool hazard_absorbing = false;
    double slip = 0.0;
    std::vector<GridCell> starts;  // empty: uniform over free non-goal cells
    double step_reward = 0.0;
    double discount = 0.99;
    int horizon = 60;
};

struct GridWorld {
    GridWorldSpec spec;
    FiniteMdp mdp;
    std::vector<std::string> warnings;

    int index(int x, int y) const { return y * spec.width + x; }
    int index(GridCell c) const { return index(c.x, c.y); }
    GridCell cell(int s) const { return {s % spec.width, s / spec.width}; }
    bool is_wall(int s) const { return wall_mask_[s] != 0; }

    std::vector<std::uint8_t> wall_mask_;
};

// Actions: 0 = up (y-1), 1 = down (y+1), 2 = left (x-1), 3 = right (x+1).
inline constexpr int kGridActions = 4;
inline constexpr int kGridDx[kGridActions] = {0, 0, -1, 1};
inline constexpr int kGridDy[kGridActions] = {-1, 1, 0, 0};

inline GridWorld build_gridworld(const GridWorldSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw std::invalid_argument("gridworld: empty grid");
    if (!(spec.slip >= 0.0 && spec.slip < 1.0)) throw std::invalid_argument("gridworld: slip must be in [0,1)");
    GridWorld world;
    world.spec = spec;
    const int n = spec.width * spec.height;
    world.wall_mask_.assign(n, 0);
    auto in_bounds = [&](int x, int y) { return x >= 0 && x < spec.width && y >= 0 && y < spec.height; };
    for (const auto& w : spec.walls) {
        if (!in_bounds(w.x, w.y)) throw std::invalid_argument("gridworld: wall out of bounds");
        world.wall_mask_[world.index(w)] = 1;
    }
    if (!in_bounds(spec.goal.x, spec.goal.y)) throw std::invalid_argument("gridworld: goal out of bounds");
    if (world.wall_mask_[world.index(spec.goal)]) throw std::invalid_argument("gridworld: goal cell is a wall");

    FiniteMdp& m = world.mdp;
    m.n_states = n;
    m.n_actions = kGridActions;
    m.discount = spec.discount;
    m.horizon = spec.horizon;
    m.allocate();

    for (const auto& [cell, mag] : spec.hazards) {
        if (!in_bounds(cell.x, cell.y)) throw std::invalid_argument("gridworld: hazard out of bounds");
        if (!(mag > 0.0)) throw std::invalid_argument("gridworld: hazard magnitude must be > 0");
        m.cost[world.index(cell)] = mag;
    }

    const int goal_s = world.index(spec.goal);
    if (spec.goal_absorbing) m.absorbing[goal_s] = 1;
    if (spec.hazard_absorbing)
        for (int s = 0; s < n; ++s)
            if (m.cost[s] > 0.0) m.absorbing[s] = 1;

    auto move = [&](int s, int a) {
        GridCell c = world.cell(s);
        int nx = c.x + kGridDx[a];
        int ny = c.y + kGridDy[a];
        if (!in_bounds(nx, ny) || world.wall_mask_[world.index(nx, ny)]) return s;
        return world.index(nx, ny);
    };

    // Arrival-based reward: r(s,a) is the expected reward of the landing cell
    // (goal_reward at the goal, step_reward elsewhere), so tabulated values
    // agree exactly with the conceptual "reward on reaching the goal".
    auto arrival_reward = [&](int s2) { return s2 == goal_s ? spec.goal_reward : spec.step_reward; };

    for (int s = 0; s < n; ++s) {
        if (m.absorbing[s] || world.wall_mask_[s]) {
            for (int a = 0; a < kGridActions; ++a) {
                m.p(s, a, s) = 1.0;
                m.r(s, a) = world.wall_mask_[s] ? 0.0 : arrival_reward(s);
            }
            continue;
        }
        for (int a = 0; a < kGridActions; ++a) {
            for (int actual = 0; actual < kGridActions; ++actual) {
                double prob = spec.slip / kGridActions + (actual == a ? 1.0 - spec.slip : 0.0);
                m.p(s, a, move(s, actual)) += prob;
            }
            double er = 0.0;
            for (int s2 = 0; s2 < n; ++s2) er += m.p(s, a, s2) * arrival_reward(s2);
            m.r(s, a) = er;
        }
    }

    if (spec.starts.empty()) {
        int free_cells = 0;
        for (int s = 0; s < n; ++s)
            if (!world.wall_mask_[s] && s != goal_s) ++free_cells;
        if (free_cells == 0) throw std::invalid_argument("gridworld: no free start cells");
        for (int s = 0; s < n; ++s)
            if (!world.wall_mask_[s] && s != goal_s) m.initial_distribution[s] = 1.0 / free_cells;
    } else {
        for (const auto& c : spec.starts) {
            if (!in_bounds(c.x, c.y)) throw std::invalid_argument("gridworld: start out of bounds");
            int s = world.index(c);
            if (world.wall_mask_[s]) throw std::invalid_argument("gridworld: start cell is a wall");
            m.initial_distribution[s] += 1.0 / spec.starts.size();
        }
    }
    m.validate();

    // Goal reachability check (warning only): BFS over the move graph.
    {
        std::vector<std::uint8_t> seen(n, 0);
        std::vector<int> stack{goal_s};
        seen[goal_s] = 1;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int a = 0; a < kGridActions; ++a) {
                // reverse reachability: who can move into s
                for (int s0 = 0; s0 < n; ++s0)
                    if (!seen[s0] && !world.wall_mask_[s0] && move(s0, a) == s) {
                        seen[s0] = 1;
                        stack.push_back(s0);
                    }
            }
        }
        for (int s = 0; s < n; ++s)
            if (m.initial_distribution[s] > 0.0 && !seen[s]) {
                world.warnings.push_back("goal unreachable from start cell (" + std::to_string(world.cell(s).x) +
                                         "," + std::to_string(world.cell(s).y) + ")");
            }
    }
    return world;
}

// ---- Benchmark layouts ------------------------------------------------------

// Two rooms split by a wall column whose only opening is the absorbing goal.
// The left room cannot reach the right-room hazards without being absorbed,
// so it is exactly feasible; right-room states carry graded reach risk.
inline GridWorld make_two_room_world(int size, double slip = 0.1) {
    if (size < 5) throw std::invalid_argument("two-room world needs size >= 5");
    GridWorldSpec spec;
    spec.width = size;
    spec.height = size;
    spec.slip = slip;
    int wall_x = 2;
    int mid_y = size / 2;
    for (int y = 0; y < size; ++y)
        if (y != mid_y) spec.walls.push_back({wall_x, y});
    spec.goal = {wall_x, mid_y};
    spec.goal_reward = 1.0;
    spec.hazards = {{{size - 1, 0}, 1.0}, {{size - 1, size - 1}, 1.0}};
    spec.horizon = 8 * size;
    return build_gridworld(spec);
}

// Lava exit corridor with graded costs: a lava block (cost 0.5 per step) whose
// only exit is a single gate cell of cost 1.0, then a clean room with the
// goal. Episodes start inside the lava. Deterministic dynamics.
inline GridWorld make_lava_corridor() {
    GridWorldSpec spec;
    spec.width = 6;
    spec.height = 3;
    spec.slip = 0.0;
    for (int y = 0; y < 3; ++y)
        if (y != 1) spec.walls.push_back({2, y});
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 3; ++y) spec.hazards.push_back({{x, y}, 0.5});
    spec.hazards.push_back({{2, 1}, 1.0});  // gate
    spec.goal = {5, 1};
    spec.goal_reward = 1.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 3; ++y) spec.starts.push_back({x, y});
    spec.horizon = 40;
    return build_gridworld(spec);
}

// Open room where every approach to the goal passes next to hazards and a
// small lava pocket sits in the far corner. With slip, goal-seeking carries
// irreducible expected cost; lava starts are genuinely infeasible.
inline GridWorld make_risky_goal_world(double slip = 0.1) {
    GridWorldSpec spec;
    spec.width = 5;
    spec.height = 5;
    spec.slip = slip;
    spec.goal = {4, 2};
    spec.goal_reward = 1.0;
    spec.hazards = {{{3, 1}, 1.0}, {{3, 3}, 1.0}, {{0, 4}, 0.5}, {{1, 4}, 0.5}};
    spec.horizon = 50;
    return build_gridworld(spec);
}

}  // namespace respo
