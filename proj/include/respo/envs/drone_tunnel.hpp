#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "respo/envs/env_core.hpp"
#include "respo/rng.hpp"

namespace respo {

// Two velocity-commanded planar agents crossing a single-width tunnel in a
// horizontal wall band. Cost channels per step:
//   [0] hc1: a drone touched (attempted to enter) the wall band,
//   [1] hc2: post-move pairwise distance below d_min,
//   [2] sc : post-move pairwise distance above d_max.
// hc2 and sc are mutually exclusive because d_min < d_max.
struct DroneTunnelSpec {
    double world = 4.0;                     // positions live in [0, world]^2
    double wall_y_lo = 1.85, wall_y_hi = 2.15;
    double gap_x_lo = 1.6, gap_x_hi = 2.4;  // tunnel opening
    std::array<double, 2> start1{1.7, 0.8}, start2{2.3, 0.8};
    std::array<double, 2> goal1{2.3, 3.2}, goal2{1.7, 3.2};
    double vmax = 0.45;
    double dt = 0.5;
    double progress_coeff = 1.0;  // reward per unit of distance-to-goal reduction
    double time_penalty = 0.01;
    double d_min = 0.5, d_max = 0.8;
    int horizon = 64;
};

class DroneTunnelEnv {
public:
    using State = std::array<double, 4>;  // x1, y1, x2, y2

    explicit DroneTunnelEnv(const DroneTunnelSpec& spec) : spec_(spec) {
        if (!(spec.d_min < spec.d_max)) throw std::invalid_argument("drone tunnel: d_min must be below d_max");
        if (spec.vmax * spec.dt >= spec.wall_y_hi - spec.wall_y_lo)
            throw std::invalid_argument("drone tunnel: per-step move must not cross the wall band");
    }

    const DroneTunnelSpec& spec() const { return spec_; }
    // Per-drone per-axis commands in {-vmax, 0, +vmax}: 9 x 9 joint actions.
    int n_actions() const { return 81; }
    int horizon() const { return spec_.horizon; }
    int n_cost_channels() const { return 3; }
    double dt() const { return spec_.dt; }

    std::array<double, 4> action_velocities(int idx) const {
        if (idx < 0 || idx >= 81) throw std::out_of_range("drone tunnel: action index");
        auto level = [&](int code) { return (code - 1) * spec_.vmax; };
        int a1 = idx / 9, a2 = idx % 9;
        return {level(a1 / 3), level(a1 % 3), level(a2 / 3), level(a2 % 3)};
    }

    bool in_wall(double x, double y) const {
        return y >= spec_.wall_y_lo && y <= spec_.wall_y_hi && (x < spec_.gap_x_lo || x > spec_.gap_x_hi);
    }

    State reset(StreamRng&) const {
        return {spec_.start1[0], spec_.start1[1], spec_.start2[0], spec_.start2[1]};
    }

    EnvStep<State> step(const State& s, int action_idx, StreamRng&) const {
        for (double v : s)
            if (!std::isfinite(v)) throw std::invalid_argument("drone tunnel: non-finite state");
        auto vel = action_velocities(action_idx);
        EnvStep<State> out;
        double wall_hits = 0.0;
        State next;
        for (int i = 0; i < 2; ++i) {
            double x = s[2 * i], y = s[2 * i + 1];
            double nx = clamp_world(x + vel[2 * i] * spec_.dt);
            double ny = clamp_world(y + vel[2 * i + 1] * spec_.dt);
            if (in_wall(nx, ny)) {
                wall_hits += 1.0;
                ny = y;  // slide along the wall face
                if (in_wall(nx, ny)) nx = x;
            }
            next[2 * i] = nx;
            next[2 * i + 1] = ny;
        }
        out.next = next;

        double prev_dist = goal_distance(s);
        double new_dist = goal_distance(next);
        out.reward = spec_.progress_coeff * (prev_dist - new_dist) - spec_.time_penalty;

        double d = pair_distance(next);
        out.costs[0] = wall_hits;
        out.costs[1] = d < spec_.d_min ? 1.0 : 0.0;
        out.costs[2] = d > spec_.d_max ? 1.0 : 0.0;
        out.cost_state_now = pair_distance(s) < spec_.d_min ? 1.0 : 0.0;
        out.cost_state_next = out.costs[1];
        out.done = false;
        return out;
    }

    double pair_distance(const State& s) const { return std::hypot(s[0] - s[2], s[1] - s[3]); }

    double goal_distance(const State& s) const {
        return std::hypot(s[0] - spec_.goal1[0], s[1] - spec_.goal1[1]) +
               std::hypot(s[2] - spec_.goal2[0], s[3] - spec_.goal2[1]);
    }

    bool start_absorbed(const State&) const { return false; }
    std::array<double, 2> absorbing_tail(const State&, double) const { return {0.0, 0.0}; }

private:
    double clamp_world(double v) const { return std::min(std::max(v, 0.0), spec_.world); }

    DroneTunnelSpec spec_;
};

}  // namespace respo
