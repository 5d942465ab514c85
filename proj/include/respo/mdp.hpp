#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace respo {

inline constexpr double kRowSumTol = 1e-9;

// Tabular MDP with a state-based safety loss. Immutable after finalize();
// shared freely across threads.
struct FiniteMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;            // [s][a][s']
    std::vector<double> reward;                // [s][a]
    std::vector<double> cost;                  // [s], non-negative
    double discount = 0.99;
    std::vector<double> initial_distribution;  // [s]
    int horizon = 100;
    std::vector<std::uint8_t> absorbing;       // [s], explicit episode-ending flags

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    const double* row(int s, int a) const {
        return transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states;
    }
    double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
    double& r(int s, int a) { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
    bool violating(int s) const { return cost[s] > 0.0; }

    void allocate() {
        transition.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
        reward.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
        cost.assign(n_states, 0.0);
        initial_distribution.assign(n_states, 0.0);
        absorbing.assign(n_states, 0);
    }

    // Largest |r|.
    double r_max() const {
        double m = 0.0;
        for (double v : reward) m = std::max(m, std::abs(v));
        return m;
    }
    double h_max() const {
        double m = 0.0;
        for (double v : cost) m = std::max(m, v);
        return m;
    }
    // Minimum nonzero cost; +inf when the MDP is violation-free.
    double h_min() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : cost)
            if (v > 0.0) m = std::min(m, v);
        return m;
    }
    // Minimum nonzero gap between any two cost values (zero included as a value).
    double h_delta() const {
        std::vector<double> vals = cost;
        vals.push_back(0.0);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < vals.size(); ++i) m = std::min(m, vals[i] - vals[i - 1]);
        return m;
    }

    void validate() const {
        if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("FiniteMdp: empty state or action space");
        if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("FiniteMdp: discount must lie in (0,1)");
        if (horizon < 1) throw std::invalid_argument("FiniteMdp: horizon must be >= 1");
        auto expect_size = [](std::size_t got, std::size_t want, const char* what) {
            if (got != want) throw std::invalid_argument(std::string("FiniteMdp: bad table size for ") + what);
        };
        expect_size(transition.size(), static_cast<std::size_t>(n_states) * n_actions * n_states, "transition");
        expect_size(reward.size(), static_cast<std::size_t>(n_states) * n_actions, "reward");
        expect_size(cost.size(), static_cast<std::size_t>(n_states), "cost");
        expect_size(initial_distribution.size(), static_cast<std::size_t>(n_states), "initial_distribution");
        expect_size(absorbing.size(), static_cast<std::size_t>(n_states), "absorbing");
        for (int s = 0; s < n_states; ++s) {
            if (cost[s] < 0.0) throw std::invalid_argument("FiniteMdp: cost must be non-negative (state " + std::to_string(s) + ")");
            for (int a = 0; a < n_actions; ++a) {
                double sum = 0.0;
                for (int s2 = 0; s2 < n_states; ++s2) {
                    double v = p(s, a, s2);
                    if (v < 0.0)
                        throw std::invalid_argument("FiniteMdp: negative transition probability at (" +
                                                    std::to_string(s) + "," + std::to_string(a) + ")");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > kRowSumTol)
                    throw std::invalid_argument("FiniteMdp: transition row (" + std::to_string(s) + "," +
                                                std::to_string(a) + ") sums to " + std::to_string(sum));
            }
            if (absorbing[s]) {
                for (int a = 0; a < n_actions; ++a)
                    if (std::abs(p(s, a, s) - 1.0) > kRowSumTol)
                        throw std::invalid_argument("FiniteMdp: absorbing state " + std::to_string(s) +
                                                    " must self-loop under every action");
            }
        }
        double d0 = 0.0;
        for (double v : initial_distribution) {
            if (v < 0.0) throw std::invalid_argument("FiniteMdp: negative initial probability");
            d0 += v;
        }
        if (std::abs(d0 - 1.0) > kRowSumTol)
            throw std::invalid_argument("FiniteMdp: initial distribution sums to " + std::to_string(d0));
    }

    std::vector<int> initial_support() const {
        std::vector<int> out;
        for (int s = 0; s < n_states; ++s)
            if (initial_distribution[s] > 0.0) out.push_back(s);
        return out;
    }

    // States reachable from the initial support when every action may be
    // exercised (softmax sampling policies have full support).
    std::vector<std::uint8_t> reachable_any_action() const {
        std::vector<std::uint8_t> seen(n_states, 0);
        std::vector<int> stack = initial_support();
        for (int s : stack) seen[s] = 1;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int a = 0; a < n_actions; ++a)
                for (int s2 = 0; s2 < n_states; ++s2)
                    if (p(s, a, s2) > 0.0 && !seen[s2]) {
                        seen[s2] = 1;
                        stack.push_back(s2);
                    }
        }
        return seen;
    }
};

inline std::vector<std::uint8_t> violation_indicator(const FiniteMdp& mdp) {
    std::vector<std::uint8_t> out(mdp.n_states, 0);
    for (int s = 0; s < mdp.n_states; ++s) out[s] = mdp.violating(s) ? 1 : 0;
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Plain-text serialization. Doubles are written with 17 significant digits so
// a load reproduces every field bit-for-bit.
inline std::string to_text(const FiniteMdp& mdp) {
    std::ostringstream os;
    os << "respo-mdp 1\n";
    os << "states " << mdp.n_states << "\n";
    os << "actions " << mdp.n_actions << "\n";
    os << "discount " << detail::format_double(mdp.discount) << "\n";
    os << "horizon " << mdp.horizon << "\n";
    os << "initial";
    for (double v : mdp.initial_distribution) os << ' ' << detail::format_double(v);
    os << "\nabsorbing";
    for (auto v : mdp.absorbing) os << ' ' << int(v);
    os << "\ncost";
    for (double v : mdp.cost) os << ' ' << detail::format_double(v);
    os << "\nreward\n";
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) os << (a ? " " : "") << detail::format_double(mdp.r(s, a));
        os << "\n";
    }
    os << "transition\n";
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            for (int s2 = 0; s2 < mdp.n_states; ++s2) os << (s2 ? " " : "") << detail::format_double(mdp.p(s, a, s2));
            os << "\n";
        }
    os << "end\n";
    return os.str();
}

inline FiniteMdp mdp_from_text(std::istream& in) {
    auto fail = [](const std::string& why) -> void { throw std::runtime_error("FiniteMdp parse error: " + why); };
    std::string tag;
    int version = 0;
    if (!(in >> tag >> version) || tag != "respo-mdp" || version != 1) fail("missing 'respo-mdp 1' header");
    FiniteMdp mdp;
    auto expect = [&](const char* kw) {
        std::string t;
        if (!(in >> t) || t != kw) fail(std::string("expected '") + kw + "'");
    };
    expect("states");
    in >> mdp.n_states;
    expect("actions");
    in >> mdp.n_actions;
    expect("discount");
    in >> mdp.discount;
    expect("horizon");
    in >> mdp.horizon;
    if (!in || mdp.n_states <= 0 || mdp.n_actions <= 0) fail("bad header values");
    mdp.allocate();
    expect("initial");
    for (auto& v : mdp.initial_distribution) in >> v;
    expect("absorbing");
    for (auto& v : mdp.absorbing) {
        int x;
        in >> x;
        v = static_cast<std::uint8_t>(x);
    }
    expect("cost");
    for (auto& v : mdp.cost) in >> v;
    expect("reward");
    for (auto& v : mdp.reward) in >> v;
    expect("transition");
    for (auto& v : mdp.transition) in >> v;
    expect("end");
    if (!in) fail("truncated file");
    mdp.validate();
    return mdp;
}

inline void save_mdp(const FiniteMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << to_text(mdp);
}

inline FiniteMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return mdp_from_text(in);
}

}  // namespace respo
