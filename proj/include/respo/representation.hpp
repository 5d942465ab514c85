#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "respo/rng.hpp"
#include "respo/tiles.hpp"

namespace respo {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(std::max(y, 1e-12))); }
inline double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Critic slots: single-constraint learners use reward/cost/aux (aux holds the
// reachability or CBF surrogate); the multi-constraint learner uses four.
inline constexpr int kCriticReward = 0;
inline constexpr int kCriticCost = 1;
inline constexpr int kCriticAux = 2;

// Tabular function store: softmax policy logits, Q tables, REF table, and a
// per-state multiplier table. All updates move toward TD targets in place.
class TabularRepr {
public:
    using Obs = int;

    TabularRepr() = default;
    TabularRepr(int n_states, int n_actions, double theta_box, double lambda_max, double p_init, int n_critics = 3,
                int n_refs = 1, double lambda_init = 0.0)
        : n_states_(n_states),
          n_actions_(n_actions),
          theta_box_(theta_box),
          lambda_max_(lambda_max),
          q_(n_critics, std::vector<double>(static_cast<std::size_t>(n_states) * n_actions, 0.0)),
          p_(n_refs, std::vector<double>(n_states, p_init)),
          logits_(static_cast<std::size_t>(n_states) * n_actions, 0.0),
          lambda_s_(n_states, std::min(lambda_init, lambda_max)) {}

    int n_actions() const { return n_actions_; }
    int n_states() const { return n_states_; }

    Obs obs(int state) const { return state; }

    double q(int which, Obs s, int a) const { return q_[which][idx(s, a)]; }
    void q_step(int which, Obs s, int a, double target, double lr) {
        auto& tab = q_[which];
        tab[idx(s, a)] -= lr * (tab[idx(s, a)] - target);
    }

    double ref(Obs s, int which = 0) const { return p_[which][s]; }
    void ref_step(Obs s, double target, double lr, int which = 0) {
        auto& p = p_[which][s];
        p -= lr * (p - target);
        p = std::min(std::max(p, 0.0), 1.0);
    }
    void set_ref_table(std::span<const double> phi, int which = 0) {
        if (static_cast<int>(phi.size()) != n_states_) throw std::invalid_argument("set_ref_table: size mismatch");
        p_[which].assign(phi.begin(), phi.end());
    }
    const std::vector<double>& ref_table(int which = 0) const { return p_[which]; }

    std::vector<double> policy_probs(Obs s) const {
        std::vector<double> out(n_actions_);
        double mx = -1e300;
        for (int a = 0; a < n_actions_; ++a) mx = std::max(mx, logits_[idx(s, a)]);
        double sum = 0.0;
        for (int a = 0; a < n_actions_; ++a) {
            out[a] = std::exp(logits_[idx(s, a)] - mx);
            sum += out[a];
        }
        for (double& v : out) v /= sum;
        return out;
    }

    int sample_action(Obs s, StreamRng& rng) const {
        auto probs = policy_probs(s);
        return rng.categorical(probs);
    }

    int greedy_action(Obs s) const {
        int best = 0;
        for (int a = 1; a < n_actions_; ++a)
            if (logits_[idx(s, a)] > logits_[idx(s, best)]) best = a;
        return best;
    }

    // theta <- clip(theta - lr * coeff * grad log pi(a|s)).
    void policy_step(Obs s, int a, double coeff, double lr) {
        auto probs = policy_probs(s);
        for (int a2 = 0; a2 < n_actions_; ++a2) {
            double g = (a2 == a ? 1.0 : 0.0) - probs[a2];
            double v = logits_[idx(s, a2)] - lr * coeff * g;
            logits_[idx(s, a2)] = std::min(std::max(v, -theta_box_), theta_box_);
        }
    }

    double state_lambda(Obs s) const { return lambda_s_[s]; }
    void state_lambda_step(Obs s, double drive, double lr) {
        lambda_s_[s] = std::min(std::max(lambda_s_[s] + lr * drive, 0.0), lambda_max_);
    }
    const std::vector<double>& state_lambda_table() const { return lambda_s_; }

    double max_abs_param() const {
        double m = 0.0;
        for (const auto& tab : q_)
            for (double v : tab) m = std::max(m, std::abs(v));
        for (double v : logits_) m = std::max(m, std::abs(v));
        for (double v : lambda_s_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * n_actions_ + a; }

    int n_states_ = 0, n_actions_ = 0;
    double theta_box_ = 20.0, lambda_max_ = 100.0;
    std::vector<std::vector<double>> q_;
    std::vector<std::vector<double>> p_;
    std::vector<double> logits_;
    std::vector<double> lambda_s_;
};

// Linear-in-features store over tile-coded observations. Per-weight steps are
// scaled by 1/tilings so a TD move has the same magnitude as the tabular case;
// the REF squashes through a sigmoid, per-state multipliers through softplus.
class LinearRepr {
public:
    struct Obs {
        std::array<int, 16> f{};
        int n = 0;
    };

    LinearRepr() = default;
    LinearRepr(TileCoder coder, int n_actions, double theta_box, double lambda_max, double p_init, int n_critics = 3,
               int n_refs = 1, double lambda_init = 0.01)
        : coder_(std::move(coder)),
          n_actions_(n_actions),
          n_features_(coder_.n_features()),
          theta_box_(theta_box),
          lambda_max_(lambda_max),
          q_(n_critics, std::vector<double>(static_cast<std::size_t>(n_features_) * n_actions, 0.0)),
          xi_(n_refs, std::vector<double>(n_features_, softplus_inv_logit(p_init) / coder_.tilings())),
          theta_(static_cast<std::size_t>(n_features_) * n_actions, 0.0),
          lw_(n_features_, softplus_inv(std::min(std::max(lambda_init, 1e-9), lambda_max)) / coder_.tilings()) {
        if (coder_.tilings() > 16) throw std::invalid_argument("LinearRepr: at most 16 tilings");
    }

    int n_actions() const { return n_actions_; }
    const TileCoder& coder() const { return coder_; }

    template <class State>
    Obs obs(const State& s) const {
        Obs o;
        o.n = coder_.tilings();
        coder_.active(s.data(), o.f.data());
        return o;
    }

    double q(int which, const Obs& o, int a) const { return dot(q_[which], o, a); }
    void q_step(int which, const Obs& o, int a, double target, double lr) {
        auto& tab = q_[which];
        double delta = dot(tab, o, a) - target;
        double step = lr * delta / o.n;
        for (int i = 0; i < o.n; ++i) tab[static_cast<std::size_t>(a) * n_features_ + o.f[i]] -= step;
    }

    double ref(const Obs& o, int which = 0) const { return sigmoid(dot1(xi_[which], o)); }
    void ref_step(const Obs& o, double target, double lr, int which = 0) {
        double z = dot1(xi_[which], o);
        double p = sigmoid(z);
        // Squared-error gradient through the sigmoid output.
        double g = (p - target) * p * (1.0 - p);
        double step = lr * 4.0 * g / o.n;  // 4x offsets the sigmoid slope at the origin
        for (int i = 0; i < o.n; ++i) xi_[which][o.f[i]] -= step;
    }

    std::vector<double> policy_probs(const Obs& o) const {
        std::vector<double> out(n_actions_);
        double mx = -1e300;
        for (int a = 0; a < n_actions_; ++a) {
            out[a] = dot(theta_, o, a);
            mx = std::max(mx, out[a]);
        }
        double sum = 0.0;
        for (int a = 0; a < n_actions_; ++a) {
            out[a] = std::exp(out[a] - mx);
            sum += out[a];
        }
        for (double& v : out) v /= sum;
        return out;
    }

    int sample_action(const Obs& o, StreamRng& rng) const {
        auto probs = policy_probs(o);
        return rng.categorical(probs);
    }

    int greedy_action(const Obs& o) const {
        int best = 0;
        double bv = dot(theta_, o, 0);
        for (int a = 1; a < n_actions_; ++a) {
            double v = dot(theta_, o, a);
            if (v > bv) {
                bv = v;
                best = a;
            }
        }
        return best;
    }

    void policy_step(const Obs& o, int a, double coeff, double lr) {
        auto probs = policy_probs(o);
        for (int a2 = 0; a2 < n_actions_; ++a2) {
            double g = (a2 == a ? 1.0 : 0.0) - probs[a2];
            double step = lr * coeff * g / o.n;
            for (int i = 0; i < o.n; ++i) {
                auto& w = theta_[static_cast<std::size_t>(a2) * n_features_ + o.f[i]];
                w = std::min(std::max(w - step, -theta_box_), theta_box_);
            }
        }
    }

    double state_lambda(const Obs& o) const { return std::min(softplus(dot1(lw_, o)), lambda_max_); }
    void state_lambda_step(const Obs& o, double drive, double lr) {
        double z = dot1(lw_, o);
        if (softplus(z) >= lambda_max_ && drive > 0.0) return;
        double step = lr * drive * sigmoid(z) / o.n;
        for (int i = 0; i < o.n; ++i) lw_[o.f[i]] += step;
    }

    double max_abs_param() const {
        double m = 0.0;
        for (const auto& tab : q_)
            for (double v : tab) m = std::max(m, std::abs(v));
        for (double v : theta_) m = std::max(m, std::abs(v));
        for (const auto& xi : xi_)
            for (double v : xi) m = std::max(m, std::abs(v));
        for (double v : lw_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    static double softplus_inv_logit(double p) {
        p = std::min(std::max(p, 1e-6), 1.0 - 1e-6);
        return std::log(p / (1.0 - p));
    }

    double dot(const std::vector<double>& tab, const Obs& o, int a) const {
        double s = 0.0;
        for (int i = 0; i < o.n; ++i) s += tab[static_cast<std::size_t>(a) * n_features_ + o.f[i]];
        return s;
    }
    double dot1(const std::vector<double>& w, const Obs& o) const {
        double s = 0.0;
        for (int i = 0; i < o.n; ++i) s += w[o.f[i]];
        return s;
    }

    TileCoder coder_;
    int n_actions_ = 0;
    int n_features_ = 0;
    double theta_box_ = 20.0, lambda_max_ = 100.0;
    std::vector<std::vector<double>> q_;
    std::vector<std::vector<double>> xi_;
    std::vector<double> theta_;
    std::vector<double> lw_;
};

}  // namespace respo
