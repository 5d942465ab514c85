#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "respo/trajectory.hpp"
#include "test_support.hpp"

using respo::DiscretePolicy;
using respo::FiniteMdp;
using respo::StreamRng;
using respo::Trajectory;

namespace {

FiniteMdp chain(int n, double cost_last = 0.0, bool absorb_last = false) {
    FiniteMdp m;
    m.n_states = n;
    m.n_actions = 1;
    m.allocate();
    for (int s = 0; s < n; ++s) {
        int nxt = std::min(s + 1, n - 1);
        if (absorb_last && s == n - 1) nxt = s;
        m.p(s, 0, nxt) = 1.0;
        m.r(s, 0) = 1.0;
    }
    if (absorb_last) m.absorbing[n - 1] = 1;
    m.cost[n - 1] = cost_last;
    m.initial_distribution[0] = 1.0;
    return m;
}

}  // namespace

TEST_CASE("deterministic chain yields the unique trajectory", "[trajectory]") {
    FiniteMdp m = chain(4);
    DiscretePolicy pi = DiscretePolicy::uniform(4, 1);
    StreamRng rng(1);
    Trajectory tau = respo::sample_trajectory(m, pi, 3, rng);
    REQUIRE(tau.size() == 3);
    REQUIRE(tau.steps[0].state == 0);
    REQUIRE(tau.steps[1].state == 1);
    REQUIRE(tau.steps[2].state == 2);
    REQUIRE(tau.final_state == 3);
}

TEST_CASE("absorbing state ends the episode", "[trajectory]") {
    FiniteMdp m = chain(2, 0.0, true);
    DiscretePolicy pi = DiscretePolicy::uniform(2, 1);
    StreamRng rng(1);
    Trajectory tau = respo::sample_trajectory(m, pi, 10, rng);
    REQUIRE(tau.size() == 1);
    REQUIRE(tau.ended_absorbing);
    REQUIRE(tau.final_state == 1);
}

TEST_CASE("invalid policy action is rejected with diagnostics", "[trajectory]") {
    FiniteMdp m = chain(3);
    StreamRng rng(1);
    auto bad = [](int, StreamRng&) { return 7; };
    REQUIRE_THROWS_AS(respo::sample_trajectory(m, bad, 5, rng), std::out_of_range);
}

TEST_CASE("empirical next-state frequencies match the kernel within 3 sigma", "[trajectory][statistical]") {
    StreamRng gen(77);
    testsup::RandomMdpOptions opt;
    opt.n_states = 3;
    opt.n_actions = 2;
    opt.violating_fraction = 0.0;
    FiniteMdp m = testsup::random_mdp(opt, gen);

    DiscretePolicy pi = respo::random_policy(3, 2, gen);
    const int n_traj = 100000;

    // Count one-step frequencies conditioned on (s, a) over trajectory starts.
    std::vector<long> counts(3L * 2 * 3, 0);
    std::vector<long> visits(3L * 2, 0);
    respo::RngFactory fac("kernel-check", 3);
    for (int i = 0; i < n_traj; ++i) {
        auto rng = fac.episode(i);
        Trajectory tau = respo::sample_trajectory(m, pi, 2, rng);
        for (const auto& st : tau.steps) {
            ++visits[st.state * 2 + st.action];
            ++counts[(st.state * 2 + st.action) * 3 + st.next_state];
        }
    }
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
            long n = visits[s * 2 + a];
            if (n < 500) continue;
            for (int s2 = 0; s2 < 3; ++s2) {
                double phat = double(counts[(s * 2 + a) * 3 + s2]) / double(n);
                double p = m.p(s, a, s2);
                double se = std::sqrt(std::max(p * (1 - p), 1e-12) / double(n));
                INFO("s=" << s << " a=" << a << " s'=" << s2);
                REQUIRE(std::abs(phat - p) <= 3 * se + 1e-12);
            }
        }
}

TEST_CASE("discounted returns: closed forms and Kahan oracle", "[trajectory]") {
    Trajectory tau;
    for (int t = 0; t < 3; ++t) tau.steps.push_back({t, 0, t + 1, 1.0, 0.0});
    REQUIRE(respo::discounted_reward_return(tau, 0.5) == Catch::Approx(1.75).margin(1e-15));

    Trajectory zeros;
    for (int t = 0; t < 5; ++t) zeros.steps.push_back({t, 0, t + 1, 0.0, 0.0});
    REQUIRE(respo::discounted_reward_return(zeros, 0.9) == 0.0);
    REQUIRE(respo::discounted_cost_return(zeros, 0.9) == 0.0);

    Trajectory costs;
    double cvals[3] = {1.0, 0.0, 1.0};
    for (int t = 0; t < 3; ++t) costs.steps.push_back({t, 0, t + 1, 0.0, cvals[t]});
    REQUIRE(respo::discounted_cost_return(costs, 0.9) == Catch::Approx(1.81).margin(1e-15));

    SECTION("random 20-step trajectory matches the independent summation oracle") {
        StreamRng rng(11);
        Trajectory t20;
        std::vector<double> rs, hs;
        for (int t = 0; t < 20; ++t) {
            double r = rng.uniform(-2.0, 2.0);
            double h = rng.uniform01() < 0.4 ? rng.uniform01() : 0.0;
            t20.steps.push_back({t, 0, t + 1, r, h});
            rs.push_back(r);
            hs.push_back(h);
        }
        double gamma = 0.97;
        REQUIRE(std::abs(respo::discounted_reward_return(t20, gamma) - testsup::kahan_discounted(rs, gamma)) < 1e-12);
        REQUIRE(std::abs(respo::discounted_cost_return(t20, gamma) - testsup::kahan_discounted(hs, gamma)) < 1e-12);
    }

    SECTION("empty trajectory returns zero") {
        Trajectory empty;
        REQUIRE(respo::discounted_reward_return(empty, 0.5) == 0.0);
        REQUIRE(respo::discounted_cost_return(empty, 0.5) == 0.0);
    }

    SECTION("gamma outside (0,1) is rejected") {
        Trajectory empty;
        REQUIRE_THROWS_AS(respo::discounted_reward_return(empty, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(respo::discounted_cost_return(empty, 0.0), std::invalid_argument);
    }
}

TEST_CASE("zero cost return iff zero violation count", "[trajectory][property]") {
    StreamRng gen(5150);
    testsup::RandomMdpOptions opt;
    opt.n_states = 6;
    opt.n_actions = 2;
    opt.violating_fraction = 0.3;
    for (int trial = 0; trial < 20; ++trial) {
        FiniteMdp m = testsup::random_mdp(opt, gen);
        DiscretePolicy pi = respo::random_policy(6, 2, gen);
        respo::RngFactory fac("costiff", trial);
        for (int e = 0; e < 50; ++e) {
            auto rng = fac.episode(e);
            Trajectory tau = respo::sample_trajectory(m, pi, 15, rng);
            bool zero_cost = respo::discounted_cost_return(tau, 0.9) == 0.0;
            REQUIRE(zero_cost == (tau.violation_count() == 0));
        }
    }
}

TEST_CASE("identical seed reproduces the trajectory byte-for-byte", "[trajectory]") {
    StreamRng gen(31337);
    testsup::RandomMdpOptions opt;
    opt.n_states = 5;
    opt.n_actions = 3;
    FiniteMdp m = testsup::random_mdp(opt, gen);
    DiscretePolicy pi = respo::random_policy(5, 3, gen);

    respo::RngFactory fac("repro", 12);
    auto r1 = fac.episode(4);
    auto r2 = fac.episode(4);
    Trajectory a = respo::sample_trajectory(m, pi, 30, r1);
    Trajectory b = respo::sample_trajectory(m, pi, 30, r2);
    REQUIRE(respo::to_text(a) == respo::to_text(b));
}
