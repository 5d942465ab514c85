#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace respo {

// One step-size sequence. Polynomial: c/(1+k)^rho with rho in (0.5, 1] gives
// a divergent sum with convergent squares; linear decay c*(1-k/K) is the
// practical preset and freezes training past K.
struct StepSchedule {
    enum class Law { polynomial, linear_decay };
    Law law = Law::polynomial;
    double c = 1.0;
    double rho = 1.0;   // polynomial exponent
    double K = 1e6;     // linear-decay endpoint

    double at(long k) const {
        if (k < 0) throw std::invalid_argument("StepSchedule: k must be >= 0");
        if (law == Law::polynomial) return c / std::pow(1.0 + static_cast<double>(k), rho);
        double v = c * (1.0 - static_cast<double>(k) / K);
        return v > 0.0 ? v : 0.0;
    }
};

// The four timescales of the actor-critic loop, fastest to slowest:
// 1 critics, 2 policy, 3 reachability estimator, 4 multiplier.
struct ScheduleSet {
    StepSchedule zeta[4];

    double at(int timescale, long k) const {
        if (timescale < 1 || timescale > 4) throw std::invalid_argument("ScheduleSet: timescale must be 1..4");
        return zeta[timescale - 1].at(k);
    }

    // Checks the step-size assumption symbolically on the polynomial law:
    // each rho in (0.5, 1] (sum diverges, squared sum converges) and strictly
    // increasing rho so every slower timescale vanishes relative to the
    // faster one. Linear-decay sets are accepted as declared-practical.
    bool satisfies_ordering(std::string* why = nullptr) const {
        bool all_poly = true;
        for (const auto& z : zeta) all_poly &= z.law == StepSchedule::Law::polynomial;
        if (!all_poly) {
            for (const auto& z : zeta)
                if (z.c <= 0.0) {
                    if (why) *why = "nonpositive step-size constant";
                    return false;
                }
            return true;  // practical preset: declared, not proved
        }
        for (int i = 0; i < 4; ++i) {
            if (!(zeta[i].rho > 0.5 && zeta[i].rho <= 1.0)) {
                if (why) *why = "rho" + std::to_string(i + 1) + " outside (0.5, 1]";
                return false;
            }
            if (zeta[i].c <= 0.0) {
                if (why) *why = "nonpositive step-size constant";
                return false;
            }
        }
        for (int i = 1; i < 4; ++i)
            if (!(zeta[i].rho > zeta[i - 1].rho)) {
                if (why) *why = "rho sequence not strictly increasing at position " + std::to_string(i + 1);
                return false;
            }
        return true;
    }

    static ScheduleSet polynomial(double c1, double c2, double c3, double c4,
                                  double rho1 = 0.55, double rho2 = 0.65, double rho3 = 0.80, double rho4 = 1.00) {
        ScheduleSet s;
        s.zeta[0] = {StepSchedule::Law::polynomial, c1, rho1, 0};
        s.zeta[1] = {StepSchedule::Law::polynomial, c2, rho2, 0};
        s.zeta[2] = {StepSchedule::Law::polynomial, c3, rho3, 0};
        s.zeta[3] = {StepSchedule::Law::polynomial, c4, rho4, 0};
        return s;
    }

    // Linear decays mirroring the full-scale practical settings, rescaled by
    // caller-chosen constants and a shared endpoint.
    static ScheduleSet linear(double c1, double c2, double c3, double c4, double K) {
        ScheduleSet s;
        s.zeta[0] = {StepSchedule::Law::linear_decay, c1, 0, K};
        s.zeta[1] = {StepSchedule::Law::linear_decay, c2, 0, K};
        s.zeta[2] = {StepSchedule::Law::linear_decay, c3, 0, K};
        s.zeta[3] = {StepSchedule::Law::linear_decay, c4, 0, K};
        return s;
    }
};

}  // namespace respo
