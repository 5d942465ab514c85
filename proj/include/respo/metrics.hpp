#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace respo {

// One row of the per-iteration metrics stream. Evaluation columns hold the
// most recent evaluation (cadence-driven); wall-clock timing is kept out of
// the CSV so reruns are byte-identical.
struct MetricRow {
    long iter = 0;
    double train_reward = 0.0;       // undiscounted episode reward
    double train_violations = 0.0;   // steps with positive cost
    double train_cost_disc = 0.0;    // discounted cost return of the episode
    double eval_reward_mean = 0.0;
    double eval_reward_std = 0.0;
    double eval_violations_mean = 0.0;
    double eval_violations_std = 0.0;
    double eval_cost_disc_mean = 0.0;
    double eval_return_disc_mean = 0.0;  // discounted, absorbing tail included
    double feas_return_disc_mean = std::numeric_limits<double>::quiet_NaN();
    double feas_zero_violation_rate = std::numeric_limits<double>::quiet_NaN();
    double lambda = 0.0;             // scalar multiplier, or mean of the state table
    double ref_sup_err = std::numeric_limits<double>::quiet_NaN();
};

inline const char* metric_csv_header() {
    return "iter,train_reward,train_violations,train_cost_disc,"
           "eval_reward_mean,eval_reward_std,eval_violations_mean,eval_violations_std,"
           "eval_cost_disc_mean,eval_return_disc_mean,"
           "feas_return_disc_mean,feas_zero_violation_rate,lambda,ref_sup_err";
}

inline constexpr int kMetricColumns = 14;

inline void metric_values(const MetricRow& r, double* out) {
    out[0] = static_cast<double>(r.iter);
    out[1] = r.train_reward;
    out[2] = r.train_violations;
    out[3] = r.train_cost_disc;
    out[4] = r.eval_reward_mean;
    out[5] = r.eval_reward_std;
    out[6] = r.eval_violations_mean;
    out[7] = r.eval_violations_std;
    out[8] = r.eval_cost_disc_mean;
    out[9] = r.eval_return_disc_mean;
    out[10] = r.feas_return_disc_mean;
    out[11] = r.feas_zero_violation_rate;
    out[12] = r.lambda;
    out[13] = r.ref_sup_err;
}

inline std::string metric_csv_line(const MetricRow& r) {
    double vals[kMetricColumns];
    metric_values(r, vals);
    std::string line;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%ld", r.iter);
    line += buf;
    for (int i = 1; i < kMetricColumns; ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", vals[i]);
        line += buf;
    }
    return line;
}

struct RunningStat {
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    void add(double x) {
        sum += x;
        sum2 += x * x;
        ++n;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double stddev() const {
        if (!n) return 0.0;
        double m = mean();
        double v = sum2 / n - m * m;
        return v > 0.0 ? std::sqrt(v) : 0.0;
    }
};

}  // namespace respo
