#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "respo/config.hpp"
#include "respo/envs/discretize.hpp"
#include "respo/envs/double_integrator.hpp"
#include "respo/envs/drone_tunnel.hpp"
#include "respo/envs/gridworld.hpp"
#include "respo/metrics.hpp"
#include "respo/multi.hpp"
#include "respo/trainer.hpp"

namespace respo {

// Process exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAcceptanceFailure = 3;
inline constexpr int kExitDivergence = 4;

inline std::string output_root() {
    if (const char* env = std::getenv("RESPO_OUT")) return env;
    return "out";
}

inline void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows, bool diverged) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << metric_csv_header() << "\n";
    for (const auto& r : rows) out << metric_csv_line(r) << "\n";
    if (diverged) out << "# diverged\n";
}

// Mean and population standard deviation per column across seeds, row by row.
inline void write_aggregate_csv(const std::string& path, const std::vector<std::vector<MetricRow>>& per_seed) {
    std::size_t n_rows = per_seed.empty() ? 0 : per_seed.front().size();
    for (const auto& rows : per_seed) n_rows = std::min(n_rows, rows.size());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iter";
    const char* names[kMetricColumns] = {"iter",
                                         "train_reward",
                                         "train_violations",
                                         "train_cost_disc",
                                         "eval_reward_mean",
                                         "eval_reward_std",
                                         "eval_violations_mean",
                                         "eval_violations_std",
                                         "eval_cost_disc_mean",
                                         "eval_return_disc_mean",
                                         "feas_return_disc_mean",
                                         "feas_zero_violation_rate",
                                         "lambda",
                                         "ref_sup_err"};
    for (int c = 1; c < kMetricColumns; ++c) out << ',' << names[c] << "_mean," << names[c] << "_std";
    out << "\n";
    char buf[48];
    for (std::size_t i = 0; i < n_rows; ++i) {
        out << per_seed.front()[i].iter;
        for (int c = 1; c < kMetricColumns; ++c) {
            RunningStat st;
            for (const auto& rows : per_seed) {
                double vals[kMetricColumns];
                metric_values(rows[i], vals);
                st.add(vals[c]);
            }
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", st.mean(), st.stddev());
            out << buf;
        }
        out << "\n";
    }
}

struct ExperimentOutcome {
    int exit_code = kExitOk;
    std::string error;
    std::string out_dir;
    std::vector<std::string> seed_files;
};

namespace detail {

inline GridWorld gridworld_from_config(const Config& cfg) {
    std::string preset = cfg.get_string("env.preset", "");
    double slip = cfg.get_double("env.slip", 0.1);
    if (preset == "two_room_5") return make_two_room_world(5, slip);
    if (preset == "two_room_6") return make_two_room_world(6, slip);
    if (preset == "lava_corridor") return make_lava_corridor();
    if (preset == "risky_goal") return make_risky_goal_world(slip);
    if (!preset.empty()) throw ConfigError("unknown env.preset '" + preset + "'");

    GridWorldSpec spec;
    spec.width = cfg.get_int("env.width", 5);
    spec.height = cfg.get_int("env.height", 5);
    spec.slip = slip;
    spec.horizon = cfg.get_int("env.horizon", 60);
    spec.discount = cfg.get_double("env.discount", 0.99);
    spec.goal_reward = cfg.get_double("env.goal_reward", 1.0);
    spec.step_reward = cfg.get_double("env.step_reward", 0.0);
    spec.goal_absorbing = cfg.get_bool("env.goal_absorbing", true);
    spec.hazard_absorbing = cfg.get_bool("env.hazard_absorbing", false);
    auto goal = cfg.get_tuple_list("env.goal");
    if (goal.size() == 1 && goal[0].size() == 2)
        spec.goal = {static_cast<int>(goal[0][0]), static_cast<int>(goal[0][1])};
    else if (!goal.empty())
        throw ConfigError("env.goal expects one 'x,y' pair");
    for (const auto& w : cfg.get_tuple_list("env.walls")) {
        if (w.size() != 2) throw ConfigError("env.walls expects 'x,y' pairs");
        spec.walls.push_back({static_cast<int>(w[0]), static_cast<int>(w[1])});
    }
    for (const auto& h : cfg.get_tuple_list("env.hazards")) {
        if (h.size() != 3) throw ConfigError("env.hazards expects 'x,y:magnitude' entries");
        spec.hazards.push_back({{static_cast<int>(h[0]), static_cast<int>(h[1])}, h[2]});
    }
    for (const auto& s : cfg.get_tuple_list("env.starts")) {
        if (s.size() != 2) throw ConfigError("env.starts expects 'x,y' pairs");
        spec.starts.push_back({static_cast<int>(s[0]), static_cast<int>(s[1])});
    }
    return build_gridworld(spec);
}

inline LearnerKind learner_kind_from(const std::string& name) {
    if (name == "unconstrained") return LearnerKind::unconstrained;
    if (name == "scalar_lagrangian") return LearnerKind::scalar_lagrangian;
    if (name == "fac") return LearnerKind::fac;
    if (name == "rcrl") return LearnerKind::rcrl;
    if (name == "cbf") return LearnerKind::cbf;
    if (name == "respo") return LearnerKind::respo;
    if (name == "respo_vh") return LearnerKind::respo_vh;
    throw ConfigError("unknown learner.kind '" + name + "'");
}

inline ScheduleSet schedules_from_config(const Config& cfg, long iterations) {
    std::string law = cfg.get_string("learner.schedule.law", "linear");
    double c1 = cfg.get_double("learner.schedule.c1", 0.4);
    double c2 = cfg.get_double("learner.schedule.c2", 0.1);
    double c3 = cfg.get_double("learner.schedule.c3", 0.03);
    double c4 = cfg.get_double("learner.schedule.c4", 0.01);
    if (law == "linear") {
        double K = cfg.get_double("learner.schedule.K", static_cast<double>(iterations));
        return ScheduleSet::linear(c1, c2, c3, c4, K);
    }
    if (law == "polynomial") {
        return ScheduleSet::polynomial(c1, c2, c3, c4, cfg.get_double("learner.schedule.rho1", 0.55),
                                       cfg.get_double("learner.schedule.rho2", 0.65),
                                       cfg.get_double("learner.schedule.rho3", 0.80),
                                       cfg.get_double("learner.schedule.rho4", 1.00));
    }
    throw ConfigError("learner.schedule.law must be 'linear' or 'polynomial'");
}

inline TrainerConfig trainer_from_config(const Config& cfg, const std::string& name) {
    TrainerConfig t;
    t.kind = learner_kind_from(cfg.get_string("learner.kind", "respo"));
    t.gamma = cfg.get_double("learner.gamma", 0.99);
    t.gamma_ref = cfg.get_double("learner.gamma_ref", t.gamma);
    t.gamma_h = cfg.get_double("learner.gamma_h", 1.0);
    t.lambda_max = cfg.get_double("learner.lambda_max", 100.0);
    t.lambda_init = cfg.get_double("learner.lambda_init", 0.01);
    t.freeze_multiplier = cfg.get_bool("learner.freeze_multiplier", false);
    t.theta_box = cfg.get_double("learner.theta_box", 20.0);
    t.p_init = cfg.get_double("learner.p_init", 0.5);
    t.chi = cfg.get_double("learner.chi", 0.0);
    t.nu = cfg.get_double("learner.nu", 0.2);
    t.iterations = cfg.get_long("train.iterations", 20000);
    t.eval_every = cfg.get_int("eval.every", 100);
    t.eval_episodes = cfg.get_int("eval.episodes", 20);
    t.divergence_limit = cfg.get_double("learner.divergence_limit", 1e8);
    t.clamp_ref_to_oracle = cfg.get_bool("learner.clamp_ref_to_oracle", false);
    t.schedules = schedules_from_config(cfg, t.iterations);
    t.experiment_name = name;
    return t;
}

inline TileCoder tiles_from_config(const Config& cfg, std::vector<double> lo, std::vector<double> hi,
                                   std::vector<int> cells) {
    auto lo_cfg = cfg.get_tuple_list("features.lo");
    auto hi_cfg = cfg.get_tuple_list("features.hi");
    auto cell_cfg = cfg.get_tuple_list("features.cells");
    if (lo_cfg.size() == 1) lo = lo_cfg[0];
    if (hi_cfg.size() == 1) hi = hi_cfg[0];
    if (cell_cfg.size() == 1) {
        cells.clear();
        for (double v : cell_cfg[0]) cells.push_back(static_cast<int>(v));
    }
    int tilings = cfg.get_int("features.tilings", 2);
    return TileCoder(std::move(lo), std::move(hi), std::move(cells), tilings);
}

struct SeedOutput {
    std::vector<MetricRow> rows;
    bool diverged = false;
    double wall_ms = 0.0;
};

template <class RunSeed>
ExperimentOutcome run_seeds_and_write(const std::string& name, const std::vector<std::uint64_t>& seeds, int jobs,
                                      RunSeed&& run_seed) {
    ExperimentOutcome outcome;
    namespace fs = std::filesystem;
    fs::path dir = fs::path(output_root()) / name;
    fs::create_directories(dir);
    outcome.out_dir = dir.string();

    std::vector<SeedOutput> outputs(seeds.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) outputs[i] = run_seed(seeds[i]);
    } else {
        std::vector<std::future<SeedOutput>> futures;
        for (std::size_t i = 0; i < seeds.size(); ++i)
            futures.push_back(std::async(std::launch::async, [&, i] { return run_seed(seeds[i]); }));
        for (std::size_t i = 0; i < seeds.size(); ++i) outputs[i] = futures[i].get();
    }

    std::vector<std::vector<MetricRow>> all_rows;
    std::ofstream timings((dir / "timings.txt").string());
    bool any_diverged = false;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        std::string file = (dir / ("seed_" + std::to_string(seeds[i]) + ".csv")).string();
        write_metrics_csv(file, outputs[i].rows, outputs[i].diverged);
        outcome.seed_files.push_back(file);
        timings << "seed " << seeds[i] << " wall_ms " << outputs[i].wall_ms << "\n";
        any_diverged |= outputs[i].diverged;
        all_rows.push_back(std::move(outputs[i].rows));
    }
    write_aggregate_csv((dir / "aggregate.csv").string(), all_rows);
    if (any_diverged) {
        std::ofstream((dir / "DIVERGED").string()) << "at least one seed aborted on the divergence guard\n";
        outcome.exit_code = kExitDivergence;
        outcome.error = "divergence guard tripped";
    }
    return outcome;
}

}  // namespace detail

inline const std::vector<std::string>& known_config_prefixes() {
    static const std::vector<std::string> prefixes = {
        "experiment", "env", "learner", "train", "eval", "seeds", "oracle", "out", "jobs", "features",
    };
    return prefixes;
}

// Runs one experiment configuration: one CSV per seed plus an aggregate.
inline ExperimentOutcome run_experiment(const Config& cfg) {
    cfg.check_known_keys(known_config_prefixes());
    std::string name = cfg.get_string("experiment.name", "experiment");
    std::vector<std::uint64_t> seeds = cfg.get_u64_list("seeds", {1});
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    {
        auto sorted = seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ConfigError("seeds must be distinct");
    }
    int jobs = cfg.get_int("jobs", 1);
    std::string env_kind = cfg.require_string("env.kind");
    long iterations = cfg.get_long("train.iterations", 20000);
    if (iterations < 1) throw ConfigError("train.iterations must be >= 1");

    auto timed = [](auto&& fn) {
        detail::SeedOutput out;
        auto t0 = std::chrono::steady_clock::now();
        auto result = fn();
        out.rows = std::move(result.metrics);
        out.diverged = result.diverged;
        out.wall_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(std::chrono::steady_clock::now() - t0)
                .count();
        return out;
    };

    if (env_kind == "gridworld" || env_kind == "mdp_file") {
        FiniteMdp mdp;
        if (env_kind == "gridworld") {
            mdp = detail::gridworld_from_config(cfg).mdp;
        } else {
            mdp = load_mdp(cfg.require_string("env.path"));
        }
        TrainerConfig tcfg = detail::trainer_from_config(cfg, name);
        mdp.discount = cfg.get_double("learner.gamma", mdp.discount);
        tcfg.gamma = mdp.discount;
        std::optional<OracleSolution> sol;
        std::optional<TrainOracle> oracle;
        if (cfg.get_bool("oracle.attach", tcfg.clamp_ref_to_oracle)) {
            OracleParams op;
            op.ref_discount_learner = tcfg.gamma_ref;
            sol = compute_oracle(mdp, op);
            oracle = TrainOracle::attach(mdp, *sol);
        }
        MdpEnv env(mdp);
        return detail::run_seeds_and_write(name, seeds, jobs, [&](std::uint64_t seed) {
            return timed([&] {
                TabularRepr repr = make_tabular_repr(mdp, tcfg);
                return train(env, repr, tcfg, seed, oracle ? &*oracle : nullptr);
            });
        });
    }

    if (env_kind == "double_integrator") {
        DoubleIntegratorSpec spec;
        spec.noise = cfg.get_double("env.noise", 0.0);
        spec.horizon = cfg.get_int("env.horizon", 300);
        spec.action_levels = cfg.get_int("env.action_levels", 5);
        spec.reward_coeff = cfg.get_double("env.reward_coeff", 0.01);
        auto lo = cfg.get_tuple_list("env.start_lo");
        auto hi = cfg.get_tuple_list("env.start_hi");
        if (lo.size() == 1 && lo[0].size() == 2) spec.start_lo = {lo[0][0], lo[0][1]};
        if (hi.size() == 1 && hi[0].size() == 2) spec.start_hi = {hi[0][0], hi[0][1]};
        DoubleIntegratorEnv env(spec);
        TrainerConfig tcfg = detail::trainer_from_config(cfg, name);
        TileCoder coder = detail::tiles_from_config(cfg, {-14.0, -7.0}, {14.0, 7.0}, {14, 12});
        return detail::run_seeds_and_write(name, seeds, jobs, [&](std::uint64_t seed) {
            return timed([&] {
                LinearRepr repr(coder, env.n_actions(), tcfg.theta_box, tcfg.lambda_max, tcfg.p_init, 3, 1,
                                tcfg.lambda_init);
                return train(env, repr, tcfg, seed);
            });
        });
    }

    if (env_kind == "drone_tunnel") {
        DroneTunnelSpec spec;
        spec.horizon = cfg.get_int("env.horizon", 64);
        spec.progress_coeff = cfg.get_double("env.progress_coeff", 1.0);
        spec.time_penalty = cfg.get_double("env.time_penalty", 0.01);
        DroneTunnelEnv env(spec);
        std::string kind = cfg.get_string("learner.kind", "respo_multi");
        MultiTrainerConfig mcfg;
        if (kind == "respo_multi")
            mcfg.kind = MultiKind::respo_multi;
        else if (kind == "scalar_multi")
            mcfg.kind = MultiKind::scalar_multi;
        else
            throw ConfigError("drone_tunnel supports learner.kind respo_multi or scalar_multi");
        mcfg.gamma = cfg.get_double("learner.gamma", 0.99);
        mcfg.gamma_ref = cfg.get_double("learner.gamma_ref", mcfg.gamma);
        mcfg.lambda_max = cfg.get_double("learner.lambda_max", 100.0);
        mcfg.lambda_init = cfg.get_double("learner.lambda_init", 0.01);
        mcfg.theta_box = cfg.get_double("learner.theta_box", 20.0);
        mcfg.p_init = cfg.get_double("learner.p_init", 0.5);
        mcfg.chi = cfg.get_double("learner.chi", 0.5);
        mcfg.iterations = cfg.get_long("train.iterations", 20000);
        mcfg.eval_every = cfg.get_int("eval.every", 200);
        mcfg.eval_episodes = cfg.get_int("eval.episodes", 10);
        mcfg.schedules = detail::schedules_from_config(cfg, mcfg.iterations);
        mcfg.experiment_name = name;
        TileCoder coder = detail::tiles_from_config(cfg, {0, 0, 0, 0}, {4, 4, 4, 4}, {7, 7, 7, 7});
        return detail::run_seeds_and_write(name, seeds, jobs, [&](std::uint64_t seed) {
            return timed([&] {
                LinearRepr repr(coder, env.n_actions(), mcfg.theta_box, mcfg.lambda_max, mcfg.p_init, 4, 2,
                                mcfg.lambda_init);
                return train_multi(env, repr, mcfg, seed);
            });
        });
    }

    throw ConfigError("unknown env.kind '" + env_kind + "'");
}

inline ExperimentOutcome run_experiment_file(const std::string& path) {
    return run_experiment(Config::from_file(path));
}

// Per-state oracle table for external plotting.
inline void write_oracle_csv(const FiniteMdp& mdp, const OracleSolution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "state,v_safest,v_c_star,phi_star,phi_star_learner,feasible,constrained_v\n";
    char buf[220];
    for (int s = 0; s < mdp.n_states; ++s) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g", s, sol.v_safest_reward[s],
                      sol.v_c_star[s], sol.phi_star[s], sol.phi_star_learner[s], int(sol.feasible[s]),
                      sol.constrained_v[s]);
        out << buf << "\n";
    }
}

// Feasible-set grid export for the double integrator (or any 2-D env).
inline void export_feasible_double_integrator(int resolution, const std::string& path, double noise = 0.02,
                                              int n_mc = 24, int substeps = 5) {
    DoubleIntegratorSpec spec;
    spec.noise = noise;
    DoubleIntegratorEnv env(spec);
    DiscretizeSpec d;
    d.lo = {-6.0, -6.0};
    d.hi = {6.0, 6.0};
    d.cells = {resolution, resolution};
    d.n_mc_samples = n_mc;
    d.substeps = substeps;
    auto model = discretize(env, d, StreamRng(42));
    auto sol = compute_oracle(model.mdp);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "x1,x2,phi_star,phi_star_learner,feasible\n";
    char buf[160];
    for (int s = 0; s < model.mdp.n_states; ++s) {
        auto c = model.center(s);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d", c[0], c[1], sol.phi_star[s],
                      sol.phi_star_learner[s], int(sol.feasible[s]));
        out << buf << "\n";
    }
}

}  // namespace respo
