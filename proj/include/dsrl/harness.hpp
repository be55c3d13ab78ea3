#ifndef DSRL_HARNESS_HPP
#define DSRL_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsrl/baselines.hpp"
#include "dsrl/dsrl.hpp"
#include "dsrl/experiment.hpp"
#include "dsrl/measurement.hpp"
#include "dsrl/metrics.hpp"
#include "dsrl/network.hpp"
#include "dsrl/random.hpp"

namespace dsrl {

/// A fully drawn problem instance for one trial.
struct TrialInstance {
    SensorNetwork network;
    PointN target;
    MeasurementSet measurements;
    NodeStates init;
};

struct SolverOutcome {
    Solver solver = Solver::dsrl;
    bool ok = false;
    /// RMSE of the node estimates at the final iteration; for centralized
    /// solvers every node is taken to hold the solver's estimate.
    double rmse = 0.0;
    std::string error;
};

struct TrialOutcome {
    std::size_t sweep_index = 0;
    std::size_t trial = 0;
    std::vector<SolverOutcome> solvers;
    /// DSRL RMSE per iteration, filled when curves are recorded.
    std::vector<double> dsrl_curve;
};

inline constexpr std::uint64_t kFixedNetworkKey = 0x6E6574776F726BULL;

/// Draws network, target, measurements and initialization for
/// (sweep point, trial) in that order from the trial's own stream.
inline TrialInstance draw_instance(const ExperimentConfig& cfg, std::size_t sweep_index, std::size_t trial)
{
    RandomStream rng(cfg.seed, {sweep_index, trial});
    const std::uint64_t net_seed = rng.next_u64();
    SensorNetwork net = generate_network(
        cfg.network, cfg.fixed_network ? derive_seed(cfg.seed, {kFixedNetworkKey}) : net_seed);

    PointN target(static_cast<Eigen::Index>(cfg.network.dimension));
    for (Eigen::Index c = 0; c < target.size(); ++c) target[c] = rng.uniform(-cfg.network.half_width, cfg.network.half_width);

    const double value = cfg.sweep.points().at(sweep_index);
    MeasurementSet m = apply_scenario(true_ranges(net, target), scenario_at(cfg.scenario, value), rng);
    NodeStates init = uniform_initialization(net.size(), net.dimension(), cfg.network.half_width, rng);
    return {std::move(net), std::move(target), std::move(m), std::move(init)};
}

/// Runs every configured solver on one instance. Solver failures are
/// recorded in the outcome, not thrown.
inline TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t sweep_index, std::size_t trial)
{
    TrialOutcome out;
    out.sweep_index = sweep_index;
    out.trial = trial;

    std::optional<TrialInstance> inst;
    std::string draw_error;
    try {
        inst = draw_instance(cfg, sweep_index, trial);
    } catch (const Error& e) {
        draw_error = e.what();
    }

    for (Solver s : cfg.solvers) {
        SolverOutcome so;
        so.solver = s;
        if (!inst) {
            so.error = draw_error;
            out.solvers.push_back(so);
            continue;
        }
        try {
            const PointN start = mean_estimate(inst->init);
            switch (s) {
            case Solver::dsrl: {
                RunOptions opts;
                opts.iterations = cfg.iterations;
                opts.x_true = inst->target;
                opts.final_only = !cfg.record_curves;
                auto trace = dsrl_run(inst->network, inst->measurements, cfg.schedule, inst->init, opts);
                so.rmse = *trace.records.back().rmse;
                if (cfg.record_curves)
                    for (const auto& r : trace.records) out.dsrl_curve.push_back(*r.rmse);
                break;
            }
            case Solver::l1: {
                auto r = centralized_l1_subgradient(inst->network, inst->measurements, cfg.schedule, cfg.iterations, start);
                so.rmse = (r.estimate - inst->target).norm();
                break;
            }
            case Solver::l2: {
                auto r = centralized_l2_descent(inst->network, inst->measurements, cfg.l2_step, cfg.iterations, start);
                so.rmse = (r.estimate - inst->target).norm();
                break;
            }
            }
            so.ok = std::isfinite(so.rmse);
            if (!so.ok) so.error = "non-finite rmse";
        } catch (const Error& e) {
            so.ok = false;
            so.error = e.what();
        }
        out.solvers.push_back(so);
    }
    return out;
}

// --- aggregation ------------------------------------------------------------

struct SweepRow {
    std::string param;
    double value = 0.0;
    Solver solver = Solver::dsrl;
    double mean_rmse = 0.0;
    double stderr_rmse = 0.0;
    std::size_t trials_ok = 0;
    std::size_t trials_failed = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SweepRow> rows;
    std::vector<TrialOutcome> trials;
    /// Per sweep point, mean DSRL RMSE per iteration over successful trials.
    std::vector<std::vector<double>> curves;
    std::vector<std::string> warnings;

    const SweepRow& row(std::size_t sweep_index, Solver s) const
    {
        const std::size_t n = config.solvers.size();
        for (std::size_t j = 0; j < n; ++j)
            if (rows[sweep_index * n + j].solver == s) return rows[sweep_index * n + j];
        throw Error(std::string("solver not in result: ") + to_string(s));
    }
};

/// Mean and standard error (sample standard deviation / sqrt(n)), summed in
/// the given order.
inline std::pair<double, double> mean_and_stderr(const std::vector<double>& xs)
{
    if (xs.empty()) return {std::nan(""), std::nan("")};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double n = static_cast<double>(xs.size());
    const double mean = sum / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

/// Worker count from DSRL_THREADS (unset or 0 means hardware concurrency).
inline std::size_t thread_count_from_env()
{
    const char* v = std::getenv("DSRL_THREADS");
    std::size_t n = 0;
    if (v && *v) {
        char* end = nullptr;
        const unsigned long long parsed = std::strtoull(v, &end, 10);
        if (end && *end == '\0') n = static_cast<std::size_t>(parsed);
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs every (sweep point, trial) pair and aggregates. Each trial writes to
/// its own slot and aggregation walks the slots in index order, so the result
/// does not depend on `threads`.
inline ExperimentResult run_sweep(const ExperimentConfig& cfg, std::size_t threads = 0,
                                  const std::function<void(std::size_t, std::size_t)>& progress = {})
{
    validate(cfg);
    if (threads == 0) threads = thread_count_from_env();

    const auto points = cfg.sweep.points();
    const std::size_t total = points.size() * cfg.trials;
    std::vector<TrialOutcome> outcomes(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            try {
                outcomes[idx] = run_trial(cfg, idx / cfg.trials, idx % cfg.trials);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total);
                return;
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, total);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(threads, std::max<std::size_t>(total, 1));
        for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult res;
    res.config = cfg;
    // Checked against the degree cap, which bounds every generated network.
    res.warnings = cfg.schedule.warnings();
    if (weight_at(cfg.schedule, 1) * static_cast<double>(cfg.network.max_degree) >= 1.0)
        res.warnings.emplace_back("alpha_1 * max_degree >= 1: early diffusion steps can overshoot neighbor averaging");

    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t j = 0; j < cfg.solvers.size(); ++j) {
            std::vector<double> ok;
            std::size_t failed = 0;
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const auto& so = outcomes[p * cfg.trials + t].solvers[j];
                if (so.ok) ok.push_back(so.rmse);
                else ++failed;
            }
            const auto [mean, se] = mean_and_stderr(ok);
            res.rows.push_back({cfg.sweep.param, points[p], cfg.solvers[j], mean, se, ok.size(), failed});
        }
        if (cfg.record_curves) {
            std::vector<double> curve(cfg.iterations + 1, 0.0);
            std::size_t n = 0;
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const auto& c = outcomes[p * cfg.trials + t].dsrl_curve;
                if (c.size() != curve.size()) continue;
                for (std::size_t k = 0; k < c.size(); ++k) curve[k] += c[k];
                ++n;
            }
            for (double& v : curve) v = n ? v / static_cast<double>(n) : std::nan("");
            res.curves.push_back(std::move(curve));
        }
    }
    res.trials = std::move(outcomes);
    return res;
}

// --- output -----------------------------------------------------------------

/// Shortest round-trip formatting would be nicer; %.17g is exact and stable.
inline std::string fmt_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Leading comment line carried by every CSV: version, seed and the config
/// (without output_dir, so results written to different places compare equal).
inline std::string provenance_line(const ExperimentConfig& cfg)
{
    auto j = config_to_json(cfg);
    j.erase("output_dir");
    return std::string("# dsrl ") + kVersion + " seed=" + std::to_string(cfg.seed) + " config=" + j.dump() + "\n";
}

inline std::string sweep_csv(const ExperimentResult& r)
{
    std::ostringstream os;
    os << provenance_line(r.config);
    os << "sweep_param,sweep_value,solver,mean_rmse,stderr_rmse,trials_ok,trials_failed\n";
    for (const auto& row : r.rows) {
        os << row.param << ',' << fmt_real(row.value) << ',' << to_string(row.solver) << ','
           << fmt_real(row.mean_rmse) << ',' << fmt_real(row.stderr_rmse) << ',' << row.trials_ok << ','
           << row.trials_failed << '\n';
    }
    return os.str();
}

/// One row per (sweep point, trial, solver); failed trials have ok=0 and an empty rmse.
inline std::string trials_csv(const ExperimentResult& r)
{
    const auto points = r.config.sweep.points();
    std::ostringstream os;
    os << provenance_line(r.config);
    os << "sweep_param,sweep_value,trial,solver,ok,rmse\n";
    for (const auto& t : r.trials) {
        for (const auto& s : t.solvers) {
            os << r.config.sweep.param << ',' << fmt_real(points[t.sweep_index]) << ',' << t.trial << ','
               << to_string(s.solver) << ',' << (s.ok ? 1 : 0) << ',' << (s.ok ? fmt_real(s.rmse) : "") << '\n';
        }
    }
    return os.str();
}

inline std::string curves_csv(const ExperimentResult& r)
{
    const auto points = r.config.sweep.points();
    std::ostringstream os;
    os << provenance_line(r.config);
    os << "sweep_param,sweep_value,solver,k,mean_rmse\n";
    for (std::size_t p = 0; p < r.curves.size(); ++p)
        for (std::size_t k = 0; k < r.curves[p].size(); ++k)
            os << r.config.sweep.param << ',' << fmt_real(points[p]) << ",dsrl," << (k + 1) << ','
               << fmt_real(r.curves[p][k]) << '\n';
    return os.str();
}

inline nlohmann::json sweep_metadata(const ExperimentResult& r)
{
    std::size_t failed = 0;
    for (const auto& row : r.rows) failed += row.trials_failed;
    return {{"tool", "dsrl"},
            {"version", kVersion},
            {"seed", r.config.seed},
            {"config", config_to_json(r.config)},
            {"sweep_points", r.config.sweep.points()},
            {"warnings", r.warnings},
            {"failed_solver_trials", failed},
            {"files", r.config.record_curves ? nlohmann::json{"sweep.csv", "trials.csv", "curves.csv"}
                                             : nlohmann::json{"sweep.csv", "trials.csv"}}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw Error("write to " + path.string() + " failed");
}

/// Writes sweep.csv, trials.csv, curves.csv (when recorded) and sweep_meta.json into `dir`.
inline void write_sweep_outputs(const ExperimentResult& r, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "sweep.csv", sweep_csv(r));
    write_text(dir / "trials.csv", trials_csv(r));
    if (r.config.record_curves) write_text(dir / "curves.csv", curves_csv(r));
    write_text(dir / "sweep_meta.json", sweep_metadata(r).dump(2) + "\n");
}

// --- single-instance simulation ---------------------------------------------

struct SimulationResult {
    ExperimentConfig config;
    double sweep_value = 0.0;
    TrialInstance instance;
    std::optional<RunTrace> dsrl;
    std::optional<BaselineResult> l1;
    std::optional<BaselineResult> l2;
};

/// One instance (sweep point `sweep_index`, trial 0) with full traces.
inline SimulationResult simulate(const ExperimentConfig& cfg, std::size_t sweep_index = 0)
{
    validate(cfg);
    SimulationResult r{cfg, cfg.sweep.points().at(sweep_index), draw_instance(cfg, sweep_index, 0), {}, {}, {}};
    const auto& inst = r.instance;
    const PointN start = mean_estimate(inst.init);
    for (Solver s : cfg.solvers) {
        switch (s) {
        case Solver::dsrl: {
            RunOptions opts;
            opts.iterations = cfg.iterations;
            opts.x_true = inst.target;
            opts.trace_cadence = 1;
            r.dsrl = dsrl_run(inst.network, inst.measurements, cfg.schedule, inst.init, opts);
            break;
        }
        case Solver::l1:
            r.l1 = centralized_l1_subgradient(inst.network, inst.measurements, cfg.schedule, cfg.iterations, start);
            break;
        case Solver::l2:
            r.l2 = centralized_l2_descent(inst.network, inst.measurements, cfg.l2_step, cfg.iterations, start);
            break;
        }
    }
    return r;
}

/// trace.csv: k, solver, objective, rmse, disagreement; with `estimates`,
/// DSRL rows also carry x_<node>_<coord> columns.
inline std::string trace_csv(const SimulationResult& r, bool estimates = false)
{
    const std::size_t L = r.instance.network.size();
    const std::size_t n = r.instance.network.dimension();
    std::ostringstream os;
    os << provenance_line(r.config);
    os << "k,solver,objective,rmse,disagreement";
    if (estimates)
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t c = 0; c < n; ++c) os << ",x_" << i << '_' << c;
    os << '\n';
    const std::string pad = estimates ? std::string(L * n, ',') : std::string();

    if (r.dsrl) {
        const auto& tr = *r.dsrl;
        for (std::size_t idx = 0; idx < tr.records.size(); ++idx) {
            const auto& rec = tr.records[idx];
            os << rec.iteration << ",dsrl," << fmt_real(rec.objective) << ',' << fmt_real(*rec.rmse) << ','
               << fmt_real(rec.disagreement);
            if (estimates) {
                const auto& st = tr.snapshots[idx];
                for (const auto& x : st.estimates)
                    for (Eigen::Index c = 0; c < x.size(); ++c) os << ',' << fmt_real(x[c]);
            }
            os << '\n';
        }
    }
    auto baseline = [&](const BaselineResult& b, const char* name) {
        for (std::size_t k = 0; k < b.iterates.size(); ++k)
            os << (k + 1) << ',' << name << ',' << fmt_real(b.objective_trace[k]) << ','
               << fmt_real((b.iterates[k] - r.instance.target).norm()) << ",0" << pad << '\n';
    };
    if (r.l1) baseline(*r.l1, "l1");
    if (r.l2) baseline(*r.l2, "l2");
    return os.str();
}

inline nlohmann::json instance_document(const SimulationResult& r)
{
    nlohmann::json j{{"tool", "dsrl"},
                     {"version", kVersion},
                     {"seed", r.config.seed},
                     {"config", config_to_json(r.config)},
                     {"sweep_value", r.sweep_value},
                     {"network", network_to_json(r.instance.network)},
                     {"target", to_vector(r.instance.target)},
                     {"measurements", measurements_to_json(r.instance.measurements)}};
    nlohmann::json init = nlohmann::json::array();
    for (const auto& x : r.instance.init.estimates) init.push_back(to_vector(x));
    j["initial_estimates"] = init;
    nlohmann::json summary = nlohmann::json::object();
    if (r.dsrl) {
        summary["dsrl"] = {{"final_rmse", *r.dsrl->records.back().rmse},
                           {"final_disagreement", r.dsrl->records.back().disagreement},
                           {"warnings", r.dsrl->warnings}};
    }
    if (r.l1) summary["l1"] = {{"estimate", to_vector(r.l1->estimate)}, {"error", (r.l1->estimate - r.instance.target).norm()}};
    if (r.l2) summary["l2"] = {{"estimate", to_vector(r.l2->estimate)}, {"error", (r.l2->estimate - r.instance.target).norm()}};
    j["summary"] = summary;
    return j;
}

} // namespace dsrl

#endif // DSRL_HARNESS_HPP
