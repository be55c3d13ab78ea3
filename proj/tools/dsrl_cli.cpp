// dsrl: command-line driver for distributed robust localization experiments.
//
//   dsrl simulate  one instance, full traces
//   dsrl sweep     Monte Carlo sweep from a config file
//   dsrl validate  self-checks (sub-gradient, radial bounds, consensus)
//   dsrl presets   write the scenario configs

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsrl/experiment.hpp"
#include "dsrl/harness.hpp"
#include "dsrl/validation.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> iters;
    std::optional<std::string> out;
    std::optional<std::string> solvers;
    bool fixed_network = false;
    bool strict_schedule = false;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--trials", o.trials, "Trials per sweep point");
    cmd->add_option("--iters", o.iters, "Iterations K");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--solvers", o.solvers, "Comma-separated subset of dsrl,l1,l2");
    cmd->add_flag("--fixed-network", o.fixed_network, "Draw one network for all trials");
    cmd->add_flag("--strict-schedule", o.strict_schedule, "Reject schedules outside the convergence conditions");
}

dsrl::ExperimentConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config not found: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config " + path + " is not valid JSON: " + e.what());
    }
    return dsrl::config_from_json(j);
}

dsrl::ExperimentConfig resolve(const Overrides& o, dsrl::ExperimentConfig cfg)
{
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.iters) cfg.iterations = *o.iters;
    if (o.out) cfg.output_dir = *o.out;
    if (o.solvers) {
        cfg.solvers.clear();
        std::stringstream ss(*o.solvers);
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) cfg.solvers.push_back(dsrl::solver_from_string(item));
    }
    if (o.fixed_network) cfg.fixed_network = true;
    if (o.strict_schedule) cfg.schedule.strict = true;
    dsrl::validate(cfg);
    return cfg;
}

int cmd_simulate(const Overrides& o, std::size_t point, bool estimates)
{
    auto base = o.config_path.empty() ? dsrl::preset_noiseless() : load_config(o.config_path);
    const auto cfg = resolve(o, base);
    if (point >= cfg.sweep.points().size()) throw std::runtime_error("--point out of range");
    const auto r = dsrl::simulate(cfg, point);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    dsrl::write_text(dir / "trace.csv", dsrl::trace_csv(r, estimates));
    dsrl::write_text(dir / "instance.json", dsrl::instance_document(r).dump(2) + "\n");
    if (r.dsrl) {
        std::cout << "dsrl final rmse " << *r.dsrl->records.back().rmse << ", disagreement "
                  << r.dsrl->records.back().disagreement << '\n';
        for (const auto& w : r.dsrl->warnings) std::cerr << "warning: " << w << '\n';
    }
    if (r.l1) std::cout << "l1 error " << (r.l1->estimate - r.instance.target).norm() << '\n';
    if (r.l2) std::cout << "l2 error " << (r.l2->estimate - r.instance.target).norm() << '\n';
    std::cout << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "instance.json").string() << '\n';
    return 0;
}

int cmd_sweep(const Overrides& o, bool quiet)
{
    const auto cfg = resolve(o, load_config(o.config_path));
    const auto progress = [&](std::size_t done, std::size_t total) {
        if (!quiet && (done == total || done % 50 == 0)) std::cerr << "\r" << done << "/" << total << std::flush;
    };
    const auto result = dsrl::run_sweep(cfg, 0, progress);
    if (!quiet) std::cerr << '\n';
    dsrl::write_sweep_outputs(result, cfg.output_dir);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& row : result.rows) {
        std::cout << row.param << '=' << row.value << ' ' << dsrl::to_string(row.solver) << " mean_rmse "
                  << row.mean_rmse << " +- " << row.stderr_rmse << " (" << row.trials_ok << " ok, "
                  << row.trials_failed << " failed)\n";
    }
    return 0;
}

int cmd_validate(std::uint64_t seed)
{
    bool all = true;
    for (const auto& c : dsrl::validation::run_all(seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        all = all && c.passed;
    }
    return all ? 0 : 1;
}

int cmd_presets(const std::optional<std::string>& out, std::optional<std::size_t> trials)
{
    std::vector<dsrl::ExperimentConfig> presets{dsrl::preset_outliers(), dsrl::preset_laplace(),
                                                dsrl::preset_cauchy(), dsrl::preset_convergence()};
    for (auto& p : presets) {
        if (trials) p.trials = *trials;
        if (out) p.output_dir = (fs::path(*out) / ("results_" + p.name)).string();
    }
    if (!out) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& p : presets) all.push_back(dsrl::config_to_json(p));
        std::cout << all.dump(2) << '\n';
        return 0;
    }
    fs::create_directories(*out);
    for (const auto& p : presets) {
        const auto path = fs::path(*out) / (p.name + ".json");
        dsrl::write_text(path, dsrl::config_to_json(p).dump(2) + "\n");
        std::cout << path.string() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed robust source localization simulator"};
    app.require_subcommand(1);

    Overrides sim_o, sweep_o;
    std::size_t point = 0;
    bool estimates = false;
    auto* sim = app.add_subcommand("simulate", "Run one instance and write trace.csv and instance.json");
    sim->add_option("--config", sim_o.config_path, "Experiment config (JSON); default is the noiseless preset");
    sim->add_option("--point", point, "Sweep point index to simulate");
    sim->add_flag("--estimates", estimates, "Add per-node estimate columns to trace.csv");
    add_common(sim, sim_o);

    bool quiet = false;
    auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep from a config file");
    sweep->add_option("--config", sweep_o.config_path, "Experiment config (JSON)")->required();
    sweep->add_flag("--quiet", quiet, "No progress output");
    add_common(sweep, sweep_o);

    std::uint64_t validate_seed = 1;
    auto* val = app.add_subcommand("validate", "Run the invariant self-checks");
    val->add_option("--seed", validate_seed, "Seed for the random checks");

    std::optional<std::string> presets_out;
    std::optional<std::size_t> presets_trials;
    auto* pre = app.add_subcommand("presets", "Emit the scenario configs (stdout, or files with --out)");
    pre->add_option("--out", presets_out, "Directory to write <name>.json files into");
    pre->add_option("--trials", presets_trials, "Override the trial count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) return cmd_simulate(sim_o, point, estimates);
        if (*sweep) return cmd_sweep(sweep_o, quiet);
        if (*val) return cmd_validate(validate_seed);
        if (*pre) return cmd_presets(presets_out, presets_trials);
    } catch (const dsrl::ConfigInvalid& e) {
        std::cerr << "error: invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
