#ifndef DSRL_EXPERIMENT_HPP
#define DSRL_EXPERIMENT_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsrl/dsrl.hpp"
#include "dsrl/errors.hpp"
#include "dsrl/measurement.hpp"
#include "dsrl/network.hpp"

namespace dsrl {

inline constexpr const char* kVersion = "0.1.0";

enum class Solver { dsrl, l1, l2 };

inline const char* to_string(Solver s)
{
    switch (s) {
    case Solver::dsrl: return "dsrl";
    case Solver::l1: return "l1";
    case Solver::l2: return "l2";
    }
    return "?";
}

inline Solver solver_from_string(const std::string& s)
{
    if (s == "dsrl") return Solver::dsrl;
    if (s == "l1") return Solver::l1;
    if (s == "l2") return Solver::l2;
    throw ConfigInvalid("solvers", "unknown solver '" + s + "' (expected dsrl, l1 or l2)");
}

/// Scenario parameter values to visit, either an arithmetic grid or an
/// explicit list.
struct Sweep {
    std::string param = "none";
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;
    std::vector<double> values;

    /// Grid points start + i * step, i = 0..n, last point not beyond stop.
    /// Grid values are rounded to 12 decimals so 0.05 + 2 * 0.05 prints as 0.15.
    std::vector<double> points() const
    {
        if (!values.empty()) return values;
        std::vector<double> out;
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
        return out;
    }
};

struct ExperimentConfig {
    std::string name = "experiment";
    NetworkParams network;
    NoiseScenario scenario = Noiseless{};
    Sweep sweep;
    Schedule schedule = Schedule::reference();
    std::size_t iterations = default_iterations(Schedule::reference());
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::vector<Solver> solvers{Solver::dsrl, Solver::l1, Solver::l2};
    /// step0 of the centralized L2 baseline (step0 / sqrt(k)).
    double l2_step = 0.5;
    /// One network shared by every trial instead of a fresh draw per trial.
    bool fixed_network = false;
    /// Also emit mean DSRL RMSE per iteration (curves.csv).
    bool record_curves = false;
    std::string output_dir = "out";
};

/// Name of the scalar a scenario sweeps over.
inline std::string sweep_param_of(const NoiseScenario& s)
{
    struct {
        std::string operator()(const Noiseless&) const { return "none"; }
        std::string operator()(const UniformOutlier&) const { return "p"; }
        std::string operator()(const LaplaceMixture&) const { return "sigma"; }
        std::string operator()(const Cauchy&) const { return "gamma"; }
    } v;
    return std::visit(v, s);
}

/// Current value of the swept scalar (0 for the noiseless scenario).
inline double sweep_value_of(const NoiseScenario& s)
{
    struct {
        double operator()(const Noiseless&) const { return 0.0; }
        double operator()(const UniformOutlier& s) const { return s.p; }
        double operator()(const LaplaceMixture& s) const { return s.sigma; }
        double operator()(const Cauchy& s) const { return s.gamma; }
    } v;
    return std::visit(v, s);
}

/// The scenario with its swept parameter set to `value`.
inline NoiseScenario scenario_at(const NoiseScenario& base, double value)
{
    struct {
        double value;
        NoiseScenario operator()(Noiseless s) const { return s; }
        NoiseScenario operator()(UniformOutlier s) const { s.p = value; return s; }
        NoiseScenario operator()(LaplaceMixture s) const { s.sigma = value; return s; }
        NoiseScenario operator()(Cauchy s) const { s.gamma = value; return s; }
    } v{value};
    return std::visit(v, base);
}

inline void validate(const ExperimentConfig& cfg)
{
    cfg.network.validate();
    validate(cfg.scenario);
    cfg.schedule.validate();
    if (cfg.trials < 1) throw ConfigInvalid("trials", "must be at least 1");
    if (cfg.solvers.empty()) throw ConfigInvalid("solvers", "at least one solver is required");
    if (std::set<Solver>(cfg.solvers.begin(), cfg.solvers.end()).size() != cfg.solvers.size())
        throw ConfigInvalid("solvers", "duplicate solver");
    if (!(cfg.l2_step > 0.0)) throw ConfigInvalid("l2_step", "must be positive");
    if (cfg.sweep.param != sweep_param_of(cfg.scenario))
        throw ConfigInvalid("sweep.param", "scenario '" + scenario_tag(cfg.scenario) + "' sweeps '" +
                                               sweep_param_of(cfg.scenario) + "', not '" + cfg.sweep.param + "'");
    if (cfg.sweep.values.empty()) {
        if (!(cfg.sweep.step > 0.0)) throw ConfigInvalid("sweep.step", "must be positive");
        if (!(cfg.sweep.start <= cfg.sweep.stop)) throw ConfigInvalid("sweep.start", "must not exceed sweep.stop");
    }
    const auto pts = cfg.sweep.points();
    if (pts.empty()) throw ConfigInvalid("sweep", "no sweep points");
    for (double v : pts) {
        if (!std::isfinite(v)) throw ConfigInvalid("sweep.values", "non-finite value");
        try {
            validate(scenario_at(cfg.scenario, v));
        } catch (const ConfigInvalid& e) {
            throw ConfigInvalid("sweep.values", "value " + std::to_string(v) + " is invalid: " + e.what());
        }
    }
}

// --- JSON -----------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> known)
{
    if (!j.is_object()) throw ConfigInvalid(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigInvalid(path.empty() ? key : path + "." + key, "unknown field");
    }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& path)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(path.empty() ? key : path + "." + key, e.what());
    }
}

} // namespace detail

inline nlohmann::json scenario_to_json(const NoiseScenario& scenario)
{
    struct {
        nlohmann::json operator()(const Noiseless&) const { return {{"kind", "noiseless"}}; }
        nlohmann::json operator()(const UniformOutlier& s) const
        {
            return {{"kind", "uniform_outlier"}, {"p", s.p}, {"upper", s.upper}};
        }
        nlohmann::json operator()(const LaplaceMixture& s) const
        {
            return {{"kind", "laplace_mixture"}, {"sigma", s.sigma}, {"c1", s.c1}, {"c2", s.c2},
                    {"rate_ratio", s.rate_ratio},
                    {"rate_rule", s.rule == LaplaceRateRule::literal ? "literal" : "variance_consistent"}};
        }
        nlohmann::json operator()(const Cauchy& s) const { return {{"kind", "cauchy"}, {"gamma", s.gamma}}; }
    } v;
    return std::visit(v, scenario);
}

inline NoiseScenario scenario_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind")) throw ConfigInvalid("scenario.kind", "missing");
    const auto kind = j.at("kind").get<std::string>();
    const std::string path = "scenario";
    if (kind == "noiseless") {
        detail::reject_unknown(j, path, {"kind"});
        return Noiseless{};
    }
    if (kind == "uniform_outlier") {
        detail::reject_unknown(j, path, {"kind", "p", "upper"});
        UniformOutlier s;
        detail::read(j, "p", s.p, path);
        detail::read(j, "upper", s.upper, path);
        return s;
    }
    if (kind == "laplace_mixture") {
        detail::reject_unknown(j, path, {"kind", "sigma", "c1", "c2", "rate_ratio", "rate_rule"});
        LaplaceMixture s;
        detail::read(j, "sigma", s.sigma, path);
        detail::read(j, "c1", s.c1, path);
        detail::read(j, "c2", s.c2, path);
        detail::read(j, "rate_ratio", s.rate_ratio, path);
        std::string rule = "literal";
        detail::read(j, "rate_rule", rule, path);
        if (rule == "literal") s.rule = LaplaceRateRule::literal;
        else if (rule == "variance_consistent") s.rule = LaplaceRateRule::variance_consistent;
        else throw ConfigInvalid("scenario.rate_rule", "expected 'literal' or 'variance_consistent'");
        return s;
    }
    if (kind == "cauchy") {
        detail::reject_unknown(j, path, {"kind", "gamma"});
        Cauchy s;
        detail::read(j, "gamma", s.gamma, path);
        return s;
    }
    throw ConfigInvalid("scenario.kind", "unknown scenario '" + kind + "'");
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg)
{
    nlohmann::json net;
    to_json(net, cfg.network);
    nlohmann::json sweep{{"param", cfg.sweep.param}};
    if (cfg.sweep.values.empty()) {
        sweep["start"] = cfg.sweep.start;
        sweep["stop"] = cfg.sweep.stop;
        sweep["step"] = cfg.sweep.step;
    } else {
        sweep["values"] = cfg.sweep.values;
    }
    nlohmann::json solvers = nlohmann::json::array();
    for (Solver s : cfg.solvers) solvers.push_back(to_string(s));
    return {{"name", cfg.name},
            {"network", net},
            {"scenario", scenario_to_json(cfg.scenario)},
            {"sweep", sweep},
            {"schedule",
             {{"a", cfg.schedule.a},
              {"tau_alpha", cfg.schedule.tau_alpha},
              {"b", cfg.schedule.b},
              {"tau_beta", cfg.schedule.tau_beta},
              {"strict", cfg.schedule.strict}}},
            {"iterations", cfg.iterations},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"solvers", solvers},
            {"l2_step", cfg.l2_step},
            {"fixed_network", cfg.fixed_network},
            {"record_curves", cfg.record_curves},
            {"output_dir", cfg.output_dir}};
}

/// Parses and validates a config. Missing fields keep their defaults;
/// unknown fields are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    using detail::read;
    detail::reject_unknown(j, "",
                           {"name", "network", "scenario", "sweep", "schedule", "iterations", "trials", "seed",
                            "solvers", "l2_step", "fixed_network", "record_curves", "output_dir"});
    ExperimentConfig cfg;
    read(j, "name", cfg.name, "");
    if (j.contains("network")) {
        const auto& n = j.at("network");
        detail::reject_unknown(n, "network",
                               {"num_sensors", "dimension", "half_width", "connect_radius", "min_degree",
                                "max_degree", "max_attempts", "placement"});
        read(n, "num_sensors", cfg.network.num_sensors, "network");
        read(n, "dimension", cfg.network.dimension, "network");
        read(n, "half_width", cfg.network.half_width, "network");
        read(n, "connect_radius", cfg.network.connect_radius, "network");
        read(n, "min_degree", cfg.network.min_degree, "network");
        read(n, "max_degree", cfg.network.max_degree, "network");
        read(n, "max_attempts", cfg.network.max_attempts, "network");
        std::string placement = to_string(cfg.network.placement);
        read(n, "placement", placement, "network");
        cfg.network.placement = placement_from_string(placement);
    }
    if (j.contains("scenario")) cfg.scenario = scenario_from_json(j.at("scenario"));
    cfg.sweep.param = sweep_param_of(cfg.scenario);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::reject_unknown(s, "sweep", {"param", "start", "stop", "step", "values"});
        read(s, "param", cfg.sweep.param, "sweep");
        read(s, "start", cfg.sweep.start, "sweep");
        read(s, "stop", cfg.sweep.stop, "sweep");
        read(s, "step", cfg.sweep.step, "sweep");
        read(s, "values", cfg.sweep.values, "sweep");
        if (s.contains("values") && (s.contains("start") || s.contains("stop") || s.contains("step")))
            throw ConfigInvalid("sweep.values", "give either values or start/stop/step, not both");
    } else {
        cfg.sweep.values = {sweep_value_of(cfg.scenario)};
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::reject_unknown(s, "schedule", {"a", "tau_alpha", "b", "tau_beta", "strict"});
        read(s, "a", cfg.schedule.a, "schedule");
        read(s, "tau_alpha", cfg.schedule.tau_alpha, "schedule");
        read(s, "b", cfg.schedule.b, "schedule");
        read(s, "tau_beta", cfg.schedule.tau_beta, "schedule");
        read(s, "strict", cfg.schedule.strict, "schedule");
    }
    cfg.iterations = default_iterations(cfg.schedule);
    read(j, "iterations", cfg.iterations, "");
    read(j, "trials", cfg.trials, "");
    read(j, "seed", cfg.seed, "");
    if (j.contains("solvers")) {
        std::vector<std::string> names;
        read(j, "solvers", names, "");
        cfg.solvers.clear();
        for (const auto& n : names) cfg.solvers.push_back(solver_from_string(n));
    }
    read(j, "l2_step", cfg.l2_step, "");
    read(j, "fixed_network", cfg.fixed_network, "");
    read(j, "record_curves", cfg.record_curves, "");
    read(j, "output_dir", cfg.output_dir, "");
    validate(cfg);
    return cfg;
}

// --- presets ----------------------------------------------------------------

/// Outlier sweep: ranges replaced by Uniform(0, 6 sqrt 3) with probability
/// p = 0.05, 0.10, ..., 0.95.
inline ExperimentConfig preset_outliers()
{
    ExperimentConfig cfg;
    cfg.name = "outliers";
    cfg.scenario = UniformOutlier{0.05, 6.0 * std::numbers::sqrt3};
    cfg.sweep = {"p", 0.05, 0.95, 0.05, {}};
    return cfg;
}

/// Laplace-mixture sweep, sigma = 0.25, 0.50, ..., 25.
inline ExperimentConfig preset_laplace()
{
    ExperimentConfig cfg;
    cfg.name = "laplace_mixture";
    cfg.scenario = LaplaceMixture{};
    cfg.sweep = {"sigma", 0.25, 25.0, 0.25, {}};
    return cfg;
}

/// Cauchy sweep, gamma = 0.05, 0.10, ..., 2.5.
inline ExperimentConfig preset_cauchy()
{
    ExperimentConfig cfg;
    cfg.name = "cauchy";
    cfg.scenario = Cauchy{};
    cfg.sweep = {"gamma", 0.05, 2.5, 0.05, {}};
    return cfg;
}

/// RMSE-versus-iteration curves under Cauchy noise with gamma = 1.
inline ExperimentConfig preset_convergence()
{
    ExperimentConfig cfg;
    cfg.name = "convergence";
    cfg.scenario = Cauchy{};
    cfg.sweep = {"gamma", 0.0, 0.0, 1.0, {1.0}};
    cfg.record_curves = true;
    return cfg;
}

/// Noiseless sanity preset.
inline ExperimentConfig preset_noiseless()
{
    ExperimentConfig cfg;
    cfg.name = "noiseless";
    cfg.scenario = Noiseless{};
    cfg.sweep = {"none", 0.0, 0.0, 1.0, {0.0}};
    return cfg;
}

} // namespace dsrl

#endif // DSRL_EXPERIMENT_HPP
