#ifndef DSRL_DSRL_HPP
#define DSRL_DSRL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dsrl/errors.hpp"
#include "dsrl/measurement.hpp"
#include "dsrl/metrics.hpp"
#include "dsrl/network.hpp"
#include "dsrl/point.hpp"
#include "dsrl/random.hpp"

namespace dsrl {

// --- schedule -------------------------------------------------------------

/// Decaying consensus weight alpha_k = a / k^tau_alpha and step size
/// beta_k = b / k^tau_beta, k >= 1.
///
/// The convergence guarantee needs a, b > 0, 0 < tau_alpha < tau_beta and
/// 1/2 < tau_beta <= 1. In strict mode any violation is rejected; otherwise it
/// is reported by warnings() and the run proceeds. b = 0 (pure consensus) is
/// accepted outside strict mode.
struct Schedule {
    double a = 0.3;
    double tau_alpha = 0.55;
    double b = 3.5;
    double tau_beta = 0.5;
    bool strict = false;

    /// Default gains and exponents of the simulation study.
    static Schedule reference() { return {0.3, 0.55, 3.5, 0.5, false}; }

    /// Same gains with exponents that satisfy the convergence conditions.
    static Schedule compliant() { return {0.3, 0.55, 3.5, 0.75, false}; }

    std::vector<std::string> warnings() const
    {
        std::vector<std::string> w;
        if (!(b > 0.0)) w.emplace_back("step gain b is not positive");
        if (!(tau_alpha > 0.0)) w.emplace_back("tau_alpha must be positive");
        if (!(tau_alpha < tau_beta)) w.emplace_back("tau_alpha must be smaller than tau_beta");
        if (!(tau_beta > 0.5 && tau_beta <= 1.0)) w.emplace_back("tau_beta must lie in (1/2, 1]");
        return w;
    }

    void validate() const
    {
        if (!(a > 0.0)) throw ConfigInvalid("schedule.a", "must be positive");
        if (!(b >= 0.0)) throw ConfigInvalid("schedule.b", "must be nonnegative");
        if (!std::isfinite(tau_alpha) || !std::isfinite(tau_beta))
            throw ConfigInvalid("schedule.tau_alpha", "exponents must be finite");
        if (strict) {
            const auto w = warnings();
            if (!w.empty()) throw ConfigInvalid("schedule", w.front());
        }
    }
};

inline double weight_at(const Schedule& s, std::size_t k)
{
    return s.a / std::pow(static_cast<double>(k), s.tau_alpha);
}

inline double step_at(const Schedule& s, std::size_t k)
{
    return s.b / std::pow(static_cast<double>(k), s.tau_beta);
}

/// Smallest K with beta_K < beta_1 / 100; 2000 when the step never decays.
inline std::size_t default_iterations(const Schedule& s)
{
    if (!(s.tau_beta > 0.0)) return 2000;
    return static_cast<std::size_t>(std::floor(std::pow(100.0, 1.0 / s.tau_beta))) + 1;
}

// --- local terms ----------------------------------------------------------

/// f_i(x) = | ||x - a_i|| - d_i | / L.
inline double local_objective(const PointN& x, const PointN& anchor, double range, std::size_t num_sensors)
{
    require_dim(x, dim(anchor), "estimate");
    return std::abs((x - anchor).norm() - range) / static_cast<double>(num_sensors);
}

/// An element of the sub-differential of f_i at x:
///   (x - a_i) / (L ||x - a_i||) * sign(||x - a_i|| - d_i),
/// and zero at x = a_i. sign(0) is taken as 0, so a node sitting exactly on
/// its measured range shell gets a zero sub-gradient.
inline PointN local_subgradient(const PointN& x, const PointN& anchor, double range, std::size_t num_sensors)
{
    require_dim(x, dim(anchor), "estimate");
    const PointN diff = x - anchor;
    const double dist = diff.norm();
    if (dist == 0.0) return PointN::Zero(diff.size());
    const double r = dist - range;
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    return diff * (sign / (static_cast<double>(num_sensors) * dist));
}

inline void require_sizes(const SensorNetwork& net, const MeasurementSet& m)
{
    if (m.size() != net.size())
        throw SizeMismatch("measurement count " + std::to_string(m.size()) + " != sensor count " +
                           std::to_string(net.size()));
}

/// f(x) = sum_i f_i(x), the robust (L1) localization objective.
inline double global_objective(const SensorNetwork& net, const MeasurementSet& m, const PointN& x)
{
    require_sizes(net, m);
    double acc = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) acc += local_objective(x, net.position(i), m.ranges[i], net.size());
    return acc;
}

/// Mean of f over the node estimates.
inline double network_objective(const SensorNetwork& net, const MeasurementSet& m, const NodeStates& states)
{
    double acc = 0.0;
    for (const auto& x : states.estimates) acc += global_objective(net, m, x);
    return acc / static_cast<double>(states.size());
}

inline void require_sizes(const SensorNetwork& net, const NodeStates& states)
{
    if (states.size() != net.size())
        throw SizeMismatch("state count " + std::to_string(states.size()) + " != sensor count " +
                           std::to_string(net.size()));
    for (const auto& x : states.estimates) require_dim(x, net.dimension(), "node estimate");
}

// --- diffusion ------------------------------------------------------------

/// v_i = x_i + alpha * sum_{j in N_i} (x_j - x_i), all read from the pre-step states.
inline std::vector<PointN> diffuse(const NodeStates& states, const SensorNetwork& net, double alpha)
{
    require_sizes(net, states);
    std::vector<PointN> v(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const PointN& xi = states.estimates[i];
        PointN pull = PointN::Zero(xi.size());
        for (std::size_t j : net.neighbors(i)) pull += states.estimates[j] - xi;
        v[i] = xi + alpha * pull;
    }
    return v;
}

// --- run ------------------------------------------------------------------

struct IterationRecord {
    std::size_t iteration = 1;
    double objective = 0.0;
    std::optional<double> rmse;
    double disagreement = 0.0;
};

/// Output of dsrl_run. `records` holds one entry per iteration, starting with
/// the initialization (iteration 1); `snapshots` holds full states at the
/// configured cadence plus the final states.
struct RunTrace {
    std::vector<IterationRecord> records;
    std::vector<NodeStates> snapshots;
    NodeStates final_states;
    std::vector<std::string> warnings;
};

struct RunOptions {
    std::size_t iterations = 2000;
    std::optional<PointN> x_true;
    /// Full snapshot every `trace_cadence` iterations; 0 keeps only the
    /// initial and final states.
    std::size_t trace_cadence = 0;
    /// Order in which nodes are updated inside one iteration. Empty means
    /// 0..L-1. Updates are synchronous, so the order never changes the result.
    std::vector<std::size_t> processing_order;
    /// Skip per-iteration objective/disagreement bookkeeping (only the final
    /// record is written).
    bool final_only = false;
};

/// Initial estimates drawn independently and uniformly from the deployment cube.
inline NodeStates uniform_initialization(std::size_t num_nodes, std::size_t dimension, double half_width,
                                         RandomStream& rng)
{
    NodeStates s;
    s.iteration = 1;
    s.estimates.assign(num_nodes, PointN(static_cast<Eigen::Index>(dimension)));
    for (auto& x : s.estimates)
        for (Eigen::Index c = 0; c < x.size(); ++c) x[c] = rng.uniform(-half_width, half_width);
    return s;
}

inline std::vector<std::string> run_warnings(const SensorNetwork& net, const Schedule& s)
{
    auto w = s.warnings();
    if (weight_at(s, 1) * static_cast<double>(net.max_degree()) >= 1.0)
        w.emplace_back("alpha_1 * max_degree >= 1: early diffusion steps overshoot neighbor averaging");
    return w;
}

namespace detail {

inline IterationRecord make_record(const SensorNetwork& net, const MeasurementSet& m, const NodeStates& states,
                                   const std::optional<PointN>& x_true)
{
    IterationRecord r;
    r.iteration = states.iteration;
    r.objective = network_objective(net, m, states);
    r.disagreement = disagreement(states);
    if (x_true) r.rmse = rmse(states, *x_true);
    return r;
}

} // namespace detail

/// Runs K iterations of the distributed sub-gradient method. Each iteration
/// diffuses with alpha_k and then moves every node against the sub-gradient
/// of its own f_i evaluated at its pre-diffusion estimate, scaled by beta_k.
inline RunTrace dsrl_run(const SensorNetwork& net, const MeasurementSet& m, const Schedule& schedule,
                         NodeStates init, const RunOptions& opts = {})
{
    schedule.validate();
    require_sizes(net, m);
    require_sizes(net, init);
    if (opts.x_true) require_dim(*opts.x_true, net.dimension(), "x_true");
    if (!init.all_finite()) throw NonFiniteState("initial states are not finite");

    const std::size_t L = net.size();
    std::vector<std::size_t> order = opts.processing_order;
    if (order.empty()) {
        order.resize(L);
        std::iota(order.begin(), order.end(), std::size_t{0});
    } else {
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i] != i || sorted.size() != L) throw SizeMismatch("processing_order is not a permutation");
    }

    RunTrace trace;
    trace.warnings = run_warnings(net, schedule);

    NodeStates cur = std::move(init);
    const std::size_t k0 = cur.iteration;
    if (!opts.final_only) trace.records.reserve(opts.iterations + 1);
    auto record = [&] { trace.records.push_back(detail::make_record(net, m, cur, opts.x_true)); };
    auto snapshot_due = [&](std::size_t done) { return opts.trace_cadence != 0 && done % opts.trace_cadence == 0; };

    if (!opts.final_only) record();
    trace.snapshots.push_back(cur);

    NodeStates next;
    next.estimates.resize(L);
    for (std::size_t done = 0; done < opts.iterations; ++done) {
        const std::size_t k = k0 + done;
        const double alpha = weight_at(schedule, k);
        const double beta = step_at(schedule, k);
        for (std::size_t i : order) {
            const PointN& xi = cur.estimates[i];
            PointN pull = PointN::Zero(xi.size());
            for (std::size_t j : net.neighbors(i)) pull += cur.estimates[j] - xi;
            const PointN g = local_subgradient(xi, net.position(i), m.ranges[i], L);
            next.estimates[i] = xi + alpha * pull - beta * g;
        }
        next.iteration = k + 1;
        std::swap(cur, next);
        if (!cur.all_finite())
            throw NonFiniteState("estimates became non-finite at iteration " + std::to_string(cur.iteration));
        if (!opts.final_only) record();
        if (snapshot_due(done + 1) && done + 1 != opts.iterations) trace.snapshots.push_back(cur);
    }
    if (opts.final_only) record();
    if (opts.iterations > 0) trace.snapshots.push_back(cur);
    trace.final_states = std::move(cur);
    return trace;
}

// --- radial regularity ----------------------------------------------------

/// R = 3 max_i max_j |a_ij| + max_i d_i + 1. Beyond this radius every
/// sub-gradient points outward. Negative ranges contribute 0 to the max, so
/// R >= 1.
inline double lemma2_radius(const SensorNetwork& net, const MeasurementSet& m)
{
    require_sizes(net, m);
    double max_coord = 0.0;
    for (const auto& a : net.positions()) max_coord = std::max(max_coord, a.cwiseAbs().maxCoeff());
    double max_range = 0.0;
    for (double d : m.ranges) max_range = std::max(max_range, d);
    return 3.0 * max_coord + max_range + 1.0;
}

} // namespace dsrl

#endif // DSRL_DSRL_HPP
