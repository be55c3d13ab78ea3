#ifndef DSRL_BASELINES_HPP
#define DSRL_BASELINES_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dsrl/dsrl.hpp"
#include "dsrl/errors.hpp"
#include "dsrl/measurement.hpp"
#include "dsrl/network.hpp"
#include "dsrl/point.hpp"

namespace dsrl {

/// Best iterate of a centralized solver. objective_trace[k] and iterates[k]
/// describe iterate k (k = 0 is the initialization).
struct BaselineResult {
    PointN estimate;
    std::vector<double> objective_trace;
    std::vector<PointN> iterates;
    std::size_t iterations = 0;
};

/// (1/L) sum_i (||x - a_i|| - d_i)^2, the Gaussian maximum-likelihood objective.
inline double l2_objective(const SensorNetwork& net, const MeasurementSet& m, const PointN& x)
{
    require_sizes(net, m);
    require_dim(x, net.dimension(), "estimate");
    double acc = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const double r = (x - net.position(i)).norm() - m.ranges[i];
        acc += r * r;
    }
    return acc / static_cast<double>(net.size());
}

/// Gradient of l2_objective; a sensor located exactly at x contributes zero.
inline PointN l2_gradient(const SensorNetwork& net, const MeasurementSet& m, const PointN& x)
{
    require_sizes(net, m);
    require_dim(x, net.dimension(), "estimate");
    const double L = static_cast<double>(net.size());
    PointN g = PointN::Zero(x.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        const PointN diff = x - net.position(i);
        const double dist = diff.norm();
        if (dist == 0.0) continue;
        g += (2.0 / L) * (dist - m.ranges[i]) / dist * diff;
    }
    return g;
}

/// Sum of the per-sensor L1 sub-gradients at x.
inline PointN l1_subgradient(const SensorNetwork& net, const MeasurementSet& m, const PointN& x)
{
    require_sizes(net, m);
    PointN g = PointN::Zero(x.size());
    for (std::size_t i = 0; i < net.size(); ++i) g += local_subgradient(x, net.position(i), m.ranges[i], net.size());
    return g;
}

namespace detail {

template <class Objective, class Direction, class Step>
BaselineResult best_iterate_descent(const PointN& init, std::size_t iterations, Objective&& objective,
                                    Direction&& direction, Step&& step, const char* solver)
{
    if (!is_finite(init)) throw NonFiniteState(std::string(solver) + ": initial point is not finite");
    BaselineResult res;
    res.objective_trace.reserve(iterations + 1);
    res.iterates.reserve(iterations + 1);
    PointN x = init;
    double best = objective(x);
    res.estimate = x;
    res.objective_trace.push_back(best);
    res.iterates.push_back(x);
    for (std::size_t k = 1; k <= iterations; ++k) {
        x -= step(k) * direction(x);
        const double f = objective(x);
        if (!is_finite(x) || !std::isfinite(f))
            throw NonFiniteState(std::string(solver) + ": diverged at iteration " + std::to_string(k));
        res.objective_trace.push_back(f);
        res.iterates.push_back(x);
        if (f < best) {
            best = f;
            res.estimate = x;
        }
    }
    res.iterations = iterations;
    return res;
}

} // namespace detail

/// Gradient descent on the L2 objective with step step0 / sqrt(k).
inline BaselineResult centralized_l2_descent(const SensorNetwork& net, const MeasurementSet& m, double step0,
                                             std::size_t iterations, const PointN& init)
{
    require_sizes(net, m);
    require_dim(init, net.dimension(), "init");
    return detail::best_iterate_descent(
        init, iterations, [&](const PointN& x) { return l2_objective(net, m, x); },
        [&](const PointN& x) { return l2_gradient(net, m, x); },
        [&](std::size_t k) { return step0 / std::sqrt(static_cast<double>(k)); }, "centralized_l2_descent");
}

/// Sub-gradient descent on the L1 objective, x <- x - beta_k sum_i g_i.
inline BaselineResult centralized_l1_subgradient(const SensorNetwork& net, const MeasurementSet& m,
                                                 const Schedule& s, std::size_t iterations, const PointN& init)
{
    require_sizes(net, m);
    require_dim(init, net.dimension(), "init");
    return detail::best_iterate_descent(
        init, iterations, [&](const PointN& x) { return global_objective(net, m, x); },
        [&](const PointN& x) { return l1_subgradient(net, m, x); }, [&](std::size_t k) { return step_at(s, k); },
        "centralized_l1_subgradient");
}

} // namespace dsrl

#endif // DSRL_BASELINES_HPP
