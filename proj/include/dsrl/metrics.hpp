#ifndef DSRL_METRICS_HPP
#define DSRL_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "dsrl/errors.hpp"
#include "dsrl/point.hpp"

namespace dsrl {

/// Per-node estimates x_i at iteration k (k = 1 is the initialization).
struct NodeStates {
    std::vector<PointN> estimates;
    std::size_t iteration = 1;

    std::size_t size() const noexcept { return estimates.size(); }

    bool all_finite() const
    {
        for (const auto& x : estimates)
            if (!is_finite(x)) return false;
        return true;
    }
};

struct MetricSample {
    double rmse = 0.0;
    double disagreement = 0.0;
    double objective = 0.0;
};

inline PointN mean_estimate(const NodeStates& states)
{
    if (states.size() == 0) throw SizeMismatch("mean of an empty state set");
    PointN m = PointN::Zero(states.estimates.front().size());
    for (const auto& x : states.estimates) m += x;
    return m / static_cast<double>(states.size());
}

/// sqrt( sum_i ||x_i - x_true||^2 / L ).
inline double rmse(const NodeStates& states, const PointN& x_true)
{
    if (states.size() == 0) throw SizeMismatch("rmse of an empty state set");
    double acc = 0.0;
    for (const auto& x : states.estimates) {
        require_dim(x, dim(x_true), "estimate");
        acc += (x - x_true).squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(states.size()));
}

/// Root-mean deviation from the node mean; zero iff consensus. Satisfies
/// rmse^2 = disagreement^2 + ||mean - x_true||^2.
inline double disagreement(const NodeStates& states)
{
    const PointN m = mean_estimate(states);
    double acc = 0.0;
    for (const auto& x : states.estimates) acc += (x - m).squaredNorm();
    return std::sqrt(acc / static_cast<double>(states.size()));
}

} // namespace dsrl

#endif // DSRL_METRICS_HPP
