#ifndef DSRL_VALIDATION_HPP
#define DSRL_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dsrl/dsrl.hpp"
#include "dsrl/measurement.hpp"
#include "dsrl/metrics.hpp"
#include "dsrl/network.hpp"
#include "dsrl/random.hpp"

// Self-checks behind `dsrl validate`. They exercise the library on random
// instances; the test suites carry their own independent oracles.

namespace dsrl::validation {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Sub-gradient against central differences of f_i at random points kept
/// at least `margin` away from the kinks ||x - a|| in {0, d}.
inline CheckResult check_subgradient(std::uint64_t seed, std::size_t samples = 100, double margin = 1e-3,
                                     double tol = 1e-5)
{
    RandomStream rng(seed, {1});
    double worst = 0.0;
    std::size_t done = 0;
    while (done < samples) {
        PointN x(3), a(3);
        for (int c = 0; c < 3; ++c) {
            x[c] = rng.uniform(-5, 5);
            a[c] = rng.uniform(-5, 5);
        }
        const double d = rng.uniform(0, 8);
        const double dist = (x - a).norm();
        if (dist < margin || std::abs(dist - d) < margin) continue;
        const std::size_t L = 1 + rng.next_u64() % 40;
        const PointN g = local_subgradient(x, a, d, L);
        const double h = 1e-6;
        PointN fd(3);
        for (int c = 0; c < 3; ++c) {
            PointN xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            fd[c] = (local_objective(xp, a, d, L) - local_objective(xm, a, d, L)) / (2 * h);
        }
        worst = std::max(worst, (g - fd).norm() / g.norm());
        ++done;
    }
    return {"subgradient_vs_finite_differences", worst < tol, "max relative error " + std::to_string(worst)};
}

/// Radial regularity beyond lemma2_radius: every per-sensor direction g
/// satisfies <g/|g|, x/|x|> >= 1/2 and |g| <= |x| (with g scaled by L).
inline CheckResult check_radial_bounds(std::uint64_t seed, std::size_t instances = 20, std::size_t samples = 1000)
{
    std::size_t violations = 0;
    double min_cos = 1.0;
    for (std::size_t t = 0; t < instances; ++t) {
        RandomStream rng(seed, {2, t});
        const auto net = generate_network(NetworkParams{}, rng.next_u64());
        PointN target(3);
        for (int c = 0; c < 3; ++c) target[c] = rng.uniform(-3, 3);
        const auto m = apply_uniform_outliers(true_ranges(net, target), 0.3, 6.0 * std::sqrt(3.0), rng);
        const double R = lemma2_radius(net, m);
        for (std::size_t s = 0; s < samples; ++s) {
            PointN dir(3);
            for (int c = 0; c < 3; ++c) dir[c] = rng.uniform(-1, 1);
            if (dir.norm() == 0.0) continue;
            const PointN x = dir.normalized() * R * (1.0 + 4.0 * rng.uniform01());
            for (std::size_t i = 0; i < net.size(); ++i) {
                const PointN g = local_subgradient(x, net.position(i), m.ranges[i], net.size()) *
                                 static_cast<double>(net.size());
                const double cosang = g.dot(x) / (g.norm() * x.norm());
                min_cos = std::min(min_cos, cosang);
                if (!(cosang >= 0.5) || !(g.norm() <= x.norm())) ++violations;
            }
        }
    }
    return {"radial_bounds_beyond_radius", violations == 0,
            std::to_string(violations) + " violations, min cosine " + std::to_string(min_cos)};
}

/// Pure consensus (b = 0) on a 10-node ring: disagreement never increases and
/// drops below 1e-3 of its initial value within 10^4 iterations.
inline CheckResult check_consensus(std::uint64_t seed)
{
    std::vector<PointN> pos;
    std::vector<SensorNetwork::Edge> edges;
    for (std::size_t i = 0; i < 10; ++i) {
        pos.push_back(make_point({std::cos(0.2 * std::numbers::pi * i), std::sin(0.2 * std::numbers::pi * i), 0.0}));
        edges.emplace_back(i, (i + 1) % 10);
    }
    const SensorNetwork net(pos, edges);
    MeasurementSet m;
    m.ranges.assign(10, 1.0);
    m.corrupted.assign(10, false);
    RandomStream rng(seed, {3});
    Schedule s{0.05, 0.3, 0.0, 0.75, false};
    RunOptions opts;
    opts.iterations = 10000;
    const auto tr = dsrl_run(net, m, s, uniform_initialization(10, 3, 3.0, rng), opts);
    const double d0 = tr.records.front().disagreement;
    bool monotone = true;
    std::size_t hit = 0;
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
        monotone = monotone && tr.records[k].disagreement <= tr.records[k - 1].disagreement;
        if (!hit && tr.records[k].disagreement < 1e-3 * d0) hit = tr.records[k].iteration;
    }
    return {"consensus_without_forcing", monotone && hit != 0,
            std::string(monotone ? "non-increasing" : "increased") + ", below 1e-3 of initial at iteration " +
                (hit ? std::to_string(hit) : std::string("never"))};
}

inline std::vector<CheckResult> run_all(std::uint64_t seed)
{
    return {check_subgradient(seed), check_radial_bounds(seed), check_consensus(seed)};
}

} // namespace dsrl::validation

#endif // DSRL_VALIDATION_HPP
