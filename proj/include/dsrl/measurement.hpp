#ifndef DSRL_MEASUREMENT_HPP
#define DSRL_MEASUREMENT_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "dsrl/errors.hpp"
#include "dsrl/network.hpp"
#include "dsrl/point.hpp"
#include "dsrl/random.hpp"

namespace dsrl {

/// Observed sensor-to-source ranges. `corrupted[i]` records whether the
/// scenario touched d_i, so diagnostics keep the ground truth.
struct MeasurementSet {
    std::vector<double> ranges;
    std::vector<bool> corrupted;
    std::string scenario_tag = "noiseless";

    std::size_t size() const noexcept { return ranges.size(); }
};

// --- noise scenarios --------------------------------------------------------

struct Noiseless {};

/// With probability p a range is replaced (not perturbed) by a Uniform(0, upper) draw.
struct UniformOutlier {
    double p = 0.1;
    double upper = 6.0 * std::numbers::sqrt3;
};

/// Which relation ties the mixture's first-component rate to sigma.
enum class LaplaceRateRule {
    /// lambda_1 = sqrt(sigma^2 / (c1 + c2 r^2)); with the default weights
    /// that is sqrt(sigma^2 / 10.9).
    literal,
    /// lambda_1 = sqrt(2 (c1 + c2 r^2) / sigma^2), the choice for which the
    /// mixture variance equals sigma^2.
    variance_consistent,
};

/// Two-component zero-mean Laplace mixture. Component 1 has rate lambda_1
/// and weight c1; component 2 has rate lambda_1 / rate_ratio and weight c2.
struct LaplaceMixture {
    double sigma = 1.0;
    double c1 = 0.9;
    double c2 = 0.1;
    double rate_ratio = 10.0;
    LaplaceRateRule rule = LaplaceRateRule::literal;

    double rate1() const
    {
        const double k = c1 + c2 * rate_ratio * rate_ratio;
        return rule == LaplaceRateRule::literal ? std::sqrt(sigma * sigma / k) : std::sqrt(2.0 * k / (sigma * sigma));
    }
    double rate2() const { return rate1() / rate_ratio; }

    /// Variance of the mixture under the density sum_c c (lambda/2) e^{-lambda |v|}.
    double variance() const
    {
        const double l1 = rate1();
        const double l2 = rate2();
        return c1 * 2.0 / (l1 * l1) + c2 * 2.0 / (l2 * l2);
    }
};

struct Cauchy {
    double gamma = 1.0;
};

using NoiseScenario = std::variant<Noiseless, UniformOutlier, LaplaceMixture, Cauchy>;

inline void validate(const NoiseScenario& scenario)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, UniformOutlier>) {
                if (!(s.p >= 0.0 && s.p <= 1.0)) throw ConfigInvalid("scenario.p", "must lie in [0, 1]");
                if (!(s.upper > 0.0)) throw ConfigInvalid("scenario.upper", "must be positive");
            } else if constexpr (std::is_same_v<T, LaplaceMixture>) {
                if (!(s.sigma > 0.0)) throw ConfigInvalid("scenario.sigma", "must be positive");
                if (!(s.c1 >= 0.0 && s.c2 >= 0.0) || std::abs(s.c1 + s.c2 - 1.0) > 1e-12)
                    throw ConfigInvalid("scenario.c1", "weights must be nonnegative and sum to 1");
                if (!(s.rate_ratio > 0.0)) throw ConfigInvalid("scenario.rate_ratio", "must be positive");
            } else if constexpr (std::is_same_v<T, Cauchy>) {
                if (!(s.gamma > 0.0)) throw ConfigInvalid("scenario.gamma", "must be positive");
            }
        },
        scenario);
}

inline std::string scenario_tag(const NoiseScenario& scenario)
{
    struct {
        std::string operator()(const Noiseless&) const { return "noiseless"; }
        std::string operator()(const UniformOutlier&) const { return "uniform_outlier"; }
        std::string operator()(const LaplaceMixture&) const { return "laplace_mixture"; }
        std::string operator()(const Cauchy&) const { return "cauchy"; }
    } v;
    return std::visit(v, scenario);
}

// --- samplers -----------------------------------------------------------

/// Zero-mean Laplace with density (rate/2) e^{-rate |v|}, by inverting the CDF.
inline double sample_laplace(double rate, RandomStream& rng)
{
    const double w = rng.uniform_open01() - 0.5;
    const double s = w < 0.0 ? -1.0 : 1.0;
    return -s * std::log(1.0 - 2.0 * std::abs(w)) / rate;
}

/// Cauchy(0, gamma) as gamma * tan(pi (u - 1/2)).
inline double sample_cauchy(double gamma, RandomStream& rng)
{
    return gamma * std::tan(std::numbers::pi * (rng.uniform_open01() - 0.5));
}

/// One mixture draw. `component` receives 1 or 2.
inline double sample_laplace_mixture(const LaplaceMixture& mix, RandomStream& rng, int* component = nullptr)
{
    const bool first = rng.uniform01() < mix.c1;
    if (component) *component = first ? 1 : 2;
    return sample_laplace(first ? mix.rate1() : mix.rate2(), rng);
}

// --- scenario application -----------------------------------------------

inline MeasurementSet true_ranges(const SensorNetwork& net, const PointN& source)
{
    require_dim(source, net.dimension(), "source");
    MeasurementSet m;
    m.ranges.reserve(net.size());
    for (const auto& a : net.positions()) m.ranges.push_back((source - a).norm());
    m.corrupted.assign(net.size(), false);
    return m;
}

inline MeasurementSet apply_uniform_outliers(const MeasurementSet& base, double p, double upper, RandomStream& rng)
{
    validate(NoiseScenario{UniformOutlier{p, upper}});
    MeasurementSet out = base;
    out.scenario_tag = "uniform_outlier";
    for (std::size_t i = 0; i < out.size(); ++i) {
        // Both draws happen for every sensor so the stream advances identically
        // regardless of p.
        const double u = rng.uniform01();
        const double outlier = rng.uniform(0.0, upper);
        if (u < p) {
            out.ranges[i] = outlier;
            out.corrupted[i] = true;
        }
    }
    return out;
}

inline MeasurementSet apply_laplace_mixture(const MeasurementSet& base, const LaplaceMixture& mix, RandomStream& rng)
{
    validate(NoiseScenario{mix});
    MeasurementSet out = base;
    out.scenario_tag = "laplace_mixture";
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.ranges[i] += sample_laplace_mixture(mix, rng);
        out.corrupted[i] = true;
    }
    return out;
}

inline MeasurementSet apply_laplace_mixture(const MeasurementSet& base, double sigma, RandomStream& rng)
{
    LaplaceMixture mix;
    mix.sigma = sigma;
    return apply_laplace_mixture(base, mix, rng);
}

inline MeasurementSet apply_cauchy(const MeasurementSet& base, double gamma, RandomStream& rng)
{
    validate(NoiseScenario{Cauchy{gamma}});
    MeasurementSet out = base;
    out.scenario_tag = "cauchy";
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.ranges[i] += sample_cauchy(gamma, rng);
        out.corrupted[i] = true;
    }
    return out;
}

inline MeasurementSet apply_scenario(const MeasurementSet& base, const NoiseScenario& scenario, RandomStream& rng)
{
    struct {
        const MeasurementSet& base;
        RandomStream& rng;
        MeasurementSet operator()(const Noiseless&) const { return base; }
        MeasurementSet operator()(const UniformOutlier& s) const { return apply_uniform_outliers(base, s.p, s.upper, rng); }
        MeasurementSet operator()(const LaplaceMixture& s) const { return apply_laplace_mixture(base, s, rng); }
        MeasurementSet operator()(const Cauchy& s) const { return apply_cauchy(base, s.gamma, rng); }
    } v{base, rng};
    return std::visit(v, scenario);
}

inline nlohmann::json measurements_to_json(const MeasurementSet& m)
{
    return {{"scenario", m.scenario_tag}, {"ranges", m.ranges}, {"corrupted", m.corrupted}};
}

inline MeasurementSet measurements_from_json(const nlohmann::json& j)
{
    MeasurementSet m;
    m.scenario_tag = j.at("scenario").get<std::string>();
    m.ranges = j.at("ranges").get<std::vector<double>>();
    m.corrupted = j.at("corrupted").get<std::vector<bool>>();
    if (m.ranges.size() != m.corrupted.size()) throw SizeMismatch("ranges and corrupted flags differ in length");
    return m;
}

} // namespace dsrl

#endif // DSRL_MEASUREMENT_HPP
