#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsrl/measurement.hpp"
#include "oracles.hpp"

using namespace dsrl;

namespace {

MeasurementSet flat(std::size_t n, double value)
{
    MeasurementSet m;
    m.ranges.assign(n, value);
    m.corrupted.assign(n, false);
    return m;
}

constexpr std::size_t kDraws = 1'000'000;

} // namespace

TEST(TrueRanges, ExactDistances)
{
    const SensorNetwork net({make_point({0, 0, 0}), make_point({1, 1, 1})}, {{0, 1}});
    const auto at_sensor = true_ranges(net, make_point({1, 1, 1}));
    EXPECT_DOUBLE_EQ(at_sensor.ranges[1], 0.0);
    const auto m = true_ranges(net, make_point({3, 4, 0}));
    EXPECT_DOUBLE_EQ(m.ranges[0], 5.0);
    EXPECT_EQ(m.corrupted, (std::vector<bool>{false, false}));
    EXPECT_THROW(true_ranges(net, make_point({1, 2})), DimensionMismatch);
}

TEST(TrueRanges, NonNegativeOnRandomInputs)
{
    const auto net = generate_network(NetworkParams{}, 8);
    RandomStream rng(8);
    for (int t = 0; t < 100; ++t) {
        const auto m = true_ranges(net, make_point({rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)}));
        for (double d : m.ranges) EXPECT_GE(d, 0.0);
    }
}

TEST(UniformOutliers, ZeroProbabilityIsIdentity)
{
    RandomStream rng(1);
    const auto base = flat(1000, 2.5);
    const auto out = apply_uniform_outliers(base, 0.0, 6.0 * std::numbers::sqrt3, rng);
    EXPECT_EQ(out.ranges, base.ranges);
    EXPECT_EQ(out.corrupted, base.corrupted);
}

TEST(UniformOutliers, FullProbabilityReplacesWithUniformDraws)
{
    RandomStream rng(2);
    const double upper = 6.0 * std::numbers::sqrt3;
    const auto out = apply_uniform_outliers(flat(kDraws, -1.0), 1.0, upper, rng);
    for (std::size_t i = 0; i < out.size(); ++i) {
        ASSERT_TRUE(out.corrupted[i]);
        ASSERT_GE(out.ranges[i], 0.0);
        ASSERT_LT(out.ranges[i], upper);
    }
    const double mean = oracle::welford(out.ranges).mean;
    EXPECT_NEAR(mean, upper / 2.0, 0.01 * upper / 2.0); // 3 sqrt 3 ~ 5.196
}

TEST(UniformOutliers, CorruptedFractionConcentrates)
{
    RandomStream rng(3);
    const auto out = apply_uniform_outliers(flat(kDraws, 1.0), 0.5, 1.0, rng);
    std::size_t hits = 0;
    for (bool c : out.corrupted) hits += c;
    const double frac = static_cast<double>(hits) / kDraws;
    EXPECT_GE(frac, 0.498);
    EXPECT_LE(frac, 0.502);
    // Untouched entries keep the exact range.
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!out.corrupted[i]) ASSERT_EQ(out.ranges[i], 1.0);
}

TEST(LaplaceMixture, LiteralRateRule)
{
    LaplaceMixture mix;
    mix.sigma = std::sqrt(10.9);
    EXPECT_NEAR(mix.rate1(), 1.0, 1e-15);
    EXPECT_NEAR(mix.rate2(), 0.1, 1e-15);
}

TEST(LaplaceMixture, VarianceConsistentRuleMatchesSigma)
{
    for (double sigma : {0.25, 1.0, 7.5, 25.0}) {
        LaplaceMixture mix;
        mix.sigma = sigma;
        mix.rule = LaplaceRateRule::variance_consistent;
        EXPECT_NEAR(mix.variance(), sigma * sigma, 1e-12 * sigma * sigma);
        // 0.9 * 2 / l1^2 + 0.1 * 2 / (l1/10)^2 = 21.8 / l1^2
        EXPECT_NEAR(mix.rate1(), std::sqrt(21.8) / sigma, 1e-12);
    }
}

TEST(LaplaceMixture, ComponentSelectionFrequency)
{
    RandomStream rng(4);
    LaplaceMixture mix;
    std::size_t second = 0;
    for (std::size_t i = 0; i < kDraws; ++i) {
        int c = 0;
        sample_laplace_mixture(mix, rng, &c);
        second += (c == 2);
    }
    const double frac = static_cast<double>(second) / kDraws;
    EXPECT_GE(frac, 0.099);
    EXPECT_LE(frac, 0.101);
}

TEST(LaplaceMixture, MixtureSampleVarianceMatchesAnalytic)
{
    RandomStream rng(5);
    LaplaceMixture mix;
    mix.sigma = 3.0;
    mix.rule = LaplaceRateRule::variance_consistent;
    oracle::Vec xs(kDraws);
    for (auto& x : xs) x = sample_laplace_mixture(mix, rng);
    EXPECT_NEAR(oracle::welford(xs).variance, 9.0, 0.03 * 9.0);
}

TEST(LaplaceSampler, MeanAndVariance)
{
    for (double rate : {0.1, 1.0, 4.0}) {
        RandomStream rng(6);
        oracle::Vec xs(kDraws);
        for (auto& x : xs) x = sample_laplace(rate, rng);
        const auto m = oracle::welford(xs);
        const double var = 2.0 / (rate * rate);
        EXPECT_LT(std::abs(m.mean), 3.0 * std::sqrt(var) / std::sqrt(static_cast<double>(kDraws)));
        EXPECT_NEAR(m.variance, var, 0.02 * var);
    }
}

TEST(CauchySampler, MedianAbsAndQuartiles)
{
    for (double gamma : {1.0, 2.0, 0.3}) {
        RandomStream rng(7);
        oracle::Vec xs(kDraws), abs_xs(kDraws);
        for (std::size_t i = 0; i < kDraws; ++i) {
            xs[i] = sample_cauchy(gamma, rng);
            abs_xs[i] = std::abs(xs[i]);
        }
        EXPECT_NEAR(oracle::median(abs_xs), gamma, 0.01 * gamma);
        const double iqr = oracle::quantile(xs, 0.75) - oracle::quantile(xs, 0.25);
        EXPECT_NEAR(iqr, 2.0 * gamma, 0.02 * 2.0 * gamma);
    }
}

TEST(Scenarios, AdditiveNoiseKeepsNegativeRanges)
{
    RandomStream rng(9);
    const auto out = apply_cauchy(flat(10000, 0.01), 1.0, rng);
    std::size_t negative = 0;
    for (double d : out.ranges) negative += d < 0.0;
    EXPECT_GT(negative, 0u);
}

TEST(Scenarios, Reproducible)
{
    const auto base = flat(500, 3.0);
    const NoiseScenario scenarios[] = {UniformOutlier{0.3}, LaplaceMixture{}, Cauchy{0.5}};
    for (const auto& s : scenarios) {
        RandomStream a(42), b(42);
        const auto x = apply_scenario(base, s, a);
        const auto y = apply_scenario(base, s, b);
        EXPECT_EQ(x.ranges, y.ranges);
        EXPECT_EQ(x.corrupted, y.corrupted);
        EXPECT_EQ(x.scenario_tag, scenario_tag(s));
    }
    RandomStream rng(1);
    const auto same = apply_scenario(base, Noiseless{}, rng);
    EXPECT_EQ(same.ranges, base.ranges);
}

TEST(Scenarios, ParameterValidation)
{
    RandomStream rng(1);
    const auto base = flat(3, 1.0);
    EXPECT_THROW(apply_uniform_outliers(base, 1.5, 1.0, rng), ConfigInvalid);
    EXPECT_THROW(apply_uniform_outliers(base, 0.5, 0.0, rng), ConfigInvalid);
    EXPECT_THROW(apply_laplace_mixture(base, 0.0, rng), ConfigInvalid);
    EXPECT_THROW(apply_cauchy(base, -1.0, rng), ConfigInvalid);
    LaplaceMixture bad;
    bad.c1 = 0.5;
    EXPECT_THROW(apply_laplace_mixture(base, bad, rng), ConfigInvalid);
}

TEST(Scenarios, JsonRoundTrip)
{
    RandomStream rng(3);
    const auto m = apply_uniform_outliers(flat(20, 2.0), 0.4, 5.0, rng);
    const auto back = measurements_from_json(nlohmann::json::parse(measurements_to_json(m).dump()));
    EXPECT_EQ(back.ranges, m.ranges);
    EXPECT_EQ(back.corrupted, m.corrupted);
    EXPECT_EQ(back.scenario_tag, m.scenario_tag);
}
