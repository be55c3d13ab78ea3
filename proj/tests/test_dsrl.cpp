#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dsrl/dsrl.hpp"
#include "oracles.hpp"

using namespace dsrl;

namespace {

oracle::Vec vec(const PointN& p) { return to_vector(p); }

MeasurementSet ranges_of(std::vector<double> d)
{
    MeasurementSet m;
    m.corrupted.assign(d.size(), false);
    m.ranges = std::move(d);
    return m;
}

SensorNetwork ring(std::size_t n, double radius = 1.0)
{
    std::vector<PointN> pos;
    std::vector<SensorNetwork::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        pos.push_back(make_point({radius * std::cos(t), radius * std::sin(t), 0.1 * static_cast<double>(i)}));
        edges.emplace_back(i, (i + 1) % n);
    }
    return SensorNetwork(pos, edges);
}

} // namespace

// --- schedule ---------------------------------------------------------------

TEST(Schedule, WeightAndStepValues)
{
    const auto s = Schedule::reference();
    EXPECT_DOUBLE_EQ(weight_at(s, 1), 0.3);
    EXPECT_DOUBLE_EQ(step_at(s, 1), 3.5);
    EXPECT_DOUBLE_EQ(step_at(s, 49), 0.5);
    const Schedule unit{1.0, 1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(weight_at(unit, 4), 0.25);
    EXPECT_LT(step_at(s, 1'000'000), s.b * 1e-3 + 1e-15);
}

TEST(Schedule, MonotoneNonIncreasing)
{
    for (const auto& s : {Schedule::reference(), Schedule::compliant(), Schedule{0.05, 0.3, 1.0, 0.9}}) {
        for (std::size_t k = 1; k < 5000; ++k) {
            ASSERT_LE(weight_at(s, k + 1), weight_at(s, k));
            ASSERT_LE(step_at(s, k + 1), step_at(s, k));
        }
    }
}

TEST(Schedule, StrictModeEnforcesConvergenceConditions)
{
    auto ref = Schedule::reference();
    EXPECT_EQ(ref.warnings().size(), 2u); // tau_alpha > tau_beta and tau_beta = 1/2
    EXPECT_NO_THROW(ref.validate());
    ref.strict = true;
    EXPECT_THROW(ref.validate(), ConfigInvalid);

    auto ok = Schedule::compliant();
    ok.strict = true;
    EXPECT_TRUE(ok.warnings().empty());
    EXPECT_NO_THROW(ok.validate());

    EXPECT_THROW((Schedule{0.0, 0.5, 1.0, 0.75}.validate()), ConfigInvalid);
    EXPECT_THROW((Schedule{0.1, 0.5, -1.0, 0.75}.validate()), ConfigInvalid);
    EXPECT_NO_THROW((Schedule{0.1, 0.5, 0.0, 0.75}.validate()));
    EXPECT_THROW((Schedule{0.1, 0.5, 0.0, 0.75, true}.validate()), ConfigInvalid);
}

// --- local terms ------------------------------------------------------------

TEST(Subgradient, Examples)
{
    const PointN origin = make_point({0, 0, 0});
    EXPECT_EQ(vec(local_subgradient(make_point({2, 0, 0}), origin, 1.0, 1)), (oracle::Vec{1, 0, 0}));
    EXPECT_EQ(vec(local_subgradient(origin, origin, 1.0, 7)), (oracle::Vec{0, 0, 0}));

    const PointN a = make_point({3, 4, 0});
    const auto g = local_subgradient(origin, a, 10.0, 5);
    EXPECT_NEAR(g[0], 0.12, 1e-15);
    EXPECT_NEAR(g[1], 0.16, 1e-15);
    EXPECT_EQ(g[2], 0.0);
    const auto fd = oracle::fd_gradient(
        [&](const oracle::Vec& x) { return std::abs(oracle::norm(oracle::sub(x, vec(a))) - 10.0) / 5.0; },
        {0, 0, 0});
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(g[c], fd[c], 1e-6);
}

TEST(Subgradient, ZeroOnTheMeasuredShell)
{
    // ||x - a|| == d exactly
    EXPECT_EQ(vec(local_subgradient(make_point({0, 3, 4}), make_point({0, 0, 0}), 5.0, 3)), (oracle::Vec{0, 0, 0}));
}

TEST(Subgradient, MatchesFiniteDifferencesAtSmoothPoints)
{
    RandomStream rng(2024);
    int checked = 0;
    while (checked < 100) {
        const oracle::Vec x{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const oracle::Vec a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double d = rng.uniform(0, 8);
        const std::size_t L = 1 + rng.next_u64() % 50;
        const double dist = oracle::norm(oracle::sub(x, a));
        if (dist < 1e-3 || std::abs(dist - d) < 1e-3) continue;
        const auto fd = oracle::fd_gradient(
            [&](const oracle::Vec& y) { return std::abs(oracle::norm(oracle::sub(y, a)) - d) / static_cast<double>(L); },
            x);
        const auto g = vec(local_subgradient(from_vector(x), from_vector(a), d, L));
        EXPECT_LT(oracle::norm(oracle::sub(g, fd)) / oracle::norm(g), 1e-5);
        // |g| = 1/L away from the kinks
        EXPECT_NEAR(oracle::norm(g), 1.0 / static_cast<double>(L), 1e-15);
        ++checked;
    }
}

TEST(Subgradient, NormNeverExceedsInverseL)
{
    RandomStream rng(3);
    for (int t = 0; t < 1000; ++t) {
        const PointN x = make_point({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
        const PointN a = make_point({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
        const std::size_t L = 1 + t % 31;
        EXPECT_LE(local_subgradient(x, a, rng.uniform(-2, 6), L).norm(), 1.0 / static_cast<double>(L) + 1e-16);
    }
}

TEST(Objective, LocalExamples)
{
    EXPECT_DOUBLE_EQ(local_objective(make_point({0, 3, 4}), make_point({0, 0, 0}), 5.0, 4), 0.0);
    EXPECT_DOUBLE_EQ(local_objective(make_point({2, 0, 0}), make_point({0, 0, 0}), 1.0, 1), 1.0);
    EXPECT_THROW(local_objective(make_point({2, 0}), make_point({0, 0, 0}), 1.0, 1), DimensionMismatch);
}

TEST(Objective, GlobalMatchesBruteForceAndLocalSum)
{
    const auto net = generate_network(NetworkParams{}, 31);
    RandomStream rng(31);
    std::vector<oracle::Vec> anchors;
    for (const auto& a : net.positions()) anchors.push_back(vec(a));
    MeasurementSet m = ranges_of(std::vector<double>(net.size()));
    for (auto& d : m.ranges) d = rng.uniform(-1, 10);
    for (int t = 0; t < 50; ++t) {
        const PointN x = make_point({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
        const double f = global_objective(net, m, x);
        EXPECT_NEAR(f, oracle::l1_objective(anchors, m.ranges, vec(x)), 1e-12);
        double sum = 0.0;
        for (std::size_t i = 0; i < net.size(); ++i) sum += local_objective(x, net.position(i), m.ranges[i], net.size());
        EXPECT_DOUBLE_EQ(f, sum);
        EXPECT_GE(f, 0.0);
    }
}

TEST(Objective, ZeroAtTruthWhenNoiseless)
{
    const auto net = generate_network(NetworkParams{}, 4);
    const PointN x = make_point({0.3, -1.2, 2.0});
    EXPECT_NEAR(global_objective(net, true_ranges(net, x), x), 0.0, 1e-15);
    const SensorNetwork one({make_point({0, 0, 0})}, {});
    EXPECT_DOUBLE_EQ(global_objective(one, ranges_of({1.0}), make_point({2, 0, 0})), 1.0);
    EXPECT_THROW(global_objective(net, ranges_of({1.0}), x), SizeMismatch);
}

// --- diffusion ----------------------------------------------------------------

TEST(Diffuse, Examples)
{
    const SensorNetwork pair({make_point({0}), make_point({1})}, {{0, 1}});
    NodeStates s{{make_point({0}), make_point({2})}, 1};
    auto v = diffuse(s, pair, 0.25);
    EXPECT_DOUBLE_EQ(v[0][0], 0.5);
    EXPECT_DOUBLE_EQ(v[1][0], 1.5);

    v = diffuse(s, pair, 0.0);
    EXPECT_EQ(v[0][0], 0.0);
    EXPECT_EQ(v[1][0], 2.0);

    const auto net = ring(6);
    NodeStates same{std::vector<PointN>(6, make_point({1, -2, 3})), 1};
    for (const auto& x : diffuse(same, net, 0.4)) EXPECT_EQ(vec(x), (oracle::Vec{1, -2, 3}));

    EXPECT_THROW(diffuse(s, net, 0.1), SizeMismatch);
}

// --- runs -----------------------------------------------------------------

TEST(Run, ZeroIterationsKeepsInitialStates)
{
    const auto net = ring(5);
    RandomStream rng(1);
    const auto init = uniform_initialization(5, 3, 3.0, rng);
    RunOptions opts;
    opts.iterations = 0;
    const auto tr = dsrl_run(net, ranges_of(std::vector<double>(5, 1.0)), Schedule::reference(), init, opts);
    ASSERT_EQ(tr.records.size(), 1u);
    EXPECT_EQ(tr.records[0].iteration, 1u);
    ASSERT_EQ(tr.snapshots.size(), 1u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(tr.final_states.estimates[i], init.estimates[i]);
}

TEST(Run, NoiselessTruthIsAFixedPoint)
{
    const auto net = generate_network(NetworkParams{}, 12);
    const PointN x = make_point({0.5, 0.5, -0.5});
    const auto m = true_ranges(net, x);
    NodeStates init{std::vector<PointN>(net.size(), x), 1};
    RunOptions opts;
    opts.iterations = 200;
    opts.x_true = x;
    const auto tr = dsrl_run(net, m, Schedule::reference(), init, opts);
    for (const auto& r : tr.records) {
        EXPECT_EQ(*r.rmse, 0.0);
        EXPECT_EQ(r.disagreement, 0.0);
    }
}

TEST(Run, SingleStepMatchesHandComputation)
{
    const SensorNetwork net({make_point({0, 0}), make_point({2, 0}), make_point({0, 2})}, {{0, 1}, {1, 2}});
    const auto m = ranges_of({1.0, 1.5, 3.0});
    NodeStates init{{make_point({1, 1}), make_point({-1, 0.5}), make_point({0.3, -0.7})}, 1};
    const Schedule s{0.2, 0.5, 2.0, 0.75};
    RunOptions opts;
    opts.iterations = 2;
    const auto tr = dsrl_run(net, m, s, init, opts);

    // Longhand: v_i = x_i + a sum_j (x_j - x_i); x_i <- v_i - b g_i(x_i).
    std::vector<oracle::Vec> x{{1, 1}, {-1, 0.5}, {0.3, -0.7}};
    const std::vector<oracle::Vec> anchors{{0, 0}, {2, 0}, {0, 2}};
    const std::vector<std::vector<int>> nbr{{1}, {0, 2}, {1}};
    for (int k = 1; k <= 2; ++k) {
        const double alpha = 0.2 / std::pow(k, 0.5), beta = 2.0 / std::pow(k, 0.75);
        std::vector<oracle::Vec> nx = x;
        for (int i = 0; i < 3; ++i) {
            const auto diff = oracle::sub(x[i], anchors[i]);
            const double dist = oracle::norm(diff);
            const double sgn = dist > m.ranges[i] ? 1.0 : -1.0;
            for (int c = 0; c < 2; ++c) {
                double pull = 0.0;
                for (int j : nbr[i]) pull += x[j][c] - x[i][c];
                nx[i][c] = x[i][c] + alpha * pull - beta * sgn * diff[c] / (3.0 * dist);
            }
        }
        x = nx;
    }
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 2; ++c) EXPECT_NEAR(tr.final_states.estimates[i][c], x[i][c], 1e-14);
    EXPECT_EQ(tr.final_states.iteration, 3u);
}

TEST(Run, ProcessingOrderDoesNotMatter)
{
    const auto net = generate_network(NetworkParams{}, 21);
    RandomStream rng(21);
    const auto m = apply_cauchy(true_ranges(net, make_point({1, 0, -1})), 0.5, rng);
    const auto init = uniform_initialization(net.size(), 3, 3.0, rng);
    RunOptions a;
    a.iterations = 300;
    RunOptions b = a;
    b.processing_order.resize(net.size());
    std::iota(b.processing_order.rbegin(), b.processing_order.rend(), std::size_t{0});
    std::swap(b.processing_order[3], b.processing_order[17]);
    const auto ta = dsrl_run(net, m, Schedule::reference(), init, a);
    const auto tb = dsrl_run(net, m, Schedule::reference(), init, b);
    for (std::size_t i = 0; i < net.size(); ++i) EXPECT_EQ(ta.final_states.estimates[i], tb.final_states.estimates[i]);

    RunOptions bad = a;
    bad.processing_order = {0, 0};
    EXPECT_THROW(dsrl_run(net, m, Schedule::reference(), init, bad), SizeMismatch);
}

TEST(Run, BitIdenticalOnRepeat)
{
    const auto net = generate_network(NetworkParams{}, 8);
    RandomStream r1(8);
    const auto m = apply_uniform_outliers(true_ranges(net, make_point({0, 0, 0})), 0.3, 10.0, r1);
    RandomStream ra(99), rb(99);
    RunOptions opts;
    opts.iterations = 500;
    opts.x_true = make_point({0, 0, 0});
    const auto ta = dsrl_run(net, m, Schedule::reference(), uniform_initialization(31, 3, 3.0, ra), opts);
    const auto tb = dsrl_run(net, m, Schedule::reference(), uniform_initialization(31, 3, 3.0, rb), opts);
    ASSERT_EQ(ta.records.size(), tb.records.size());
    for (std::size_t k = 0; k < ta.records.size(); ++k) {
        EXPECT_EQ(ta.records[k].objective, tb.records[k].objective);
        EXPECT_EQ(*ta.records[k].rmse, *tb.records[k].rmse);
        EXPECT_EQ(ta.records[k].disagreement, tb.records[k].disagreement);
    }
}

TEST(Run, TraceBookkeeping)
{
    const auto net = ring(4);
    RandomStream rng(2);
    RunOptions opts;
    opts.iterations = 10;
    opts.trace_cadence = 5;
    const auto tr = dsrl_run(net, ranges_of({1, 1, 1, 1}), Schedule::reference(), uniform_initialization(4, 3, 1.0, rng), opts);
    ASSERT_EQ(tr.records.size(), 11u);
    for (std::size_t k = 1; k < tr.records.size(); ++k) EXPECT_GT(tr.records[k].iteration, tr.records[k - 1].iteration);
    ASSERT_EQ(tr.snapshots.size(), 3u);
    EXPECT_EQ(tr.snapshots[0].iteration, 1u);
    EXPECT_EQ(tr.snapshots[1].iteration, 6u);
    EXPECT_EQ(tr.snapshots[2].iteration, 11u);
    EXPECT_FALSE(tr.records[0].rmse.has_value());

    opts.final_only = true;
    const auto fin = dsrl_run(net, ranges_of({1, 1, 1, 1}), Schedule::reference(), tr.snapshots[0], opts);
    ASSERT_EQ(fin.records.size(), 1u);
    EXPECT_EQ(fin.records[0].objective, tr.records.back().objective);
}

TEST(Run, WarningsForReferenceSchedule)
{
    const auto net = generate_network(NetworkParams{}, 2);
    RandomStream rng(2);
    RunOptions opts;
    opts.iterations = 1;
    const auto tr = dsrl_run(net, true_ranges(net, make_point({0, 0, 0})), Schedule::reference(),
                             uniform_initialization(31, 3, 3.0, rng), opts);
    EXPECT_GE(tr.warnings.size(), 2u);
    const bool overshoot = net.max_degree() * 0.3 >= 1.0;
    EXPECT_EQ(tr.warnings.size(), 2u + (overshoot ? 1u : 0u));
}

TEST(Run, DivergentScheduleRaisesNonFiniteState)
{
    const auto net = ring(6);
    RandomStream rng(5);
    const Schedule wild{1e3, 0.0, 1.0, 0.75};
    RunOptions opts;
    opts.iterations = 5000;
    EXPECT_THROW(dsrl_run(net, ranges_of(std::vector<double>(6, 1.0)), wild, uniform_initialization(6, 3, 1.0, rng), opts),
                 NonFiniteState);
}

TEST(Run, RejectsMismatchedInputs)
{
    const auto net = ring(4);
    RandomStream rng(5);
    auto init = uniform_initialization(3, 3, 1.0, rng);
    EXPECT_THROW(dsrl_run(net, ranges_of({1, 1, 1, 1}), Schedule::reference(), init), SizeMismatch);
    init = uniform_initialization(4, 3, 1.0, rng);
    EXPECT_THROW(dsrl_run(net, ranges_of({1, 1, 1}), Schedule::reference(), init), SizeMismatch);
    init = uniform_initialization(4, 2, 1.0, rng);
    EXPECT_THROW(dsrl_run(net, ranges_of({1, 1, 1, 1}), Schedule::reference(), init), DimensionMismatch);
}

TEST(Run, ConsensusOnlyDynamicsContract)
{
    const auto net = ring(10);
    RandomStream rng(10);
    const Schedule s{0.05, 0.3, 0.0, 0.75};
    RunOptions opts;
    opts.iterations = 10'000;
    const auto tr = dsrl_run(net, ranges_of(std::vector<double>(10, 2.0)), s, uniform_initialization(10, 3, 3.0, rng), opts);
    const double d0 = tr.records.front().disagreement;
    for (std::size_t k = 1; k < tr.records.size(); ++k) ASSERT_LE(tr.records[k].disagreement, tr.records[k - 1].disagreement);
    EXPECT_LT(tr.records.back().disagreement, 1e-3 * d0);
}

// --- radial regularity ------------------------------------------------------

TEST(RadialRadius, Examples)
{
    const SensorNetwork net({make_point({3, -1, 0}), make_point({0, 2, -3})}, {{0, 1}});
    EXPECT_DOUBLE_EQ(lemma2_radius(net, ranges_of({5.0, 2.0})), 15.0);
    const SensorNetwork origin({make_point({0, 0, 0}), make_point({0, 0, 0})}, {{0, 1}});
    EXPECT_DOUBLE_EQ(lemma2_radius(origin, ranges_of({0.0, 0.0})), 1.0);
    EXPECT_DOUBLE_EQ(lemma2_radius(origin, ranges_of({-4.0, -2.0})), 1.0);
}

TEST(RadialRadius, ExceedsEverySensorReach)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto net = generate_network(NetworkParams{}, seed);
        RandomStream rng(seed);
        const auto m = apply_uniform_outliers(true_ranges(net, make_point({0, 1, 2})), 0.5, 10.0, rng);
        const double R = lemma2_radius(net, m);
        EXPECT_GT(R, 0.0);
        for (std::size_t i = 0; i < net.size(); ++i) EXPECT_GT(R, net.position(i).norm() + m.ranges[i]);
    }
}

TEST(RadialRadius, RadialBoundsHoldOutside)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto net = generate_network(NetworkParams{}, seed + 100);
        RandomStream rng(seed);
        const auto m = apply_cauchy(true_ranges(net, make_point({-1, 1, 0})), 1.0, rng);
        const double R = lemma2_radius(net, m);
        for (int t = 0; t < 200; ++t) {
            PointN dir = make_point({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
            const PointN x = dir.normalized() * R * (1.0 + 3.0 * rng.uniform01());
            for (std::size_t i = 0; i < net.size(); ++i) {
                const PointN g = local_subgradient(x, net.position(i), m.ranges[i], net.size()) * 31.0;
                ASSERT_GE(g.dot(x) / (g.norm() * x.norm()), 0.5);
                ASSERT_LE(g.norm(), x.norm());
            }
        }
    }
}
