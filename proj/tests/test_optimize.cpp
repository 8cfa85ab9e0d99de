#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "qlitho/deposition.hpp"
#include "qlitho/errors.hpp"
#include "qlitho/optimize.hpp"
#include "test_support.hpp"

using namespace qlitho;
using namespace qlitho::optimize;

namespace
{

double sphere(std::span<double const> x)
{
    double s = 0.0;
    for (double v : x)
        s += (v - 0.3) * (v - 0.3);
    return s;
}

OptimizerConfig sphere_config(int dim, std::uint64_t seed)
{
    OptimizerConfig c;
    c.population_size = 40;
    c.generations = 200;
    c.seed = seed;
    c.bounds.assign(dim, Interval{-5.0, 5.0});
    return c;
}

}  // namespace

TEST(Minimize, SphereConverges)
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto const r = minimize(sphere, sphere_config(4, seed));
        EXPECT_LE(r.best_objective, 1e-6) << seed;
        ASSERT_EQ(r.best_params.size(), 4u);
        EXPECT_EQ(r.history.size(), 201u);
        EXPECT_EQ(r.evaluations, 40u * 201u);
        EXPECT_EQ(r.rejected, 0u);
    }
    auto const b = minimize(sphere, sphere_config(4, 1), BestOneBin{});
    EXPECT_LE(b.best_objective, 1e-6);
}

TEST(Minimize, HistoryIsMonotoneAndInBounds)
{
    gen::Rng rng(1);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto config = sphere_config(3, trial);
        config.generations = 100;
        config.bounds = {{0.5, 1.0}, {-1.0, -0.5}, {2.0, 3.0}};  // optimum outside the box
        auto const r = minimize(sphere, config);
        for (std::size_t g = 1; g < r.history.size(); ++g)
            EXPECT_LE(r.history[g], r.history[g - 1]);
        for (std::size_t g = 0; g < r.history.size(); ++g)
            EXPECT_LE(r.history[g], r.mean_history[g] + 1e-15);
        for (std::size_t i = 0; i < 3; ++i)
        {
            EXPECT_GE(r.best_params[i], config.bounds[i].lower);
            EXPECT_LE(r.best_params[i], config.bounds[i].upper);
        }
        EXPECT_NEAR(r.best_params[0], 0.5, 1e-3);
        EXPECT_NEAR(r.best_params[1], -0.5, 1e-3);
    }
}

TEST(Minimize, DeterministicAcrossThreadCounts)
{
    auto config = sphere_config(5, 42);
    config.generations = 50;
    auto const one = minimize(sphere, config);
    for (int threads : {2, 3, 8})
    {
        config.threads = threads;
        auto const many = minimize(sphere, config);
        EXPECT_EQ(many.best_params, one.best_params);
        EXPECT_EQ(many.history, one.history);
    }
    config.threads = 1;
    config.seed = 43;
    EXPECT_NE(minimize(sphere, config).best_params, one.best_params);
}

TEST(Minimize, NonFiniteCandidatesAreRejected)
{
    Objective const holey = [](std::span<double const> x) {
        return x[0] > 0.0 ? std::numeric_limits<double>::quiet_NaN() : sphere(x);
    };
    auto const r = minimize(holey, sphere_config(2, 5));
    EXPECT_GT(r.rejected, 0u);
    EXPECT_TRUE(std::isfinite(r.best_objective));
    EXPECT_LE(r.best_params[0], 0.0);

    Objective const broken = [](std::span<double const>) { return std::numeric_limits<double>::infinity(); };
    EXPECT_THROW(minimize(broken, sphere_config(2, 5)), NumericError);
}

TEST(Minimize, ConfigValidation)
{
    auto config = sphere_config(2, 1);
    config.population_size = 3;
    EXPECT_FALSE(validate(config).empty());
    EXPECT_THROW(minimize(sphere, config), ValidationError);
    config = sphere_config(2, 1);
    config.crossover_rate = 1.5;
    EXPECT_FALSE(validate(config).empty());
    config = sphere_config(2, 1);
    config.bounds[0] = {1.0, 0.0};
    EXPECT_FALSE(validate(config).empty());
    config = sphere_config(0, 1);
    EXPECT_FALSE(validate(config).empty());
    EXPECT_TRUE(validate(sphere_config(2, 1)).empty());
}

TEST(Strategy, FactoryAndDefaults)
{
    EXPECT_EQ(make_strategy("rand1bin")->name(), "rand1bin");
    EXPECT_EQ(make_strategy("best1bin")->name(), "best1bin");
    EXPECT_THROW(make_strategy("current-to-best"), UsageError);
    auto const d = OptimizerConfig::defaults_for(Bounds(3, Interval{0, 1}));
    EXPECT_EQ(d.population_size, 45);
    EXPECT_EQ(OptimizerConfig::defaults_for(Bounds(40, Interval{0, 1})).population_size, 200);
}

TEST(Strategy, CandidateRngDependsOnAllInputs)
{
    auto draw = [](std::uint64_t s, std::uint64_t g, std::uint64_t m) { return candidate_rng(s, g, m)(); };
    EXPECT_EQ(draw(1, 2, 3), draw(1, 2, 3));
    EXPECT_NE(draw(1, 2, 3), draw(1, 2, 4));
    EXPECT_NE(draw(1, 2, 3), draw(1, 3, 3));
    EXPECT_NE(draw(1, 2, 3), draw(2, 2, 3));
}

TEST(Codec, RoundTripAndScaling)
{
    gen::Rng rng(2);
    for (int trial = 0; trial < 50; ++trial)
    {
        int const n = gen::integer(rng, 1, 10);
        Codec1D const codec(n, {});
        ASSERT_EQ(codec.phases().size(), static_cast<std::size_t>(n / 2 + 1));
        auto const amps = gen::unit_vector(rng, codec.phases().size());
        SuperpositionFixedN s{n, {}};
        for (std::size_t m = 0; m < amps.size(); ++m)
            s.terms.push_back({ProtoState1D::make(n, static_cast<int>(m), 0.0), amps[m]});
        double const t = std::exp(std::uniform_real_distribution<double>(-6.0, 9.0)(rng));
        auto params = codec.encode(s, t);
        ASSERT_EQ(params.size(), codec.dimension());
        auto const d = codec.decode(params);
        EXPECT_NEAR(d.exposure_time, t, 1e-12 * t);
        for (std::size_t m = 0; m < amps.size(); ++m)
            EXPECT_LT(std::abs(d.state.terms[m].amplitude - amps[m]), 1e-14);

        // Scaling the amplitude block leaves the decoded state unchanged.
        for (std::size_t i = 0; i + 1 < params.size(); ++i)
            params[i] *= 0.25;
        auto const scaled = codec.decode(params);
        for (std::size_t m = 0; m < amps.size(); ++m)
            EXPECT_LT(std::abs(scaled.state.terms[m].amplitude - amps[m]), 1e-14);
    }
}

TEST(Codec, Errors)
{
    Codec const c(2);
    EXPECT_EQ(c.dimension(), 5u);
    std::vector<double> const zero{0, 0, 0, 0, 1.0};
    EXPECT_THROW(c.amplitudes(zero), ValidationError);
    std::vector<double> const short_params{1, 0, 0};
    EXPECT_THROW(c.amplitudes(short_params), UsageError);
    auto const b = c.bounds();
    EXPECT_EQ(b.size(), 5u);
    EXPECT_EQ(b[0].lower, -1.0);
    EXPECT_NEAR(b[4].lower, std::log(kMinExposure), 1e-15);
    EXPECT_NEAR(b[4].upper, std::log(kMaxExposure), 1e-15);
    EXPECT_THROW(Codec1D(4, {0.0}), UsageError);
    EXPECT_THROW(Codec1D(4, {0.0, 0.0, 0.0}).encode(SuperpositionFixedN{3, {{ProtoState1D::make(3, 0), 1.0}}}, 1.0),
                 UsageError);
}

TEST(Codec2D, RoundTrip)
{
    gen::Rng rng(3);
    Codec2D const codec(3, {0.1, 0.2}, {0.3, 0.4});
    EXPECT_EQ(codec.dimension(), 9u);
    auto const amps = gen::unit_vector(rng, 4);
    SuperpositionFixedN2D s{3, {}};
    for (int m = 0; m < 2; ++m)
        for (int k = 0; k < 2; ++k)
            s.terms.push_back({ProtoState2D::make(3, m, k, codec.phases_x()[m], codec.phases_y()[k]), amps[m * 2 + k]});
    auto const d = codec.decode(codec.encode(s, 2.5));
    EXPECT_NEAR(d.exposure_time, 2.5, 1e-13);
    for (std::size_t i = 0; i < 4; ++i)
    {
        EXPECT_LT(std::abs(d.state.terms[i].amplitude - amps[i]), 1e-14);
        EXPECT_EQ(d.state.terms[i].state, s.terms[i].state);
    }
}

TEST(Fit, RecoversTwoPhotonPattern)
{
    // The target is itself a realizable pattern, so the optimum is zero.
    double const s = 1.0 / std::sqrt(2.0);
    SuperpositionFixedN const truth{2, {{ProtoState1D::make(2, 0), s}, {ProtoState1D::make(2, 1), Complex{0.0, s}}}};
    double const t = 3.0;
    synth::TargetPattern1D const target(
        "two-photon", [&](double phi) { return t * deposition::fixed_n_superposition_rate(truth, phi); });
    Codec1D const codec(2, {});
    auto config = OptimizerConfig::defaults_for(codec.raw().bounds());
    config.generations = 300;
    config.seed = 11;
    auto const fit = fit_superposition_1d(target, codec, 64, config, BestOneBin{});
    EXPECT_LE(fit.optimizer.best_objective, 1e-8);
    EXPECT_NEAR(fit.best.exposure_time, t, 1e-3);
    for (int i = 0; i < 16; ++i)
    {
        double const phi = kTwoPi * i / 16;
        EXPECT_NEAR(fit.best.exposure_time * deposition::fixed_n_superposition_rate(fit.best.state, phi),
                    target(phi),
                    1e-4);
    }
}

TEST(Fit, ObjectiveReportedMatchesRecomputed)
{
    auto const target = synth::TargetPattern1D::trench(1.0);
    Codec1D const codec(4, {});
    auto config = OptimizerConfig::defaults_for(codec.raw().bounds());
    config.generations = 20;
    config.seed = 3;
    auto const fit = fit_superposition_1d(target, codec, 64, config);
    EXPECT_NEAR(synth::objective_1d(fit.best.state, fit.best.exposure_time, target, 64),
                fit.optimizer.best_objective,
                1e-12);
}

TEST(Minimize, CentredSphereInFiveDimensions)
{
    OptimizerConfig c;
    c.population_size = 40;
    c.generations = 200;
    c.seed = 2;
    c.bounds.assign(5, Interval{-1.0, 1.0});
    auto const r = minimize(
        [](std::span<double const> x) {
            double s = 0.0;
            for (double v : x)
                s += v * v;
            return s;
        },
        c);
    EXPECT_LE(r.best_objective, 1e-6);
    EXPECT_EQ(r.best_objective, r.history.back());
}

TEST(Minimize, RecoversTwoPhotonPhase)
{
    auto const target = synth::TargetPattern1D("two-photon", [](double phi) { return (1 + std::cos(2 * phi)) / 4; });
    OptimizerConfig c;
    c.population_size = 20;
    c.generations = 100;
    c.seed = 3;
    c.bounds = {{0.0, kTwoPi}};
    auto const r = minimize(
        [&](std::span<double const> x) {
            SuperpositionFixedN const s{2, {{ProtoState1D::make(2, 0, x[0]), 1.0}}};
            return synth::objective_1d(s, 1.0, target, 64);
        },
        c);
    EXPECT_LE(r.best_objective, 1e-10);
    EXPECT_LT(std::abs(std::remainder(r.best_params[0], kTwoPi)), 1e-4);
}
