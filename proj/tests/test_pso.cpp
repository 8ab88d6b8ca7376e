#include <gtest/gtest.h>

#include <cmath>

#include "smnuc/pso.hpp"
#include "support/seeds.hpp"

using namespace smnuc;

namespace {

struct ZeroRng {
    double uniform() { return 0.0; }
};

double sphere(const Position& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - 0.1 * double(i + 1)) * (x[i] - 0.1 * double(i + 1));
    return -s;
}

}  // namespace

TEST(Pso, ZeroRandomnessKeepsSwarmFixed) {
    PsoHyperparams hp;
    hp.particles = 5;
    Stream rng(1, 0);
    Swarm s = init_swarm({0.3, -0.2, 0.5}, hp, rng, per_position(sphere));
    const auto before = s.particles;
    ZeroRng zero;
    for (int t = 0; t < 20; ++t) pso_step(s, per_position(sphere), hp, zero);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(s.particles[i].position, before[i].position);
    EXPECT_EQ(s.iteration, 20u);
}

TEST(Pso, SingleParticleFixedPoint) {
    PsoHyperparams hp;
    hp.particles = 1;
    Stream rng(1, 0);
    Swarm s = init_swarm({0.1, 0.2}, hp, rng, per_position(sphere));
    const Swarm before = s;
    ZeroRng zero;
    pso_step(s, per_position(sphere), hp, zero);
    EXPECT_EQ(s.particles[0].position, before.particles[0].position);
    EXPECT_EQ(s.particles[0].velocity, before.particles[0].velocity);
    EXPECT_EQ(s.best_position, before.best_position);
    EXPECT_EQ(s.best_value, before.best_value);
}

TEST(Pso, FirstParticleStartsAtStart) {
    PsoHyperparams hp;
    Stream rng(2, 0);
    const Position start{1.0, 2.0};
    const Swarm s = init_swarm(start, hp, rng, per_position(sphere));
    EXPECT_EQ(s.particles[0].position, start);
    EXPECT_EQ(s.particles.size(), hp.particles);
    EXPECT_GE(s.best_value, sphere(start));
}

TEST(Pso, ConvergesOnSphere) {
    for (auto seed : testing_seeds::kPropertySeeds) {
        PsoHyperparams hp;
        hp.particles = 30;
        hp.init_sigma = 0.5;
        Stream rng(seed, 0);
        Swarm s = init_swarm(Position(2, 0.0), hp, rng, per_position(sphere));
        for (int t = 0; t < 200; ++t) pso_step(s, per_position(sphere), hp, rng);
        EXPECT_GT(s.best_value, -1e-3) << seed;
        for (std::size_t i = 1; i < s.best_trace.size(); ++i) ASSERT_GE(s.best_trace[i], s.best_trace[i - 1]);
    }
}

TEST(Pso, DeterministicUnderSeed) {
    auto run = [] {
        PsoHyperparams hp;
        hp.particles = 8;
        Stream rng(5, 0);
        Swarm s = init_swarm(Position(3, 0.0), hp, rng, per_position(sphere));
        for (int t = 0; t < 30; ++t) pso_step(s, per_position(sphere), hp, rng);
        return s.best_position;
    };
    EXPECT_EQ(run(), run());
}

TEST(Pso, ProjectionIsApplied) {
    PsoHyperparams hp;
    hp.particles = 10;
    hp.init_sigma = 0.3;
    const Projector unit = [](Position x) {
        double n = 0.0;
        for (double v : x) n += v * v;
        n = std::sqrt(n);
        for (double& v : x) v /= n;
        return x;
    };
    Stream rng(6, 0);
    Swarm s = init_swarm({1.0, 0.0, 0.0}, hp, rng, per_position(sphere), unit);
    for (int t = 0; t < 50; ++t) pso_step(s, per_position(sphere), hp, rng, unit);
    for (const auto& p : s.particles) {
        double n = 0.0;
        for (double v : p.position) n += v * v;
        EXPECT_NEAR(n, 1.0, 1e-12);
    }
    // optimum of the sphere objective on the unit sphere is c / |c|
    const double c = std::sqrt(0.01 + 0.04 + 0.09);
    EXPECT_NEAR(s.best_position[2], 0.3 / c, 1e-2);
}

TEST(Pso, VelocityClamped) {
    PsoHyperparams hp;
    hp.particles = 4;
    hp.init_sigma = 10.0;
    Stream rng(7, 0);
    Swarm s = init_swarm(Position(2, 0.0), hp, rng, per_position(sphere));
    for (int t = 0; t < 5; ++t) {
        pso_step(s, per_position(sphere), hp, rng);
        for (const auto& p : s.particles)
            for (double v : p.velocity) ASSERT_LE(std::abs(v), hp.velocity_clamp);
    }
}
