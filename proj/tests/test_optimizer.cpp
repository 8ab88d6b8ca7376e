#include <gtest/gtest.h>

#include <cmath>

#include "smnuc/optimizer.hpp"
#include "support/seeds.hpp"

using namespace smnuc;

namespace {

OptimizeConfig tiny_capacity_config(double target_bits) {
    OptimizeConfig cfg;
    cfg.mode = AnchorMode::capacity_anchor;
    cfg.target_bits = target_bits;
    cfg.anchor_samples = 8000;
    cfg.pso_samples = 4000;
    cfg.pso.particles = 6;
    cfg.pso.iterations = 6;
    cfg.seed = 3;
    return cfg;
}

void expect_feasible(const SmSignalSet& set) {
    EXPECT_NEAR(set.constellation().average_power(), 1.0, 1e-12);
    EXPECT_NEAR(mean_power(set.pre_scaling().coefficients()), 1.0, 1e-12);
    EXPECT_NO_THROW(extract_quadrant(set.constellation()));
}

}  // namespace

TEST(Position, EncodeDecodeRoundTrip) {
    const auto set = initial_signal_set(16, 4);
    const auto p = encode_position(set);
    EXPECT_EQ(p.coords.size(), p.dims());
    EXPECT_EQ(p.dims(), 8u + 8u);
    const auto back = decode_position(p);
    for (std::size_t j = 0; j < set.size(); ++j) EXPECT_NEAR(std::abs(back.entry(j) - set.entry(j)), 0.0, 1e-14);
}

TEST(Position, ProjectionIdempotentAndScaleInvariant) {
    for (auto seed : testing_seeds::kPropertySeeds) {
        Stream rng(seed, 0);
        ParticlePosition raw{64, 4, {}};
        for (std::size_t i = 0; i < raw.dims(); ++i) raw.coords.push_back(rng.normal());
        const auto once = project_feasible(raw);
        const auto twice = project_feasible(once);
        for (std::size_t i = 0; i < raw.dims(); ++i) EXPECT_NEAR(once.coords[i], twice.coords[i], 1e-15);
        auto scaled = raw;
        for (auto& c : scaled.coords) c *= 7.0;
        const auto s = project_feasible(scaled);
        for (std::size_t i = 0; i < raw.dims(); ++i) EXPECT_NEAR(once.coords[i], s.coords[i], 1e-14);
        expect_feasible(decode_position(raw));
    }
}

TEST(Position, ProjectionRejectsDegenerateInput) {
    ParticlePosition zero_c{4, 2, {0, 0, 1, 0, 1, 0}};
    EXPECT_THROW(project_feasible(zero_c), std::invalid_argument);
    ParticlePosition zero_a{4, 2, {1, 1, 0, 0, 0, 0}};
    EXPECT_THROW(project_feasible(zero_a), std::invalid_argument);
    ParticlePosition wrong{4, 2, {1, 1}};
    EXPECT_THROW(project_feasible(wrong), std::invalid_argument);
    ParticlePosition nan{4, 1, {std::nan(""), 1, 1, 0}};
    EXPECT_THROW(project_feasible(nan), std::invalid_argument);
    // one free point exactly at the origin is moved off it
    ParticlePosition origin{16, 1, {0, 0, 1, 1, 2, 1, 1, 2, 1, 0}};
    expect_feasible(decode_position(origin));
}

TEST(Anchor, BisectionBracketsTarget) {
    const auto set = initial_signal_set(4, 2);
    const McOptions mc{20000, 5, 0};
    const double snr = capacity_anchor_snr(set, 1.5, -20.0, 40.0, 0.01, mc);
    EXPECT_GE(estimate_bicm_ami(set, SnrPoint{snr}, mc).value, 1.5);
    EXPECT_LT(estimate_bicm_ami(set, SnrPoint{snr - 0.02}, mc).value, 1.5);
    EXPECT_THROW(capacity_anchor_snr(set, 2.99, -20.0, 0.0, 0.01, mc), RangeExhausted);
    EXPECT_THROW(capacity_anchor_snr(set, 3.5, -20.0, 40.0, 0.01, mc), std::invalid_argument);
}

TEST(Optimizer, HugeXiGivesOneOuterIteration) {
    auto cfg = tiny_capacity_config(1.5);
    cfg.xi_db = 100.0;
    const auto res = optimize(initial_signal_set(4, 2), cfg);
    EXPECT_EQ(res.state.outer.size(), 1u);
    EXPECT_EQ(res.state.snr_trace.size(), 2u);
    EXPECT_LE(res.best_snr_db, res.state.snr_trace.front());
    expect_feasible(res.best);
}

TEST(Optimizer, NeverWorseThanInitial) {
    for (auto seed : testing_seeds::kPropertySeeds) {
        auto cfg = tiny_capacity_config(2.0);
        cfg.seed = seed;
        cfg.max_outer = 3;
        const auto res = optimize(initial_signal_set(16, 2), cfg);
        EXPECT_LE(res.best_snr_db, res.state.snr_trace.front());
        EXPECT_LE(res.state.outer.size(), 3u);
        EXPECT_FALSE(res.state.stop_reason.empty());
        for (const auto& trace : res.state.pso_traces)
            for (std::size_t i = 1; i < trace.size(); ++i) ASSERT_GE(trace[i], trace[i - 1]);
        expect_feasible(res.best);
        EXPECT_NEAR(res.best.pre_scaling()[0].imag(), 0.0, 1e-15);
    }
}

TEST(Optimizer, PsoImprovesObjectiveAtAnchor) {
    auto cfg = tiny_capacity_config(2.0);
    cfg.pso.particles = 10;
    cfg.pso.iterations = 15;
    const Optimizer opt(cfg);
    const auto init = initial_signal_set(16, 2);
    const auto swarm = opt.run_pso(init, 3.0, 1);
    EXPECT_GE(swarm.best_value, swarm.best_trace.front());
    EXPECT_EQ(swarm.best_trace.size(), cfg.pso.iterations + 1);
}

TEST(Optimizer, CodedModeSmoke) {
    OptimizeConfig cfg;
    cfg.mode = AnchorMode::coded;
    FecConfig fec;
    fec.info_bits = 150;
    fec.codeword_bits = 300;
    cfg.fec = fec;
    cfg.search.lo_db = -4.0;
    cfg.search.hi_db = 30.0;
    cfg.search.step_db = 0.5;
    cfg.search.coarse_step_db = 4.0;
    cfg.search.stop.min_errors = 20;
    cfg.search.stop.max_blocks = 2000;
    cfg.search.stop.batch = 64;
    cfg.bler_target = 0.1;
    cfg.pso.particles = 4;
    cfg.pso.iterations = 3;
    cfg.pso_samples = 2000;
    cfg.max_outer = 2;
    const auto res = optimize(initial_signal_set(4, 2), cfg);
    EXPECT_LE(res.best_snr_db, res.state.snr_trace.front());
    EXPECT_GE(res.state.outer.size(), 1u);
    expect_feasible(res.best);
    OptimizeConfig no_fec;
    no_fec.mode = AnchorMode::coded;
    EXPECT_THROW(Optimizer{no_fec}, std::invalid_argument);
}

TEST(AnchorMode, Parse) {
    EXPECT_EQ(parse_anchor_mode("coded"), AnchorMode::coded);
    EXPECT_EQ(parse_anchor_mode(to_string(AnchorMode::capacity_anchor)), AnchorMode::capacity_anchor);
    EXPECT_THROW(parse_anchor_mode("x"), std::invalid_argument);
}
