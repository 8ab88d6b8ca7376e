// Module invariants, each exercised under three seeds.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "smnuc/smnuc.hpp"
#include "support/seeds.hpp"

using namespace smnuc;

namespace {

class Seeded : public ::testing::TestWithParam<std::uint64_t> {};

QuadrantParams random_quadrant(Stream& rng, std::size_t quarter) {
    QuadrantParams q;
    for (std::size_t i = 0; i < quarter; ++i) q.free_points.emplace_back(std::abs(rng.normal()) + 0.01, std::abs(rng.normal()) + 0.01);
    return q;
}

PreScaling random_prescaling(Stream& rng, std::size_t n_t) {
    std::vector<cplx> a(n_t);
    for (auto& x : a) x = rng.complex_normal(1.0);
    return PreScaling::normalized(std::move(a));
}

}  // namespace

TEST_P(Seeded, ConstellationPowerAndQuadrantRoundTrip) {
    Stream rng(GetParam(), 0);
    for (std::size_t m : {4u, 8u, 16u, 32u, 64u}) {
        const auto c = expand_quadrant(random_quadrant(rng, m / 4));
        EXPECT_LT(std::abs(c.average_power() - 1.0), 1e-12);
        const auto again = expand_quadrant(extract_quadrant(c));
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(std::abs(again.symbol(i) - c.symbol(i)), 0.0, 1e-14);
    }
    for (std::size_t m : {4u, 16u, 64u}) {
        EXPECT_LT(std::abs(make_apsk_initial(m).average_power() - 1.0), 1e-12);
        EXPECT_LT(std::abs(make_square_qam(m).average_power() - 1.0), 1e-12);
    }
}

TEST_P(Seeded, SignalSetShapeAndLabels) {
    Stream rng(GetParam(), 1);
    for (std::size_t m : {4u, 16u, 64u}) {
        for (std::size_t n_t : {1u, 2u, 4u}) {
            const auto set = build_signal_set(expand_quadrant(random_quadrant(rng, m / 4)), random_prescaling(rng, n_t), n_t);
            ASSERT_EQ(set.size(), m * n_t);
            for (std::size_t j = 0; j < set.size(); ++j) {
                const auto v = set.dense_vector(j);
                EXPECT_EQ(std::count_if(v.begin(), v.end(), [](cplx x) { return x != cplx{}; }), 1);
            }
            for (std::uint32_t w = 0; w < set.size(); ++w) EXPECT_EQ(set.label_of_vector(set.vector_of_label(w)), w);
            EXPECT_LT(std::abs(mean_power(set.pre_scaling().coefficients()) - 1.0), 1e-12);
        }
    }
}

TEST_P(Seeded, MedInvariantUnderCommonRotation) {
    Stream rng(GetParam(), 2);
    const auto c = expand_quadrant(random_quadrant(rng, 4));
    const auto a = random_prescaling(rng, 4);
    const auto ch = draw_rayleigh(4, rng);
    std::vector<cplx> rotated(a.coefficients().begin(), a.coefficients().end());
    const cplx u = std::polar(1.0, rng.uniform() * 2.0 * std::numbers::pi);
    for (auto& x : rotated) x *= u;
    const double d0 = min_euclidean_distance(build_signal_set(c, a, 4), ch);
    const double d1 = min_euclidean_distance(build_signal_set(c, PreScaling::normalized(rotated), 4), ch);
    EXPECT_NEAR(d0, d1, 1e-12 * std::max(1.0, d0));
}

TEST_P(Seeded, NoiselessReceiveLinear) {
    Stream rng(GetParam(), 3);
    const auto c = expand_quadrant(random_quadrant(rng, 4));
    const auto a = random_prescaling(rng, 2);
    const auto ch = draw_rayleigh(2, rng);
    const auto set = build_signal_set(c, a, 2);
    const double g = 1.7;
    for (std::size_t j = 0; j < set.size(); ++j) {
        const std::size_t k = set.antenna_of(j);
        const cplx r = receive(set, j, ch);
        EXPECT_NEAR(std::abs(r - ch.gain(k) * a[k] * c.symbol(set.symbol_of(j))), 0.0, 1e-14);
        const ChannelRealization ch2({ch.gain(0) * g, ch.gain(1) * g}, 1.0);
        EXPECT_NEAR(std::abs(receive(set, j, ch2) - g * r), 0.0, 1e-13);
    }
}

TEST_P(Seeded, NoiseVariancePerDimension) {
    Stream rng(GetParam(), 4);
    const double n0 = 0.37;
    RunningStats re, im;
    for (int i = 0; i < 400000; ++i) {
        const cplx z = rng.complex_normal(n0);
        re.add(z.real());
        im.add(z.imag());
    }
    EXPECT_NEAR(re.variance() / (n0 / 2.0), 1.0, 0.01);
    EXPECT_NEAR(im.variance() / (n0 / 2.0), 1.0, 0.01);
}

TEST_P(Seeded, DetectionTranslationInvariantAndMaxLogAgrees) {
    Stream rng(GetParam(), 5);
    const auto set = build_signal_set(expand_quadrant(random_quadrant(rng, 4)), random_prescaling(rng, 2), 2);
    for (int t = 0; t < 2000; ++t) {
        const auto ch = draw_rayleigh(2, rng, 0.3);
        const auto j = rng.uniform_index(set.size());
        const cplx y = receive(set, j, ch, rng);
        auto cands = received_points(set, ch);
        const auto ml = ml_detect_points(y, cands);
        ASSERT_EQ(set.vector_of_label(maxlog_llrs(y, set, ch).hard_label()), ml);
        const cplx shift = rng.complex_normal(4.0);
        for (auto& c : cands) c += shift;
        ASSERT_EQ(ml_detect_points(y + shift, cands), ml);
    }
}

TEST_P(Seeded, AmiInvariantUnderAntennaPermutation) {
    Stream rng(GetParam(), 6);
    const auto c = expand_quadrant(random_quadrant(rng, 4));
    const auto a = random_prescaling(rng, 2);
    const PreScaling swapped({a[1], a[0]});
    const auto x = estimate_bicm_ami(build_signal_set(c, a, 2), SnrPoint{5.0}, 40000, GetParam());
    const auto y = estimate_bicm_ami(build_signal_set(c, swapped, 2), SnrPoint{5.0}, 40000, GetParam() + 1000);
    EXPECT_LE(std::abs(x.value - y.value), 4.0 * std::hypot(x.std_error, y.std_error));
}

TEST_P(Seeded, AmiBelowSaturationAtFiniteSnr) {
    const auto set = initial_signal_set(16, 2);
    const auto e = estimate_bicm_ami(set, SnrPoint{10.0}, 100000, GetParam());
    EXPECT_LT(e.value, double(set.bits()) - e.std_error);
}

TEST_P(Seeded, AmiStdErrorScaling) {
    const auto set = initial_signal_set(4, 2);
    const auto a = estimate_bicm_ami(set, SnrPoint{4.0}, 40000, GetParam());
    const auto b = estimate_bicm_ami(set, SnrPoint{4.0}, 80000, GetParam() + 7);
    EXPECT_NEAR(b.std_error / a.std_error, 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
    for (std::size_t i = 0; i < b.per_bit.size(); ++i) {
        EXPECT_GE(b.per_bit[i], -3.0 * b.per_bit_std_error[i]);
        EXPECT_LE(b.per_bit[i], 1.0 + 3.0 * b.per_bit_std_error[i]);
    }
}

TEST_P(Seeded, AmiInvariantUnderCommonPrescalingRotation) {
    Stream rng(GetParam(), 7);
    const auto c = expand_quadrant(random_quadrant(rng, 4));
    const auto a = random_prescaling(rng, 4);
    std::vector<cplx> r(a.coefficients().begin(), a.coefficients().end());
    const cplx u = std::polar(1.0, 0.3 + rng.uniform());
    for (auto& x : r) x *= u;
    const auto d = estimate_bicm_ami_difference(build_signal_set(c, a, 4), build_signal_set(c, PreScaling::normalized(r), 4),
                                                SnrPoint{5.0}, McOptions{40000, GetParam(), 0});
    EXPECT_LE(std::abs(d.value), 5.0 * d.std_error + 1e-12);
}

TEST_P(Seeded, PsoEmitsQuadrantSymmetricSets) {
    OptimizeConfig cfg;
    cfg.pso.particles = 5;
    cfg.pso.iterations = 4;
    cfg.pso_samples = 2000;
    cfg.seed = GetParam();
    const Optimizer opt(cfg);
    const auto init = initial_signal_set(16, 2);
    const auto swarm = opt.run_pso(init, 6.0, 1);
    for (std::size_t i = 1; i < swarm.best_trace.size(); ++i) ASSERT_GE(swarm.best_trace[i], swarm.best_trace[i - 1]);
    for (const auto& p : swarm.particles) {
        const auto set = decode_position(ParticlePosition{16, 2, p.position});
        const auto& c = set.constellation();
        for (std::size_t q = 0; q < 4; ++q) {
            EXPECT_EQ(c.symbol(q + 4), -std::conj(c.symbol(q)));
            EXPECT_EQ(c.symbol(q + 8), std::conj(c.symbol(q)));
            EXPECT_EQ(c.symbol(q + 12), -c.symbol(q));
        }
        EXPECT_LT(std::abs(c.average_power() - 1.0), 1e-12);
        EXPECT_LT(std::abs(mean_power(set.pre_scaling().coefficients()) - 1.0), 1e-12);
    }
}

TEST_P(Seeded, SmpPhasesExact) {
    Stream rng(GetParam(), 8);
    for (std::size_t m : {4u, 16u, 64u}) {
        for (std::size_t n_t : {2u, 4u}) {
            const auto cfg = SmpConfig::make(SmpMode::perfect_csi, m, n_t);
            for (std::size_t k = 0; k < n_t; ++k) {
                EXPECT_GE(cfg.theta[k], 0.0);
                EXPECT_LT(cfg.theta[k], 2.0 * std::numbers::pi / double(m));
                if (k) {
                    EXPECT_GT(cfg.theta[k], cfg.theta[k - 1]);
                }
            }
            const auto ch = draw_rayleigh(n_t, rng);
            const auto qam = make_square_qam(m);
            const auto set = build_signal_set(qam, smp_coefficients(cfg, &ch), n_t);
            const auto pts = received_points(set, ch);
            for (std::size_t j = 0; j < set.size(); ++j) {
                const double expected = cfg.theta[set.antenna_of(j)] + std::arg(qam.symbol(set.symbol_of(j)));
                EXPECT_NEAR(std::remainder(std::arg(pts[j]) - expected, 2.0 * std::numbers::pi), 0.0, 1e-12);
            }
        }
    }
}

TEST_P(Seeded, CodecAndInterleaverRoundTrips) {
    Stream rng(GetParam(), 9);
    for (const auto& row : kMcsTable) {
        for (std::size_t n_t : {2u, 4u}) {
            const auto cfg = fec_config_for(make_mcs_entry(row, n_t));
            const auto codec = make_codec(cfg);
            Bits info(cfg.info_bits);
            for (auto& b : info) b = std::uint8_t(rng() & 1u);
            const auto cw = codec->encode(info);
            std::vector<double> llr(cw.size());
            for (std::size_t i = 0; i < cw.size(); ++i) llr[i] = cw[i] ? -1.0 : 1.0;
            const auto dec = codec->decode(llr, cfg.max_iters);
            ASSERT_TRUE(dec.converged);
            ASSERT_EQ(dec.info, info);
            const Interleaver il(cfg.codeword_bits, GetParam());
            ASSERT_EQ(il.deinterleave(il.interleave(cw)), cw);
        }
    }
}

TEST_P(Seeded, BlerReproducibleAndBounded) {
    const auto mcs = mcs_entry(10, 2);
    const LinkSetup link(scheme_smp_no_feedback(16, 2), fec_config_for(mcs, 480), mcs.id);
    StopRule stop;
    stop.max_blocks = 256;
    const auto a = simulate_bler(link, SnrPoint{7.0}, stop, GetParam(), 1);
    const auto b = simulate_bler(link, SnrPoint{7.0}, stop, GetParam(), 1);
    EXPECT_EQ(a.block_errors, b.block_errors);
    EXPECT_LE(0.0, a.ci_low);
    EXPECT_LE(a.ci_low, a.bler);
    EXPECT_LE(a.bler, a.ci_high);
    EXPECT_LE(a.ci_high, 1.0);
}

INSTANTIATE_TEST_SUITE_P(Seeds, Seeded, ::testing::ValuesIn(testing_seeds::kPropertySeeds));
