#pragma once

// Joint optimization of a quadrant-symmetric constellation and per-antenna
// pre-scaling by maximizing the BICM-AMI, inside an outer loop that re-anchors
// the operating SNR at the current waterfall threshold:
//
//   SNR_0 <- threshold(initial set)
//   loop i = 1, 2, ...
//       PSO on AMI(., SNR_{i-1})
//       SNR_i <- threshold(best set)
//       stop when SNR_{i-1} - SNR_i <= xi
//
// The threshold is either the coded BLER waterfall SNR (AnchorMode::coded) or
// the SNR at which the AMI reaches R' log2(M N_t) (AnchorMode::capacity_anchor).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smnuc/baselines.hpp"
#include "smnuc/capacity.hpp"
#include "smnuc/constellation.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/link.hpp"
#include "smnuc/parallel.hpp"
#include "smnuc/pso.hpp"

namespace smnuc {

/// Free I/Q coordinates: M/4 first-quadrant points, then N_t pre-scaling coefficients.
struct ParticlePosition {
    std::size_t order = 0;
    std::size_t n_t = 0;
    std::vector<double> coords;

    std::size_t constellation_dims() const noexcept { return order / 2; }
    std::size_t dims() const noexcept { return order / 2 + 2 * n_t; }
};

inline ParticlePosition encode_position(const SmSignalSet& set) {
    const auto free = extract_quadrant(set.constellation()).free_points;
    ParticlePosition p{set.order(), set.n_t(), {}};
    p.coords.reserve(p.dims());
    for (const auto& s : free) {
        p.coords.push_back(s.real());
        p.coords.push_back(s.imag());
    }
    for (const auto& a : set.pre_scaling().coefficients()) {
        p.coords.push_back(a.real());
        p.coords.push_back(a.imag());
    }
    return p;
}

// Rescales the constellation part so the expanded constellation has unit
// average power and the pre-scaling part so (1/N_t) sum |a_k|^2 = 1.
// Exactly-zero free points are moved off the origin first.
inline ParticlePosition project_feasible(ParticlePosition raw) {
    if (raw.coords.size() != raw.dims()) fail("project_feasible", "coordinate count does not match order and n_t");
    for (double c : raw.coords) {
        if (!std::isfinite(c)) fail("project_feasible", "non-finite coordinate");
    }
    const std::size_t cdims = raw.constellation_dims();
    auto mean_sq = [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += raw.coords[i] * raw.coords[i];
        return s / static_cast<double>((end - begin) / 2);
    };
    double pc = mean_sq(0, cdims);
    const double pa = mean_sq(cdims, raw.coords.size());
    if (!(pc > 0.0)) fail("project_feasible", "all-zero constellation part has no feasible projection");
    if (!(pa > 0.0)) fail("project_feasible", "all-zero pre-scaling part has no feasible projection");
    bool moved = false;
    for (std::size_t i = 0; i < cdims; i += 2) {
        if (raw.coords[i] == 0.0 && raw.coords[i + 1] == 0.0) {
            raw.coords[i] = raw.coords[i + 1] = 1e-9 * std::sqrt(pc);
            moved = true;
        }
    }
    if (moved) pc = mean_sq(0, cdims);
    const double gc = 1.0 / std::sqrt(pc);
    const double ga = 1.0 / std::sqrt(pa);
    for (std::size_t i = 0; i < cdims; ++i) raw.coords[i] *= gc;
    for (std::size_t i = cdims; i < raw.coords.size(); ++i) raw.coords[i] *= ga;
    return raw;
}

inline SmSignalSet decode_position(const ParticlePosition& raw) {
    const ParticlePosition p = project_feasible(raw);
    QuadrantParams q;
    for (std::size_t i = 0; i < p.constellation_dims(); i += 2) q.free_points.emplace_back(p.coords[i], p.coords[i + 1]);
    std::vector<cplx> a;
    for (std::size_t i = p.constellation_dims(); i < p.coords.size(); i += 2) a.emplace_back(p.coords[i], p.coords[i + 1]);
    return build_signal_set(expand_quadrant(q), PreScaling::normalized(std::move(a)), p.n_t);
}

// ---------------------------------------------------------------------------

enum class AnchorMode { coded, capacity_anchor };

inline std::string to_string(AnchorMode m) { return m == AnchorMode::coded ? "coded" : "capacity-anchor"; }

inline AnchorMode parse_anchor_mode(const std::string& s) {
    if (s == "coded") return AnchorMode::coded;
    if (s == "capacity-anchor") return AnchorMode::capacity_anchor;
    fail("parse_anchor_mode", "unknown mode '" + s + "'");
}

struct OptimizeConfig {
    AnchorMode mode = AnchorMode::capacity_anchor;

    // capacity-anchor: threshold is the SNR with AMI = target_bits
    double target_bits = 1.0;
    std::size_t anchor_samples = kOptimizationSamples;
    double anchor_lo_db = -20.0;
    double anchor_hi_db = 60.0;
    double anchor_tol_db = 0.01;

    // coded: threshold is the BLER waterfall SNR
    std::optional<FecConfig> fec;
    int mcs_id = -1;
    double bler_target = 1e-2;
    WaterfallSearch search;
    FadingModel fading = FadingModel::fast;

    double xi_db = 0.1;
    std::size_t max_outer = 10;
    PsoHyperparams pso;
    std::size_t pso_samples = kOptimizationSamples;
    bool reseed_each_iteration = false;  // otherwise one CRN seed per inner PSO run
    std::uint64_t seed = 1;
    std::size_t workers = 0;
};

struct OuterRecord {
    std::size_t iteration = 0;
    double anchor_snr_db = 0.0;    // SNR_{i-1}, where the PSO objective was evaluated
    double global_best_ami = 0.0;  // best objective of the inner run
    double snr_db = 0.0;           // SNR_i of the inner run's best set
    bool accepted = false;
};

struct OptimizationState {
    Swarm swarm;  // last inner run
    std::vector<std::vector<double>> pso_traces;  // global-best trace of every inner run
    std::vector<double> snr_trace;                // SNR_0, SNR_1, ...
    std::vector<OuterRecord> outer;
    double xi_db = 0.1;
    std::string stop_reason;
};

struct OptimizeResult {
    SmSignalSet best;
    double best_snr_db = 0.0;  // threshold of `best`; never above SNR_0
    OptimizationState state;
};

/// SNR at which the BICM-AMI of set reaches target_bits, by bisection under a fixed seed.
inline double capacity_anchor_snr(const SmSignalSet& set, double target_bits, double lo_db, double hi_db,
                                  double tol_db, const McOptions& mc) {
    if (!(target_bits > 0.0 && target_bits < set.bits())) fail("capacity_anchor_snr", "target must lie in (0, log2(M N_t))");
    auto ami = [&](double snr) { return estimate_bicm_ami(set, SnrPoint{snr}, mc).value; };
    if (ami(lo_db) >= target_bits) return lo_db;
    if (ami(hi_db) < target_bits) {
        throw RangeExhausted("capacity_anchor_snr: AMI target " + std::to_string(target_bits) + " not reached up to " +
                             std::to_string(hi_db) + " dB");
    }
    while (hi_db - lo_db > tol_db) {
        const double mid = 0.5 * (lo_db + hi_db);
        if (ami(mid) >= target_bits) hi_db = mid;
        else lo_db = mid;
    }
    return hi_db;
}

class Optimizer {
public:
    explicit Optimizer(OptimizeConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.mode == AnchorMode::coded && !cfg_.fec) fail("Optimizer", "coded mode needs a FEC configuration");
        if (cfg_.max_outer == 0) fail("Optimizer", "max_outer must be >= 1");
    }

    const OptimizeConfig& config() const noexcept { return cfg_; }

    double threshold(const SmSignalSet& set) const {
        if (cfg_.mode == AnchorMode::capacity_anchor) {
            const McOptions mc{cfg_.anchor_samples, cfg_.seed ^ 0xA5C3'0000'0000'0001ull, cfg_.workers};
            return capacity_anchor_snr(set, cfg_.target_bits, cfg_.anchor_lo_db, cfg_.anchor_hi_db, cfg_.anchor_tol_db, mc);
        }
        const LinkSetup link(scheme_proposed(set), *cfg_.fec, cfg_.mcs_id, cfg_.fading);
        return find_waterfall_snr(link, cfg_.bler_target, cfg_.search).snr_db;
    }

    /// PSO objective: AMI at anchor_db for every position, common seed across positions.
    BatchObjective objective(std::size_t order, std::size_t n_t, double anchor_db, std::uint64_t seed) const {
        return [=, this](std::span<const Position> xs) {
            std::vector<double> out(xs.size());
            parallel_for(xs.size(), cfg_.workers, [&](std::size_t i) {
                const SmSignalSet set = decode_position(ParticlePosition{order, n_t, xs[i]});
                out[i] = estimate_bicm_ami(set, SnrPoint{anchor_db}, McOptions{cfg_.pso_samples, seed, 1}).value;
            });
            return out;
        };
    }

    // Inner PSO run at a fixed anchor, started from `start`.
    Swarm run_pso(const SmSignalSet& start, double anchor_db, std::uint64_t run_index) const {
        const std::size_t order = start.order();
        const std::size_t n_t = start.n_t();
        const Projector project = [order, n_t](Position x) {
            return project_feasible(ParticlePosition{order, n_t, std::move(x)}).coords;
        };
        Stream rng(cfg_.seed, stream_id(StreamDomain::pso, run_index));
        const std::uint64_t base_seed = cfg_.seed * 0x9E3779B97F4A7C15ull + run_index;
        Swarm swarm = init_swarm(encode_position(start).coords, cfg_.pso, rng, objective(order, n_t, anchor_db, base_seed), project);
        for (std::size_t t = 0; t < cfg_.pso.iterations; ++t) {
            const std::uint64_t s = cfg_.reseed_each_iteration ? base_seed + 7919 * (t + 1) : base_seed;
            pso_step(swarm, objective(order, n_t, anchor_db, s), cfg_.pso, rng, project);
        }
        return swarm;
    }

    OptimizeResult run(const SmSignalSet& initial) const {
        OptimizationState state;
        state.xi_db = cfg_.xi_db;
        SmSignalSet current = initial;
        double prev = threshold(current);
        double best_snr = prev;
        state.snr_trace.push_back(prev);
        for (std::size_t i = 1; i <= cfg_.max_outer; ++i) {
            Swarm swarm = run_pso(current, prev, i);
            SmSignalSet candidate = decode_position(ParticlePosition{current.order(), current.n_t(), swarm.best_position});
            candidate = build_signal_set(candidate.constellation(), canonical_phase(candidate.pre_scaling()), candidate.n_t());
            const double snr = threshold(candidate);
            state.snr_trace.push_back(snr);
            OuterRecord rec{i, prev, swarm.best_value, snr, snr <= prev};
            state.outer.push_back(rec);
            state.pso_traces.push_back(swarm.best_trace);
            state.swarm = std::move(swarm);
            if (rec.accepted) {
                current = std::move(candidate);
                best_snr = snr;
            }
            if (prev - snr <= cfg_.xi_db) {
                state.stop_reason = rec.accepted ? "improvement below xi" : "threshold increased; kept previous set";
                break;
            }
            prev = snr;
            if (i == cfg_.max_outer) state.stop_reason = "outer iteration cap";
        }
        return {std::move(current), best_snr, std::move(state)};
    }

private:
    OptimizeConfig cfg_;
};

inline OptimizeResult optimize(const SmSignalSet& initial_set, const OptimizeConfig& cfg) {
    return Optimizer(cfg).run(initial_set);
}

/// APSK constellation with the initial phase pre-scaling.
inline SmSignalSet initial_signal_set(std::size_t m_order, std::size_t n_t) {
    return build_signal_set(make_apsk_initial(m_order), make_initial_prescaling(m_order, n_t), n_t);
}

}  // namespace smnuc
