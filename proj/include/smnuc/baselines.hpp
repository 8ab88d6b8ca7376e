#pragma once

// Reference schemes: conventional SM over Gray square QAM, and phase
// pre-scaled SM (SM-P) with or without channel-phase compensation.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "smnuc/channel.hpp"
#include "smnuc/constellation.hpp"

namespace smnuc {

enum class SmpMode { perfect_csi, no_feedback };

struct SmpConfig {
    SmpMode mode = SmpMode::no_feedback;
    std::vector<double> theta;  // theta_k = 2 pi (k-1) / (M N_t)

    static SmpConfig make(SmpMode mode, std::size_t m_order, std::size_t n_t) {
        if (m_order == 0 || n_t == 0) fail("SmpConfig", "order and n_t must be positive");
        SmpConfig c;
        c.mode = mode;
        c.theta.resize(n_t);
        for (std::size_t k = 0; k < n_t; ++k) {
            c.theta[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m_order * n_t);
        }
        return c;
    }
};

// perfect-csi: a_k = exp(j(theta_k - arg h_k)); no-feedback: a_k = exp(j theta_k).
inline PreScaling smp_coefficients(const SmpConfig& config, const ChannelRealization* channel = nullptr) {
    std::vector<cplx> a(config.theta.size());
    if (config.mode == SmpMode::perfect_csi) {
        if (channel == nullptr) fail("smp_coefficients", "perfect-csi mode requires a channel realization");
        if (channel->n_t() != a.size()) fail("smp_coefficients", "channel antenna count differs from theta");
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::polar(1.0, config.theta[k] - std::arg(channel->gain(k)));
    } else {
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::polar(1.0, config.theta[k]);
    }
    return PreScaling(std::move(a));
}

inline SmSignalSet conventional_sm_set(std::size_t m_order, std::size_t n_t) {
    if (m_order != 4 && m_order != 16 && m_order != 64) fail("conventional_sm_set", "order must be 4, 16 or 64");
    return build_signal_set(make_square_qam(m_order), PreScaling::unit(n_t), n_t);
}

/// QAM with the no-feedback SM-P phases e^{j theta_k}.
inline SmSignalSet smp_set(std::size_t m_order, std::size_t n_t) {
    return build_signal_set(make_square_qam(m_order), smp_coefficients(SmpConfig::make(SmpMode::no_feedback, m_order, n_t)),
                            n_t);
}

// ---------------------------------------------------------------------------
// Schemes as seen by the link simulator.

enum class PrescalingMode {
    fixed,                  // a_k taken from the signal set
    csi_phase_compensated,  // the transmitter also removes arg(h_k) per channel use
};

struct Scheme {
    std::string id;
    SmSignalSet set;
    PrescalingMode mode = PrescalingMode::fixed;
};

// Per-antenna gain applied to the set's entries: h_k, or |h_k| when the
// channel phase is pre-compensated.
inline void effective_gains(PrescalingMode mode, std::span<const cplx> h, std::span<cplx> out) noexcept {
    if (mode == PrescalingMode::fixed) {
        std::copy(h.begin(), h.end(), out.begin());
    } else {
        for (std::size_t k = 0; k < h.size(); ++k) out[k] = cplx{std::abs(h[k]), 0.0};
    }
}

inline Scheme scheme_sm(std::size_t m_order, std::size_t n_t) { return {"sm", conventional_sm_set(m_order, n_t)}; }
inline Scheme scheme_smp_no_feedback(std::size_t m_order, std::size_t n_t) { return {"smp-nf", smp_set(m_order, n_t)}; }
inline Scheme scheme_smp_perfect_csi(std::size_t m_order, std::size_t n_t) {
    return {"smp-csi", smp_set(m_order, n_t), PrescalingMode::csi_phase_compensated};
}
inline Scheme scheme_proposed(SmSignalSet set) { return {"proposed", std::move(set)}; }

}  // namespace smnuc
