#pragma once

#include <limits>
#include <span>
#include <vector>

#include "smnuc/channel.hpp"
#include "smnuc/constellation.hpp"

namespace smnuc {

/// Bit LLRs of one SM channel use. Positive means bit 0 is more likely.
struct BitLlrVector {
    std::vector<double> llrs;

    /// Hard-decision label word (bit 0 = MSB).
    std::uint32_t hard_label() const noexcept {
        std::uint32_t w = 0;
        for (double l : llrs) w = (w << 1) | (l < 0.0 ? 1u : 0u);
        return w;
    }
};

/// Exhaustive nearest candidate; ties go to the lowest index.
inline std::size_t ml_detect_points(cplx y, std::span<const cplx> candidates) noexcept {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double d = std::norm(y - candidates[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

// Max-Log-MAP over an explicit candidate list:
//   llr_i = (min_{bit i = 1} |y - r|^2 - min_{bit i = 0} |y - r|^2) / N0
// where N0 = 2 sigma^2.
inline void maxlog_llrs_points(cplx y, std::span<const cplx> candidates, std::span<const std::uint32_t> labels,
                               unsigned n_bits, double noise_var, std::span<double> out) noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double min0[32];
    double min1[32];
    for (unsigned i = 0; i < n_bits; ++i) min0[i] = min1[i] = inf;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double d = std::norm(y - candidates[j]);
        const std::uint32_t w = labels[j];
        for (unsigned i = 0; i < n_bits; ++i) {
            if (label_bit(w, i, n_bits)) {
                if (d < min1[i]) min1[i] = d;
            } else if (d < min0[i]) {
                min0[i] = d;
            }
        }
    }
    const double scale = 1.0 / noise_var;
    for (unsigned i = 0; i < n_bits; ++i) out[i] = (min1[i] - min0[i]) * scale;
}

inline std::size_t ml_detect(cplx y, const SmSignalSet& set, const ChannelRealization& channel) {
    const auto candidates = received_points(set, channel);
    return ml_detect_points(y, candidates);
}

inline BitLlrVector maxlog_llrs(cplx y, const SmSignalSet& set, const ChannelRealization& channel, double noise_var) {
    if (!(noise_var > 0.0)) fail("maxlog_llrs", "noise_var must be positive");
    const auto candidates = received_points(set, channel);
    BitLlrVector out;
    out.llrs.resize(set.bits());
    maxlog_llrs_points(y, candidates, set.labels(), set.bits(), noise_var, out.llrs);
    return out;
}

inline BitLlrVector maxlog_llrs(cplx y, const SmSignalSet& set, const ChannelRealization& channel) {
    return maxlog_llrs(y, set, channel, channel.noise_var());
}

}  // namespace smnuc
