#pragma once

// Flat Rayleigh MISO channel and AWGN.
//
// SNR convention: E|h_k a_k s_m|^2 = 1 with unit-variance Rayleigh gains, so
// the total complex noise variance is N0 = E|z|^2 = 10^(-snr_db/10). The
// per-real-dimension variance sigma^2 used by the Gaussian likelihood is N0/2.

#include <cmath>
#include <limits>
#include <vector>

#include "smnuc/constellation.hpp"
#include "smnuc/rng.hpp"

namespace smnuc {

struct SnrPoint {
    double snr_db = 0.0;

    /// Total complex noise variance N0.
    double noise_var() const noexcept { return std::pow(10.0, -snr_db / 10.0); }
    static SnrPoint from_noise_var(double n0) { return {-10.0 * std::log10(n0)}; }
};

class ChannelRealization {
public:
    ChannelRealization(std::vector<cplx> gains, double noise_var) : gains_(std::move(gains)), noise_var_(noise_var) {
        if (gains_.empty()) fail("ChannelRealization", "need at least one gain");
        if (!(noise_var_ > 0.0) || !std::isfinite(noise_var_)) fail("ChannelRealization", "noise_var must be positive");
    }

    std::size_t n_t() const noexcept { return gains_.size(); }
    std::span<const cplx> gains() const noexcept { return gains_; }
    const cplx& gain(std::size_t k) const { return gains_.at(k); }

    /// Total complex noise variance N0 = 2 sigma^2.
    double noise_var() const noexcept { return noise_var_; }
    double sigma2_per_dim() const noexcept { return 0.5 * noise_var_; }

private:
    std::vector<cplx> gains_;
    double noise_var_;
};

/// i.i.d. CN(0,1) gains.
inline ChannelRealization draw_rayleigh(std::size_t n_t, Stream& rng, double noise_var = 1.0) {
    if (n_t == 0) fail("draw_rayleigh", "n_t must be >= 1");
    std::vector<cplx> h(n_t);
    for (auto& g : h) g = rng.complex_normal(1.0);
    return ChannelRealization(std::move(h), noise_var);
}

inline ChannelRealization unit_channel(std::size_t n_t, double noise_var) {
    return ChannelRealization(std::vector<cplx>(n_t, cplx{1.0, 0.0}), noise_var);
}

// Noiseless receive constellation: r_j = h_k * a_k * s_m for every vector j.
inline void received_points(const SmSignalSet& set, std::span<const cplx> gains, std::span<cplx> out) {
    const std::size_t m = set.order();
    const auto entries = set.entries();
    for (std::size_t k = 0; k < set.n_t(); ++k) {
        const cplx h = gains[k];
        for (std::size_t s = 0; s < m; ++s) out[k * m + s] = h * entries[k * m + s];
    }
}

inline std::vector<cplx> received_points(const SmSignalSet& set, const ChannelRealization& channel) {
    if (channel.n_t() != set.n_t()) fail("received_points", "channel and signal set antenna counts differ");
    std::vector<cplx> out(set.size());
    received_points(set, channel.gains(), out);
    return out;
}

inline cplx receive(const SmSignalSet& set, std::size_t vector_index, const ChannelRealization& channel) {
    if (vector_index >= set.size()) fail("receive", "vector index out of range");
    if (channel.n_t() != set.n_t()) fail("receive", "channel and signal set antenna counts differ");
    return channel.gain(set.antenna_of(vector_index)) * set.entry(vector_index);
}

/// y = h_k a_k s_m + z, z ~ CN(0, N0).
inline cplx receive(const SmSignalSet& set, std::size_t vector_index, const ChannelRealization& channel, Stream& rng) {
    return receive(set, vector_index, channel) + rng.complex_normal(channel.noise_var());
}

/// Minimum squared distance between distinct noiseless received candidates.
inline double min_euclidean_distance(const SmSignalSet& set, const ChannelRealization& channel) {
    const auto pts = received_points(set, channel);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::norm(pts[i] - pts[j]));
    }
    return best;
}

}  // namespace smnuc
