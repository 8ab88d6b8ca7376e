#pragma once

// Monte-Carlo BICM average mutual information of an SM signal set:
//
//   C = B - sum_i E_{b,y,H}[ log2( sum_{x in X} p(y|HAx) / sum_{x in X_b^i} p(y|HAx) ) ]
//
// with B = log2(M N_t) and p(y|HAx) proportional to exp(-|y - HAx|^2 / N0).
// Samples are processed in fixed-size batches; batch b draws from substream
// (seed, b), so the estimate depends on the seed only, not on the worker count.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "smnuc/channel.hpp"
#include "smnuc/constellation.hpp"
#include "smnuc/parallel.hpp"
#include "smnuc/rng.hpp"

namespace smnuc {

inline constexpr std::size_t kOptimizationSamples = 200'000;
inline constexpr std::size_t kReportSamples = 2'000'000;
inline constexpr std::size_t kCapacityBatch = 4096;

struct AmiEstimate {
    double value = 0.0;      // bits per channel use
    double std_error = 0.0;  // bits
    std::size_t n_samples = 0;
    std::vector<double> per_bit;  // per-bit mutual information, sums to value
    std::vector<double> per_bit_std_error;
    std::size_t workers = 1;
};

struct McOptions {
    std::size_t n_samples = kOptimizationSamples;
    std::uint64_t seed = 1;
    std::size_t workers = 0;  // 0: default_worker_count()
};

namespace detail {

// Per-sample evaluation of the bit-wise log ratios for one signal set.
class AmiKernel {
public:
    explicit AmiKernel(const SmSignalSet& set)
        : set_(set), bits_(set.bits()), points_(set.size()), logp_(set.size()), bit_table_(set.size() * set.bits()) {
        for (std::size_t j = 0; j < set.size(); ++j) {
            for (unsigned i = 0; i < bits_; ++i) bit_table_[j * bits_ + i] = static_cast<unsigned char>(label_bit(set.label_of_vector(j), i, bits_));
        }
    }

    void set_gains(std::span<const cplx> gains) { received_points(set_, gains, points_); }

    cplx noiseless(std::size_t j) const { return points_[j]; }

    // Writes the per-bit mutual information sample 1 - log2(S / S_b) for the
    // transmitted word, given received y.
    void evaluate(cplx y, std::uint32_t word, double inv_n0, std::span<double> out) {
        const std::size_t n = points_.size();
        double dmax = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            logp_[j] = -std::norm(y - points_[j]) * inv_n0;
            dmax = std::max(dmax, logp_[j]);
        }
        double s_all = 0.0;
        double s_bit[32] = {};
        unsigned want[32];
        for (unsigned i = 0; i < bits_; ++i) want[i] = label_bit(word, i, bits_);
        for (std::size_t j = 0; j < n; ++j) {
            const double e = std::exp(logp_[j] - dmax);
            s_all += e;
            const unsigned char* b = &bit_table_[j * bits_];
            for (unsigned i = 0; i < bits_; ++i) {
                if (b[i] == want[i]) s_bit[i] += e;
            }
        }
        for (unsigned i = 0; i < bits_; ++i) {
            double ratio_nats;
            if (s_bit[i] > std::numeric_limits<double>::min()) {
                ratio_nats = std::log(s_all) - std::log(s_bit[i]);
            } else {
                // X_b^i lies entirely in the underflow region; redo it with its own shift
                double bmax = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < n; ++j) {
                    if (bit_table_[j * bits_ + i] == want[i]) bmax = std::max(bmax, logp_[j]);
                }
                double sb = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (bit_table_[j * bits_ + i] == want[i]) sb += std::exp(logp_[j] - bmax);
                }
                ratio_nats = (dmax + std::log(s_all)) - (bmax + std::log(sb));
            }
            out[i] = 1.0 - ratio_nats / std::numbers::ln2;
        }
    }

    unsigned bits() const noexcept { return bits_; }

private:
    const SmSignalSet& set_;
    unsigned bits_;
    std::vector<cplx> points_;
    std::vector<double> logp_;
    std::vector<unsigned char> bit_table_;
};

struct BatchStats {
    RunningStats total;
    std::vector<RunningStats> per_bit;
};

template <typename SampleFn>
AmiEstimate run_ami_batches(unsigned n_bits, const McOptions& opt, SampleFn&& make_sampler) {
    if (opt.n_samples == 0) fail("estimate_bicm_ami", "n_samples must be >= 1");
    const std::size_t n_batches = (opt.n_samples + kCapacityBatch - 1) / kCapacityBatch;
    std::vector<BatchStats> batches(n_batches);
    const std::size_t workers = resolve_workers(opt.workers);
    parallel_for(n_batches, workers, [&](std::size_t b) {
        auto sampler = make_sampler();
        Stream rng(opt.seed, stream_id(StreamDomain::capacity, b));
        const std::size_t begin = b * kCapacityBatch;
        const std::size_t count = std::min(kCapacityBatch, opt.n_samples - begin);
        BatchStats& st = batches[b];
        st.per_bit.resize(n_bits);
        std::vector<double> bit_mi(n_bits);
        for (std::size_t s = 0; s < count; ++s) {
            sampler(rng, std::span<double>(bit_mi));
            double v = 0.0;
            for (unsigned i = 0; i < n_bits; ++i) {
                st.per_bit[i].add(bit_mi[i]);
                v += bit_mi[i];
            }
            st.total.add(v);
        }
    });
    BatchStats all;
    all.per_bit.resize(n_bits);
    for (const auto& b : batches) {
        all.total.merge(b.total);
        for (unsigned i = 0; i < n_bits; ++i) all.per_bit[i].merge(b.per_bit[i]);
    }
    AmiEstimate est;
    est.value = all.total.mean();
    est.std_error = all.total.std_error();
    est.n_samples = all.total.count();
    est.workers = workers;
    for (const auto& s : all.per_bit) {
        est.per_bit.push_back(s.mean());
        est.per_bit_std_error.push_back(s.std_error());
    }
    return est;
}

}  // namespace detail

/// Fresh Rayleigh gains per sample.
inline AmiEstimate estimate_bicm_ami(const SmSignalSet& set, SnrPoint snr, const McOptions& opt) {
    const double n0 = snr.noise_var();
    const double inv_n0 = 1.0 / n0;
    return detail::run_ami_batches(set.bits(), opt, [&] {
        return [&, kernel = detail::AmiKernel(set), h = std::vector<cplx>(set.n_t())](Stream& rng, std::span<double> out) mutable {
            const auto word = static_cast<std::uint32_t>(rng.uniform_index(set.size()));
            for (auto& g : h) g = rng.complex_normal(1.0);
            kernel.set_gains(h);
            const cplx y = kernel.noiseless(set.vector_of_label(word)) + rng.complex_normal(n0);
            kernel.evaluate(y, word, inv_n0, out);
        };
    });
}

inline AmiEstimate estimate_bicm_ami(const SmSignalSet& set, SnrPoint snr, std::size_t n_samples, std::uint64_t seed) {
    return estimate_bicm_ami(set, snr, McOptions{n_samples, seed, 0});
}

/// H held fixed; only the label and the noise are random. The channel's own
/// noise_var is ignored in favour of snr.
inline AmiEstimate estimate_bicm_ami_fixed_channel(const SmSignalSet& set, const ChannelRealization& channel,
                                                   SnrPoint snr, const McOptions& opt) {
    if (channel.n_t() != set.n_t()) fail("estimate_bicm_ami_fixed_channel", "antenna counts differ");
    const double n0 = snr.noise_var();
    const double inv_n0 = 1.0 / n0;
    return detail::run_ami_batches(set.bits(), opt, [&] {
        detail::AmiKernel kernel(set);
        kernel.set_gains(channel.gains());
        return [&, kernel = std::move(kernel)](Stream& rng, std::span<double> out) mutable {
            const auto word = static_cast<std::uint32_t>(rng.uniform_index(set.size()));
            const cplx y = kernel.noiseless(set.vector_of_label(word)) + rng.complex_normal(n0);
            kernel.evaluate(y, word, inv_n0, out);
        };
    });
}

inline AmiEstimate estimate_bicm_ami_fixed_channel(const SmSignalSet& set, const ChannelRealization& channel,
                                                   SnrPoint snr, std::size_t n_samples, std::uint64_t seed) {
    return estimate_bicm_ami_fixed_channel(set, channel, snr, McOptions{n_samples, seed, 0});
}

// Paired estimate of C(a) - C(b) under common random numbers: both sets see
// the same transmitted word, Rayleigh gains and noise sample.
inline AmiEstimate estimate_bicm_ami_difference(const SmSignalSet& a, const SmSignalSet& b, SnrPoint snr,
                                                const McOptions& opt) {
    if (a.size() != b.size() || a.n_t() != b.n_t()) fail("estimate_bicm_ami_difference", "signal set shapes differ");
    const double n0 = snr.noise_var();
    const double inv_n0 = 1.0 / n0;
    const unsigned n_bits = a.bits();
    return detail::run_ami_batches(n_bits, opt, [&] {
        return [&, ka = detail::AmiKernel(a), kb = detail::AmiKernel(b), h = std::vector<cplx>(a.n_t()),
                tmp = std::vector<double>(n_bits)](Stream& rng, std::span<double> out) mutable {
            const auto word = static_cast<std::uint32_t>(rng.uniform_index(a.size()));
            for (auto& g : h) g = rng.complex_normal(1.0);
            const cplx z = rng.complex_normal(n0);
            ka.set_gains(h);
            kb.set_gains(h);
            ka.evaluate(ka.noiseless(a.vector_of_label(word)) + z, word, inv_n0, out);
            kb.evaluate(kb.noiseless(b.vector_of_label(word)) + z, word, inv_n0, tmp);
            for (unsigned i = 0; i < n_bits; ++i) out[i] -= tmp[i];
        };
    });
}

}  // namespace smnuc
