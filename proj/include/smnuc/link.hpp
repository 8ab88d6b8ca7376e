#pragma once

// Coded BICM link over the SM channel: encode, interleave, map to SM
// vectors, Rayleigh + AWGN, Max-Log-MAP demap, deinterleave, decode.
//
// Block b draws everything (info bits, gains, noise) from substream
// (seed, b), and the stop rule is checked at fixed block-batch boundaries,
// so results depend on the seed but not on the worker count. Schemes with the
// same N_t and code consume identical random draws (common random numbers).

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smnuc/baselines.hpp"
#include "smnuc/channel.hpp"
#include "smnuc/detection.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/fec.hpp"
#include "smnuc/parallel.hpp"
#include "smnuc/rng.hpp"

namespace smnuc {

enum class FadingModel {
    fast,   // independent Rayleigh gains per channel use
    block,  // one Rayleigh draw per codeword
    awgn,   // h_k = 1
};

inline std::string to_string(FadingModel f) {
    switch (f) {
        case FadingModel::fast: return "fast";
        case FadingModel::block: return "block";
        default: return "awgn";
    }
}

inline FadingModel parse_fading_model(const std::string& s) {
    if (s == "fast") return FadingModel::fast;
    if (s == "block") return FadingModel::block;
    if (s == "awgn") return FadingModel::awgn;
    fail("parse_fading_model", "unknown fading model '" + s + "'");
}

struct StopRule {
    std::size_t min_errors = 100;
    std::size_t max_blocks = 100'000;
    std::size_t batch = 128;  // granularity of the stop check
    // When set, also stop once the Wilson interval excludes this BLER.
    std::optional<double> decisive_target;
};

struct WilsonInterval {
    double low;
    double high;
};

/// Wilson score interval, 95 % by default.
inline WilsonInterval wilson_interval(std::size_t errors, std::size_t trials, double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

struct BlerRow {
    std::string scheme;
    int mcs = -1;
    std::size_t n_t = 0;
    double snr_db = 0.0;
    std::size_t blocks = 0;
    std::size_t block_errors = 0;
    double bler = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::string stop_reason;  // errors | cap | decisive
};

// Everything needed to run blocks for one scheme: the scheme itself, the
// codec built from its FEC configuration, and the interleaver.
class LinkSetup {
public:
    LinkSetup(Scheme scheme, const FecConfig& fec, int mcs_id = -1, FadingModel fading = FadingModel::fast)
        : scheme_(std::move(scheme)), fec_(fec), mcs_id_(mcs_id), fading_(fading),
          codec_(make_codec(fec)), interleaver_(fec.codeword_bits, fec.interleaver_seed) {
        validate(fec_, scheme_.set.bits());
    }

    LinkSetup(Scheme scheme, const FecConfig& fec, std::shared_ptr<const FecCodec> codec, int mcs_id,
              FadingModel fading)
        : scheme_(std::move(scheme)), fec_(fec), mcs_id_(mcs_id), fading_(fading), codec_(std::move(codec)),
          interleaver_(fec.codeword_bits, fec.interleaver_seed) {
        validate(fec_, scheme_.set.bits());
        if (codec_->codeword_length() != fec_.codeword_bits || codec_->info_length() != fec_.info_bits) {
            fail("LinkSetup", "codec dimensions differ from FEC configuration");
        }
    }

    const Scheme& scheme() const noexcept { return scheme_; }
    const FecConfig& fec() const noexcept { return fec_; }
    const FecCodec& codec() const noexcept { return *codec_; }
    std::shared_ptr<const FecCodec> codec_ptr() const noexcept { return codec_; }
    const Interleaver& interleaver() const noexcept { return interleaver_; }
    int mcs_id() const noexcept { return mcs_id_; }
    FadingModel fading() const noexcept { return fading_; }

    /// Same link with a different scheme (shares the codec).
    LinkSetup with_scheme(Scheme scheme) const { return LinkSetup(std::move(scheme), fec_, codec_, mcs_id_, fading_); }

    // One codeword through the chain; true on block error.
    bool run_block(double noise_var, std::uint64_t seed, std::uint64_t block_index) const {
        Stream rng(seed, stream_id(StreamDomain::link, block_index));
        const SmSignalSet& set = scheme_.set;
        const std::size_t n_t = set.n_t();
        const unsigned bpv = set.bits();
        const std::size_t k = codec_->info_length();
        const std::size_t n = codec_->codeword_length();

        Bits info(k);
        for (std::size_t i = 0; i < k; i += 32) {
            std::uint32_t word = rng();
            for (std::size_t b = i; b < std::min(k, i + 32); ++b, word >>= 1) info[b] = static_cast<std::uint8_t>(word & 1u);
        }
        const Bits cw = codec_->encode(info);
        Bits tx(n);
        interleaver_.interleave<std::uint8_t>(cw, tx);

        std::vector<cplx> h(n_t, cplx{1.0, 0.0});
        std::vector<cplx> g(n_t);
        std::vector<cplx> candidates(set.size());
        auto refresh = [&] {
            effective_gains(scheme_.mode, h, g);
            received_points(set, g, candidates);
        };
        if (fading_ == FadingModel::block) {
            for (auto& x : h) x = rng.complex_normal(1.0);
        }
        refresh();

        std::vector<double> llr_tx(n);
        for (std::size_t pos = 0; pos < n; pos += bpv) {
            std::uint32_t word = 0;
            for (unsigned i = 0; i < bpv; ++i) word = (word << 1) | tx[pos + i];
            if (fading_ == FadingModel::fast) {
                for (auto& x : h) x = rng.complex_normal(1.0);
                refresh();
            }
            const cplx y = candidates[set.vector_of_label(word)] + rng.complex_normal(noise_var);
            maxlog_llrs_points(y, candidates, set.labels(), bpv, noise_var, std::span<double>(llr_tx).subspan(pos, bpv));
        }
        std::vector<double> llr(n);
        interleaver_.deinterleave<double>(llr_tx, llr);
        const DecodeResult dec = codec_->decode(llr, fec_.max_iters);
        return dec.info != info;
    }

private:
    Scheme scheme_;
    FecConfig fec_;
    int mcs_id_;
    FadingModel fading_;
    std::shared_ptr<const FecCodec> codec_;
    Interleaver interleaver_;
};

inline BlerRow simulate_bler(const LinkSetup& link, SnrPoint snr, const StopRule& stop, std::uint64_t seed,
                             std::size_t workers = 0) {
    if (stop.batch == 0 || stop.max_blocks == 0) fail("simulate_bler", "stop rule needs positive batch and cap");
    const double n0 = snr.noise_var();
    BlerRow row;
    row.scheme = link.scheme().id;
    row.mcs = link.mcs_id();
    row.n_t = link.scheme().set.n_t();
    row.snr_db = snr.snr_db;
    std::vector<std::uint8_t> errs;
    while (true) {
        const std::size_t count = std::min(stop.batch, stop.max_blocks - row.blocks);
        errs.assign(count, 0);
        const std::size_t base = row.blocks;
        parallel_for(count, workers, [&](std::size_t i) { errs[i] = link.run_block(n0, seed, base + i) ? 1 : 0; });
        for (auto e : errs) row.block_errors += e;
        row.blocks += count;
        if (row.block_errors >= stop.min_errors) {
            row.stop_reason = "errors";
            break;
        }
        if (row.blocks >= stop.max_blocks) {
            row.stop_reason = "cap";
            break;
        }
        if (stop.decisive_target) {
            const auto ci = wilson_interval(row.block_errors, row.blocks);
            if (ci.high < *stop.decisive_target || ci.low > *stop.decisive_target) {
                row.stop_reason = "decisive";
                break;
            }
        }
    }
    row.bler = static_cast<double>(row.block_errors) / static_cast<double>(row.blocks);
    const auto ci = wilson_interval(row.block_errors, row.blocks);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    return row;
}

inline BlerRow simulate_bler(const Scheme& scheme, const FecConfig& fec, SnrPoint snr, const StopRule& stop,
                             std::uint64_t seed, FadingModel fading = FadingModel::fast, int mcs_id = -1) {
    return simulate_bler(LinkSetup(scheme, fec, mcs_id, fading), snr, stop, seed);
}

// ---------------------------------------------------------------------------
// Waterfall threshold search

struct WaterfallSearch {
    double lo_db = -10.0;
    double hi_db = 40.0;
    double step_db = 0.1;
    double coarse_step_db = 1.0;
    StopRule stop;
    bool decisive = true;  // stop a BLER point early once its CI excludes the target
    std::uint64_t seed = 1;
    std::size_t workers = 0;
};

struct WaterfallResult {
    double snr_db = 0.0;
    std::vector<BlerRow> evaluations;
};

// Smallest grid SNR lo + i*step with measured BLER <= target: a coarse
// upward sweep brackets the crossing, bisection on the fine grid locates it.
// Every SNR point uses the same seed.
inline WaterfallResult find_waterfall_snr(const LinkSetup& link, double bler_target, const WaterfallSearch& search) {
    if (!(bler_target > 0.0 && bler_target <= 1.0)) fail("find_waterfall_snr", "bler_target must lie in (0, 1]");
    if (!(search.step_db > 0.0) || !(search.hi_db >= search.lo_db)) fail("find_waterfall_snr", "bad SNR grid");
    const auto n_grid = static_cast<std::size_t>(std::llround((search.hi_db - search.lo_db) / search.step_db));
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(search.coarse_step_db / search.step_db)));
    StopRule stop = search.stop;
    if (search.decisive) stop.decisive_target = bler_target;

    WaterfallResult result;
    std::vector<int> memo(n_grid + 1, -1);
    auto passes = [&](std::size_t i) {
        if (memo[i] < 0) {
            const double snr = search.lo_db + static_cast<double>(i) * search.step_db;
            BlerRow row = simulate_bler(link, SnrPoint{snr}, stop, search.seed, search.workers);
            memo[i] = row.bler <= bler_target ? 1 : 0;
            result.evaluations.push_back(std::move(row));
        }
        return memo[i] == 1;
    };

    auto grid_snr = [&](std::size_t i) { return search.lo_db + static_cast<double>(i) * search.step_db; };
    if (passes(0)) {
        result.snr_db = grid_snr(0);
        return result;
    }
    std::size_t bad = 0;
    std::size_t good = 0;
    for (std::size_t i = std::min(stride, n_grid);; i = std::min(i + stride, n_grid)) {
        if (passes(i)) {
            good = i;
            break;
        }
        bad = i;
        if (i == n_grid) {
            throw RangeExhausted("find_waterfall_snr: BLER target " + std::to_string(bler_target) + " not reached up to " +
                                 std::to_string(search.hi_db) + " dB");
        }
    }
    while (good - bad > 1) {
        const std::size_t mid = bad + (good - bad) / 2;
        if (passes(mid)) good = mid;
        else bad = mid;
    }
    result.snr_db = grid_snr(good);
    return result;
}

}  // namespace smnuc
