#pragma once

// BICM coding chain: MCS table, bit interleaver and a pluggable FEC codec.
//
// The bundled codec is a systematic LDPC code with an accumulator
// (dual-diagonal) parity part, the structure used by the 5G NR and 802.11n
// base graphs. Information columns have weight dv >= 3 and rows are kept as
// balanced as possible. It is not the 5G NR code; it only has to provide a
// realistic waterfall. LLR convention: positive favours bit 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "smnuc/constellation.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/rng.hpp"

namespace smnuc {

using Bits = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// MCS table

struct McsRow {
    int id;
    std::size_t order;
    double code_rate;
};

// MCS points evaluated for the SM system: (id, M, R).
inline constexpr std::array<McsRow, 9> kMcsTable{{
    {0, 4, 0.1190},
    {4, 4, 0.3088},
    {9, 4, 0.6564},
    {10, 16, 0.3287},
    {13, 16, 0.4760},
    {16, 16, 0.6405},
    {17, 64, 0.4271},
    {22, 64, 0.6459},
    {28, 64, 0.9189},
}};

struct McsEntry {
    int id = 0;
    std::size_t order = 4;
    double code_rate = 0.5;  // R, relative to log2(M) symbol bits
    std::size_t n_t = 1;
    double code_rate_sm = 0.5;  // R', relative to log2(M N_t) bits per channel use

    double spectral_efficiency() const noexcept { return code_rate * ilog2(order); }
};

/// R' such that R' log2(M N_t) = R log2(M).
inline double sm_code_rate(double code_rate, std::size_t order, std::size_t n_t) {
    return code_rate * static_cast<double>(ilog2(order)) / static_cast<double>(ilog2(order * n_t));
}

inline McsEntry make_mcs_entry(const McsRow& row, std::size_t n_t) {
    if (!is_power_of_two(n_t)) fail("make_mcs_entry", "n_t must be a power of two");
    return {row.id, row.order, row.code_rate, n_t, sm_code_rate(row.code_rate, row.order, n_t)};
}

inline std::vector<McsRow> parse_mcs_table(std::istream& in) {
    std::vector<McsRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("mcs", 0) == 0) continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        McsRow r{};
        if (!(ls >> r.id >> r.order >> r.code_rate)) fail("parse_mcs_table", "malformed row: " + line);
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<McsRow> load_mcs_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("load_mcs_table", "cannot open " + path);
    return parse_mcs_table(in);
}

inline McsEntry mcs_entry(int id, std::size_t n_t, std::span<const McsRow> table = kMcsTable) {
    for (const auto& r : table) {
        if (r.id == id) return make_mcs_entry(r, n_t);
    }
    fail("mcs_entry", "unknown MCS id " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Interleaver

class Interleaver {
public:
    Interleaver(std::size_t n, std::uint64_t seed) : perm_(n) {
        std::iota(perm_.begin(), perm_.end(), 0u);
        Stream rng(seed, stream_id(StreamDomain::interleaver, n));
        for (std::size_t i = n; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.uniform_index(i)]);
    }

    std::size_t size() const noexcept { return perm_.size(); }
    std::span<const std::uint32_t> permutation() const noexcept { return perm_; }

    /// out[i] = in[perm[i]]
    template <typename T>
    void interleave(std::span<const T> in, std::span<T> out) const {
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = in[perm_[i]];
    }

    template <typename T>
    void deinterleave(std::span<const T> in, std::span<T> out) const {
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = in[i];
    }

    template <typename T>
    std::vector<T> interleave(const std::vector<T>& in) const {
        check(in.size());
        std::vector<T> out(in.size());
        interleave<T>(std::span<const T>(in), std::span<T>(out));
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(const std::vector<T>& in) const {
        check(in.size());
        std::vector<T> out(in.size());
        deinterleave<T>(std::span<const T>(in), std::span<T>(out));
        return out;
    }

private:
    void check(std::size_t n) const {
        if (n != perm_.size()) fail("Interleaver", "length mismatch");
    }

    std::vector<std::uint32_t> perm_;
};

inline Bits interleave(const Bits& bits, std::uint64_t seed) { return Interleaver(bits.size(), seed).interleave(bits); }
inline Bits deinterleave(const Bits& bits, std::uint64_t seed) { return Interleaver(bits.size(), seed).deinterleave(bits); }

// ---------------------------------------------------------------------------
// Codec interface

struct DecodeResult {
    Bits info;
    bool converged = false;
    int iterations = 0;
};

class FecCodec {
public:
    virtual ~FecCodec() = default;
    virtual std::string id() const = 0;
    virtual std::size_t info_length() const = 0;
    virtual std::size_t codeword_length() const = 0;
    virtual Bits encode(std::span<const std::uint8_t> info) const = 0;
    virtual DecodeResult decode(std::span<const double> llrs, int max_iters) const = 0;

    double rate() const { return static_cast<double>(info_length()) / static_cast<double>(codeword_length()); }
};

/// Pass-through: codeword = info, decoding is a hard decision.
class UncodedCodec final : public FecCodec {
public:
    explicit UncodedCodec(std::size_t n) : n_(n) {}
    std::string id() const override { return "uncoded"; }
    std::size_t info_length() const override { return n_; }
    std::size_t codeword_length() const override { return n_; }

    Bits encode(std::span<const std::uint8_t> info) const override {
        if (info.size() != n_) fail("UncodedCodec::encode", "wrong info length");
        return Bits(info.begin(), info.end());
    }

    DecodeResult decode(std::span<const double> llrs, int) const override {
        if (llrs.size() != n_) fail("UncodedCodec::decode", "wrong llr length");
        DecodeResult r;
        r.info.resize(n_);
        r.converged = true;
        for (std::size_t i = 0; i < n_; ++i) {
            r.info[i] = llrs[i] < 0.0 ? 1 : 0;
            if (llrs[i] == 0.0) r.converged = false;
        }
        return r;
    }

private:
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// LDPC

/// Sparse parity-check matrix as per-row column index lists.
struct ParityCheckMatrix {
    std::size_t n_cols = 0;
    std::size_t n_info = 0;
    std::vector<std::vector<std::uint32_t>> rows;

    std::size_t n_rows() const noexcept { return rows.size(); }
    std::size_t n_edges() const noexcept {
        std::size_t e = 0;
        for (const auto& r : rows) e += r.size();
        return e;
    }

    bool satisfied_by(std::span<const std::uint8_t> word) const {
        for (const auto& r : rows) {
            unsigned acc = 0;
            for (auto v : r) acc ^= word[v];
            if (acc) return false;
        }
        return true;
    }
};

// Text format:
//   smnuc-ldpc 1
//   <n_cols> <n_info> <n_rows>
//   <degree> <col> <col> ...      (one line per row, columns ascending)
inline void write_parity_matrix(std::ostream& out, const ParityCheckMatrix& h) {
    out << "smnuc-ldpc 1\n" << h.n_cols << ' ' << h.n_info << ' ' << h.n_rows() << '\n';
    for (const auto& r : h.rows) {
        out << r.size();
        for (auto v : r) out << ' ' << v;
        out << '\n';
    }
}

inline ParityCheckMatrix read_parity_matrix(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "smnuc-ldpc" || version != 1) {
        fail("read_parity_matrix", "not an smnuc-ldpc v1 file");
    }
    ParityCheckMatrix h;
    std::size_t n_rows = 0;
    if (!(in >> h.n_cols >> h.n_info >> n_rows)) fail("read_parity_matrix", "bad header");
    h.rows.resize(n_rows);
    for (auto& r : h.rows) {
        std::size_t deg = 0;
        if (!(in >> deg)) fail("read_parity_matrix", "truncated file");
        r.resize(deg);
        for (auto& v : r) {
            if (!(in >> v) || v >= h.n_cols) fail("read_parity_matrix", "bad column index");
        }
    }
    return h;
}

/// Information-column degree used by the bundled construction.
inline std::size_t ldpc_info_degree(std::size_t n, std::size_t k) {
    const std::size_t m = n - k;
    const std::size_t dv = std::max<std::size_t>(3, (3 * m + k - 1) / k);
    return std::min(dv, m);
}

inline ParityCheckMatrix make_accumulate_ldpc(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k >= n) fail("make_accumulate_ldpc", "need 0 < K < N");
    const std::size_t m = n - k;
    const std::size_t dv = ldpc_info_degree(n, k);
    Stream rng(seed, stream_id(StreamDomain::code_construction, n * 1315423911ull + k));

    // Socket assignment: dv row slots per information column, rows balanced.
    std::vector<std::uint32_t> slots(k * dv);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<std::uint32_t>(i % m);
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.uniform_index(i)]);
    auto column_has = [&](std::size_t col, std::uint32_t row, std::size_t skip) {
        for (std::size_t t = 0; t < dv; ++t) {
            if (t != skip && slots[col * dv + t] == row) return true;
        }
        return false;
    };
    for (std::size_t col = 0; col < k; ++col) {
        for (std::size_t t = 0; t < dv; ++t) {
            std::size_t guard = 0;
            while (column_has(col, slots[col * dv + t], t)) {
                const std::size_t other = rng.uniform_index(slots.size());
                const std::size_t ocol = other / dv;
                if (ocol == col) continue;
                const std::uint32_t mine = slots[col * dv + t];
                const std::uint32_t theirs = slots[other];
                if (!column_has(ocol, mine, other % dv) && !column_has(col, theirs, t)) {
                    std::swap(slots[col * dv + t], slots[other]);
                }
                if (++guard > 100000) fail("make_accumulate_ldpc", "could not place column edges");
            }
        }
    }

    ParityCheckMatrix h;
    h.n_cols = n;
    h.n_info = k;
    h.rows.resize(m);
    for (std::size_t col = 0; col < k; ++col) {
        for (std::size_t t = 0; t < dv; ++t) h.rows[slots[col * dv + t]].push_back(static_cast<std::uint32_t>(col));
    }
    for (std::size_t r = 0; r < m; ++r) {
        std::sort(h.rows[r].begin(), h.rows[r].end());
        if (r > 0) h.rows[r].push_back(static_cast<std::uint32_t>(k + r - 1));
        h.rows[r].push_back(static_cast<std::uint32_t>(k + r));
    }
    return h;
}

class LdpcCodec final : public FecCodec {
public:
    explicit LdpcCodec(ParityCheckMatrix h, double min_sum_scale = 0.75) : h_(std::move(h)), scale_(min_sum_scale) {
        const std::size_t k = h_.n_info;
        const std::size_t m = h_.n_rows();
        if (k + m != h_.n_cols || m == 0) fail("LdpcCodec", "matrix is not in systematic accumulate form");
        info_rows_.resize(m);
        for (std::size_t r = 0; r < m; ++r) {
            std::vector<std::uint32_t> parity;
            for (auto v : h_.rows[r]) {
                if (v < k) info_rows_[r].push_back(v);
                else parity.push_back(v);
            }
            const bool ok = r == 0 ? (parity.size() == 1 && parity[0] == k)
                                   : (parity.size() == 2 && parity[0] == k + r - 1 && parity[1] == k + r);
            if (!ok) fail("LdpcCodec", "parity part is not dual-diagonal");
        }
        offsets_.resize(m + 1, 0);
        for (std::size_t r = 0; r < m; ++r) offsets_[r + 1] = offsets_[r] + h_.rows[r].size();
        cols_.reserve(offsets_[m]);
        for (const auto& row : h_.rows) cols_.insert(cols_.end(), row.begin(), row.end());
    }

    static std::shared_ptr<LdpcCodec> bundled(std::size_t n, std::size_t k, std::uint64_t seed, double scale = 0.75) {
        return std::make_shared<LdpcCodec>(make_accumulate_ldpc(n, k, seed), scale);
    }

    std::string id() const override { return "ldpc-accumulate"; }
    std::size_t info_length() const override { return h_.n_info; }
    std::size_t codeword_length() const override { return h_.n_cols; }
    const ParityCheckMatrix& parity_matrix() const noexcept { return h_; }

    Bits encode(std::span<const std::uint8_t> info) const override {
        const std::size_t k = h_.n_info;
        if (info.size() != k) fail("LdpcCodec::encode", "wrong info length");
        Bits cw(h_.n_cols);
        std::copy(info.begin(), info.end(), cw.begin());
        unsigned acc = 0;
        for (std::size_t r = 0; r < info_rows_.size(); ++r) {
            for (auto v : info_rows_[r]) acc ^= info[v];
            cw[k + r] = static_cast<std::uint8_t>(acc);
        }
        return cw;
    }

    // Layered normalized min-sum with early termination on a zero syndrome.
    // Converged requires a zero syndrome and no zero posterior.
    DecodeResult decode(std::span<const double> llrs, int max_iters) const override {
        const std::size_t n = h_.n_cols;
        if (llrs.size() != n) fail("LdpcCodec::decode", "wrong llr length");
        std::vector<double> post(llrs.begin(), llrs.end());
        std::vector<double> msg(cols_.size(), 0.0);
        std::vector<double> q;
        Bits hard(n);
        DecodeResult res;
        auto check = [&] {
            bool nonzero = true;
            for (std::size_t v = 0; v < n; ++v) {
                hard[v] = post[v] < 0.0 ? 1 : 0;
                if (post[v] == 0.0) nonzero = false;
            }
            return nonzero && h_.satisfied_by(hard);
        };
        res.converged = check();
        for (int it = 0; it < max_iters && !res.converged; ++it) {
            for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) {
                const std::size_t b = offsets_[r];
                const std::size_t e = offsets_[r + 1];
                q.resize(e - b);
                double min1 = std::numeric_limits<double>::infinity();
                double min2 = min1;
                std::size_t arg = 0;
                bool negative = false;
                for (std::size_t t = b; t < e; ++t) {
                    const double x = post[cols_[t]] - msg[t];
                    q[t - b] = x;
                    const double a = std::abs(x);
                    if (x < 0.0) negative = !negative;
                    if (a < min1) {
                        min2 = min1;
                        min1 = a;
                        arg = t;
                    } else if (a < min2) {
                        min2 = a;
                    }
                }
                for (std::size_t t = b; t < e; ++t) {
                    const double x = q[t - b];
                    const bool neg = negative != (x < 0.0);
                    const double mag = scale_ * (t == arg ? min2 : min1);
                    const double m = neg ? -mag : mag;
                    msg[t] = m;
                    post[cols_[t]] = x + m;
                }
            }
            res.iterations = it + 1;
            res.converged = check();
        }
        res.info.assign(hard.begin(), hard.begin() + static_cast<std::ptrdiff_t>(h_.n_info));
        return res;
    }

private:
    ParityCheckMatrix h_;
    double scale_;
    std::vector<std::vector<std::uint32_t>> info_rows_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> cols_;
};

// ---------------------------------------------------------------------------
// Configuration

enum class CodecKind { ldpc, uncoded };

inline std::string to_string(CodecKind c) { return c == CodecKind::ldpc ? "ldpc" : "uncoded"; }

inline CodecKind parse_codec_kind(const std::string& s) {
    if (s == "ldpc") return CodecKind::ldpc;
    if (s == "uncoded") return CodecKind::uncoded;
    fail("parse_codec_kind", "unknown codec '" + s + "'");
}

inline constexpr std::size_t kDefaultCodewordTarget = 4096;

struct FecConfig {
    CodecKind codec = CodecKind::ldpc;
    std::size_t info_bits = 0;      // K
    std::size_t codeword_bits = 0;  // N
    std::uint64_t interleaver_seed = 1;
    std::uint64_t code_seed = 1;
    int max_iters = 50;
    double min_sum_scale = 0.75;

    double rate() const noexcept { return static_cast<double>(info_bits) / static_cast<double>(codeword_bits); }
};

// N is the smallest multiple of the bits per SM vector that is >= the target
// length; K = round(R' N).
inline FecConfig fec_config_for(const McsEntry& mcs, std::size_t target_length = kDefaultCodewordTarget) {
    const std::size_t bpv = ilog2(mcs.order * mcs.n_t);
    FecConfig cfg;
    cfg.codeword_bits = ((target_length + bpv - 1) / bpv) * bpv;
    cfg.info_bits = static_cast<std::size_t>(std::llround(mcs.code_rate_sm * static_cast<double>(cfg.codeword_bits)));
    return cfg;
}

inline void validate(const FecConfig& cfg, unsigned bits_per_vector) {
    if (cfg.codeword_bits == 0 || cfg.info_bits == 0) fail("FecConfig", "empty code");
    if (cfg.codeword_bits % bits_per_vector != 0) fail("FecConfig", "N not divisible by bits per SM vector");
    if (cfg.codec == CodecKind::uncoded && cfg.info_bits != cfg.codeword_bits) fail("FecConfig", "uncoded needs K = N");
    if (cfg.codec == CodecKind::ldpc && cfg.info_bits >= cfg.codeword_bits) fail("FecConfig", "LDPC needs K < N");
}

inline std::shared_ptr<const FecCodec> make_codec(const FecConfig& cfg) {
    if (cfg.codec == CodecKind::uncoded) return std::make_shared<UncodedCodec>(cfg.codeword_bits);
    return LdpcCodec::bundled(cfg.codeword_bits, cfg.info_bits, cfg.code_seed, cfg.min_sum_scale);
}

}  // namespace smnuc
