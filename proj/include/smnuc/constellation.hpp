#pragma once

// Constellations, bit labelings, per-antenna pre-scaling and the composed
// spatial-modulation transmit-vector set.
//
// Labeling convention used throughout: bit 0 of a word is its most
// significant bit. For an SM vector word of log2(N_t) + log2(M) bits, the
// leading log2(N_t) bits carry the antenna index in natural binary and the
// trailing log2(M) bits carry the constellation label.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "smnuc/errors.hpp"

namespace smnuc {

using cplx = std::complex<double>;

inline constexpr double kPowerTolerance = 1e-12;

inline constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline constexpr unsigned ilog2(std::size_t n) noexcept {
    unsigned r = 0;
    while (n > 1) {
        n >>= 1;
        ++r;
    }
    return r;
}

inline constexpr std::uint32_t gray_encode(std::uint32_t x) noexcept { return x ^ (x >> 1); }

/// Bit i of an n_bits-wide word, bit 0 being the MSB.
inline constexpr unsigned label_bit(std::uint32_t word, unsigned i, unsigned n_bits) noexcept {
    return (word >> (n_bits - 1 - i)) & 1u;
}

inline double mean_power(std::span<const cplx> points) noexcept {
    double s = 0.0;
    for (const auto& p : points) s += std::norm(p);
    return points.empty() ? 0.0 : s / static_cast<double>(points.size());
}

namespace detail {

inline void check_permutation(std::span<const std::uint32_t> perm, const char* where) {
    std::vector<bool> seen(perm.size(), false);
    for (auto v : perm) {
        if (v >= perm.size() || seen[v]) fail(where, "labeling is not a bijection");
        seen[v] = true;
    }
}

inline std::vector<std::uint32_t> invert_permutation(std::span<const std::uint32_t> perm) {
    std::vector<std::uint32_t> inv(perm.size());
    for (std::uint32_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    return inv;
}

}  // namespace detail

/// M labeled complex points with unit average power.
class Constellation {
public:
    Constellation(std::vector<cplx> symbols, std::vector<std::uint32_t> symbol_of_label)
        : symbols_(std::move(symbols)), symbol_of_label_(std::move(symbol_of_label)) {
        const std::size_t m = symbols_.size();
        if (m < 4 || !is_power_of_two(m)) fail("Constellation", "order must be a power of two >= 4");
        if (symbol_of_label_.size() != m) fail("Constellation", "labeling size differs from order");
        for (const auto& s : symbols_) {
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) fail("Constellation", "non-finite symbol");
        }
        if (std::abs(mean_power(symbols_) - 1.0) >= kPowerTolerance) {
            fail("Constellation", "average power is not 1");
        }
        detail::check_permutation(symbol_of_label_, "Constellation");
        label_of_symbol_ = detail::invert_permutation(symbol_of_label_);
    }

    /// Scales the points to unit average power first.
    static Constellation normalized(std::vector<cplx> symbols, std::vector<std::uint32_t> symbol_of_label) {
        const double p = mean_power(symbols);
        if (!(p > 0.0) || !std::isfinite(p)) fail("Constellation", "cannot normalize zero-power point set");
        const double g = 1.0 / std::sqrt(p);
        for (auto& s : symbols) s *= g;
        return Constellation(std::move(symbols), std::move(symbol_of_label));
    }

    std::size_t order() const noexcept { return symbols_.size(); }
    unsigned bits() const noexcept { return ilog2(symbols_.size()); }
    std::span<const cplx> symbols() const noexcept { return symbols_; }
    const cplx& symbol(std::size_t i) const { return symbols_.at(i); }
    std::span<const std::uint32_t> labeling() const noexcept { return symbol_of_label_; }
    std::uint32_t symbol_of_label(std::uint32_t label) const { return symbol_of_label_.at(label); }
    std::uint32_t label_of_symbol(std::size_t i) const { return label_of_symbol_.at(i); }
    double average_power() const noexcept { return mean_power(symbols_); }

    Constellation relabeled(std::vector<std::uint32_t> symbol_of_label) const {
        return Constellation(symbols_, std::move(symbol_of_label));
    }

private:
    std::vector<cplx> symbols_;
    std::vector<std::uint32_t> symbol_of_label_;
    std::vector<std::uint32_t> label_of_symbol_;
};

/// First-quadrant representatives of a quadrant-symmetric constellation.
struct QuadrantParams {
    std::vector<cplx> free_points;

    std::size_t order() const noexcept { return 4 * free_points.size(); }
};

/// Per-antenna complex coefficients with (1/N_t) sum |a_k|^2 = 1.
class PreScaling {
public:
    explicit PreScaling(std::vector<cplx> coefficients) : coefficients_(std::move(coefficients)) {
        if (coefficients_.empty()) fail("PreScaling", "need at least one coefficient");
        for (const auto& a : coefficients_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) fail("PreScaling", "non-finite coefficient");
        }
        if (std::abs(mean_power(coefficients_) - 1.0) >= kPowerTolerance) {
            fail("PreScaling", "average power is not 1");
        }
    }

    static PreScaling normalized(std::vector<cplx> coefficients) {
        const double p = mean_power(coefficients);
        if (!(p > 0.0) || !std::isfinite(p)) fail("PreScaling", "cannot normalize all-zero coefficients");
        const double g = 1.0 / std::sqrt(p);
        for (auto& a : coefficients) a *= g;
        return PreScaling(std::move(coefficients));
    }

    static PreScaling unit(std::size_t n_t) { return PreScaling(std::vector<cplx>(n_t, cplx{1.0, 0.0})); }

    std::size_t size() const noexcept { return coefficients_.size(); }
    std::span<const cplx> coefficients() const noexcept { return coefficients_; }
    const cplx& operator[](std::size_t k) const { return coefficients_.at(k); }

private:
    std::vector<cplx> coefficients_;
};

/// Removes the global phase so that a_1 lies on the nonnegative real axis.
inline PreScaling canonical_phase(const PreScaling& a) {
    const cplx rot = std::polar(1.0, -std::arg(a[0]));
    std::vector<cplx> out(a.coefficients().begin(), a.coefficients().end());
    for (auto& c : out) c *= rot;
    return PreScaling::normalized(std::move(out));
}

// The M*N_t effective transmit vectors. Vector j = k*M + m has a single
// nonzero entry a_k * s_m at antenna position k.
class SmSignalSet {
public:
    SmSignalSet(Constellation constellation, PreScaling pre_scaling)
        : constellation_(std::move(constellation)), pre_scaling_(std::move(pre_scaling)) {
        const std::size_t n_t = pre_scaling_.size();
        if (!is_power_of_two(n_t)) fail("SmSignalSet", "antenna count must be a power of two");
        const std::size_t m = constellation_.order();
        antenna_bits_ = ilog2(n_t);
        entries_.resize(m * n_t);
        label_of_vector_.resize(m * n_t);
        vector_of_label_.resize(m * n_t);
        for (std::size_t k = 0; k < n_t; ++k) {
            for (std::size_t s = 0; s < m; ++s) {
                const std::size_t j = k * m + s;
                entries_[j] = pre_scaling_[k] * constellation_.symbol(s);
                const auto word = static_cast<std::uint32_t>((k << constellation_.bits()) | constellation_.label_of_symbol(s));
                label_of_vector_[j] = word;
                vector_of_label_[word] = static_cast<std::uint32_t>(j);
            }
        }
    }

    std::size_t n_t() const noexcept { return pre_scaling_.size(); }
    std::size_t order() const noexcept { return constellation_.order(); }
    std::size_t size() const noexcept { return entries_.size(); }
    unsigned bits() const noexcept { return antenna_bits_ + constellation_.bits(); }
    unsigned antenna_bits() const noexcept { return antenna_bits_; }
    unsigned symbol_bits() const noexcept { return constellation_.bits(); }

    std::size_t antenna_of(std::size_t j) const noexcept { return j / order(); }
    std::size_t symbol_of(std::size_t j) const noexcept { return j % order(); }

    /// The nonzero entry of vector j.
    const cplx& entry(std::size_t j) const { return entries_.at(j); }
    std::span<const cplx> entries() const noexcept { return entries_; }

    std::vector<cplx> dense_vector(std::size_t j) const {
        std::vector<cplx> v(n_t(), cplx{});
        v[antenna_of(j)] = entry(j);
        return v;
    }

    std::uint32_t label_of_vector(std::size_t j) const { return label_of_vector_.at(j); }
    std::uint32_t vector_of_label(std::uint32_t word) const { return vector_of_label_.at(word); }
    std::span<const std::uint32_t> labels() const noexcept { return label_of_vector_; }

    const Constellation& constellation() const noexcept { return constellation_; }
    const PreScaling& pre_scaling() const noexcept { return pre_scaling_; }

    double average_power() const noexcept { return mean_power(entries_); }

private:
    Constellation constellation_;
    PreScaling pre_scaling_;
    unsigned antenna_bits_ = 0;
    std::vector<cplx> entries_;
    std::vector<std::uint32_t> label_of_vector_;
    std::vector<std::uint32_t> vector_of_label_;
};

inline SmSignalSet build_signal_set(const Constellation& constellation, const PreScaling& pre_scaling,
                                    std::size_t n_t) {
    if (!is_power_of_two(n_t)) fail("build_signal_set", "n_t must be a power of two");
    if (pre_scaling.size() != n_t) fail("build_signal_set", "pre-scaling length differs from n_t");
    return SmSignalSet(constellation, pre_scaling);
}

// ---------------------------------------------------------------------------
// Quadrant-symmetric constellations.
//
// Index layout for M = 4Q points: indices [0, Q) hold the free points s_q,
// [Q, 2Q) hold -conj(s_q), [2Q, 3Q) hold conj(s_q), [3Q, 4Q) hold -s_q.

namespace detail {

struct ApskShape {
    std::size_t rings;
    std::size_t per_ring;
};

inline ApskShape apsk_shape(std::size_t m_order) {
    const unsigned m = ilog2(m_order);
    return {std::size_t{1} << (m / 2 - 1), std::size_t{1} << (m / 2 + 1)};
}

}  // namespace detail

// Default labeling of a quadrant-ordered constellation.
//
// Even log2(M): Gray-APSK labels. Index i maps to ring r and phase slot p of
// the APSK grid; the label is gray(r) followed by gray(p). Odd log2(M) has no
// APSK grid, so the label is a Gray-coded quadrant pair followed by the
// Gray-coded position inside the quadrant.
inline std::vector<std::uint32_t> quadrant_labeling(std::size_t m_order) {
    if (m_order < 4 || !is_power_of_two(m_order)) fail("quadrant_labeling", "order must be a power of two >= 4");
    const std::size_t quarter = m_order / 4;
    const unsigned m = ilog2(m_order);
    std::vector<std::uint32_t> label_of_symbol(m_order);
    if (m % 2 == 0) {
        const auto shape = detail::apsk_shape(m_order);
        const std::size_t slots = shape.per_ring / 4;
        const unsigned phase_bits = ilog2(shape.per_ring);
        for (std::size_t i = 0; i < m_order; ++i) {
            const std::size_t quadrant = i / quarter;
            const std::size_t q = i % quarter;
            const std::size_t ring = q / slots;
            const std::size_t j = q % slots;
            const std::size_t p = shape.per_ring;
            std::size_t phase = 0;
            switch (quadrant) {
                case 0: phase = j; break;
                case 1: phase = p / 2 - 1 - j; break;
                case 2: phase = p - 1 - j; break;
                default: phase = j + p / 2; break;
            }
            label_of_symbol[i] = (gray_encode(static_cast<std::uint32_t>(ring)) << phase_bits) |
                                 gray_encode(static_cast<std::uint32_t>(phase));
        }
    } else {
        // quadrants 0,1,3,2 (anticlockwise) take Gray codes 00,01,11,10
        constexpr std::uint32_t quadrant_code[4] = {0b00, 0b01, 0b10, 0b11};
        const unsigned inner_bits = m - 2;
        for (std::size_t i = 0; i < m_order; ++i) {
            const std::size_t quadrant = i / quarter;
            label_of_symbol[i] = (quadrant_code[quadrant] << inner_bits) |
                                 gray_encode(static_cast<std::uint32_t>(i % quarter));
        }
    }
    return detail::invert_permutation(label_of_symbol);
}

inline Constellation expand_quadrant(const QuadrantParams& params) {
    const std::size_t quarter = params.free_points.size();
    if (quarter == 0 || !is_power_of_two(quarter)) {
        fail("expand_quadrant", "number of free points must be a power of two");
    }
    std::vector<cplx> pts(4 * quarter);
    for (std::size_t q = 0; q < quarter; ++q) {
        const cplx s = params.free_points[q];
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) fail("expand_quadrant", "non-finite free point");
        if (s == cplx{}) fail("expand_quadrant", "free point equal to zero gives overlapping symbols");
        pts[q] = s;
        pts[q + quarter] = -std::conj(s);
        pts[q + 2 * quarter] = std::conj(s);
        pts[q + 3 * quarter] = -s;
    }
    return Constellation::normalized(std::move(pts), quadrant_labeling(4 * quarter));
}

/// Free points of a quadrant-ordered constellation; throws if the symmetry does not hold.
inline QuadrantParams extract_quadrant(const Constellation& c, double tolerance = 1e-12) {
    const std::size_t quarter = c.order() / 4;
    QuadrantParams out;
    out.free_points.assign(c.symbols().begin(), c.symbols().begin() + static_cast<std::ptrdiff_t>(quarter));
    for (std::size_t q = 0; q < quarter; ++q) {
        const cplx s = c.symbol(q);
        const bool ok = std::abs(c.symbol(q + quarter) + std::conj(s)) <= tolerance &&
                        std::abs(c.symbol(q + 2 * quarter) - std::conj(s)) <= tolerance &&
                        std::abs(c.symbol(q + 3 * quarter) + s) <= tolerance;
        if (!ok) fail("extract_quadrant", "constellation is not quadrant-symmetric in canonical order");
    }
    return out;
}

// APSK start point: 2^(m/2-1) rings of radius 1, 2, ... each carrying
// 2^(m/2+1) points at phases pi/P + 2*pi*p/P.
inline Constellation make_apsk_initial(std::size_t m_order) {
    if (!is_power_of_two(m_order) || m_order < 4) {
        fail("make_apsk_initial", "order " + std::to_string(m_order) + " is not a power of two >= 4");
    }
    if (ilog2(m_order) % 2 != 0) {
        fail("make_apsk_initial", "order " + std::to_string(m_order) + " has odd log2(M); APSK ring layout needs even m");
    }
    if (m_order > 64) fail("make_apsk_initial", "order " + std::to_string(m_order) + " unsupported (expected 4, 16 or 64)");
    const auto shape = detail::apsk_shape(m_order);
    const std::size_t slots = shape.per_ring / 4;
    const double step = 2.0 * std::numbers::pi / static_cast<double>(shape.per_ring);
    QuadrantParams params;
    for (std::size_t r = 0; r < shape.rings; ++r) {
        for (std::size_t j = 0; j < slots; ++j) {
            params.free_points.push_back(std::polar(static_cast<double>(r + 1), 0.5 * step + step * static_cast<double>(j)));
        }
    }
    return expand_quadrant(params);
}

/// a_k = exp(j*pi*(k-1) / (2^(m/2) N_t)).
inline PreScaling make_initial_prescaling(std::size_t m_order, std::size_t n_t) {
    if (!is_power_of_two(m_order) || m_order < 4 || ilog2(m_order) % 2 != 0) {
        fail("make_initial_prescaling", "order must be 2^m with even m");
    }
    if (n_t == 0) fail("make_initial_prescaling", "n_t must be >= 1");
    const double denom = static_cast<double>(std::size_t{1} << (ilog2(m_order) / 2)) * static_cast<double>(n_t);
    std::vector<cplx> a(n_t);
    for (std::size_t k = 0; k < n_t; ++k) a[k] = std::polar(1.0, std::numbers::pi * static_cast<double>(k) / denom);
    return PreScaling(std::move(a));
}

/// Gray-labeled square QAM, index i = row * sqrt(M) + column.
inline Constellation make_square_qam(std::size_t m_order) {
    const unsigned m = ilog2(m_order);
    if (!is_power_of_two(m_order) || m_order < 4 || m % 2 != 0) fail("make_square_qam", "order must be 4, 16, 64, ...");
    const std::size_t side = std::size_t{1} << (m / 2);
    const unsigned half = m / 2;
    std::vector<cplx> pts(m_order);
    std::vector<std::uint32_t> label_of_symbol(m_order);
    for (std::size_t a = 0; a < side; ++a) {
        for (std::size_t b = 0; b < side; ++b) {
            const std::size_t i = a * side + b;
            pts[i] = {2.0 * static_cast<double>(a) - static_cast<double>(side - 1),
                      2.0 * static_cast<double>(b) - static_cast<double>(side - 1)};
            label_of_symbol[i] = (gray_encode(static_cast<std::uint32_t>(a)) << half) | gray_encode(static_cast<std::uint32_t>(b));
        }
    }
    return Constellation::normalized(std::move(pts), detail::invert_permutation(label_of_symbol));
}

}  // namespace smnuc
