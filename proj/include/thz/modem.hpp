// SPDX-License-Identifier: Apache-2.0
//
// thz: terahertz ultra-massive MIMO link simulation library
// Copyright (C) 2026 The thz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Constellations, spatial and generalized index modulation, pulse shapes and a
// brute-force ML detector.

#include "thz/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace thz {

using Bits = std::vector<std::uint8_t>;
using BigInt = boost::multiprecision::cpp_int;

inline bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline int ilog2_exact(std::uint64_t x, const char *what)
{
    if (!is_power_of_two(x))
        throw InvalidArgument(std::string(what) + " must be a power of two (got " + std::to_string(x) + ")");
    int k = 0;
    while ((std::uint64_t{1} << k) < x)
        ++k;
    return k;
}

inline std::uint32_t gray_encode(std::uint32_t v) { return v ^ (v >> 1); }

inline std::uint32_t gray_decode(std::uint32_t g)
{
    for (std::uint32_t s = 1; s < 32; s <<= 1)
        g ^= g >> s;
    return g;
}

/// Points indexed by their bit label; unit average energy.
struct Constellation {
    std::vector<cdouble> points;

    std::size_t order() const { return points.size(); }
    int bits_per_symbol() const { return ilog2_exact(points.size(), "constellation order"); }

    /// Gray-labelled square QAM. The upper half of the label selects the
    /// in-phase level, the lower half the quadrature level.
    static Constellation qam(std::size_t order)
    {
        const int k = ilog2_exact(order, "QAM order");
        require(k % 2 == 0 && order >= 4, "QAM order must be a power of four");
        const std::uint32_t side = 1u << (k / 2);
        const double norm = std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
        Constellation c;
        c.points.resize(order);
        for (std::uint32_t label = 0; label < order; ++label) {
            const std::uint32_t i_level = gray_decode(label >> (k / 2));
            const std::uint32_t q_level = gray_decode(label & (side - 1));
            c.points[label] = cdouble(2.0 * i_level - (side - 1.0), 2.0 * q_level - (side - 1.0)) / norm;
        }
        return c;
    }

    static Constellation bpsk() { return {{cdouble(-1.0, 0.0), cdouble(1.0, 0.0)}}; }

    static Constellation from_order(std::size_t order) { return order == 2 ? bpsk() : qam(order); }

    double mean_energy() const
    {
        double e = 0.0;
        for (auto p : points)
            e += std::norm(p);
        return e / static_cast<double>(points.size());
    }

    std::size_t nearest(cdouble z) const
    {
        std::size_t best = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = std::norm(z - points[i]);
            if (d < dmin) {
                dmin = d;
                best = i;
            }
        }
        return best;
    }
};

namespace detail {

inline std::uint64_t read_field(const Bits &bits, std::size_t offset, int width)
{
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        const auto b = bits[offset + static_cast<std::size_t>(i)];
        require(b <= 1, "bits must be 0 or 1");
        v |= static_cast<std::uint64_t>(b) << i;
    }
    return v;
}

inline void write_field(Bits &bits, std::uint64_t v, int width)
{
    for (int i = 0; i < width; ++i)
        bits.push_back(static_cast<std::uint8_t>((v >> i) & 1u));
}

inline BigInt read_big_field(const Bits &bits, std::size_t offset, int width)
{
    BigInt v = 0;
    for (int i = width - 1; i >= 0; --i) {
        const auto b = bits[offset + static_cast<std::size_t>(i)];
        require(b <= 1, "bits must be 0 or 1");
        v = (v << 1) | b;
    }
    return v;
}

inline void write_big_field(Bits &bits, BigInt v, int width)
{
    for (int i = 0; i < width; ++i) {
        bits.push_back(static_cast<std::uint8_t>(static_cast<unsigned>(v & 1)));
        v >>= 1;
    }
}

} // namespace detail

/// Exact binomial coefficient; throws when k > n.
inline BigInt binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        throw InvalidArgument("binomial: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    k = std::min(k, n - k);
    BigInt r = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
        r = r * (n - k + i) / i; // exact: r holds C(n - k + i, i)
    return r;
}

/// floor(log2 x) for x >= 1.
inline int floor_log2(const BigInt &x)
{
    require(x >= 1, "floor_log2: argument must be positive");
    return static_cast<int>(boost::multiprecision::msb(x));
}

enum class AntennaTerm {
    total_over_active, // C(total antennas, active antennas)
    as_printed,        // C(active antennas, total antennas)
};

struct IMConfig {
    int sa_rows = 1; // M_t
    int sa_cols = 1; // N_t
    int q = 1;       // Q
    std::size_t constellation_order = 4;
    int total_bands = 1;     // F
    int supported_bands = 1; // F bar
    int total_antennas = 0;  // 0 means M_t N_t Q^2
    int active_antennas = 1; // S
    AntennaTerm antenna_term = AntennaTerm::total_over_active;

    int subarrays() const { return sa_rows * sa_cols; }
    int elements_per_subarray() const { return q * q; }
    int antenna_count() const { return total_antennas > 0 ? total_antennas : subarrays() * elements_per_subarray(); }

    void validate() const
    {
        require(sa_rows >= 1 && sa_cols >= 1 && q >= 1, "im: array dimensions must be positive");
        require(constellation_order >= 2, "im: constellation order must be at least 2");
        require(total_bands >= 1 && supported_bands >= 1, "im: band counts must be positive");
        require(active_antennas >= 1 && total_antennas >= 0, "im: antenna counts must be positive");
    }
};

struct SmBitLayout {
    int sa_bits;
    int ae_bits;
    int symbol_bits;
    int total() const { return sa_bits + ae_bits + symbol_bits; }
};

inline SmBitLayout sm_layout(const IMConfig &cfg)
{
    cfg.validate();
    return {ilog2_exact(static_cast<std::uint64_t>(cfg.subarrays()), "number of subarrays M_t N_t"),
            ilog2_exact(static_cast<std::uint64_t>(cfg.elements_per_subarray()), "elements per subarray Q^2"),
            ilog2_exact(cfg.constellation_order, "constellation order")};
}

/// N_b = log2(M_t N_t) + log2(Q^2) + log2|X|.
inline int sm_bit_count(const IMConfig &cfg) { return sm_layout(cfg).total(); }

struct GimBitLayout {
    int band_bits;
    int antenna_bits;
    int symbol_bits;
    int total() const { return band_bits + antenna_bits + symbol_bits; }
};

inline GimBitLayout gim_layout(const IMConfig &cfg)
{
    cfg.validate();
    const auto total = static_cast<std::uint64_t>(cfg.antenna_count());
    const auto active = static_cast<std::uint64_t>(cfg.active_antennas);
    const BigInt ant = cfg.antenna_term == AntennaTerm::total_over_active ? binomial(total, active)
                                                                           : binomial(active, total);
    return {floor_log2(binomial(static_cast<std::uint64_t>(cfg.total_bands),
                                static_cast<std::uint64_t>(cfg.supported_bands))),
            floor_log2(ant), ilog2_exact(cfg.constellation_order, "constellation order")};
}

/// floor(log2 C(F, F bar)) + floor(log2 C(total, S)) + log2|X|.
inline int gim_bit_count(const IMConfig &cfg) { return gim_layout(cfg).total(); }

struct SmSymbol {
    int sa = 0;
    int ae = 0;
    std::size_t label = 0;
    cdouble symbol{};
};

/// Bits are [SA | AE | symbol], little-endian within each field.
inline SmSymbol sm_map(const Bits &bits, const IMConfig &cfg, const Constellation &x)
{
    const auto l = sm_layout(cfg);
    require(x.order() == cfg.constellation_order, "sm: constellation order does not match config");
    if (static_cast<int>(bits.size()) != l.total())
        throw InvalidArgument("sm: expected " + std::to_string(l.total()) + " bits, got " + std::to_string(bits.size()));
    SmSymbol s;
    s.sa = static_cast<int>(detail::read_field(bits, 0, l.sa_bits));
    s.ae = static_cast<int>(detail::read_field(bits, static_cast<std::size_t>(l.sa_bits), l.ae_bits));
    s.label = detail::read_field(bits, static_cast<std::size_t>(l.sa_bits + l.ae_bits), l.symbol_bits);
    s.symbol = x.points[s.label];
    return s;
}

inline Bits sm_demap(const SmSymbol &s, const IMConfig &cfg)
{
    const auto l = sm_layout(cfg);
    require(s.sa >= 0 && s.sa < cfg.subarrays(), "sm: subarray index out of range");
    require(s.ae >= 0 && s.ae < cfg.elements_per_subarray(), "sm: element index out of range");
    require(s.label < cfg.constellation_order, "sm: symbol label out of range");
    Bits out;
    detail::write_field(out, static_cast<std::uint64_t>(s.sa), l.sa_bits);
    detail::write_field(out, static_cast<std::uint64_t>(s.ae), l.ae_bits);
    detail::write_field(out, s.label, l.symbol_bits);
    return out;
}

/// Element-level transmit vector: the symbol on element sa * Q^2 + ae, zero elsewhere.
inline CVector sm_transmit_vector(const SmSymbol &s, const IMConfig &cfg)
{
    CVector x = CVector::Zero(cfg.subarrays() * cfg.elements_per_subarray());
    x(s.sa * cfg.elements_per_subarray() + s.ae) = s.symbol;
    return x;
}

/// Lexicographic rank -> sorted k-subset of {0, ..., n-1}.
inline std::vector<int> unrank_combination(BigInt rank, int n, int k)
{
    require(rank >= 0 && rank < binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)),
            "unrank: rank out of range");
    std::vector<int> out;
    int next = 0;
    for (int slot = 0; slot < k; ++slot)
        for (int c = next;; ++c) {
            const BigInt block = binomial(static_cast<std::uint64_t>(n - c - 1), static_cast<std::uint64_t>(k - slot - 1));
            if (rank < block) {
                out.push_back(c);
                next = c + 1;
                break;
            }
            rank -= block;
        }
    return out;
}

inline BigInt rank_combination(const std::vector<int> &combo, int n)
{
    const int k = static_cast<int>(combo.size());
    BigInt rank = 0;
    int next = 0;
    for (int slot = 0; slot < k; ++slot) {
        require(combo[static_cast<std::size_t>(slot)] >= next && combo[static_cast<std::size_t>(slot)] < n,
                "rank: combination must be strictly increasing within range");
        for (int c = next; c < combo[static_cast<std::size_t>(slot)]; ++c)
            rank += binomial(static_cast<std::uint64_t>(n - c - 1), static_cast<std::uint64_t>(k - slot - 1));
        next = combo[static_cast<std::size_t>(slot)] + 1;
    }
    return rank;
}

struct GimSymbol {
    std::vector<int> bands;    // active bands, sorted
    std::vector<int> antennas; // active antennas, sorted
    std::size_t label = 0;
    cdouble symbol{};
};

/// Bits are [bands | antennas | symbol], little-endian within each field. Only
/// the first 2^floor(log2 C) combinations are reachable.
inline GimSymbol gim_map(const Bits &bits, const IMConfig &cfg, const Constellation &x)
{
    require(cfg.antenna_term == AntennaTerm::total_over_active, "gim: mapping needs the total-over-active reading");
    const auto l = gim_layout(cfg);
    require(x.order() == cfg.constellation_order, "gim: constellation order does not match config");
    if (static_cast<int>(bits.size()) != l.total())
        throw InvalidArgument("gim: expected " + std::to_string(l.total()) + " bits, got " + std::to_string(bits.size()));
    GimSymbol s;
    s.bands = unrank_combination(detail::read_big_field(bits, 0, l.band_bits), cfg.total_bands, cfg.supported_bands);
    s.antennas = unrank_combination(detail::read_big_field(bits, static_cast<std::size_t>(l.band_bits), l.antenna_bits),
                                    cfg.antenna_count(), cfg.active_antennas);
    s.label = detail::read_field(bits, static_cast<std::size_t>(l.band_bits + l.antenna_bits), l.symbol_bits);
    s.symbol = x.points[s.label];
    return s;
}

inline Bits gim_demap(const GimSymbol &s, const IMConfig &cfg)
{
    const auto l = gim_layout(cfg);
    const BigInt rb = rank_combination(s.bands, cfg.total_bands);
    const BigInt ra = rank_combination(s.antennas, cfg.antenna_count());
    require(static_cast<int>(s.bands.size()) == cfg.supported_bands &&
                static_cast<int>(s.antennas.size()) == cfg.active_antennas,
            "gim: active set sizes do not match config");
    require(rb < (BigInt(1) << l.band_bits) && ra < (BigInt(1) << l.antenna_bits),
            "gim: combination is not a valid codeword");
    require(s.label < cfg.constellation_order, "gim: symbol label out of range");
    Bits out;
    detail::write_big_field(out, rb, l.band_bits);
    detail::write_big_field(out, ra, l.antenna_bits);
    detail::write_field(out, s.label, l.symbol_bits);
    return out;
}

// Pulses.

inline double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(pi * x) / (pi * x);
}

struct PulseSpec {
    enum class Kind { gaussian, raised_cosine };
    Kind kind = Kind::gaussian;
    double amplitude = 1.0; // a
    double center_s = 0.0;  // b
    double spread_s = 1.0;  // T bar_p
    double slot_s = 2.0;    // T bar
    double rolloff = 0.0;   // alpha bar

    void validate() const
    {
        require(slot_s > 0.0, "pulse: slot duration must be positive");
        require(rolloff >= 0.0 && rolloff < 1.0, "pulse: roll-off must lie in [0, 1)");
        if (kind == Kind::gaussian)
            require(spread_s > 0.0 && spread_s < slot_s, "pulse: Gaussian spread must satisfy 0 < T_p < T");
    }
};

/// a exp(-(t - b)^2 / (2 T_p^2)).
inline double gaussian_pulse(double t, const PulseSpec &p)
{
    p.validate();
    const double u = (t - p.center_s) / p.spread_s;
    return p.amplitude * std::exp(-0.5 * u * u);
}

/// sinc(t/T) cos(pi a t / T) / (1 - (2 a t / T)^2), with the limit
/// (pi/4) sinc(1/(2a)) at t = +-T/(2a).
inline double raised_cosine_pulse(double t, const PulseSpec &p)
{
    p.validate();
    const double x = t / p.slot_s;
    const double a = p.rolloff;
    const double den = 1.0 - 4.0 * a * a * x * x;
    if (a > 0.0 && std::abs(den) < 1e-12)
        return pi / 4.0 * sinc(1.0 / (2.0 * a));
    return sinc(x) * std::cos(pi * a * x) / den;
}

inline double pulse(double t, const PulseSpec &p)
{
    return p.kind == PulseSpec::Kind::gaussian ? gaussian_pulse(t, p) : raised_cosine_pulse(t, p);
}

// Detection.

inline constexpr std::size_t ml_max_candidates = std::size_t{1} << 20;

/// argmin ||y - H x||^2 over the lattice; ties go to the lowest index.
inline std::size_t ml_detect(const CVector &y, const CMatrix &h, const std::vector<CVector> &lattice)
{
    require(!lattice.empty(), "ml: empty candidate lattice");
    if (lattice.size() > ml_max_candidates)
        throw InvalidArgument("ml: lattice has " + std::to_string(lattice.size()) + " candidates (limit 2^20)");
    require(h.rows() == y.size(), "ml: H rows do not match y");
    std::size_t best = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        require(lattice[i].size() == h.cols(), "ml: candidate length does not match H columns");
        const double d = (y - h * lattice[i]).squaredNorm();
        if (d < dmin) {
            dmin = d;
            best = i;
        }
    }
    return best;
}

/// All |X|^n vectors; entry 0 varies slowest.
inline std::vector<CVector> product_lattice(const Constellation &x, int n)
{
    require(n >= 1, "lattice: dimension must be positive");
    const double log_size = n * std::log2(static_cast<double>(x.order()));
    if (log_size > 20.0)
        throw InvalidArgument("lattice: |X|^n exceeds 2^20 candidates");
    std::size_t total = 1;
    for (int i = 0; i < n; ++i)
        total *= x.order();
    std::vector<CVector> out(total, CVector(n));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t c = idx;
        for (int i = n - 1; i >= 0; --i) {
            out[idx](i) = x.points[c % x.order()];
            c /= x.order();
        }
    }
    return out;
}

/// Every SM transmit vector, in bit-label order.
inline std::vector<CVector> sm_lattice(const IMConfig &cfg, const Constellation &x)
{
    const int nb = sm_bit_count(cfg);
    require(nb <= 20, "lattice: SM bit count exceeds 20");
    std::vector<CVector> out;
    out.reserve(std::size_t{1} << nb);
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << nb); ++v) {
        Bits b;
        detail::write_field(b, v, nb);
        out.push_back(sm_transmit_vector(sm_map(b, cfg, x), cfg));
    }
    return out;
}

} // namespace thz
