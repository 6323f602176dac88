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

#include "thz/modem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace thz;

namespace {

IMConfig sm_config(int m, int n, int q, std::size_t order)
{
    IMConfig c;
    c.sa_rows = m;
    c.sa_cols = n;
    c.q = q;
    c.constellation_order = order;
    return c;
}

Bits to_bits(std::uint64_t v, int width)
{
    Bits b;
    for (int i = 0; i < width; ++i)
        b.push_back(static_cast<std::uint8_t>((v >> i) & 1u));
    return b;
}

CMatrix iid(int rows, int cols, Rng &rng)
{
    CMatrix h(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            h(i, j) = complex_normal(rng, 1.0);
    return h;
}

// Direct four-fold loop over a 2-stream QPSK alphabet, independent of
// product_lattice and ml_detect.
std::pair<std::size_t, std::size_t> brute_force_2x2(const CVector &y, const CMatrix &h, const Constellation &x)
{
    double best = 1e300;
    std::pair<std::size_t, std::size_t> arg{0, 0};
    for (std::size_t a = 0; a < x.order(); ++a)
        for (std::size_t b = 0; b < x.order(); ++b) {
            const cdouble r0 = y(0) - h(0, 0) * x.points[a] - h(0, 1) * x.points[b];
            const cdouble r1 = y(1) - h(1, 0) * x.points[a] - h(1, 1) * x.points[b];
            const double d = std::norm(r0) + std::norm(r1);
            if (d < best) {
                best = d;
                arg = {a, b};
            }
        }
    return arg;
}

} // namespace

TEST(Constellation, GrayQamProperties)
{
    for (std::size_t order : {4u, 16u, 64u}) {
        const auto c = Constellation::qam(order);
        EXPECT_NEAR(c.mean_energy(), 1.0, 1e-12);
        std::set<std::pair<double, double>> seen;
        for (auto p : c.points)
            seen.insert({p.real(), p.imag()});
        EXPECT_EQ(seen.size(), order);
        // Nearest neighbours differ in exactly one bit.
        double dmin = 1e9;
        for (std::size_t i = 0; i < order; ++i)
            for (std::size_t j = i + 1; j < order; ++j)
                dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
        for (std::size_t i = 0; i < order; ++i)
            for (std::size_t j = i + 1; j < order; ++j)
                if (std::abs(std::abs(c.points[i] - c.points[j]) - dmin) < 1e-9) {
                    EXPECT_EQ(__builtin_popcountll(i ^ j), 1);
                }
    }
    EXPECT_THROW(Constellation::qam(8), InvalidArgument);
    EXPECT_THROW(Constellation::qam(6), InvalidArgument);
}

TEST(BitCounts, SpatialModulation)
{
    EXPECT_EQ(sm_bit_count(sm_config(2, 2, 2, 16)), 8);
    EXPECT_EQ(sm_bit_count(sm_config(1, 1, 1, 2)), 1);
    EXPECT_THROW(sm_bit_count(sm_config(1, 3, 1, 4)), InvalidArgument);
    EXPECT_THROW(sm_bit_count(sm_config(1, 1, 1, 6)), InvalidArgument);
}

TEST(BitCounts, GeneralisedIndexModulation)
{
    IMConfig c = sm_config(1, 1, 2, 16);
    c.total_bands = 4;
    c.supported_bands = 2;
    c.total_antennas = 4;
    c.active_antennas = 2;
    const auto l = gim_layout(c);
    EXPECT_EQ(l.band_bits, 2);
    EXPECT_EQ(l.antenna_bits, 2);
    EXPECT_EQ(gim_bit_count(c), 8);
    c.antenna_term = AntennaTerm::as_printed;
    EXPECT_THROW(gim_bit_count(c), InvalidArgument);
    c.active_antennas = 4;
    EXPECT_EQ(gim_layout(c).antenna_bits, 0);
}

TEST(BitCounts, BinomialAndFloorLog2)
{
    EXPECT_EQ(binomial(4, 2), 6);
    EXPECT_EQ(binomial(64, 32), BigInt("1832624140942590534"));
    EXPECT_EQ(floor_log2(BigInt(6)), 2);
    EXPECT_EQ(floor_log2(BigInt(1)), 0);
    EXPECT_EQ(floor_log2(binomial(256, 128)), 251);
    EXPECT_THROW(binomial(2, 3), InvalidArgument);
}

TEST(BitCounts, GimNeverBelowSm)
{
    for (int m : {1, 2, 4})
        for (int q : {1, 2, 4})
            for (std::size_t order : {2u, 4u, 16u}) {
                IMConfig c = sm_config(m, m, q, order);
                const int n = c.antenna_count();
                for (int s = 1; s <= std::max(1, n - 1); ++s) {
                    c.active_antennas = s;
                    EXPECT_GE(gim_bit_count(c), sm_bit_count(c)) << m << " " << q << " " << order << " " << s;
                }
            }
}

TEST(SpatialModulation, ExhaustiveBijection)
{
    const IMConfig c = sm_config(2, 2, 2, 16);
    const auto x = Constellation::qam(16);
    std::set<std::tuple<int, int, std::size_t>> seen;
    for (std::uint64_t v = 0; v < 256; ++v) {
        const Bits b = to_bits(v, 8);
        const auto s = sm_map(b, c, x);
        EXPECT_EQ(sm_demap(s, c), b);
        seen.insert({s.sa, s.ae, s.label});
        const CVector tx = sm_transmit_vector(s, c);
        EXPECT_EQ((tx.array() != cdouble(0.0)).count(), 1);
        EXPECT_EQ(tx(s.sa * 4 + s.ae), x.points[s.label]);
    }
    EXPECT_EQ(seen.size(), 256u);
    EXPECT_THROW(sm_map(to_bits(0, 7), c, x), InvalidArgument);
}

TEST(SpatialModulation, FieldOrder)
{
    const IMConfig c = sm_config(2, 2, 2, 16);
    const auto s = sm_map(Bits{1, 0, 0, 1, 1, 1, 0, 0}, c, Constellation::qam(16));
    EXPECT_EQ(s.sa, 1);
    EXPECT_EQ(s.ae, 2);
    EXPECT_EQ(s.label, 3u);
}

TEST(IndexModulation, CombinationRanking)
{
    int count = 0;
    std::set<std::vector<int>> seen;
    for (BigInt r = 0; r < binomial(7, 3); ++r, ++count) {
        const auto combo = unrank_combination(r, 7, 3);
        ASSERT_EQ(combo.size(), 3u);
        EXPECT_TRUE(std::is_sorted(combo.begin(), combo.end()));
        EXPECT_EQ(rank_combination(combo, 7), r);
        seen.insert(combo);
    }
    EXPECT_EQ(seen.size(), 35u);
    EXPECT_EQ(unrank_combination(0, 7, 3), (std::vector<int>{0, 1, 2}));
}

TEST(IndexModulation, RoundTrip)
{
    IMConfig c = sm_config(1, 1, 2, 4);
    c.total_bands = 5;
    c.supported_bands = 2;
    c.active_antennas = 2;
    const auto x = Constellation::qam(4);
    const int nb = gim_bit_count(c);
    EXPECT_EQ(nb, 3 + 2 + 2);
    for (std::uint64_t v = 0; v < (1u << nb); ++v) {
        const Bits b = to_bits(v, nb);
        const auto s = gim_map(b, c, x);
        EXPECT_EQ(s.bands.size(), 2u);
        EXPECT_EQ(s.antennas.size(), 2u);
        EXPECT_EQ(gim_demap(s, c), b);
    }
}

TEST(Pulses, GaussianArea)
{
    PulseSpec p;
    p.amplitude = 1.7;
    p.center_s = 0.3;
    p.spread_s = 0.2;
    p.slot_s = 1.0;
    double area = 0.0;
    const double dt = 1e-4;
    for (double t = p.center_s - 3.0; t < p.center_s + 3.0; t += dt)
        area += pulse(t, p) * dt;
    EXPECT_NEAR(area, p.amplitude * p.spread_s * std::sqrt(2.0 * pi), 1e-8);
    EXPECT_DOUBLE_EQ(pulse(p.center_s, p), p.amplitude);
    p.spread_s = 1.5;
    EXPECT_THROW(pulse(0.0, p), InvalidArgument);
}

TEST(Pulses, RaisedCosine)
{
    PulseSpec p;
    p.kind = PulseSpec::Kind::raised_cosine;
    p.slot_s = 2.0;
    p.rolloff = 0.3;
    EXPECT_DOUBLE_EQ(pulse(0.0, p), 1.0);
    for (int k = 1; k <= 5; ++k) {
        EXPECT_NEAR(pulse(k * p.slot_s, p), 0.0, 1e-15);
        EXPECT_NEAR(pulse(-k * p.slot_s, p), 0.0, 1e-15);
    }
    const double ts = p.slot_s / (2.0 * p.rolloff);
    EXPECT_NEAR(pulse(ts, p), pulse(ts * (1 + 1e-7), p), 1e-6);
    EXPECT_NEAR(pulse(ts, p), pi / 4.0 * sinc(1.0 / (2.0 * p.rolloff)), 1e-15);
    p.rolloff = 0.0;
    EXPECT_NEAR(pulse(0.7, p), sinc(0.35), 1e-15);
}

TEST(Detection, ZeroNoiseAndTies)
{
    Rng rng(2);
    const auto x = Constellation::qam(4);
    const CMatrix h = iid(3, 2, rng);
    const auto lattice = product_lattice(x, 2);
    ASSERT_EQ(lattice.size(), 16u);
    EXPECT_EQ(lattice[1](0), x.points[0]);
    EXPECT_EQ(lattice[1](1), x.points[1]);
    for (std::size_t i = 0; i < lattice.size(); ++i)
        EXPECT_EQ(ml_detect(h * lattice[i], h, lattice), i);
    EXPECT_EQ(ml_detect(CVector::Zero(3), CMatrix::Zero(3, 2), lattice), 0u);
    EXPECT_THROW(product_lattice(Constellation::qam(64), 4), InvalidArgument);
}

TEST(Detection, SmLatticeFollowsBitLabels)
{
    const IMConfig c = sm_config(2, 1, 1, 4);
    const auto x = Constellation::qam(4);
    const auto lattice = sm_lattice(c, x);
    ASSERT_EQ(lattice.size(), 8u);
    for (std::uint64_t v = 0; v < 8; ++v)
        EXPECT_TRUE(lattice[v] == sm_transmit_vector(sm_map(to_bits(v, 3), c, x), c));
}

TEST(Detection, MlSerAgreesWithBruteForce)
{
    // 2 x 2 iid channel, QPSK on both streams, 20 dB. Two independent runs
    // of different detectors; their SER estimates agree within 3 sigma.
    const auto x = Constellation::qam(4);
    const auto lattice = product_lattice(x, 2);
    const double noise = from_db(-20.0);
    const int trials = 10000;
    auto run = [&](std::uint64_t seed, bool library) {
        Rng rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, 3);
        int errors = 0;
        for (int t = 0; t < trials; ++t) {
            const CMatrix h = iid(2, 2, rng);
            const std::size_t a = pick(rng), b = pick(rng);
            CVector s(2);
            s << x.points[a], x.points[b];
            const CVector y = h * s + complex_normal_vector(rng, 2, noise);
            std::pair<std::size_t, std::size_t> d;
            if (library) {
                const auto idx = ml_detect(y, h, lattice);
                d = {idx / 4, idx % 4};
                EXPECT_EQ(d, brute_force_2x2(y, h, x));
            } else {
                d = brute_force_2x2(y, h, x);
            }
            errors += (d.first != a) + (d.second != b);
        }
        return static_cast<double>(errors) / (2.0 * trials);
    };
    const double p1 = run(100, true), p2 = run(200, false);
    const double p = 0.5 * (p1 + p2);
    const double sigma = std::sqrt(2.0 * p * (1 - p) / (2.0 * trials));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(std::abs(p1 - p2), 3.0 * sigma + 1e-12);
}
