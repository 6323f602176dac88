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

#include "support.hpp"

#include "thz/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace thz;

namespace {

const LineDatabase kNoLines{};
const Medium kVacuum{};

ArrayConfig array_at(int m, int n, int q, double spacing, const Vec3 &origin, const Vec3 &boresight, double f = 300e9)
{
    ArrayConfig a;
    a.rows = m;
    a.cols = n;
    a.q = q;
    a.carrier_hz = f;
    a.ae_spacing_m = wavelength(f) / 2.0;
    a.sa_spacing_m = spacing;
    a.origin = origin;
    a.orientation = orientation_facing(boresight);
    return a;
}

std::pair<ArrayConfig, ArrayConfig> facing_pair(int m, int q, double spacing, double d, double f = 300e9)
{
    return {array_at(m, m, q, spacing, Vec3::Zero(), Vec3::UnitX(), f),
            array_at(m, m, q, spacing, Vec3(d, 0, 0), -Vec3::UnitX(), f)};
}

double wrap(double x) { return std::remainder(x, 2.0 * pi); }

} // namespace

TEST(PathGain, FreeSpaceLoss)
{
    EXPECT_NEAR(-to_db(std::norm(los_path_gain_k(0.3e12, 1.0, 0.0))), 82.0, 0.05);
    EXPECT_NEAR(spreading_loss_db(0.3e12, 1.0), 82.0, 0.05);
    const double g1 = std::norm(los_path_gain_k(0.3e12, 2.0, 0.0));
    const double g10 = std::norm(los_path_gain_k(0.3e12, 20.0, 0.0));
    EXPECT_NEAR(to_db(g1 / g10), 20.0, 1e-12);
}

TEST(PathGain, PhaseAtOneWavelength)
{
    const double f = 0.3e12;
    EXPECT_NEAR(wrap(std::arg(los_path_gain_k(f, wavelength(f), 0.0))), 0.0, 1e-9);
}

TEST(PathGain, DecreasingInDistanceAndAbsorption)
{
    double prev = std::abs(los_path_gain_k(0.5e12, 0.1, 0.3));
    for (double d = 0.2; d < 50.0; d *= 1.3) {
        const double g = std::abs(los_path_gain_k(0.5e12, d, 0.3));
        EXPECT_LT(g, prev);
        prev = g;
    }
    EXPECT_LT(std::abs(los_path_gain_k(0.5e12, 2.0, 0.5)), std::abs(los_path_gain_k(0.5e12, 2.0, 0.4)));
    const auto air = reference_humid_air();
    const double k = absorption_coefficient_exact(557e9, air, test::curated_lines());
    EXPECT_NEAR(std::abs(los_path_gain(557e9, 3.0, air, test::curated_lines())),
                std::abs(los_path_gain_k(557e9, 3.0, 0.0)) * std::exp(-1.5 * k), 1e-20);
}

TEST(Los, SingleElementEqualsPathGain)
{
    auto [tx, rx] = facing_pair(1, 1, 1e-2, 2.5);
    const auto h = los_channel(tx, rx, kVacuum, kNoLines);
    ASSERT_EQ(h.rows(), 1);
    const cdouble alpha = los_path_gain_k(tx.carrier_hz, 2.5, 0.0);
    EXPECT_NEAR(std::abs(h.entries(0, 0) - alpha), 0.0, 1e-15 * std::abs(alpha));
}

TEST(Los, MatchedSubarraysGiveFullGain)
{
    auto [tx, rx] = facing_pair(1, 8, 1e-2, 1.5);
    LinkOptions o;
    o.tx_gain = GainModel::fixed(4.0);
    o.rx_gain = GainModel::fixed(9.0);
    const auto h = los_channel(tx, rx, kVacuum, kNoLines, o);
    EXPECT_NEAR(std::abs(h.entries(0, 0)), 6.0 * std::abs(los_path_gain_k(tx.carrier_hz, 1.5, 0.0)), 1e-12);
}

TEST(Los, EntriesBoundedByClosestPair)
{
    auto [tx, rx] = facing_pair(3, 2, 2e-2, 0.8);
    rx.origin = Vec3(0.8, 0.05, -0.02);
    const auto h = los_channel(tx, rx, reference_humid_air(), test::curated_lines());
    double dmin = 1e9;
    for (int r = 0; r < 9; ++r)
        for (int t = 0; t < 9; ++t)
            dmin = std::min(dmin, (sa_center_world(rx, rx.sa_index(r)) - sa_center_world(tx, tx.sa_index(t))).norm());
    const double bound = std::abs(los_path_gain(tx.carrier_hz, dmin, reference_humid_air(), test::curated_lines()));
    EXPECT_LE(h.entries.cwiseAbs().maxCoeff(), bound * (1 + 1e-12));
}

TEST(Los, ConditioningAtOptimalSpacing)
{
    const double f = 300e9, d = 1.0;
    const double delta = optimal_sa_spacing(1, d, wavelength(f), 4);
    ASSERT_LT(d, rayleigh_distance(16, 16, delta, delta, wavelength(f)));
    auto [tx, rx] = facing_pair(4, 1, delta, d, f);
    EXPECT_LE(condition_number(los_channel(tx, rx, kVacuum, kNoLines).entries), 1.5);
    auto [tx4, rx4] = facing_pair(4, 1, delta / 4.0, d, f);
    EXPECT_GT(condition_number(los_channel(tx4, rx4, kVacuum, kNoLines).entries), 10.0);
}

TEST(Los, ElementLevelBeamformingMatchesSubarrayLevel)
{
    auto [tx, rx] = facing_pair(2, 3, 3e-2, 1.2);
    rx.origin = Vec3(1.2, 0.1, 0.05);
    const auto sa = los_channel(tx, rx, kVacuum, kNoLines);
    const auto ae = ae_level_channel(tx, rx, kVacuum, kNoLines);
    const Vec3 u = (rx.origin - tx.origin).normalized();
    const CMatrix wt = analog_beamformer(tx, tx.orientation.transpose() * u);
    const CMatrix wr = analog_beamformer(rx, rx.orientation.transpose() * (-u));
    const CMatrix h = wr.adjoint() * ae.entries * wt.conjugate();
    EXPECT_LT((h - sa.entries).norm(), 1e-12 * sa.entries.norm());
}

TEST(Los, Errors)
{
    auto [tx, rx] = facing_pair(1, 1, 1e-2, 1.0);
    ArrayConfig back = rx;
    back.orientation = orientation_facing(Vec3::UnitX());
    EXPECT_THROW(los_channel(tx, back, kVacuum, kNoLines), InvalidArgument);
    LinkOptions o;
    o.allow_non_facing = true;
    EXPECT_NO_THROW(los_channel(tx, back, kVacuum, kNoLines, o));
    ArrayConfig same = tx;
    EXPECT_THROW(los_channel(tx, same, kVacuum, kNoLines, o), InvalidArgument);
}

TEST(Nlos, EmptyProfileIsZero)
{
    auto [tx, rx] = facing_pair(2, 1, 1e-2, 3.0);
    MultipathProfile p;
    EXPECT_EQ(sv_nlos_channel(tx, rx, kVacuum, kNoLines, p).entries.norm(), 0.0);
}

TEST(Nlos, MeanPathPowerMatchesClosedForm)
{
    auto [tx, rx] = facing_pair(1, 1, 1e-2, 4.0);
    MultipathProfile p;
    p.clusters = 1;
    p.rays_per_cluster = 1;
    double acc = 0.0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
        p.seed = derive_seed(99, static_cast<std::uint64_t>(s));
        acc += std::norm(sv_nlos_channel(tx, rx, kVacuum, kNoLines, p).entries(0, 0));
    }
    const double expected = std::pow(PhysicalConstants::c0 / (4 * pi * tx.carrier_hz * 4.0), 2);
    EXPECT_NEAR(acc / n, expected, 0.02 * expected);
}

TEST(Nlos, Deterministic)
{
    auto [tx, rx] = facing_pair(2, 2, 1e-2, 3.0);
    MultipathProfile p;
    p.clusters = 4;
    p.rays_per_cluster = 3;
    p.cluster_arrival_rate_hz = 1e8;
    p.ray_arrival_rate_hz = 1e9;
    p.seed = 1234;
    const auto a = sv_nlos_channel(tx, rx, reference_humid_air(), test::curated_lines(), p);
    const auto b = sv_nlos_channel(tx, rx, reference_humid_air(), test::curated_lines(), p);
    EXPECT_TRUE(a.entries == b.entries);
    const auto rays = generate_rays(p);
    ASSERT_EQ(rays.size(), 12u);
    EXPECT_EQ(rays[0].cluster_delay_s, 0.0);
    EXPECT_EQ(rays[0].ray_delay_s, 0.0);
    for (std::size_t i = 1; i < rays.size(); ++i)
        EXPECT_GE(rays[i].cluster_delay_s, rays[i - 1].cluster_delay_s);
}

TEST(Misalignment, Formula)
{
    MisalignmentConfig c{0.8, 0.02, 0.0};
    EXPECT_DOUBLE_EQ(misalignment_factor(c), 0.8);
    c.radial_offset_m = 0.02 / std::sqrt(2.0);
    EXPECT_NEAR(misalignment_factor(c), 0.8 * std::exp(-1.0), 1e-15);
    double prev = 1.0;
    for (double r = 0.0; r < 0.1; r += 0.005) {
        c.radial_offset_m = r;
        const double h = misalignment_factor(c);
        EXPECT_LT(h, prev);
        prev = h;
    }
    c.a0 = 1.5;
    EXPECT_THROW(misalignment_factor(c), InvalidArgument);
}

TEST(Misalignment, CompositionScalesChannel)
{
    auto [tx, rx] = facing_pair(2, 1, 1e-2, 3.0);
    const auto h = los_channel(tx, rx, kVacuum, kNoLines);
    MisalignmentConfig c{0.9, 0.05, 0.01};
    const auto eff = apply_misalignment(h, c);
    EXPECT_LT((eff.entries - misalignment_factor(c) * h.entries).norm(), 1e-18);
    const auto faded = apply_misalignment(h, c, AlphaMu{2.0, 1.5}, 5);
    EXPECT_TRUE(faded.entries == apply_misalignment(h, c, AlphaMu{2.0, 1.5}, 5).entries);
}

TEST(Impairments, ReducesToLinearModel)
{
    Rng rng(1);
    CMatrix h(3, 2);
    h << 1.0, 2.0, cdouble(0, 1), -1.0, 0.5, cdouble(1, 1);
    CVector x(2);
    x << cdouble(1, -1), cdouble(0.5, 0.5);
    ImpairmentConfig cfg;
    const CVector y = apply_impairments(h, x, cfg, 0.0, rng);
    EXPECT_LT((y - h * x).norm(), 1e-15);
    EXPECT_THROW(apply_impairments(h, CVector::Zero(3), cfg, 0.0, rng), InvalidArgument);
}

TEST(Impairments, TransmitDistortionVariance)
{
    ImpairmentConfig cfg;
    cfg.eta_t = 0.1;
    cfg.power_w = 2.0;
    cfg.seed = 77;
    Rng rng(cfg.seed);
    const CMatrix h = CMatrix::Identity(1, 1);
    const CVector x = CVector::Zero(1);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        acc += std::norm(apply_impairments(h, x, cfg, 0.0, rng)(0));
    EXPECT_NEAR(acc / n, 0.02, 0.02 * 0.02);
    EXPECT_TRUE(apply_impairments(h, x, cfg, 0.1) == apply_impairments(h, x, cfg, 0.1));
}

TEST(Irs, ScalarChain)
{
    ArrayConfig tx = array_at(1, 1, 1, 1e-2, Vec3::Zero(), Vec3(1, 1, 0));
    ArrayConfig rx = array_at(1, 1, 1, 1e-2, Vec3(2, 0, 0), Vec3(-1, 1, 0));
    IRSConfig irs;
    irs.origin = Vec3(1, 1, 0);
    irs.orientation = orientation_facing(Vec3(0, -1, 0));
    const auto c = irs_cascade(tx, irs, rx, kVacuum, kNoLines);
    EXPECT_NEAR(std::abs(c.cascade.entries(0, 0)), std::abs(c.irs_to_rx.entries(0, 0)) * std::abs(c.tx_to_irs.entries(0, 0)),
                1e-20);
    irs.beta = {0.0};
    EXPECT_EQ(irs_cascade(tx, irs, rx, kVacuum, kNoLines).cascade.entries.norm(), 0.0);
    irs.beta = {0.5};
    irs.binary = true;
    EXPECT_THROW(irs_cascade(tx, irs, rx, kVacuum, kNoLines), InvalidArgument);
}

TEST(Irs, IdentityPhaseIsPlainProduct)
{
    ArrayConfig tx = array_at(2, 2, 2, 1e-2, Vec3::Zero(), Vec3(1, 1, 0));
    ArrayConfig rx = array_at(2, 1, 1, 1e-2, Vec3(2, 0, 0), Vec3(-1, 1, 0));
    IRSConfig irs;
    irs.rows = 3;
    irs.cols = 4;
    irs.spacing_m = 2e-3;
    irs.origin = Vec3(1, 1, 0);
    irs.orientation = orientation_facing(Vec3(0, -1, 0));
    const auto c = irs_cascade(tx, irs, rx, reference_humid_air(), test::curated_lines());
    const CMatrix product = c.irs_to_rx.entries * c.tx_to_irs.entries;
    EXPECT_LT((c.cascade.entries - product).norm(), 1e-12 * product.norm());
    EXPECT_EQ(c.cascade.rows(), 2);
    EXPECT_EQ(c.cascade.cols(), 4);
}

TEST(Irs, SpreadSubsetBeatsClusteredSubset)
{
    // Short link through a long 1 x 32 surface: two far-apart active
    // elements give a better-conditioned 2 x 2 cascade than two neighbours.
    ArrayConfig tx = array_at(1, 2, 1, 0.05, Vec3(0, -0.3, 0), Vec3(1, 1, 0));
    ArrayConfig rx = array_at(1, 2, 1, 0.05, Vec3(0.6, -0.3, 0), Vec3(-1, 1, 0));
    IRSConfig irs;
    irs.rows = 1;
    irs.cols = 32;
    irs.spacing_m = 0.01;
    irs.origin = Vec3(0.3, 0, 0);
    irs.orientation = orientation_facing(Vec3(0, -1, 0));
    auto cond_with = [&](std::vector<int> on) {
        IRSConfig s = irs;
        s.binary = true;
        s.beta.assign(32, 0.0);
        for (int i : on)
            s.beta[static_cast<std::size_t>(i)] = 1.0;
        const auto c = irs_cascade(tx, s, rx, kVacuum, kNoLines);
        Eigen::JacobiSVD<CMatrix> svd(c.cascade.entries);
        EXPECT_LE((svd.singularValues().array() > 1e-12 * svd.singularValues()(0)).count(), 2);
        return condition_number(c.cascade.entries);
    };
    EXPECT_LT(cond_with({0, 31}), cond_with({15, 16}));
}

TEST(Export, MatrixRoundTrip)
{
    auto [tx, rx] = facing_pair(2, 1, 1e-2, 3.0);
    const auto h = los_channel(tx, rx, reference_humid_air(), test::curated_lines());
    std::stringstream data, meta;
    write_matrix_csv(h.entries, data);
    write_channel_metadata(h, meta);
    const auto back = read_channel(data, meta);
    EXPECT_TRUE(back.entries == h.entries);
    EXPECT_EQ(back.frequency_hz, h.frequency_hz);
    EXPECT_EQ(back.reference_distance_m, h.reference_distance_m);
    EXPECT_EQ(back.kind, h.kind);
    std::stringstream bad("row,col,re,im\n0,x,1,2\n");
    EXPECT_THROW(read_matrix_csv(bad), InvalidArgument);
}
