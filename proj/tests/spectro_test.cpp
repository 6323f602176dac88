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

#include "thz/spectro.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace thz;

namespace {

const char *kHeader = "gas,isotope,fc0_hz,S,delta_hz,alpha_air_hz,alpha_gas_hz,gamma\n";

// Straight transcription of the line-by-line formula in long double, one line
// at a time, with no shared code path.
long double oracle_line(const AbsorptionLine &l, long double f, const Medium &m)
{
    const long double kb = 1.380649e-23L, h = 6.62607015e-34L, r = 8.314462618L, na = 6.02214076e23L;
    const long double q = m.mixing_ratio(l.gas, l.isotope);
    const long double T = m.temperature_k, T0 = m.reference_temperature_k;
    const long double pp0 = m.pressure_atm / m.reference_pressure_atm;
    const long double p_pa = m.pressure_atm * 101325.0L;
    const long double fc = l.fc0_hz + l.shift_hz * pp0;
    const long double a = ((1 - q) * l.alpha_air_hz + q * l.alpha_self_hz) * pp0 * std::pow(T0 / T, (long double)l.temperature_exponent);
    const long double n = pp0 * (273.15L / T) * (p_pa / (r * T)) * q * na;
    const long double th = std::tanh(h * f / (2 * kb * T)) / std::tanh(h * fc / (2 * kb * T));
    const long double lor = 1 / ((f - fc) * (f - fc) + a * a) + 1 / ((f + fc) * (f + fc) + a * a);
    return n * l.intensity * (f / fc) * th * (a / 3.14159265358979323846L) * (f / fc) * lor;
}

long double oracle_k(long double f, const Medium &m, const LineDatabase &db)
{
    long double k = 0;
    for (const auto &l : db.lines)
        k += oracle_line(l, f, m);
    return k;
}

Medium only(const Medium &base, int gas_id)
{
    Medium m = base;
    m.species.clear();
    for (const auto &s : base.species)
        if (s.gas == gas_id)
            m.species.push_back(s);
    return m;
}

std::vector<double> local_maxima(const std::vector<double> &f, const std::vector<double> &k)
{
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < k.size(); ++i)
        if (k[i] > k[i - 1] && k[i] >= k[i + 1])
            out.push_back(f[i]);
    return out;
}

} // namespace

TEST(LineList, SingleRow)
{
    const auto db = parse_linelist(std::string(kHeader) + "1,1,556936002000,1.6e-13,0,3.0e9,1.5e10,0.7\n");
    ASSERT_EQ(db.size(), 1u);
    EXPECT_EQ(db.lines[0].gas, 1);
    EXPECT_DOUBLE_EQ(db.lines[0].fc0_hz, 556936002000.0);
}

TEST(LineList, HeaderOnly)
{
    EXPECT_TRUE(parse_linelist(std::string(kHeader)).empty());
}

TEST(LineList, NegativeBroadeningNamesFieldAndLine)
{
    try {
        parse_linelist(std::string("# comment\n") + kHeader + "1,1,5.5e11,1e-13,0,-1,1e10,0.7\n");
        FAIL() << "expected a parse error";
    } catch (const LineListParseError &e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.field(), "alpha_air_hz");
    }
}

TEST(LineList, RejectsNonNumericAndDuplicates)
{
    EXPECT_THROW(parse_linelist(std::string(kHeader) + "1,1,abc,1e-13,0,1e9,1e10,0.7\n"), LineListParseError);
    EXPECT_THROW(parse_linelist(std::string(kHeader) + "1,1,5e11,1e-13,0,1e9,1e10\n"), LineListParseError);
    EXPECT_THROW(parse_linelist(std::string(kHeader) + "1,1,5e11,1e-13,0,1e9,1e10,0.7\n1,1,5e11,2e-13,0,1e9,1e10,0.7\n"),
                 LineListParseError);
    EXPECT_THROW(parse_linelist(std::string("gas,fc0\n")), LineListParseError);
}

TEST(LineList, SortedByResonance)
{
    const auto db = parse_linelist(std::string(kHeader) + "1,1,6e11,1e-13,0,1e9,1e10,0.7\n1,1,5e11,1e-13,0,1e9,1e10,0.7\n");
    EXPECT_LT(db.lines[0].fc0_hz, db.lines[1].fc0_hz);
}

TEST(LineList, RoundTrip)
{
    const auto &db = test::curated_lines();
    ASSERT_GT(db.size(), 20u);
    EXPECT_EQ(parse_linelist(serialize_linelist(db)), db);
}

TEST(Absorption, MatchesIndependentOracle)
{
    const auto &db = test::curated_lines();
    const auto air = reference_humid_air();
    for (double f : {120e9, 183.31e9, 300e9, 557e9, 752e9, 900e9}) {
        const double k = absorption_coefficient_exact(f, air, db);
        EXPECT_NEAR(k, static_cast<double>(oracle_k(f, air, db)), 1e-10 * k) << f;
    }
}

TEST(Absorption, ZeroMixingGivesZero)
{
    Medium m = reference_humid_air();
    for (auto &s : m.species)
        s.mixing_ratio = 0.0;
    for (double f = 100e9; f < 1e12; f += 37e9)
        EXPECT_EQ(absorption_coefficient_exact(f, m, test::curated_lines()), 0.0);
}

TEST(Absorption, NonNegativeAndAdditiveOverSpecies)
{
    const auto &db = test::curated_lines();
    const auto air = reference_humid_air();
    const auto water = only(air, gas::h2o), oxygen = only(air, gas::o2);
    Medium both = water;
    both.species.insert(both.species.end(), oxygen.species.begin(), oxygen.species.end());
    for (double f = 100e9; f <= 1000e9; f += 9.7e9) {
        const double k = absorption_coefficient_exact(f, both, db);
        EXPECT_GE(k, 0.0);
        EXPECT_NEAR(k, absorption_coefficient_exact(f, water, db) + absorption_coefficient_exact(f, oxygen, db),
                    1e-12 * k);
    }
}

TEST(Absorption, IsolatedLinePeaksAtShiftedCentre)
{
    auto db = parse_linelist(std::string(kHeader) + "1,1,5.5e11,1e-13,2e8,3e9,1.5e10,0.7\n");
    Medium m;
    m.pressure_atm = 0.8;
    m.species = {{gas::h2o, 1, 0.01}};
    const auto &l = db.lines[0];
    const double fc = l.fc0_hz + l.shift_hz * 0.8;
    const double width = (0.99 * l.alpha_air_hz + 0.01 * l.alpha_self_hz) * 0.8;
    const double at_centre = absorption_coefficient_exact(fc, m, db);
    for (int i = -100; i <= 100; ++i) {
        if (i == 0)
            continue;
        EXPECT_LT(absorption_coefficient_exact(fc + i * 0.1 * width, m, db), at_centre);
    }
}

TEST(Absorption, PeakLocationsMatchOracleBelow450GHz)
{
    const auto &db = test::curated_lines();
    const auto air = reference_humid_air();
    std::vector<double> f, k, ko;
    for (double x = 100e9; x <= 450e9; x += 10e6) {
        f.push_back(x);
        k.push_back(absorption_coefficient_exact(x, air, db));
        ko.push_back(static_cast<double>(oracle_k(x, air, db)));
    }
    const auto pk = local_maxima(f, k), po = local_maxima(f, ko);
    ASSERT_EQ(pk.size(), po.size());
    ASSERT_GE(pk.size(), 3u);
    for (std::size_t i = 0; i < pk.size(); ++i)
        EXPECT_LT(std::abs(pk[i] - po[i]), 0.1e9);
}

TEST(Absorption, NonFiniteInputIsReported)
{
    auto db = parse_linelist(std::string(kHeader) + "1,1,5.5e11,1e300,0,3e9,1.5e10,0.7\n");
    Medium m;
    m.species = {{gas::h2o, 1, 0.5}};
    EXPECT_THROW(absorption_coefficient_exact(5.5e11, m, db), NumericalError);
}

TEST(Approximate, OutOfBandAndForce)
{
    EXPECT_THROW(absorption_coefficient_approx(50e9, 0.0157), OutOfBandError);
    EXPECT_THROW(absorption_coefficient_approx(300e9 - 30e9, 0.0157, ApproxModel::band_275_400), OutOfBandError);
    EXPECT_GE(absorption_coefficient_approx(50e9, 0.0157, ApproxModel::band_100_450, true), 0.0);
}

TEST(Approximate, DryAirIsFiniteAndNonNegative)
{
    for (auto model : {ApproxModel::band_100_450, ApproxModel::band_275_400}) {
        const auto band = approx_validity(model);
        for (double f = band.lo_hz; f <= band.hi_hz; f += 5e9) {
            const double k = absorption_coefficient_approx(f, 0.0, model);
            EXPECT_TRUE(std::isfinite(k));
            EXPECT_GE(k, 0.0);
        }
    }
}

TEST(Approximate, WindowCentreWithinFactorOfExact)
{
    // 350 GHz sits in the window between the 325 and 380 GHz water lines.
    const auto air = reference_humid_air();
    const double exact = absorption_coefficient_exact(350e9, air, test::curated_lines());
    for (auto model : {ApproxModel::band_100_450, ApproxModel::band_275_400}) {
        const double approx = absorption_coefficient_approx(350e9, 0.0157, model);
        EXPECT_GT(approx, exact / 2.0);
        EXPECT_LT(approx, exact * 2.0);
    }
}

TEST(NoiseTemperature, Bounds)
{
    const auto &db = test::curated_lines();
    const auto air = reference_humid_air();
    Medium empty;
    EXPECT_EQ(molecular_noise_temperature(557e9, 10.0, empty, db), 0.0);
    const double t0 = air.reference_temperature_k;
    EXPECT_NEAR(molecular_noise_temperature(557e9, 1e4, air, db), t0, 1e-6 * t0);
    double prev = 0.0;
    for (double d = 1e-3; d < 100.0; d *= 2.0) {
        const double t = molecular_noise_temperature(300e9, d, air, db);
        EXPECT_GT(t, prev);
        EXPECT_LE(t, t0);
        prev = t;
    }
}

TEST(NoisePower, FlatIntegrand)
{
    Medium empty;
    const double p = total_noise_power(300e9, 301e9, 1.0, 290.0, empty, test::curated_lines());
    EXPECT_NEAR(p, PhysicalConstants::k_boltzmann * 290.0 * 1e9, 1e-12 * p);
    EXPECT_EQ(total_noise_power(300e9, 300e9, 1.0, 290.0, empty, test::curated_lines()), 0.0);
}

TEST(NoisePower, StepHalvingConverges)
{
    const auto &db = test::curated_lines();
    const auto air = reference_humid_air();
    const double coarse = total_noise_power(540e9, 570e9, 10.0, 290.0, air, db, {100e6});
    const double fine = total_noise_power(540e9, 570e9, 10.0, 290.0, air, db, {50e6});
    const double finer = total_noise_power(540e9, 570e9, 10.0, 290.0, air, db, {25e6});
    EXPECT_LT(std::abs(fine - coarse), 1e-3 * fine);
    EXPECT_LT(std::abs(finer - fine), std::abs(fine - coarse));
}

TEST(Medium, HumidityConversion)
{
    // 50 % RH at 25 C is close to the 1.57 % water content of the reference mixture.
    EXPECT_NEAR(water_mixing_ratio_from_rh(50.0, 298.15, 1.0), 0.0157, 0.0003);
}
