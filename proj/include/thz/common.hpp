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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace thz {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;

inline constexpr const char *version_string = "0.1.0";

// CODATA 2018 exact / recommended values.
struct PhysicalConstants {
    static constexpr double c0 = 299792458.0;            // m/s
    static constexpr double k_boltzmann = 1.380649e-23;  // J/K
    static constexpr double h_planck = 6.62607015e-34;   // J s
    static constexpr double r_gas = 8.314462618;         // J/(mol K)
    static constexpr double n_avogadro = 6.02214076e23;  // 1/mol
    static constexpr double t_stp = 273.15;              // K, standard temperature
    static constexpr double atm_pa = 101325.0;           // Pa per atm
};

/// Thrown when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a meaningful result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &what)
{
    if (!cond)
        throw InvalidArgument(what);
}

inline double wavelength(double frequency_hz)
{
    return PhysicalConstants::c0 / frequency_hz;
}

inline double to_db(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double deg2rad(double deg) { return deg * pi / 180.0; }

// Random streams. Every stochastic routine takes an explicit Rng so results
// are a pure function of (inputs, seed).
using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent child seeds from (root, counter).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter)
{
    std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cdouble complex_normal(Rng &rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline CVector complex_normal_vector(Rng &rng, Eigen::Index n, double variance)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = complex_normal(rng, variance);
    return v;
}

/// Ratio of largest to smallest singular value; infinity for singular input.
inline double condition_number(const CMatrix &m)
{
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto &s = svd.singularValues();
    if (s.size() == 0)
        return 1.0;
    const double smin = s(s.size() - 1);
    if (smin <= 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

} // namespace thz
