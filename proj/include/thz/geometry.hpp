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

// Array-of-subarrays geometry, steering/beamforming vectors, antenna gains and
// the spacing/distance rules used for spatial tuning.
//
// Frame convention: each array lies in its local y-z plane with boresight
// along local +x. Azimuth phi is measured in the x-y plane from +x,
// elevation theta from +z, so boresight is (phi, theta) = (0, pi/2).

#include "thz/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace thz {

/// Subarray index, zero-based: m runs along local z (rows), n along local y.
struct SaIndex {
    int m = 0;
    int n = 0;
};

struct ArrayConfig {
    int rows = 1;    // M, subarrays along local z
    int cols = 1;    // N, subarrays along local y
    int q = 1;       // Q, elements per subarray side
    double sa_spacing_m = 1e-3;
    double ae_spacing_m = 0.5e-3;
    double carrier_hz = 300e9;
    Vec3 origin = Vec3::Zero();
    Mat3 orientation = Mat3::Identity(); // columns: local x (boresight), y, z in world frame

    int subarray_count() const { return rows * cols; }
    int elements_per_subarray() const { return q * q; }
    double wavelength() const { return thz::wavelength(carrier_hz); }

    /// Throws on invalid geometry; returns non-fatal warnings.
    std::vector<std::string> validate() const
    {
        require(rows >= 1 && cols >= 1 && q >= 1, "array: M, N, Q must be at least 1");
        require(sa_spacing_m > 0.0, "array: subarray spacing must be positive");
        require(ae_spacing_m > 0.0, "array: element spacing must be positive");
        require(carrier_hz > 0.0, "array: carrier frequency must be positive");
        require((orientation.transpose() * orientation - Mat3::Identity()).norm() < 1e-9,
                "array: orientation must be orthonormal");
        std::vector<std::string> warnings;
        if (ae_spacing_m > wavelength() / 2.0)
            warnings.push_back("array: element spacing exceeds half a wavelength; grating lobes expected");
        return warnings;
    }

    int linear_index(SaIndex idx) const { return idx.m * cols + idx.n; }
    SaIndex sa_index(int linear) const { return {linear / cols, linear % cols}; }
};

/// Rotation taking local +x to `boresight` with local +z as close to `up` as possible.
inline Mat3 orientation_facing(const Vec3 &boresight, const Vec3 &up = Vec3::UnitZ())
{
    const Vec3 x = boresight.normalized();
    Vec3 z = up - up.dot(x) * x;
    require(z.norm() > 1e-12, "orientation: up vector parallel to boresight");
    z.normalize();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return r;
}

inline Vec3 direction(double phi, double theta)
{
    return {std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta)};
}

/// (phi, theta) of a local-frame direction vector.
inline std::pair<double, double> angles_of(const Vec3 &local_dir)
{
    const Vec3 u = local_dir.normalized();
    return {std::atan2(u.y(), u.x()), std::acos(std::clamp(u.z(), -1.0, 1.0))};
}

inline void check_index(const ArrayConfig &cfg, SaIndex idx)
{
    if (idx.m < 0 || idx.m >= cfg.rows || idx.n < 0 || idx.n >= cfg.cols)
        throw InvalidArgument("subarray index (" + std::to_string(idx.m) + ", " + std::to_string(idx.n) +
                              ") outside " + std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols) + " grid");
}

/// Subarray centre in the array's local frame; the grid is centred on the origin.
inline Vec3 sa_center_local(const ArrayConfig &cfg, SaIndex idx)
{
    check_index(cfg, idx);
    const double y = (idx.n - 0.5 * (cfg.cols - 1)) * cfg.sa_spacing_m;
    const double z = (idx.m - 0.5 * (cfg.rows - 1)) * cfg.sa_spacing_m;
    return {0.0, y, z};
}

inline Vec3 sa_center_world(const ArrayConfig &cfg, SaIndex idx)
{
    return cfg.origin + cfg.orientation * sa_center_local(cfg, idx);
}

/// Element offsets from the subarray centre, local frame, ordered (p, q) with p (along z) slowest.
inline std::vector<Vec3> ae_offsets_local(const ArrayConfig &cfg)
{
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(cfg.elements_per_subarray()));
    for (int p = 0; p < cfg.q; ++p)
        for (int qq = 0; qq < cfg.q; ++qq)
            out.emplace_back(0.0, (qq - 0.5 * (cfg.q - 1)) * cfg.ae_spacing_m, (p - 0.5 * (cfg.q - 1)) * cfg.ae_spacing_m);
    return out;
}

/// World coordinates of the Q^2 elements of one subarray.
inline std::vector<Vec3> ae_positions(const ArrayConfig &cfg, SaIndex idx)
{
    const Vec3 c = sa_center_local(cfg, idx);
    auto pts = ae_offsets_local(cfg);
    for (auto &p : pts)
        p = cfg.origin + cfg.orientation * (c + p);
    return pts;
}

struct SteeringVector {
    CVector values;
    double azimuth = 0.0;
    double elevation = 0.0;
};

/// Per-element phases k * psi . u(phi, theta), psi in the array's local frame.
inline RVector element_phases(const ArrayConfig &cfg, SaIndex idx, double phi, double theta)
{
    const double k = 2.0 * pi / cfg.wavelength();
    const Vec3 c = sa_center_local(cfg, idx);
    const Vec3 u = direction(phi, theta);
    const auto offs = ae_offsets_local(cfg);
    RVector out(static_cast<Eigen::Index>(offs.size()));
    for (std::size_t i = 0; i < offs.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = k * (c + offs[i]).dot(u);
    return out;
}

inline SteeringVector steering_vector(const ArrayConfig &cfg, SaIndex idx, double phi, double theta)
{
    const RVector ph = element_phases(cfg, idx, phi, theta);
    SteeringVector sv;
    sv.values.resize(ph.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i)
        sv.values(i) = std::polar(1.0 / cfg.q, ph(i));
    sv.azimuth = phi;
    sv.elevation = theta;
    return sv;
}

/// Analog weights of one subarray steered to the target angles.
inline SteeringVector beamforming_vector(const ArrayConfig &cfg, SaIndex idx, double target_phi, double target_theta)
{
    return steering_vector(cfg, idx, target_phi, target_theta);
}

/// Normalised subarray response (1/Q^2) sum exp(j (Phi(u) - Phi(u_hat))) using
/// offsets from the subarray centre (plane wave within the subarray).
inline cdouble subarray_response(const ArrayConfig &cfg, const Vec3 &local_dir, const Vec3 &target_dir)
{
    const double k = 2.0 * pi / cfg.wavelength();
    const Vec3 du = local_dir.normalized() - target_dir.normalized();
    cdouble acc = 0.0;
    for (const auto &o : ae_offsets_local(cfg))
        acc += std::polar(1.0, k * o.dot(du));
    return acc / static_cast<double>(cfg.elements_per_subarray());
}

/// Equivalent array response over all subarrays, each evaluated at its first
/// element: (1/sqrt(MN)) sum exp(j (Phi - Phi_hat)). `frequency_hz` evaluates
/// the channel phases at another frequency while the weights stay at the carrier.
inline cdouble equivalent_array_gain(const ArrayConfig &cfg, double phi, double theta, double target_phi,
                                     double target_theta, double frequency_hz = 0.0)
{
    const double scale = frequency_hz > 0.0 ? frequency_hz / cfg.carrier_hz : 1.0;
    const double k = 2.0 * pi / cfg.wavelength();
    const Vec3 u = direction(phi, theta);
    const Vec3 uh = direction(target_phi, target_theta);
    const Vec3 ref = ae_offsets_local(cfg).front();
    cdouble acc = 0.0;
    for (int m = 0; m < cfg.rows; ++m)
        for (int n = 0; n < cfg.cols; ++n) {
            const Vec3 psi = sa_center_local(cfg, {m, n}) + ref;
            acc += std::polar(1.0, scale * k * psi.dot(u) - k * psi.dot(uh));
        }
    return acc / std::sqrt(static_cast<double>(cfg.subarray_count()));
}

/// Phase of a subcarrier f_k given the phase at the design frequency f_c.
inline double beam_split_phase(double phase_at_fc, double f_k, double f_c)
{
    require(f_c > 0.0, "beam split: centre frequency must be positive");
    return (f_k / f_c) * phase_at_fc;
}

struct ScanPoint {
    double azimuth;
    double elevation;
};

/// Index of the scan point maximising |equivalent_array_gain|; lowest index on exact ties.
inline std::size_t scan_argmax(const ArrayConfig &cfg, double phi, double theta, const std::vector<ScanPoint> &grid)
{
    require(!grid.empty(), "scan: empty grid");
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mag = std::abs(equivalent_array_gain(cfg, phi, theta, grid[i].azimuth, grid[i].elevation));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

// Antenna element gain patterns.
struct GainModel {
    enum class Mode { sector, approximate, fixed };
    Mode mode = Mode::fixed;
    double g0 = 1.0; // linear power gain (sector and fixed modes)
    double phi_min = -pi, phi_max = pi;
    double theta_min = 0.0, theta_max = pi;
    double hpbw_phi = 2.0 * pi;  // radians (approximate mode)
    double hpbw_theta = 2.0;     // radians (approximate mode)

    void validate() const
    {
        require(g0 > 0.0, "gain model: G0 must be positive");
        require(phi_min <= phi_max && theta_min <= theta_max, "gain model: sector bounds out of order");
        if (mode == Mode::approximate)
            require(hpbw_phi > 0.0 && hpbw_theta > 0.0, "gain model: beamwidths must be positive");
    }

    static GainModel fixed(double g0_linear = 1.0)
    {
        GainModel g;
        g.g0 = g0_linear;
        return g;
    }

    static GainModel sector(double g0_linear, double phi_lo, double phi_hi, double theta_lo, double theta_hi)
    {
        GainModel g;
        g.mode = Mode::sector;
        g.g0 = g0_linear;
        g.phi_min = phi_lo;
        g.phi_max = phi_hi;
        g.theta_min = theta_lo;
        g.theta_max = theta_hi;
        return g;
    }

    static GainModel approximate(double hpbw_phi_rad, double hpbw_theta_rad)
    {
        GainModel g;
        g.mode = Mode::approximate;
        g.hpbw_phi = hpbw_phi_rad;
        g.hpbw_theta = hpbw_theta_rad;
        return g;
    }
};

/// Directivity 4 pi / (psi_phi psi_theta) of a pencil beam with the given half-power beamwidths.
inline double approximate_directivity(double hpbw_phi, double hpbw_theta)
{
    require(hpbw_phi > 0.0 && hpbw_theta > 0.0, "directivity: beamwidths must be positive");
    return 4.0 * pi / (hpbw_phi * hpbw_theta);
}

/// Amplitude gain sqrt(G0) inside the sector, 0 outside.
inline double antenna_gain(const GainModel &model, double phi, double theta)
{
    switch (model.mode) {
    case GainModel::Mode::fixed:
        return std::sqrt(model.g0);
    case GainModel::Mode::sector:
        return (phi >= model.phi_min && phi <= model.phi_max && theta >= model.theta_min && theta <= model.theta_max)
                   ? std::sqrt(model.g0)
                   : 0.0;
    case GainModel::Mode::approximate: {
        const bool inside = std::abs(phi) <= model.hpbw_phi / 2.0 &&
                            std::abs(theta - pi / 2.0) <= model.hpbw_theta / 2.0;
        return inside ? std::sqrt(approximate_directivity(model.hpbw_phi, model.hpbw_theta)) : 0.0;
    }
    }
    return 0.0;
}

/// max{M, N} Delta_r Delta_t / lambda, M and N the receive and transmit antenna counts.
inline double rayleigh_distance(double m_count, double n_count, double spacing_rx, double spacing_tx, double lambda)
{
    require(m_count > 0 && n_count > 0 && spacing_rx > 0 && spacing_tx > 0 && lambda > 0,
            "rayleigh distance: all inputs must be positive");
    return std::max(m_count, n_count) * spacing_rx * spacing_tx / lambda;
}

/// sqrt(z D lambda / M) for odd z; M is the element count along one array dimension.
inline double optimal_sa_spacing(int z, double distance, double lambda, double m_count)
{
    require(z > 0 && z % 2 == 1, "optimal spacing: z must be an odd positive integer");
    require(distance > 0 && lambda > 0 && m_count > 0, "optimal spacing: inputs must be positive");
    return std::sqrt(z * distance * lambda / m_count);
}

enum class FieldRegion { reactive_near_field, fresnel, far_field };

inline const char *to_string(FieldRegion r)
{
    switch (r) {
    case FieldRegion::reactive_near_field: return "reactive-near-field";
    case FieldRegion::fresnel: return "fresnel";
    case FieldRegion::far_field: return "far-field";
    }
    return "?";
}

inline double fresnel_lower_bound(double aperture, double lambda)
{
    return 0.62 * std::sqrt(aperture * aperture * aperture / lambda);
}

inline double fraunhofer_distance(double aperture, double lambda) { return 2.0 * aperture * aperture / lambda; }

/// 0.62 sqrt(D^3/lambda) <= d < 2 D^2/lambda is Fresnel; lower edge inclusive.
inline FieldRegion fresnel_region(double d, double aperture, double lambda)
{
    require(d > 0 && aperture > 0 && lambda > 0, "fresnel region: inputs must be positive");
    if (d >= fraunhofer_distance(aperture, lambda))
        return FieldRegion::far_field;
    if (d >= fresnel_lower_bound(aperture, lambda))
        return FieldRegion::fresnel;
    return FieldRegion::reactive_near_field;
}

} // namespace thz
