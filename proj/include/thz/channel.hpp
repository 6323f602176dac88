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

// SA-level channel synthesis: LoS with molecular absorption, clustered
// Saleh-Valenzuela multipath, misalignment fading, hardware impairments and
// IRS cascades.

#include "thz/common.hpp"
#include "thz/geometry.hpp"
#include "thz/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace thz {

struct ChannelMatrix {
    enum class Kind { los, nlos, cascade };

    CMatrix entries;
    double frequency_hz = 0.0;
    double reference_distance_m = 0.0;
    Kind kind = Kind::los;
    std::uint64_t seed = 0;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

inline const char *to_string(ChannelMatrix::Kind k)
{
    switch (k) {
    case ChannelMatrix::Kind::los: return "los";
    case ChannelMatrix::Kind::nlos: return "nlos";
    case ChannelMatrix::Kind::cascade: return "cascade";
    }
    return "?";
}

/// Free-space spreading c0/(4 pi f d), absorption exp(-K d / 2) and propagation phase.
inline cdouble los_path_gain_k(double f, double d, double k_abs)
{
    require(d > 0.0, "path gain: distance must be positive");
    require(f > 0.0, "path gain: frequency must be positive");
    const double mag = PhysicalConstants::c0 / (4.0 * pi * f * d) * std::exp(-0.5 * k_abs * d);
    const double phase = -2.0 * pi * std::fmod(f * d / PhysicalConstants::c0, 1.0);
    return std::polar(mag, phase);
}

inline cdouble los_path_gain(double f, double d, const Medium &medium, const LineDatabase &db,
                             const AbsorptionOptions &opts = {})
{
    return los_path_gain_k(f, d, absorption_coefficient_exact(f, medium, db, opts));
}

/// Spreading loss 20 log10(4 pi f d / c0) in dB.
inline double spreading_loss_db(double f, double d)
{
    return 20.0 * std::log10(4.0 * pi * f * d / PhysicalConstants::c0);
}

/// Molecular absorption loss 10 log10(exp(K d)) in dB.
inline double absorption_loss_db(double k_abs, double d) { return 10.0 * k_abs * d / std::log(10.0); }

struct LinkOptions {
    GainModel tx_gain = GainModel::fixed();
    GainModel rx_gain = GainModel::fixed();
    /// World points the analog beams are steered to; default is the peer array origin.
    std::optional<Vec3> tx_target;
    std::optional<Vec3> rx_target;
    /// Skip the check that each array has the other in its front half-space.
    bool allow_non_facing = false;
    AbsorptionOptions absorption;
};

namespace detail {

struct PairGeometry {
    double distance;
    Vec3 tx_dir; // departure direction, tx local frame
    Vec3 rx_dir; // arrival direction (towards the source), rx local frame
};

inline PairGeometry pair_geometry(const ArrayConfig &tx, SaIndex it, const ArrayConfig &rx, SaIndex ir)
{
    const Vec3 pt = sa_center_world(tx, it);
    const Vec3 pr = sa_center_world(rx, ir);
    const Vec3 delta = pr - pt;
    const double d = delta.norm();
    if (d <= 1e-15)
        throw InvalidArgument("channel: arrays overlap (zero distance between subarrays)");
    const Vec3 u = delta / d;
    return {d, tx.orientation.transpose() * u, rx.orientation.transpose() * (-u)};
}

inline void check_facing(const ArrayConfig &a, const Vec3 &peer, const char *who)
{
    const Vec3 local = a.orientation.transpose() * (peer - a.origin);
    if (local.x() <= 0.0)
        throw InvalidArgument(std::string("channel: ") + who + " array does not face its peer (boresight test failed)");
}

inline Vec3 beam_target_local(const ArrayConfig &a, const std::optional<Vec3> &target, const Vec3 &peer)
{
    const Vec3 t = target.value_or(peer);
    const Vec3 v = a.orientation.transpose() * (t - a.origin);
    require(v.norm() > 0.0, "channel: beam target coincides with array origin");
    return v.normalized();
}

inline void check_link(const ArrayConfig &tx, const ArrayConfig &rx, const LinkOptions &opts)
{
    tx.validate();
    rx.validate();
    opts.tx_gain.validate();
    opts.rx_gain.validate();
    require(std::abs(tx.carrier_hz - rx.carrier_hz) <= 1e-9 * tx.carrier_hz,
            "channel: transmit and receive carriers differ");
    if (!opts.allow_non_facing) {
        check_facing(tx, rx.origin, "transmit");
        check_facing(rx, tx.origin, "receive");
    }
}

inline CVector local_steering(const ArrayConfig &a, const Vec3 &local_dir)
{
    const double k = 2.0 * pi / a.wavelength();
    const auto offs = ae_offsets_local(a);
    CVector v(static_cast<Eigen::Index>(offs.size()));
    for (std::size_t i = 0; i < offs.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = std::polar(1.0 / a.q, k * offs[i].dot(local_dir));
    return v;
}

} // namespace detail

/// One SA-level LoS entry b_r G_r alpha G_t b_t between tx subarray t and rx
/// subarray r, with exact pair distance and angles. b is the subarray's
/// normalised response towards its analog beam target.
inline cdouble los_entry(const ArrayConfig &tx, int t, const ArrayConfig &rx, int r, double k_abs,
                         const LinkOptions &opts = {})
{
    const double f = tx.carrier_hz;
    const Vec3 tx_beam = detail::beam_target_local(tx, opts.tx_target, rx.origin);
    const Vec3 rx_beam = detail::beam_target_local(rx, opts.rx_target, tx.origin);
    const auto g = detail::pair_geometry(tx, tx.sa_index(t), rx, rx.sa_index(r));
    const auto [phi_t, theta_t] = angles_of(g.tx_dir);
    const auto [phi_r, theta_r] = angles_of(g.rx_dir);
    const cdouble alpha = los_path_gain_k(f, g.distance, k_abs);
    const double gt = antenna_gain(opts.tx_gain, phi_t, theta_t);
    const double gr = antenna_gain(opts.rx_gain, phi_r, theta_r);
    return subarray_response(rx, g.rx_dir, rx_beam) * gr * alpha * gt * subarray_response(tx, g.tx_dir, tx_beam);
}

/// SA-level LoS channel, (Mr Nr) x (Mt Nt), built from los_entry.
inline ChannelMatrix los_channel(const ArrayConfig &tx, const ArrayConfig &rx, const Medium &medium,
                                 const LineDatabase &db, const LinkOptions &opts = {})
{
    detail::check_link(tx, rx, opts);
    const double k_abs = absorption_coefficient_exact(tx.carrier_hz, medium, db, opts.absorption);
    ChannelMatrix h;
    h.entries.resize(rx.subarray_count(), tx.subarray_count());
    h.frequency_hz = tx.carrier_hz;
    h.reference_distance_m = (rx.origin - tx.origin).norm();
    h.kind = ChannelMatrix::Kind::los;
    for (int r = 0; r < rx.subarray_count(); ++r)
        for (int t = 0; t < tx.subarray_count(); ++t)
            h.entries(r, t) = los_entry(tx, t, rx, r, k_abs, opts);
    return h;
}

/// Element-level LoS channel, (Mr Nr Qr^2) x (Mt Nt Qt^2). Block (r, t) is
/// G_r alpha G_t a_r a_t^T with normalised steering vectors, so that combining
/// block r with its beamforming vector and block t with the conjugate of its
/// beamforming vector reproduces los_channel entry (r, t).
inline ChannelMatrix ae_level_channel(const ArrayConfig &tx, const ArrayConfig &rx, const Medium &medium,
                                      const LineDatabase &db, const LinkOptions &opts = {})
{
    detail::check_link(tx, rx, opts);
    const double f = tx.carrier_hz;
    const double k_abs = absorption_coefficient_exact(f, medium, db, opts.absorption);
    const int qt = tx.elements_per_subarray();
    const int qr = rx.elements_per_subarray();
    ChannelMatrix h;
    h.entries.resize(rx.subarray_count() * qr, tx.subarray_count() * qt);
    h.frequency_hz = f;
    h.reference_distance_m = (rx.origin - tx.origin).norm();
    for (int r = 0; r < rx.subarray_count(); ++r)
        for (int t = 0; t < tx.subarray_count(); ++t) {
            const auto g = detail::pair_geometry(tx, tx.sa_index(t), rx, rx.sa_index(r));
            const auto [phi_t, theta_t] = angles_of(g.tx_dir);
            const auto [phi_r, theta_r] = angles_of(g.rx_dir);
            const cdouble scale = antenna_gain(opts.rx_gain, phi_r, theta_r) * los_path_gain_k(f, g.distance, k_abs) *
                                  antenna_gain(opts.tx_gain, phi_t, theta_t);
            h.entries.block(r * qr, t * qt, qr, qt) =
                scale * detail::local_steering(rx, g.rx_dir) * detail::local_steering(tx, g.tx_dir).transpose();
        }
    return h;
}

/// Block-diagonal analog beamformer (Q^2 M N) x (M N) steering every subarray
/// to the beam target. Columns have unit norm.
inline CMatrix analog_beamformer(const ArrayConfig &a, const Vec3 &target_local_dir)
{
    const int qq = a.elements_per_subarray();
    CMatrix w = CMatrix::Zero(a.subarray_count() * qq, a.subarray_count());
    const CVector s = detail::local_steering(a, target_local_dir);
    for (int i = 0; i < a.subarray_count(); ++i)
        w.block(i * qq, i, qq, 1) = s;
    return w;
}

// Saleh-Valenzuela multipath.

/// Zero-mean two-component Gaussian mixture for ray angle offsets.
struct GaussianMixture {
    double weight = 0.5; // probability of the first component
    double sigma1 = deg2rad(2.0);
    double sigma2 = deg2rad(8.0);

    double sample(Rng &rng) const
    {
        std::bernoulli_distribution pick(weight);
        const double s = pick(rng) ? sigma1 : sigma2;
        return std::normal_distribution<double>(0.0, s)(rng);
    }
};

struct AngleRange {
    double lo;
    double hi;
};

struct MultipathProfile {
    int clusters = 0;
    int rays_per_cluster = 1;
    double cluster_decay_s = 10e-9;       // Gamma
    double ray_decay_s = 2e-9;            // gamma
    double cluster_arrival_rate_hz = 0.0; // exponential inter-arrival rate; 0 puts every cluster at tau = 0
    double ray_arrival_rate_hz = 0.0;
    AngleRange azimuth{-pi / 2.0, pi / 2.0};
    AngleRange elevation{pi / 4.0, 3.0 * pi / 4.0};
    GaussianMixture azimuth_offset{};
    GaussianMixture elevation_offset{};
    std::uint64_t seed = 0;

    void validate() const
    {
        require(clusters >= 0, "multipath: cluster count must be non-negative");
        require(rays_per_cluster >= 1, "multipath: at least one ray per cluster");
        require(cluster_decay_s > 0.0 && ray_decay_s > 0.0, "multipath: decay constants must be positive");
        require(cluster_arrival_rate_hz >= 0.0 && ray_arrival_rate_hz >= 0.0, "multipath: arrival rates must be non-negative");
        require(azimuth.lo <= azimuth.hi && elevation.lo <= elevation.hi, "multipath: angle ranges out of order");
    }
};

struct Ray {
    int cluster;
    double cluster_delay_s; // tau_v
    double ray_delay_s;     // tau_bar_{v,u}, relative to the cluster
    double phi_t, theta_t;  // departure, tx local frame
    double phi_r, theta_r;  // arrival, rx local frame
    cdouble fading;         // unit-mean-power complex gain
};

/// Draw clusters and rays. Deterministic in profile.seed.
inline std::vector<Ray> generate_rays(const MultipathProfile &p)
{
    p.validate();
    Rng rng(p.seed);
    std::uniform_real_distribution<double> az(p.azimuth.lo, p.azimuth.hi);
    std::uniform_real_distribution<double> el(p.elevation.lo, p.elevation.hi);
    auto exp_step = [&rng](double rate) {
        return rate > 0.0 ? std::exponential_distribution<double>(rate)(rng) : 0.0;
    };
    std::vector<Ray> rays;
    double tau = 0.0;
    for (int v = 0; v < p.clusters; ++v) {
        if (v > 0)
            tau += exp_step(p.cluster_arrival_rate_hz);
        const double cphi_t = az(rng), ctheta_t = el(rng), cphi_r = az(rng), ctheta_r = el(rng);
        double tau_bar = 0.0;
        for (int u = 0; u < p.rays_per_cluster; ++u) {
            if (u > 0)
                tau_bar += exp_step(p.ray_arrival_rate_hz);
            Ray r;
            r.cluster = v;
            r.cluster_delay_s = tau;
            r.ray_delay_s = tau_bar;
            r.phi_t = cphi_t + p.azimuth_offset.sample(rng);
            r.theta_t = ctheta_t + p.elevation_offset.sample(rng);
            r.phi_r = cphi_r + p.azimuth_offset.sample(rng);
            r.theta_r = ctheta_r + p.elevation_offset.sample(rng);
            r.fading = complex_normal(rng, 1.0);
            rays.push_back(r);
        }
    }
    return rays;
}

/// E|alpha|^2 = (c0 / 4 pi f d)^2 exp(-K d) exp(-tau / Gamma) exp(-tau_bar / gamma).
inline double sv_mean_path_power(double f, double d, double k_abs, double tau, double tau_bar,
                                 const MultipathProfile &p)
{
    const double spread = PhysicalConstants::c0 / (4.0 * pi * f * d);
    return spread * spread * std::exp(-k_abs * d) * std::exp(-tau / p.cluster_decay_s) *
           std::exp(-tau_bar / p.ray_decay_s);
}

/// Clustered NLoS channel. Every ray is a plane wave across the arrays, with
/// amplitude drawn around the mean path power of the subarray pair.
inline ChannelMatrix sv_nlos_channel(const ArrayConfig &tx, const ArrayConfig &rx, const Medium &medium,
                                     const LineDatabase &db, const MultipathProfile &profile,
                                     const LinkOptions &opts = {})
{
    tx.validate();
    rx.validate();
    const double f = tx.carrier_hz;
    const double k_abs = absorption_coefficient_exact(f, medium, db, opts.absorption);
    const auto rays = generate_rays(profile);
    const Vec3 tx_beam = detail::beam_target_local(tx, opts.tx_target, rx.origin);
    const Vec3 rx_beam = detail::beam_target_local(rx, opts.rx_target, tx.origin);
    const double k = 2.0 * pi / tx.wavelength();

    ChannelMatrix h;
    h.entries = CMatrix::Zero(rx.subarray_count(), tx.subarray_count());
    h.frequency_hz = f;
    h.reference_distance_m = (rx.origin - tx.origin).norm();
    h.kind = ChannelMatrix::Kind::nlos;
    h.seed = profile.seed;
    for (const auto &ray : rays) {
        const Vec3 ut = direction(ray.phi_t, ray.theta_t);
        const Vec3 ur = direction(ray.phi_r, ray.theta_r);
        const cdouble bt = subarray_response(tx, ut, tx_beam);
        const cdouble br = subarray_response(rx, ur, rx_beam);
        const double gt = antenna_gain(opts.tx_gain, ray.phi_t, ray.theta_t);
        const double gr = antenna_gain(opts.rx_gain, ray.phi_r, ray.theta_r);
        for (int r = 0; r < rx.subarray_count(); ++r)
            for (int t = 0; t < tx.subarray_count(); ++t) {
                const auto g = detail::pair_geometry(tx, tx.sa_index(t), rx, rx.sa_index(r));
                const double amp =
                    std::sqrt(sv_mean_path_power(f, g.distance, k_abs, ray.cluster_delay_s, ray.ray_delay_s, profile));
                const double manifold = k * (sa_center_local(tx, tx.sa_index(t)).dot(ut) +
                                             sa_center_local(rx, rx.sa_index(r)).dot(ur));
                h.entries(r, t) += br * gr * (amp * ray.fading * std::polar(1.0, manifold)) * gt * bt;
            }
    }
    return h;
}

// Misalignment and impairments.

struct MisalignmentConfig {
    double a0 = 1.0;     // collected power fraction
    double w_eq_m = 1.0; // equivalent beamwidth at the receiver
    double radial_offset_m = 0.0;

    void validate() const
    {
        require(a0 > 0.0 && a0 <= 1.0, "misalignment: A0 must lie in (0, 1]");
        require(w_eq_m > 0.0, "misalignment: equivalent beamwidth must be positive");
        require(radial_offset_m >= 0.0, "misalignment: radial offset must be non-negative");
    }
};

/// h_ma = A0 exp(-2 r^2 / w_eq^2). The distance enters only through w_eq.
inline double misalignment_factor(const MisalignmentConfig &cfg, double /*distance*/ = 0.0)
{
    cfg.validate();
    const double r = cfg.radial_offset_m;
    return cfg.a0 * std::exp(-2.0 * r * r / (cfg.w_eq_m * cfg.w_eq_m));
}

/// Radial pointing error for isotropic Gaussian jitter of standard deviation sigma per axis.
inline double draw_radial_offset(Rng &rng, double sigma_m)
{
    std::normal_distribution<double> n(0.0, sigma_m);
    return std::hypot(n(rng), n(rng));
}

/// alpha-mu envelope normalised so that E[R^alpha] = 1.
struct AlphaMu {
    double alpha = 2.0;
    double mu = 1.0;

    double sample(Rng &rng) const
    {
        require(alpha > 0.0 && mu > 0.0, "alpha-mu: parameters must be positive");
        const double g = std::gamma_distribution<double>(mu, 1.0 / mu)(rng);
        return std::pow(g, 1.0 / alpha);
    }
};

/// h_eff = h h_ma h_st entrywise; h_st is 1 unless an alpha-mu law is given.
inline ChannelMatrix apply_misalignment(const ChannelMatrix &h, const MisalignmentConfig &cfg,
                                        const std::optional<AlphaMu> &stochastic = std::nullopt,
                                        std::uint64_t seed = 0)
{
    ChannelMatrix out = h;
    const double ma = misalignment_factor(cfg, h.reference_distance_m);
    out.entries *= ma;
    if (stochastic) {
        Rng rng(seed);
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i)
                out.entries(i, j) *= stochastic->sample(rng);
    }
    return out;
}

struct ImpairmentConfig {
    double eta_t = 0.0;
    double eta_r = 0.0;
    double power_w = 1.0; // average transmit power
    std::uint64_t seed = 0;

    void validate() const
    {
        require(eta_t >= 0.0 && eta_r >= 0.0, "impairments: coefficients must be non-negative");
        require(power_w > 0.0, "impairments: average power must be positive");
    }
};

/// y = H (x + n_t) + n_f + n. Var n_t = eta_t^2 p; Var n_f(i) = eta_r^2 p times
/// the mean energy of row i of H; Var n = noise_var.
inline CVector apply_impairments(const CMatrix &h, const CVector &x, const ImpairmentConfig &cfg, double noise_var,
                                 Rng &rng)
{
    cfg.validate();
    require(noise_var >= 0.0, "impairments: noise variance must be non-negative");
    if (h.cols() != x.size())
        throw InvalidArgument("impairments: H has " + std::to_string(h.cols()) + " columns but x has " +
                              std::to_string(x.size()) + " entries");
    const CVector nt = complex_normal_vector(rng, x.size(), cfg.eta_t * cfg.eta_t * cfg.power_w);
    CVector y = h * (x + nt);
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double row_energy = h.row(i).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(h.cols(), 1));
        y(i) += complex_normal(rng, cfg.eta_r * cfg.eta_r * cfg.power_w * row_energy);
    }
    y += complex_normal_vector(rng, h.rows(), noise_var);
    return y;
}

inline CVector apply_impairments(const CMatrix &h, const CVector &x, const ImpairmentConfig &cfg, double noise_var)
{
    Rng rng(cfg.seed);
    return apply_impairments(h, x, cfg, noise_var, rng);
}

// Intelligent reflecting surfaces.

struct IRSConfig {
    int rows = 1;
    int cols = 1;
    double spacing_m = 1e-3;
    Vec3 origin = Vec3::Zero();
    Mat3 orientation = Mat3::Identity();
    std::vector<double> beta;  // per element, row-major; empty means all 1
    std::vector<double> omega; // per element, radians; empty means all 0
    bool binary = false;

    int element_count() const { return rows * cols; }

    void validate() const
    {
        require(rows >= 1 && cols >= 1, "irs: dimensions must be at least 1");
        require(spacing_m > 0.0, "irs: element spacing must be positive");
        const auto n = static_cast<std::size_t>(element_count());
        require(beta.empty() || beta.size() == n, "irs: beta size does not match element count");
        require(omega.empty() || omega.size() == n, "irs: omega size does not match element count");
        for (double b : beta) {
            require(b >= 0.0 && b <= 1.0, "irs: beta outside [0, 1]");
            if (binary)
                require(b == 0.0 || b == 1.0, "irs: binary mode requires beta in {0, 1}");
        }
    }

    /// The surface as an array of single-element subarrays.
    ArrayConfig as_array(double carrier_hz) const
    {
        ArrayConfig a;
        a.rows = rows;
        a.cols = cols;
        a.q = 1;
        a.sa_spacing_m = spacing_m;
        a.ae_spacing_m = spacing_m;
        a.carrier_hz = carrier_hz;
        a.origin = origin;
        a.orientation = orientation;
        return a;
    }

    CMatrix phase_matrix() const
    {
        const auto n = element_count();
        CMatrix phi = CMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const double b = beta.empty() ? 1.0 : beta[static_cast<std::size_t>(i)];
            const double w = omega.empty() ? 0.0 : omega[static_cast<std::size_t>(i)];
            phi(i, i) = std::polar(b, w);
        }
        return phi;
    }
};

struct IrsChannels {
    ChannelMatrix tx_to_irs; // H_TI
    ChannelMatrix irs_to_rx; // H_IR
    ChannelMatrix cascade;   // H_IR Phi H_TI
};

/// Cascade H_IR Phi H_TI with both hops synthesised by los_channel. Transmit
/// and receive beams point at the surface centre; elements are unit-gain.
inline IrsChannels irs_cascade(const ArrayConfig &tx, const IRSConfig &irs, const ArrayConfig &rx,
                               const Medium &medium, const LineDatabase &db, const LinkOptions &opts = {})
{
    irs.validate();
    const ArrayConfig surface = irs.as_array(tx.carrier_hz);

    LinkOptions first = opts;
    first.rx_gain = GainModel::fixed();
    first.rx_target.reset();
    first.tx_target = opts.tx_target.value_or(irs.origin);
    LinkOptions second = opts;
    second.tx_gain = GainModel::fixed();
    second.tx_target.reset();
    second.rx_target = opts.rx_target.value_or(irs.origin);

    IrsChannels out;
    out.tx_to_irs = los_channel(tx, surface, medium, db, first);
    out.irs_to_rx = los_channel(surface, rx, medium, db, second);
    const CMatrix phi = irs.phase_matrix();
    if (out.irs_to_rx.cols() != phi.rows() || phi.cols() != out.tx_to_irs.rows())
        throw InvalidArgument("irs: dimension mismatch in cascade");
    out.cascade.entries = out.irs_to_rx.entries * phi * out.tx_to_irs.entries;
    out.cascade.frequency_hz = tx.carrier_hz;
    out.cascade.reference_distance_m = out.tx_to_irs.reference_distance_m + out.irs_to_rx.reference_distance_m;
    out.cascade.kind = ChannelMatrix::Kind::cascade;
    return out;
}

// CSV export: `row,col,re,im` plus a `key,value` metadata sidecar.

inline void write_matrix_csv(const CMatrix &m, std::ostream &out)
{
    out << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << i << ',' << j << ',' << detail::format_g17(m(i, j).real()) << ','
                << detail::format_g17(m(i, j).imag()) << '\n';
}

inline CMatrix read_matrix_csv(std::istream &in)
{
    std::string raw;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<std::tuple<long, long, cdouble>> cells;
    long nr = 0, nc = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header) {
            if (line != "row,col,re,im")
                throw InvalidArgument("matrix csv: line " + std::to_string(lineno) + ": expected header row,col,re,im");
            header = true;
            continue;
        }
        const auto cols = detail::split_csv(line);
        int i = 0, j = 0;
        double re = 0, im = 0;
        if (cols.size() != 4 || !detail::parse_int(cols[0], i) || !detail::parse_int(cols[1], j) ||
            !detail::parse_double(cols[2], re) || !detail::parse_double(cols[3], im) || i < 0 || j < 0)
            throw InvalidArgument("matrix csv: line " + std::to_string(lineno) + ": malformed row");
        cells.emplace_back(i, j, cdouble(re, im));
        nr = std::max<long>(nr, i + 1);
        nc = std::max<long>(nc, j + 1);
    }
    CMatrix m = CMatrix::Zero(nr, nc);
    for (const auto &[i, j, v] : cells)
        m(i, j) = v;
    return m;
}

inline void write_channel_metadata(const ChannelMatrix &h, std::ostream &out)
{
    out << "key,value\n"
        << "frequency_hz," << detail::format_g17(h.frequency_hz) << '\n'
        << "distance_m," << detail::format_g17(h.reference_distance_m) << '\n'
        << "kind," << to_string(h.kind) << '\n'
        << "seed," << h.seed << '\n'
        << "rows," << h.rows() << '\n'
        << "cols," << h.cols() << '\n';
}

inline ChannelMatrix read_channel(std::istream &matrix_csv, std::istream &metadata)
{
    ChannelMatrix h;
    h.entries = read_matrix_csv(matrix_csv);
    std::string raw;
    std::map<std::string, std::string> kv;
    while (std::getline(metadata, raw)) {
        const auto cols = detail::split_csv(detail::trim(raw));
        if (cols.size() == 2)
            kv[std::string(cols[0])] = std::string(cols[1]);
    }
    auto num = [&](const char *key) {
        double v = 0.0;
        if (!kv.count(key) || !detail::parse_double(kv[key], v))
            throw InvalidArgument(std::string("channel metadata: missing or bad '") + key + "'");
        return v;
    };
    h.frequency_hz = num("frequency_hz");
    h.reference_distance_m = num("distance_m");
    const std::string kind = kv.count("kind") ? kv["kind"] : "los";
    h.kind = kind == "nlos" ? ChannelMatrix::Kind::nlos
                            : kind == "cascade" ? ChannelMatrix::Kind::cascade : ChannelMatrix::Kind::los;
    h.seed = kv.count("seed") ? std::stoull(kv["seed"]) : 0;
    const auto rows = static_cast<Eigen::Index>(num("rows"));
    const auto cols = static_cast<Eigen::Index>(num("cols"));
    if (rows != h.rows() || cols != h.cols()) {
        CMatrix padded = CMatrix::Zero(rows, cols);
        require(h.rows() <= rows && h.cols() <= cols, "channel metadata: dimensions smaller than matrix data");
        padded.topLeftCorner(h.rows(), h.cols()) = h.entries;
        h.entries = padded;
    }
    return h;
}

} // namespace thz
