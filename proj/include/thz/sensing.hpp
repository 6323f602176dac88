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

// Gas sensing from per-subarray channel measurements: each subarray pair is
// tuned to its own frequency, the absorption coefficient is read off the
// measured attenuation and mixing ratios follow from nonnegative least squares
// against per-gas basis spectra.

#include "thz/channel.hpp"
#include "thz/common.hpp"
#include "thz/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace thz {

struct SensingObservation {
    int pair = 0;
    double frequency_hz = 0.0;
    double distance_m = 0.0;
    cdouble response{};
};

struct SensingModel {
    ChannelMatrix channel;          // diagonal, one entry per subarray pair
    std::vector<cdouble> geometric; // the same entries without absorption
    std::vector<double> frequencies_hz;
    std::vector<double> distances_m;
    std::vector<double> absorption; // K(f_n) of the generating medium

    std::vector<SensingObservation> observations() const
    {
        std::vector<SensingObservation> out;
        for (std::size_t i = 0; i < geometric.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            out.push_back({static_cast<int>(i), frequencies_hz[i], distances_m[i], channel.entries(k, k)});
        }
        return out;
    }
};

/// Diagonal sensing channel: tx subarray i talks to rx subarray i on plan[i].
/// Entry i is the geometric LoS gain times exp(-K(f_i) d_i / 2).
inline SensingModel build_sensing_model(const ArrayConfig &tx, const ArrayConfig &rx, const Medium &medium,
                                        const LineDatabase &db, const std::vector<double> &plan,
                                        const LinkOptions &opts = {})
{
    medium.validate();
    const auto n = static_cast<std::size_t>(tx.subarray_count());
    if (static_cast<std::size_t>(rx.subarray_count()) != n || plan.size() != n)
        throw InvalidArgument("sensing: frequency plan has " + std::to_string(plan.size()) + " entries for " +
                              std::to_string(tx.subarray_count()) + " tx and " + std::to_string(rx.subarray_count()) +
                              " rx subarrays");
    SensingModel m;
    m.channel.entries = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.channel.reference_distance_m = (rx.origin - tx.origin).norm();
    m.channel.frequency_hz = n ? plan.front() : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(plan[i] > 0.0, "sensing: plan frequencies must be positive");
        ArrayConfig t = tx, r = rx;
        t.carrier_hz = r.carrier_hz = plan[i];
        detail::check_link(t, r, opts);
        const int idx = static_cast<int>(i);
        const cdouble geo = los_entry(t, idx, r, idx, 0.0, opts);
        const double k = absorption_coefficient_exact(plan[i], medium, db, opts.absorption);
        const double d = (sa_center_world(r, r.sa_index(idx)) - sa_center_world(t, t.sa_index(idx))).norm();
        m.geometric.push_back(geo);
        m.frequencies_hz.push_back(plan[i]);
        m.distances_m.push_back(d);
        m.absorption.push_back(k);
        m.channel.entries(idx, idx) = geo * std::exp(-0.5 * k * d);
    }
    return m;
}

/// Adds CN(0, |h|^2 / snr) to every observation.
inline std::vector<SensingObservation> add_observation_noise(std::vector<SensingObservation> obs, double snr_db,
                                                             Rng &rng)
{
    const double snr = from_db(snr_db);
    for (auto &o : obs)
        o.response += complex_normal(rng, std::norm(o.response) / snr);
    return obs;
}

struct AbsorptionEstimate {
    std::vector<double> k;
    std::vector<bool> clipped;
};

/// K(f_n) = -(2/d) ln(|h_meas| / |h_geo|); ratios above one clip to K = 0.
inline AbsorptionEstimate extract_absorption(const std::vector<SensingObservation> &obs,
                                             const std::vector<cdouble> &geometric)
{
    require(obs.size() == geometric.size(), "sensing: one geometric gain per observation required");
    AbsorptionEstimate out;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double g = std::abs(geometric[i]);
        if (!(g > 0.0))
            throw InvalidArgument("sensing: geometric gain of observation " + std::to_string(i) + " is zero");
        require(obs[i].distance_m > 0.0, "sensing: observation distance must be positive");
        const double ratio = std::abs(obs[i].response) / g;
        if (ratio >= 1.0) {
            out.k.push_back(0.0);
            out.clipped.push_back(ratio > 1.0);
        } else {
            out.k.push_back(-2.0 / obs[i].distance_m * std::log(ratio));
            out.clipped.push_back(false);
        }
    }
    return out;
}

struct NnlsResult {
    RVector x;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Lawson-Hanson active-set NNLS: min ||A x - b|| subject to x >= 0.
inline NnlsResult nnls(const RMatrix &a, const RVector &b, double tol = 1e-12, int max_iter = 0)
{
    require(a.rows() == b.size(), "nnls: dimension mismatch");
    const auto n = a.cols();
    if (max_iter <= 0)
        max_iter = static_cast<int>(10 * std::max<Eigen::Index>(n, 1));
    RVector x = RVector::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double scale = std::max(1.0, a.norm() * b.norm());
    NnlsResult res;

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)])
                idx.push_back(j);
        RMatrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const RVector zp = ap.colPivHouseholderQr().solve(b);
        RVector z = RVector::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k)
            z(idx[k]) = zp(static_cast<Eigen::Index>(k));
        return z;
    };

    for (;;) {
        const RVector w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double wmax = tol * scale;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > wmax) {
                wmax = w(j);
                best = j;
            }
        if (best < 0 || res.iterations >= max_iter)
            break;
        passive[static_cast<std::size_t>(best)] = true;
        ++res.iterations;
        for (;;) {
            RVector z = solve_passive();
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
                    feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
                    alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol * std::max(1.0, x.cwiseAbs().maxCoeff())) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
        }
    }
    res.x = x;
    res.residual_norm = (a * x - b).norm();
    return res;
}

/// K^g(f) per unit mixing ratio of gas g. Isotopes are weighted by their
/// share in the template, and broadening is held at the template composition
/// (or at `broadening_q` when given).
inline double basis_spectrum(int gas_id, double f, const Medium &tmpl, const LineDatabase &db,
                             const AbsorptionOptions &opts = {}, std::optional<double> broadening_q = std::nullopt)
{
    const double q_gas = tmpl.gas_mixing_ratio(gas_id);
    const auto lo = std::lower_bound(db.lines.begin(), db.lines.end(), f - opts.line_cutoff_hz,
                                     [](const AbsorptionLine &l, double v) { return l.fc0_hz < v; });
    double k = 0.0;
    for (auto it = lo; it != db.lines.end() && it->fc0_hz <= f + opts.line_cutoff_hz; ++it) {
        if (it->gas != gas_id)
            continue;
        const double q_iso = tmpl.mixing_ratio(gas_id, it->isotope);
        const double weight = q_gas > 0.0 ? q_iso / q_gas : (it->isotope == 1 ? 1.0 : 0.0);
        const double share = q_gas > 0.0 ? weight : 1.0;
        const double bq = broadening_q ? *broadening_q * share : q_iso;
        k += line_absorption(*it, f, tmpl, weight, bq);
    }
    return k;
}

struct GasEstimate {
    std::vector<int> gases;
    std::vector<double> mixing_ratio;
    std::vector<double> covariance_proxy; // diag((A^T A)^-1)
    double residual_norm = 0.0;
    double condition = 0.0;
};

struct EstimateOptions {
    std::vector<int> gases;   // unknowns; empty means every template gas with lines in the database
    bool refine = false;      // one fixed-point pass re-evaluating broadening at the first estimate
    double max_condition = 1e12;
    AbsorptionOptions absorption;
};

inline std::vector<int> absorbing_gases(const Medium &tmpl, const LineDatabase &db)
{
    std::vector<int> out;
    for (const auto &s : tmpl.species) {
        const bool has_lines =
            std::any_of(db.lines.begin(), db.lines.end(), [&](const AbsorptionLine &l) { return l.gas == s.gas; });
        if (has_lines && std::find(out.begin(), out.end(), s.gas) == out.end())
            out.push_back(s.gas);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline GasEstimate estimate_mixture(const std::vector<double> &frequencies_hz, const std::vector<double> &k_hat,
                                    const LineDatabase &db, const Medium &tmpl, const EstimateOptions &opts = {})
{
    require(frequencies_hz.size() == k_hat.size(), "estimate: one K sample per frequency required");
    const std::vector<int> gases = opts.gases.empty() ? absorbing_gases(tmpl, db) : opts.gases;
    require(!gases.empty(), "estimate: no unknown gases");
    const auto nf = static_cast<Eigen::Index>(frequencies_hz.size());
    const auto ng = static_cast<Eigen::Index>(gases.size());
    if (nf < ng)
        throw InvalidArgument("estimate: " + std::to_string(nf) + " frequencies for " + std::to_string(ng) +
                              " unknown gases");
    const RVector b = Eigen::Map<const RVector>(k_hat.data(), nf);

    auto solve = [&](const std::vector<std::optional<double>> &broadening) {
        RMatrix a(nf, ng);
        for (Eigen::Index i = 0; i < nf; ++i)
            for (Eigen::Index g = 0; g < ng; ++g)
                a(i, g) = basis_spectrum(gases[static_cast<std::size_t>(g)], frequencies_hz[static_cast<std::size_t>(i)],
                                         tmpl, db, opts.absorption, broadening[static_cast<std::size_t>(g)]);
        // Column scaling keeps the conditioning test and NNLS unit-free.
        RVector norms = a.colwise().norm().transpose();
        for (Eigen::Index g = 0; g < ng; ++g)
            if (!(norms(g) > 0.0))
                throw NumericalError("estimate: ill-conditioned frequency plan (" +
                                     gas_name(gases[static_cast<std::size_t>(g)]) +
                                     " has no absorption on the plan); choose frequencies nearer distinct line centres");
        const RMatrix as = a * norms.cwiseInverse().asDiagonal();
        Eigen::JacobiSVD<RMatrix> svd(as);
        const auto &s = svd.singularValues();
        const double cond = s(ng - 1) > 0.0 ? s(0) / s(ng - 1) : std::numeric_limits<double>::infinity();
        if (!(cond <= opts.max_condition))
            throw NumericalError("estimate: ill-conditioned frequency plan (condition number " +
                                 detail::format_g17(cond) + "); choose frequencies nearer distinct line centres");
        const auto sol = nnls(as, b);
        GasEstimate est;
        est.gases = gases;
        est.condition = cond;
        est.residual_norm = sol.residual_norm;
        const RMatrix inv = (a.transpose() * a).inverse();
        for (Eigen::Index g = 0; g < ng; ++g) {
            est.mixing_ratio.push_back(sol.x(g) / norms(g));
            est.covariance_proxy.push_back(inv(g, g));
        }
        return est;
    };

    std::vector<std::optional<double>> broadening(gases.size());
    GasEstimate est = solve(broadening);
    if (opts.refine) {
        for (std::size_t g = 0; g < gases.size(); ++g)
            broadening[g] = est.mixing_ratio[g];
        est = solve(broadening);
    }
    return est;
}

/// Greedy plan: for each gas in turn, take the `per_gas` unused candidates
/// where that gas's basis spectrum most dominates the others. Ties go to the
/// lower candidate index.
inline std::vector<double> advise_frequency_plan(const std::vector<double> &candidates, const std::vector<int> &gases,
                                                 const Medium &tmpl, const LineDatabase &db, int per_gas = 1,
                                                 const AbsorptionOptions &opts = {})
{
    require(per_gas >= 1, "plan advisor: per-gas count must be positive");
    require(candidates.size() >= gases.size() * static_cast<std::size_t>(per_gas),
            "plan advisor: not enough candidate frequencies");
    RMatrix a(static_cast<Eigen::Index>(candidates.size()), static_cast<Eigen::Index>(gases.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t g = 0; g < gases.size(); ++g)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
                basis_spectrum(gases[g], candidates[i], tmpl, db, opts) * std::max(tmpl.gas_mixing_ratio(gases[g]), 1e-12);
    std::vector<bool> used(candidates.size(), false);
    std::vector<double> plan;
    for (std::size_t g = 0; g < gases.size(); ++g)
        for (int k = 0; k < per_gas; ++k) {
            std::size_t best = candidates.size();
            double score_best = -1.0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (used[i])
                    continue;
                const auto row = static_cast<Eigen::Index>(i);
                const double total = a.row(row).sum();
                const double score = total > 0.0 ? a(row, static_cast<Eigen::Index>(g)) / total : 0.0;
                if (score > score_best) {
                    score_best = score;
                    best = i;
                }
            }
            used[best] = true;
            plan.push_back(candidates[best]);
        }
    return plan;
}

// Observations CSV: `pair,f_hz,d_m,re,im`.

inline void write_observations_csv(const std::vector<SensingObservation> &obs, std::ostream &out)
{
    out << "pair,f_hz,d_m,re,im\n";
    for (const auto &o : obs)
        out << o.pair << ',' << detail::format_g17(o.frequency_hz) << ',' << detail::format_g17(o.distance_m) << ','
            << detail::format_g17(o.response.real()) << ',' << detail::format_g17(o.response.imag()) << '\n';
}

inline std::vector<SensingObservation> read_observations_csv(std::istream &in)
{
    std::vector<SensingObservation> out;
    std::string raw;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header) {
            if (line != "pair,f_hz,d_m,re,im")
                throw InvalidArgument("observations csv: line " + std::to_string(lineno) +
                                      ": expected header pair,f_hz,d_m,re,im");
            header = true;
            continue;
        }
        const auto cols = detail::split_csv(line);
        SensingObservation o;
        double re = 0.0, im = 0.0;
        if (cols.size() != 5 || !detail::parse_int(cols[0], o.pair) || !detail::parse_double(cols[1], o.frequency_hz) ||
            !detail::parse_double(cols[2], o.distance_m) || !detail::parse_double(cols[3], re) ||
            !detail::parse_double(cols[4], im))
            throw InvalidArgument("observations csv: line " + std::to_string(lineno) + ": malformed row");
        require(o.frequency_hz > 0.0, "observations csv: line " + std::to_string(lineno) + ": frequency must be positive");
        o.response = {re, im};
        out.push_back(o);
    }
    return out;
}

} // namespace thz
