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

// Baseband precoding, hybrid DAoSA precoding, quantized precoder outputs and
// power-domain NOMA.

#include "thz/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace thz {

/// Right pseudo-inverse of H scaled so that ||W||_F^2 = power. H W = c I.
inline CMatrix zf_precoder(const CMatrix &h, double power)
{
    require(power >= 0.0, "zf: power must be non-negative");
    require(h.rows() >= 1 && h.rows() <= h.cols(), "zf: need 1 <= streams <= transmit dimension");
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 1e-12 * s(0)))
        throw NumericalError("zf: channel is rank deficient (smallest singular value " + std::to_string(smin) + ")");
    const CMatrix pinv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    return pinv * std::sqrt(power / pinv.squaredNorm());
}

/// Scale c with H W = c I for a zf_precoder output.
inline double zf_gain(const CMatrix &h, const CMatrix &w) { return (h * w).diagonal().real().mean(); }

struct WaterFilling {
    RVector powers;
    double level = 0.0;
};

/// Maximise sum log2(1 + p_i g_i) subject to sum p_i = total. The water level is
/// found by bisection to an absolute tolerance of 1e-10.
inline WaterFilling water_filling(const RVector &gains, double total, double tol = 1e-10)
{
    require(total >= 0.0, "water-filling: total power must be non-negative");
    for (Eigen::Index i = 0; i < gains.size(); ++i)
        require(gains(i) >= 0.0 && std::isfinite(gains(i)), "water-filling: gains must be finite and non-negative");
    WaterFilling out;
    out.powers = RVector::Zero(gains.size());
    if (total == 0.0 || gains.size() == 0 || gains.maxCoeff() <= 0.0)
        return out;
    auto filled = [&](double mu) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < gains.size(); ++i)
            if (gains(i) > 0.0)
                acc += std::max(0.0, mu - 1.0 / gains(i));
        return acc;
    };
    double lo = 0.0;
    double hi = total + 1.0 / gains.maxCoeff();
    while (filled(hi) < total)
        hi *= 2.0;
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (filled(mid) < total ? lo : hi) = mid;
    }
    out.level = 0.5 * (lo + hi);
    for (Eigen::Index i = 0; i < gains.size(); ++i)
        if (gains(i) > 0.0)
            out.powers(i) = std::max(0.0, out.level - 1.0 / gains(i));
    const double sum = out.powers.sum();
    if (sum > 0.0)
        out.powers *= total / sum;
    return out;
}

// Hybrid DAoSA precoding.

/// Boolean subarray-to-RF-chain connection mask, n_sa x n_rf.
using ConnectionMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline ConnectionMask fully_connected_mask(int n_sa, int n_rf) { return ConnectionMask::Constant(n_sa, n_rf, true); }

/// Fixed AoSA: subarray s drives RF chain s * n_rf / n_sa.
inline ConnectionMask aosa_mask(int n_sa, int n_rf)
{
    require(n_sa >= n_rf && n_rf >= 1, "aosa mask: need n_sa >= n_rf >= 1");
    ConnectionMask m = ConnectionMask::Constant(n_sa, n_rf, false);
    for (int s = 0; s < n_sa; ++s)
        m(s, s * n_rf / n_sa) = true;
    return m;
}

/// Each RF chain drives only the first subarray of its fixed-AoSA block, so
/// the mask is contained in aosa_mask, which is contained in the full mask.
inline ConnectionMask single_connection_mask(int n_sa, int n_rf)
{
    const ConnectionMask aosa = aosa_mask(n_sa, n_rf);
    ConnectionMask m = ConnectionMask::Constant(n_sa, n_rf, false);
    for (int j = 0; j < n_rf; ++j)
        for (int s = 0; s < n_sa; ++s)
            if (aosa(s, j)) {
                m(s, j) = true;
                break;
            }
    return m;
}

struct PrecoderSet {
    CMatrix analog;          // P_A, (n_sa Q^2) x n_rf
    CMatrix digital;         // P_D, n_rf x N_s
    CMatrix analog_combiner; // C_A, empty when the receiver is not modelled
    CMatrix digital_combiner;
    ConnectionMask mask;     // n_sa x n_rf

    CMatrix effective() const { return analog * digital; }
};

/// Analog precoder from per-(SA, RF) phases. Connected blocks carry
/// exp(j theta) / sqrt(Q^2 n_conn(rf)); unconnected blocks are zero.
/// `phases` is (n_sa Q^2) x n_rf; entries outside the mask are ignored.
inline CMatrix analog_from_phases(const ConnectionMask &mask, int elements_per_sa, const RMatrix &phases)
{
    require(elements_per_sa >= 1, "analog precoder: elements per subarray must be positive");
    const auto n_sa = mask.rows(), n_rf = mask.cols();
    require(phases.rows() == n_sa * elements_per_sa && phases.cols() == n_rf, "analog precoder: phase matrix shape");
    CMatrix pa = CMatrix::Zero(n_sa * elements_per_sa, n_rf);
    for (Eigen::Index j = 0; j < n_rf; ++j) {
        const auto n_conn = mask.col(j).count();
        if (n_conn == 0)
            continue;
        const double amp = 1.0 / std::sqrt(static_cast<double>(elements_per_sa * n_conn));
        for (Eigen::Index s = 0; s < n_sa; ++s)
            if (mask(s, j))
                for (int e = 0; e < elements_per_sa; ++e) {
                    const auto r = s * elements_per_sa + e;
                    pa(r, j) = std::polar(amp, phases(r, j));
                }
    }
    return pa;
}

/// Checks the phase-shifter constraint of P_A against the mask.
inline bool honours_mask(const CMatrix &pa, const ConnectionMask &mask, int elements_per_sa, double tol = 1e-9)
{
    if (pa.rows() != mask.rows() * elements_per_sa || pa.cols() != mask.cols())
        return false;
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        const auto n_conn = mask.col(j).count();
        const double amp = n_conn ? 1.0 / std::sqrt(static_cast<double>(elements_per_sa * n_conn)) : 0.0;
        for (Eigen::Index r = 0; r < pa.rows(); ++r) {
            const bool on = mask(r / elements_per_sa, j);
            if (std::abs(std::abs(pa(r, j)) - (on ? amp : 0.0)) > tol)
                return false;
        }
    }
    return true;
}

/// R = log2 det(I + (p / (N_s sigma^2)) H F F^H H^H), F = P_A P_D, evaluated
/// at N_s x N_s size via det(I + AB) = det(I + BA).
inline double daosa_rate(const CMatrix &h, const CMatrix &pa, const CMatrix &pd, double power, double noise_var,
                         int n_streams)
{
    require(power >= 0.0, "rate: power must be non-negative");
    require(noise_var > 0.0, "rate: noise variance must be positive");
    require(n_streams >= 1, "rate: at least one stream");
    if (h.cols() != pa.rows() || pa.cols() != pd.rows() || pd.cols() != n_streams)
        throw InvalidArgument("rate: dimension mismatch (H " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                              ", P_A " + std::to_string(pa.rows()) + "x" + std::to_string(pa.cols()) + ", P_D " +
                              std::to_string(pd.rows()) + "x" + std::to_string(pd.cols()) + ")");
    const CMatrix hf = h * pa * pd;
    const CMatrix g = CMatrix::Identity(n_streams, n_streams) +
                      (power / (n_streams * noise_var)) * (hf.adjoint() * hf);
    Eigen::LDLT<CMatrix> ldlt(g);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("rate: determinant factorisation failed");
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n_streams; ++i)
        logdet += std::log2(ldlt.vectorD()(i).real());
    if (!std::isfinite(logdet))
        throw NumericalError("rate: non-finite determinant");
    return std::max(0.0, logdet);
}

inline double daosa_rate(const CMatrix &h, const PrecoderSet &ps, double power, double noise_var, int n_streams)
{
    return daosa_rate(h, ps.analog, ps.digital, power, noise_var, n_streams);
}

/// Rate-optimal digital precoder for a fixed P_A under ||P_A P_D||_F^2 <= N_s:
/// water-filling over the right singular vectors of H U, U an orthonormal
/// basis of range(P_A).
inline CMatrix optimal_digital_precoder(const CMatrix &h, const CMatrix &pa, double power, double noise_var,
                                        int n_streams)
{
    require(h.cols() == pa.rows(), "digital precoder: dimension mismatch");
    CMatrix pd = CMatrix::Zero(pa.cols(), n_streams);
    Eigen::JacobiSVD<CMatrix> sa(pa, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = sa.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, sv(0)))
        ++rank;
    if (rank == 0)
        return pd;
    const CMatrix u = sa.matrixU().leftCols(rank);
    Eigen::JacobiSVD<CMatrix> se(h * u, Eigen::ComputeThinV);
    const Eigen::Index k = std::min<Eigen::Index>({rank, n_streams, se.singularValues().size()});
    const double snr = power / (n_streams * noise_var);
    RVector gains = se.singularValues().head(k).array().square() * snr;
    const auto wf = water_filling(gains, static_cast<double>(n_streams));
    // F = U V_k diag(sqrt p); P_D = P_A^+ F.
    const CMatrix f = u * se.matrixV().leftCols(k) * wf.powers.cwiseSqrt().cast<cdouble>().asDiagonal();
    const CMatrix pa_pinv = sa.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal() *
                            sa.matrixU().leftCols(rank).adjoint();
    pd.leftCols(k) = pa_pinv * f;
    return pd;
}

/// Round phases to a uniform grid of 2^bits levels.
inline double quantize_phase(double phase, int bits)
{
    require(bits >= 1 && bits <= 30, "phase quantizer: bits must lie in [1, 30]");
    const double step = 2.0 * pi / static_cast<double>(1 << bits);
    return step * std::round(phase / step);
}

struct DaosaOptions {
    double power = 1.0;
    double noise_var = 1.0;
    int n_streams = 1;
    int elements_per_sa = 1;
    std::optional<int> phase_bits; // quantized phase shifters when set
};

/// Two-stage heuristic for one mask. Analog: each connected block of column j
/// takes the phases of the j-th dominant right singular vector of H on that
/// block. Digital: water-filling on the effective channel.
inline PrecoderSet heuristic_precoders(const CMatrix &h, const ConnectionMask &mask, const DaosaOptions &o)
{
    require(h.cols() == mask.rows() * o.elements_per_sa, "daosa: channel width does not match mask and Q^2");
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullV);
    const CMatrix &v = svd.matrixV();
    RMatrix phases = RMatrix::Zero(h.cols(), mask.cols());
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        const auto col = std::min<Eigen::Index>(j, v.cols() - 1);
        for (Eigen::Index r = 0; r < h.cols(); ++r) {
            const double ph = std::arg(v(r, col));
            phases(r, j) = o.phase_bits ? quantize_phase(ph, *o.phase_bits) : ph;
        }
    }
    PrecoderSet ps;
    ps.mask = mask;
    ps.analog = analog_from_phases(mask, o.elements_per_sa, phases);
    ps.digital = optimal_digital_precoder(h, ps.analog, o.power, o.noise_var, o.n_streams);
    return ps;
}

struct SwitchResult {
    std::size_t mask_index = 0;
    PrecoderSet precoders;
    double rate = 0.0;
    std::vector<double> candidate_rates;
};

/// Best mask under the heuristic precoders. Rates within 1e-12 relative are
/// ties and go to the lower index.
inline SwitchResult daosa_switch_search(const CMatrix &h, const std::vector<ConnectionMask> &masks,
                                        const DaosaOptions &o)
{
    require(!masks.empty(), "daosa: candidate mask set is empty");
    SwitchResult best;
    best.rate = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < masks.size(); ++i) {
        auto ps = heuristic_precoders(h, masks[i], o);
        const double r = daosa_rate(h, ps, o.power, o.noise_var, o.n_streams);
        best.candidate_rates.push_back(r);
        if (i == 0 || r > best.rate + 1e-12 * std::max(1.0, std::abs(best.rate))) {
            best.rate = r;
            best.mask_index = i;
            best.precoders = std::move(ps);
        }
    }
    return best;
}

/// Exhaustive search over a uniform phase grid for one mask, with the optimal
/// digital precoder for every analog candidate. The first connected entry of
/// each column is held at phase 0 (a common column phase does not change the
/// rate). Intended for toy sizes; refuses more than 2^22 candidates.
inline SwitchResult exhaustive_daosa(const CMatrix &h, const ConnectionMask &mask, const DaosaOptions &o,
                                     int grid_points = 8)
{
    require(grid_points >= 2, "exhaustive: grid needs at least two points");
    require(h.cols() == mask.rows() * o.elements_per_sa, "exhaustive: channel width does not match mask and Q^2");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> free;
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        bool first = true;
        for (Eigen::Index r = 0; r < h.cols(); ++r)
            if (mask(r / o.elements_per_sa, j)) {
                if (!first)
                    free.emplace_back(r, j);
                first = false;
            }
    }
    const double log_count = static_cast<double>(free.size()) * std::log2(grid_points);
    require(log_count <= 22.0, "exhaustive: search space too large");
    std::size_t total = 1;
    for (std::size_t i = 0; i < free.size(); ++i)
        total *= static_cast<std::size_t>(grid_points);

    SwitchResult best;
    best.rate = -std::numeric_limits<double>::infinity();
    RMatrix phases = RMatrix::Zero(h.cols(), mask.cols());
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (const auto &[r, j] : free) {
            phases(r, j) = 2.0 * pi * static_cast<double>(c % grid_points) / grid_points;
            c /= grid_points;
        }
        PrecoderSet ps;
        ps.mask = mask;
        ps.analog = analog_from_phases(mask, o.elements_per_sa, phases);
        ps.digital = optimal_digital_precoder(h, ps.analog, o.power, o.noise_var, o.n_streams);
        const double rate = daosa_rate(h, ps, o.power, o.noise_var, o.n_streams);
        if (rate > best.rate) {
            best.rate = rate;
            best.precoders = std::move(ps);
        }
    }
    return best;
}

// Quantized precoder outputs.

struct QuantizerSpec {
    std::vector<double> labels;

    void validate() const
    {
        require(labels.size() >= 2, "quantizer: need at least two labels");
        for (std::size_t i = 1; i < labels.size(); ++i)
            require(labels[i] > labels[i - 1], "quantizer: labels must be strictly increasing");
    }

    static QuantizerSpec one_bit() { return {{-1.0, 1.0}}; }
};

/// Nearest label; an exact midpoint goes to the lower label.
inline double quantize_component(double x, const QuantizerSpec &spec)
{
    const auto &l = spec.labels;
    auto it = std::lower_bound(l.begin(), l.end(), x);
    if (it == l.begin())
        return l.front();
    if (it == l.end())
        return l.back();
    const double hi = *it, lo = *(it - 1);
    return (x - lo <= hi - x) ? lo : hi;
}

inline CVector quantize_precoder_output(const CVector &x, const QuantizerSpec &spec)
{
    spec.validate();
    CVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i) = {quantize_component(x(i).real(), spec), quantize_component(x(i).imag(), spec)};
    return out;
}

// Power-domain NOMA.

struct NomaStream {
    CVector symbols; // unit average energy per symbol, length S_i
    double power = 1.0; // p_i per symbol
};

struct NomaSignal {
    CVector signal;                 // sum_i H_i sqrt(p_i) x_i, noiseless
    std::vector<CMatrix> effective; // H_i, the last S_i columns of H
};

/// Total transmit energy sum_i p_i S_i.
inline double noma_transmit_energy(const std::vector<NomaStream> &streams)
{
    double acc = 0.0;
    for (const auto &s : streams)
        acc += s.power * static_cast<double>(s.symbols.size());
    return acc;
}

inline NomaSignal noma_superpose(const std::vector<NomaStream> &streams, const CMatrix &h,
                                 std::optional<double> power_budget = std::nullopt)
{
    require(!streams.empty(), "noma: at least one stream");
    if (streams.front().symbols.size() != h.cols())
        throw InvalidArgument("noma: first stream must span all " + std::to_string(h.cols()) + " transmit dimensions");
    for (std::size_t i = 0; i < streams.size(); ++i) {
        require(streams[i].power >= 0.0, "noma: stream power must be non-negative");
        require(streams[i].symbols.size() >= 1, "noma: stream dimension must be at least 1");
        if (i > 0)
            require(streams[i].symbols.size() <= streams[i - 1].symbols.size(),
                    "noma: stream dimensions must be nonincreasing");
    }
    if (power_budget)
        require(noma_transmit_energy(streams) <= *power_budget * (1.0 + 1e-12), "noma: power budget exceeded");
    NomaSignal out;
    out.signal = CVector::Zero(h.rows());
    for (const auto &s : streams) {
        CMatrix hi = h.rightCols(s.symbols.size());
        out.signal += std::sqrt(s.power) * (hi * s.symbols);
        out.effective.push_back(std::move(hi));
    }
    return out;
}

/// Closed form of E||sum_i H_i sqrt(p_i) x_i||^2 for independent unit-energy symbols.
inline double noma_expected_energy(const std::vector<NomaStream> &streams, const CMatrix &h)
{
    double acc = 0.0;
    for (const auto &s : streams)
        acc += s.power * h.rightCols(s.symbols.size()).squaredNorm();
    return acc;
}

struct TwoUserReceived {
    CVector y1;
    CVector y2;
};

/// y_k = H_k x1 + H_k x2 + n_k.
inline TwoUserReceived two_user_noma_model(const CMatrix &h1, const CMatrix &h2, const CVector &x1,
                                           const CVector &x2, const CVector &n1, const CVector &n2)
{
    if (h1.cols() != x1.size() || h1.cols() != x2.size() || h2.cols() != x1.size() || h1.rows() != n1.size() ||
        h2.rows() != n2.size())
        throw InvalidArgument("two-user noma: dimension mismatch");
    return {h1 * x1 + h1 * x2 + n1, h2 * x1 + h2 * x2 + n2};
}

inline TwoUserReceived two_user_noma_model(const CMatrix &h1, const CMatrix &h2, const CVector &x1,
                                           const CVector &x2, double noise_var, Rng &rng)
{
    require(noise_var >= 0.0, "two-user noma: noise variance must be non-negative");
    const CVector n1 = complex_normal_vector(rng, h1.rows(), noise_var);
    const CVector n2 = complex_normal_vector(rng, h2.rows(), noise_var);
    return two_user_noma_model(h1, h2, x1, x2, n1, n2);
}

} // namespace thz
