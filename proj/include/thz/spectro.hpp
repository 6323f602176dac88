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

// Line-by-line molecular absorption: line-list ingestion, the exact and
// fitted absorption coefficients, and absorption-induced noise.

#include "thz/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace thz {

// HITRAN molecule numbers for the gases the tools know by name.
namespace gas {
inline constexpr int h2o = 1;
inline constexpr int co2 = 2;
inline constexpr int ch4 = 6;
inline constexpr int o2 = 7;
inline constexpr int n2 = 22;
} // namespace gas

inline std::string gas_name(int id)
{
    switch (id) {
    case gas::h2o: return "H2O";
    case gas::co2: return "CO2";
    case gas::ch4: return "CH4";
    case gas::o2: return "O2";
    case gas::n2: return "N2";
    default: return "gas" + std::to_string(id);
    }
}

inline int gas_id(std::string_view name)
{
    static const std::map<std::string, int, std::less<>> ids{
        {"H2O", gas::h2o}, {"CO2", gas::co2}, {"CH4", gas::ch4}, {"O2", gas::o2}, {"N2", gas::n2}};
    if (auto it = ids.find(name); it != ids.end())
        return it->second;
    throw InvalidArgument("unknown gas name '" + std::string(name) + "' (expected H2O, CO2, CH4, O2 or N2)");
}

struct Species {
    int gas = 0;
    int isotope = 1;
    double mixing_ratio = 0.0;
};

/// Absorbing medium: thermodynamic state plus per-isotopologue mixing ratios.
struct Medium {
    double temperature_k = 296.0;
    double pressure_atm = 1.0;
    double reference_temperature_k = 296.0;
    double reference_pressure_atm = 1.0;
    std::vector<Species> species;

    void validate() const
    {
        require(temperature_k > 0.0, "medium: temperature must be positive");
        require(pressure_atm > 0.0, "medium: pressure must be positive");
        require(reference_temperature_k > 0.0, "medium: reference temperature must be positive");
        require(reference_pressure_atm > 0.0, "medium: reference pressure must be positive");
        double total = 0.0;
        for (const auto &s : species) {
            require(s.mixing_ratio >= 0.0 && s.mixing_ratio <= 1.0,
                    "medium: mixing ratio of " + gas_name(s.gas) + " outside [0, 1]");
            total += s.mixing_ratio;
        }
        require(total <= 1.0 + 1e-9, "medium: mixing ratios sum above 1");
    }

    double mixing_ratio(int gas_id, int isotope) const
    {
        double q = 0.0;
        for (const auto &s : species)
            if (s.gas == gas_id && s.isotope == isotope)
                q += s.mixing_ratio;
        return q;
    }

    /// Sum over all isotopes of one gas.
    double gas_mixing_ratio(int gas_id) const
    {
        double q = 0.0;
        for (const auto &s : species)
            if (s.gas == gas_id)
                q += s.mixing_ratio;
        return q;
    }
};

/// 298.15 K, 1 atm, N2 76.545 %, O2 20.946 %, H2O 1.57 %, CO2 0.033 %, CH4 0.906 %.
inline Medium reference_humid_air()
{
    Medium m;
    m.temperature_k = 298.15;
    m.species = {{gas::n2, 1, 0.76545},
                 {gas::o2, 1, 0.20946},
                 {gas::h2o, 1, 0.0157},
                 {gas::co2, 1, 0.00033},
                 {gas::ch4, 1, 0.00906}};
    return m;
}

/// Water-vapour volume mixing ratio from relative humidity (Buck equation).
inline double water_mixing_ratio_from_rh(double rh_percent, double temperature_k, double pressure_atm)
{
    const double p_hpa = pressure_atm * 1013.25;
    const double tc = temperature_k - 273.15;
    const double p_sat = 6.1121 * (1.0007 + 3.46e-6 * p_hpa) * std::exp(17.502 * tc / (240.97 + tc));
    return rh_percent / 100.0 * p_sat / p_hpa;
}

/// One spectroscopic line, SI units. Widths and shift are at the reference pressure.
struct AbsorptionLine {
    int gas = 0;
    int isotope = 1;
    double fc0_hz = 0.0;
    double intensity = 0.0; // Hz m^2 per molecule
    double shift_hz = 0.0;
    double alpha_air_hz = 0.0;
    double alpha_self_hz = 0.0;
    double temperature_exponent = 0.0;

    bool operator==(const AbsorptionLine &) const = default;
};

struct LineDatabase {
    std::vector<AbsorptionLine> lines; // ascending fc0_hz
    std::string source_label;

    bool empty() const { return lines.empty(); }
    std::size_t size() const { return lines.size(); }
    bool operator==(const LineDatabase &o) const { return lines == o.lines; }
};

class LineListParseError : public InvalidArgument {
public:
    LineListParseError(std::size_t line, const std::string &field, const std::string &what)
        : InvalidArgument("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(field)
    {
    }
    std::size_t line() const { return line_; }
    const std::string &field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

inline constexpr std::string_view linelist_header = "gas,isotope,fc0_hz,S,delta_hz,alpha_air_hz,alpha_gas_hz,gamma";

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double &out)
{
    if (s.empty())
        return false;
    if (s.front() == '+')
        s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_int(std::string_view s, int &out)
{
    if (s.empty())
        return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Parse the line-list CSV. Rows are validated and the result is sorted by
/// resonance frequency. `#` lines and blank lines are ignored.
inline LineDatabase parse_linelist(std::istream &in, std::string source_label = {})
{
    static constexpr std::string_view fields[] = {"gas", "isotope", "fc0_hz", "S",
                                                  "delta_hz", "alpha_air_hz", "alpha_gas_hz", "gamma"};
    LineDatabase db;
    db.source_label = std::move(source_label);
    std::set<std::tuple<int, int, double>> seen;
    bool have_header = false;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (!have_header) {
            if (line != linelist_header)
                throw LineListParseError(lineno, "header", "expected '" + std::string(linelist_header) + "'");
            have_header = true;
            continue;
        }
        const auto cols = detail::split_csv(line);
        if (cols.size() != std::size(fields))
            throw LineListParseError(lineno, "row", "expected 8 fields, got " + std::to_string(cols.size()));

        AbsorptionLine l;
        if (!detail::parse_int(cols[0], l.gas))
            throw LineListParseError(lineno, "gas", "not an integer");
        if (!detail::parse_int(cols[1], l.isotope))
            throw LineListParseError(lineno, "isotope", "not an integer");
        double *targets[] = {&l.fc0_hz, &l.intensity, &l.shift_hz, &l.alpha_air_hz, &l.alpha_self_hz,
                             &l.temperature_exponent};
        for (std::size_t i = 0; i < 6; ++i)
            if (!detail::parse_double(cols[i + 2], *targets[i]))
                throw LineListParseError(lineno, std::string(fields[i + 2]), "not a finite decimal number");

        if (l.fc0_hz <= 0.0)
            throw LineListParseError(lineno, "fc0_hz", "must be positive");
        if (l.intensity < 0.0)
            throw LineListParseError(lineno, "S", "must be non-negative");
        if (l.alpha_air_hz <= 0.0)
            throw LineListParseError(lineno, "alpha_air_hz", "must be positive");
        if (l.alpha_self_hz <= 0.0)
            throw LineListParseError(lineno, "alpha_gas_hz", "must be positive");
        if (!seen.emplace(l.gas, l.isotope, l.fc0_hz).second)
            throw LineListParseError(lineno, "fc0_hz", "duplicate (gas, isotope, fc0_hz) triple");
        db.lines.push_back(l);
    }
    if (!have_header)
        throw LineListParseError(lineno, "header", "missing header");
    std::stable_sort(db.lines.begin(), db.lines.end(),
                     [](const AbsorptionLine &a, const AbsorptionLine &b) { return a.fc0_hz < b.fc0_hz; });
    return db;
}

inline LineDatabase parse_linelist(const std::string &text, std::string source_label = {})
{
    std::istringstream in(text);
    return parse_linelist(in, std::move(source_label));
}

/// Canonical CSV form, 17 significant digits so the round trip is exact.
inline void serialize_linelist(const LineDatabase &db, std::ostream &out)
{
    out << linelist_header << '\n';
    for (const auto &l : db.lines) {
        out << l.gas << ',' << l.isotope << ',' << detail::format_g17(l.fc0_hz) << ','
            << detail::format_g17(l.intensity) << ',' << detail::format_g17(l.shift_hz) << ','
            << detail::format_g17(l.alpha_air_hz) << ',' << detail::format_g17(l.alpha_self_hz) << ','
            << detail::format_g17(l.temperature_exponent) << '\n';
    }
}

inline std::string serialize_linelist(const LineDatabase &db)
{
    std::ostringstream out;
    serialize_linelist(db, out);
    return out.str();
}

struct AbsorptionOptions {
    /// Lines centred further than this from the query frequency are skipped.
    double line_cutoff_hz = 2e12;
};

/// Contribution of a single line. `amount_q` scales the molecule density and
/// `broadening_q` sets the self/air broadening mix; both equal the species
/// mixing ratio in the plain model.
inline double line_absorption(const AbsorptionLine &line, double f, const Medium &medium, double amount_q,
                              double broadening_q)
{
    using C = PhysicalConstants;
    if (amount_q == 0.0 || line.intensity == 0.0)
        return 0.0;
    const double t = medium.temperature_k;
    const double p_ratio = medium.pressure_atm / medium.reference_pressure_atm;
    const double fc = line.fc0_hz + line.shift_hz * p_ratio;
    const double width = ((1.0 - broadening_q) * line.alpha_air_hz + broadening_q * line.alpha_self_hz) * p_ratio *
                         std::pow(medium.reference_temperature_k / t, line.temperature_exponent);
    const double density = p_ratio * (C::t_stp / t) * (medium.pressure_atm * C::atm_pa / (C::r_gas * t)) * amount_q *
                           C::n_avogadro;
    const double x = C::h_planck / (2.0 * C::k_boltzmann * t);
    const double thermal = std::tanh(x * f) / std::tanh(x * fc);
    const double w2 = width * width;
    const double shape = (width / pi) * (f / fc) * (1.0 / ((f - fc) * (f - fc) + w2) + 1.0 / ((f + fc) * (f + fc) + w2));
    return density * line.intensity * (f / fc) * thermal * shape;
}

/// Absorption coefficient K(f) in 1/m (power attenuation exp(-K d)).
inline double absorption_coefficient_exact(double f, const Medium &medium, const LineDatabase &db,
                                           const AbsorptionOptions &opts = {})
{
    require(f > 0.0, "absorption coefficient: frequency must be positive");
    const auto lo = std::lower_bound(db.lines.begin(), db.lines.end(), f - opts.line_cutoff_hz,
                                     [](const AbsorptionLine &l, double v) { return l.fc0_hz < v; });
    double k = 0.0;
    for (auto it = lo; it != db.lines.end() && it->fc0_hz <= f + opts.line_cutoff_hz; ++it) {
        const double q = medium.mixing_ratio(it->gas, it->isotope);
        k += line_absorption(*it, f, medium, q, q);
    }
    if (!std::isfinite(k))
        throw NumericalError("absorption coefficient is not finite at f = " + detail::format_g17(f) +
                             " Hz; check line-list units");
    return k;
}

// Fitted water-vapour models. Both return K in 1/m for f in Hz.
enum class ApproxModel {
    band_275_400, // two lines (325, 380 GHz) plus cubic background
    band_100_450, // six lines plus power-law background
};

struct ApproxBand {
    double lo_hz;
    double hi_hz;
};

inline ApproxBand approx_validity(ApproxModel m)
{
    return m == ApproxModel::band_275_400 ? ApproxBand{275e9, 400e9} : ApproxBand{100e9, 450e9};
}

class OutOfBandError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

inline double absorption_coefficient_approx(double f, double v, ApproxModel model = ApproxModel::band_100_450,
                                            bool force = false)
{
    require(v >= 0.0 && v <= 1.0, "approximate absorption: water mixing ratio outside [0, 1]");
    const auto band = approx_validity(model);
    if (!force && (f < band.lo_hz || f > band.hi_hz))
        throw OutOfBandError("approximate absorption: " + detail::format_g17(f) + " Hz outside validity band [" +
                             detail::format_g17(band.lo_hz) + ", " + detail::format_g17(band.hi_hz) + "] Hz");
    const double nu = f / (100.0 * PhysicalConstants::c0); // cm^-1
    auto lorentz = [nu](double a, double b, double c) { return a / (b + (nu - c) * (nu - c)); };
    double k = 0.0;
    if (model == ApproxModel::band_275_400) {
        const double a = 0.2205 * v * (0.1303 * v + 0.0294);
        const double b = std::pow(0.4093 * v + 0.0925, 2);
        const double c = 2.014 * v * (0.1702 * v + 0.0303);
        const double d = std::pow(0.537 * v + 0.0956, 2);
        const double poly = 5.54e-37 * f * f * f - 3.94e-25 * f * f + 9.06e-14 * f - 6.36e-3;
        k = lorentz(a, b, 10.835) + lorentz(c, d, 12.664) + poly;
    } else {
        const double w = 1.0 - v;
        const double a = 5.159e-5 * w * (-6.65e-5 * w + 0.0159);
        const double b = std::pow(-2.09e-4 * w + 0.05, 2);
        const double c = 0.1925 * v * (0.1350 * v + 0.0318);
        const double d = std::pow(0.4241 * v + 0.0998, 2);
        const double e = 0.2251 * v * (0.1314 * v + 0.0297);
        const double ff = std::pow(0.4127 * v + 0.0932, 2);
        const double g = 2.053 * v * (0.1717 * v + 0.0306);
        const double h = std::pow(0.5394 * v + 0.0961, 2);
        const double i = 0.177 * v * (0.0832 * v + 0.0213);
        const double j = std::pow(0.2615 * v + 0.0668, 2);
        const double kk = 2.146 * v * (0.1206 * v + 0.0277);
        const double l = std::pow(0.3789 * v + 0.0871, 2);
        const double background = v / 0.0157 * (2e-4 + 0.915e-112 * std::pow(f, 9.42));
        k = lorentz(a, b, 3.96) + lorentz(c, d, 6.11) + lorentz(e, ff, 10.84) + lorentz(g, h, 12.68) +
            lorentz(i, j, 14.65) + lorentz(kk, l, 14.94) + background;
    }
    // the cubic background of the narrow-band fit can dip below zero at v = 0
    return std::max(k, 0.0);
}

/// Absorption noise temperature T0 (1 - exp(-K d)), T0 the medium reference temperature.
inline double molecular_noise_temperature(double f, double d, const Medium &medium, const LineDatabase &db,
                                          const AbsorptionOptions &opts = {})
{
    require(d >= 0.0, "noise temperature: distance must be non-negative");
    const double k = absorption_coefficient_exact(f, medium, db, opts);
    return -medium.reference_temperature_k * std::expm1(-k * d);
}

struct QuadratureOptions {
    double step_hz = 1e6;
};

/// K_B times the trapezoidal integral of (T_sys + T_mol) over [f_lo, f_hi].
inline double total_noise_power(double f_lo, double f_hi, double d, double system_temperature_k,
                                const Medium &medium, const LineDatabase &db, const QuadratureOptions &quad = {},
                                const AbsorptionOptions &opts = {})
{
    require(f_hi >= f_lo && f_lo > 0.0, "noise power: band must satisfy 0 < f_lo <= f_hi");
    require(quad.step_hz > 0.0, "noise power: quadrature step must be positive");
    if (f_hi == f_lo)
        return 0.0;
    const auto n = static_cast<std::size_t>(std::ceil((f_hi - f_lo) / quad.step_hz));
    const double h = (f_hi - f_lo) / static_cast<double>(n);
    auto integrand = [&](double f) {
        return system_temperature_k + molecular_noise_temperature(f, d, medium, db, opts);
    };
    double acc = 0.5 * (integrand(f_lo) + integrand(f_hi));
    for (std::size_t i = 1; i < n; ++i)
        acc += integrand(f_lo + h * static_cast<double>(i));
    return PhysicalConstants::k_boltzmann * acc * h;
}

} // namespace thz
