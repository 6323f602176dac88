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

// Scenario configuration: JSON documents with fail-closed key checking.

#include "thz/thz.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace thzsim {

using json = nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A JSON object plus its dotted path; every key read is recorded so that
/// leftovers can be reported as unknown.
class Section {
public:
    Section(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail("expected an object");
    }

    const std::string &path() const { return path_; }
    bool has(const std::string &key) const { return j_.contains(key); }

    [[noreturn]] void fail(const std::string &msg) const { throw ConfigError(path_ + ": " + msg); }
    [[noreturn]] void fail(const std::string &key, const std::string &msg) const
    {
        throw ConfigError(path_ + "." + key + ": " + msg);
    }

    void allow(std::initializer_list<const char *> keys)
    {
        for (auto k : keys)
            allowed_.insert(k);
        for (const auto &[k, v] : j_.items())
            if (!allowed_.count(k))
                fail(k, "unknown key");
    }

    double number(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_number())
            fail(key, "expected a number");
        return v.get<double>();
    }
    double number(const std::string &key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_number_integer())
            fail(key, "expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string &key, std::int64_t fallback) const
    {
        return has(key) ? integer(key) : fallback;
    }

    std::uint64_t unsigned_integer(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_number_unsigned())
            fail(key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string &key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        const auto &v = at(key);
        if (!v.is_boolean())
            fail(key, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_string())
            fail(key, "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string &key, const std::string &fallback) const
    {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_array())
            fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                fail(key + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    thz::Vec3 vec3(const std::string &key, const thz::Vec3 &fallback) const
    {
        if (!has(key))
            return fallback;
        const auto v = numbers(key);
        if (v.size() != 3)
            fail(key, "expected three numbers");
        return {v[0], v[1], v[2]};
    }

    Section child(const std::string &key) const { return Section(at(key), path_ + "." + key); }

    std::vector<Section> children(const std::string &key) const
    {
        const auto &v = at(key);
        if (!v.is_array())
            fail(key, "expected an array of objects");
        std::vector<Section> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.emplace_back(v[i], path_ + "." + key + "[" + std::to_string(i) + "]");
        return out;
    }

    const json &raw(const std::string &key) const { return at(key); }

private:
    const json &at(const std::string &key) const
    {
        if (!j_.contains(key))
            fail(key, "missing required key");
        return j_.at(key);
    }

    const json &j_;
    std::string path_;
    std::set<std::string> allowed_;
};

inline std::uint64_t fnv1a64(const std::string &data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Loaded {
    json doc;
    fs::path directory;
    std::string hash; // FNV-1a 64 of the canonical serialisation
};

inline Loaded load_config(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path.string() + ": cannot open config file");
    Loaded out;
    try {
        out.doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    out.directory = path.parent_path();
    out.hash = hex64(fnv1a64(out.doc.dump()));
    return out;
}

inline thz::Medium parse_medium(Section s)
{
    s.allow({"preset", "temperature_k", "pressure_atm", "species", "relative_humidity_percent"});
    const std::string preset = s.string("preset", "custom");
    thz::Medium m;
    if (preset == "humid_air")
        m = thz::reference_humid_air();
    else if (preset != "custom" && preset != "empty")
        s.fail("preset", "expected humid_air, custom or empty");
    m.temperature_k = s.number("temperature_k", m.temperature_k);
    m.pressure_atm = s.number("pressure_atm", m.pressure_atm);
    if (s.has("species")) {
        if (preset == "empty")
            s.fail("species", "not allowed with the empty preset");
        m.species.clear();
        for (auto sp : s.children("species")) {
            sp.allow({"gas", "isotope", "mixing_ratio"});
            try {
                m.species.push_back({thz::gas_id(sp.string("gas")), static_cast<int>(sp.integer("isotope", 1)),
                                     sp.number("mixing_ratio")});
            } catch (const thz::InvalidArgument &e) {
                sp.fail("gas", e.what());
            }
        }
    }
    if (s.has("relative_humidity_percent")) {
        const double q = thz::water_mixing_ratio_from_rh(s.number("relative_humidity_percent"), m.temperature_k,
                                                          m.pressure_atm);
        bool found = false;
        for (auto &sp : m.species)
            if (sp.gas == thz::gas::h2o && sp.isotope == 1) {
                sp.mixing_ratio = q;
                found = true;
            }
        if (!found)
            m.species.push_back({thz::gas::h2o, 1, q});
    }
    try {
        m.validate();
    } catch (const thz::InvalidArgument &e) {
        s.fail(e.what());
    }
    return m;
}

inline thz::ArrayConfig parse_array(Section s, std::vector<std::string> &warnings)
{
    s.allow({"rows", "cols", "q", "sa_spacing_m", "ae_spacing_m", "carrier_hz", "origin", "boresight"});
    thz::ArrayConfig a;
    a.rows = static_cast<int>(s.integer("rows", 1));
    a.cols = static_cast<int>(s.integer("cols", 1));
    a.q = static_cast<int>(s.integer("q", 1));
    a.carrier_hz = s.number("carrier_hz");
    a.sa_spacing_m = s.number("sa_spacing_m");
    a.ae_spacing_m = s.number("ae_spacing_m", thz::wavelength(a.carrier_hz) / 2.0);
    a.origin = s.vec3("origin", thz::Vec3::Zero());
    try {
        a.orientation = thz::orientation_facing(s.vec3("boresight", thz::Vec3::UnitX()));
        for (auto &w : a.validate())
            warnings.push_back(s.path() + ": " + w);
    } catch (const thz::InvalidArgument &e) {
        s.fail(e.what());
    }
    return a;
}

/// Line list from the config key (relative to the config file) or THZSIM_LINELIST.
inline std::optional<fs::path> resolve_linelist(const Section &root, const fs::path &config_dir)
{
    if (root.has("linelist")) {
        fs::path p = root.string("linelist");
        if (p.is_relative())
            p = config_dir / p;
        if (!fs::exists(p))
            root.fail("linelist", "file not found: " + p.string());
        return p;
    }
    if (const char *env = std::getenv("THZSIM_LINELIST"); env && *env) {
        fs::path p = env;
        if (!fs::exists(p))
            throw ConfigError("THZSIM_LINELIST: file not found: " + p.string());
        return p;
    }
    return std::nullopt;
}

inline thz::LineDatabase load_linelist(const fs::path &p)
{
    std::ifstream in(p);
    if (!in)
        throw ConfigError(p.string() + ": cannot open line list");
    return thz::parse_linelist(in, p.filename().string());
}

inline std::vector<double> parse_grid(Section s)
{
    s.allow({"values", "start", "stop", "step", "count", "log"});
    if (s.has("values")) {
        auto v = s.numbers("values");
        if (v.empty())
            s.fail("values", "grid is empty");
        return v;
    }
    const double start = s.number("start");
    const double stop = s.number("stop");
    if (stop < start)
        s.fail("stop", "must not be below start");
    std::vector<double> out;
    if (s.has("step")) {
        const double step = s.number("step");
        if (!(step > 0.0))
            s.fail("step", "must be positive");
        const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step * (1.0 + 1e-12))) + 1;
        if (n > 50'000'000)
            s.fail("step", "grid too large");
        for (std::int64_t i = 0; i < n; ++i)
            out.push_back(start + step * static_cast<double>(i));
        return out;
    }
    const auto count = s.integer("count");
    if (count < 1)
        s.fail("count", "must be at least 1");
    const bool log = s.boolean("log", false);
    if (log && !(start > 0.0))
        s.fail("start", "must be positive on a logarithmic grid");
    for (std::int64_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(log ? start * std::pow(stop / start, t) : start + (stop - start) * t);
    }
    return out;
}

} // namespace thzsim
