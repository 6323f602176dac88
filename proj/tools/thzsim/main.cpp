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

// thzsim: scenario runner for the thz library.

#include "config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

namespace thzsim {
namespace {

std::string fmt12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Context {
    Loaded cfg;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::vector<std::string> warnings;
    std::string linelist_hash = "none";

    Section root() const { return Section(cfg.doc, "config"); }

    std::uint64_t require_seed(const std::string &why) const
    {
        if (!seed)
            throw ConfigError("config.seed: required because " + why + " (or pass --seed)");
        return *seed;
    }

    thz::LineDatabase linelist(const thz::Medium &medium)
    {
        const auto p = resolve_linelist(root(), cfg.directory);
        if (!p) {
            if (medium.species.empty())
                return {};
            throw ConfigError("config.linelist: not set and THZSIM_LINELIST is empty");
        }
        std::ifstream in(*p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        linelist_hash = hex64(fnv1a64(ss.str()));
        return load_linelist(*p);
    }
};

/// Evaluates fn(0..n-1) on up to `threads` workers; results keep index order and
/// the lowest-index failure is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)> &fn)
{
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

// pathloss

struct PathlossPlan {
    thz::Medium medium;
    thz::LineDatabase db;
    std::vector<double> frequencies;
    std::vector<double> distances;
    std::string model;
};

PathlossPlan parse_pathloss(Context &ctx)
{
    auto s = ctx.root().child("pathloss");
    s.allow({"frequencies_hz", "distances_m", "model"});
    PathlossPlan p;
    p.medium = parse_medium(ctx.root().child("medium"));
    p.frequencies = parse_grid(s.child("frequencies_hz"));
    p.distances = s.numbers("distances_m");
    if (p.distances.empty())
        s.fail("distances_m", "grid is empty");
    for (double f : p.frequencies)
        if (!(f > 0.0))
            s.fail("frequencies_hz", "frequencies must be positive");
    for (double d : p.distances)
        if (!(d > 0.0))
            s.fail("distances_m", "distances must be positive");
    p.model = s.string("model", "exact");
    if (p.model != "exact" && p.model != "approx_100_450" && p.model != "approx_275_400")
        s.fail("model", "expected exact, approx_100_450 or approx_275_400");
    p.db = ctx.linelist(p.medium);
    return p;
}

Table run_pathloss(Context &ctx)
{
    const auto p = parse_pathloss(ctx);
    const double v = p.medium.gas_mixing_ratio(thz::gas::h2o);
    const auto k = parallel_map<double>(p.frequencies.size(), ctx.threads, [&](std::size_t i) {
        const double f = p.frequencies[i];
        if (p.model == "exact")
            return thz::absorption_coefficient_exact(f, p.medium, p.db);
        return thz::absorption_coefficient_approx(
            f, v, p.model == "approx_100_450" ? thz::ApproxModel::band_100_450 : thz::ApproxModel::band_275_400);
    });
    Table t{{"f_hz", "d_m", "spreading_db", "molecular_db", "total_db"}, {}};
    for (double d : p.distances)
        for (std::size_t i = 0; i < p.frequencies.size(); ++i) {
            const double f = p.frequencies[i];
            const double spread = thz::spreading_loss_db(f, d);
            const double mol = thz::absorption_loss_db(k[i], d);
            t.rows.push_back({fmt12(f), fmt12(d), fmt12(spread), fmt12(mol), fmt12(spread + mol)});
        }
    return t;
}

// rayleigh

struct RayleighPlan {
    std::vector<double> spacings;
    std::vector<double> frequencies;
    std::vector<std::pair<double, double>> arrays;
};

RayleighPlan parse_rayleigh(Context &ctx)
{
    auto s = ctx.root().child("rayleigh");
    s.allow({"spacings_m", "frequencies_hz", "arrays"});
    RayleighPlan p;
    p.spacings = parse_grid(s.child("spacings_m"));
    p.frequencies = parse_grid(s.child("frequencies_hz"));
    for (auto a : s.children("arrays")) {
        a.allow({"m", "n"});
        const auto m = a.integer("m"), n = a.integer("n");
        if (m < 1 || n < 1)
            a.fail("antenna counts must be at least 1");
        p.arrays.emplace_back(static_cast<double>(m), static_cast<double>(n));
    }
    if (p.arrays.empty())
        s.fail("arrays", "grid is empty");
    for (double d : p.spacings)
        if (!(d > 0.0))
            s.fail("spacings_m", "spacings must be positive");
    for (double f : p.frequencies)
        if (!(f > 0.0))
            s.fail("frequencies_hz", "frequencies must be positive");
    return p;
}

Table run_rayleigh(Context &ctx)
{
    const auto p = parse_rayleigh(ctx);
    Table t{{"delta_m", "f_hz", "lambda_m", "M", "N", "d_ray_m"}, {}};
    for (const auto &[m, n] : p.arrays)
        for (double f : p.frequencies)
            for (double d : p.spacings) {
                const double lambda = thz::wavelength(f);
                t.rows.push_back({fmt12(d), fmt12(f), fmt12(lambda), fmt12(m), fmt12(n),
                                  fmt12(thz::rayleigh_distance(m, n, d, d, lambda))});
            }
    return t;
}

// rate

struct RatePlan {
    thz::CMatrix h;
    std::vector<thz::ConnectionMask> masks;
    std::vector<double> powers;
    thz::DaosaOptions opts;
    bool exhaustive = false;
};

RatePlan parse_rate(Context &ctx)
{
    auto s = ctx.root().child("rate");
    s.allow({"channel", "rx_antennas", "n_sa", "elements_per_sa", "n_rf", "n_streams", "powers_w", "noise_var", "masks",
             "phase_bits", "search"});
    RatePlan p;
    const std::string channel = s.string("channel", "iid");
    const auto n_rf = static_cast<int>(s.integer("n_rf"));
    p.opts.n_streams = static_cast<int>(s.integer("n_streams"));
    p.opts.noise_var = s.number("noise_var");
    if (!(p.opts.noise_var > 0.0))
        s.fail("noise_var", "must be positive");
    if (p.opts.n_streams < 1 || n_rf < p.opts.n_streams)
        s.fail("n_streams", "need 1 <= n_streams <= n_rf");
    if (s.has("phase_bits"))
        p.opts.phase_bits = static_cast<int>(s.integer("phase_bits"));
    const std::string search = s.string("search", "heuristic");
    if (search != "heuristic" && search != "exhaustive")
        s.fail("search", "expected heuristic or exhaustive");
    p.exhaustive = search == "exhaustive";
    p.powers = parse_grid(s.child("powers_w"));
    for (double w : p.powers)
        if (w < 0.0)
            s.fail("powers_w", "powers must be non-negative");

    int n_sa = 0;
    if (channel == "iid") {
        n_sa = static_cast<int>(s.integer("n_sa"));
        p.opts.elements_per_sa = static_cast<int>(s.integer("elements_per_sa", 1));
        const auto rx = s.integer("rx_antennas");
        if (n_sa < 1 || p.opts.elements_per_sa < 1 || rx < 1)
            s.fail("n_sa, elements_per_sa and rx_antennas must be positive");
        thz::Rng rng(ctx.require_seed("rate.channel is iid"));
        p.h.resize(rx, n_sa * p.opts.elements_per_sa);
        for (Eigen::Index j = 0; j < p.h.cols(); ++j)
            for (Eigen::Index i = 0; i < p.h.rows(); ++i)
                p.h(i, j) = thz::complex_normal(rng, 1.0);
    } else if (channel == "los") {
        const auto tx = parse_array(ctx.root().child("tx"), ctx.warnings);
        const auto rx = parse_array(ctx.root().child("rx"), ctx.warnings);
        const auto medium = parse_medium(ctx.root().child("medium"));
        const auto db = ctx.linelist(medium);
        n_sa = tx.subarray_count();
        p.opts.elements_per_sa = tx.elements_per_subarray();
        try {
            p.h = thz::ae_level_channel(tx, rx, medium, db).entries;
        } catch (const thz::InvalidArgument &e) {
            s.fail("channel", e.what());
        }
    } else {
        s.fail("channel", "expected iid or los");
    }
    if (n_rf < 1 || n_rf > n_sa)
        s.fail("n_rf", "need 1 <= n_rf <= number of subarrays");

    const auto &masks = s.raw("masks");
    if (!masks.is_array() || masks.empty())
        s.fail("masks", "expected a nonempty array");
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const std::string where = "masks[" + std::to_string(i) + "]";
        if (masks[i].is_string()) {
            const auto name = masks[i].get<std::string>();
            if (name == "full")
                p.masks.push_back(thz::fully_connected_mask(n_sa, n_rf));
            else if (name == "aosa")
                p.masks.push_back(thz::aosa_mask(n_sa, n_rf));
            else if (name == "single")
                p.masks.push_back(thz::single_connection_mask(n_sa, n_rf));
            else
                s.fail(where, "expected full, aosa, single or a boolean matrix");
        } else if (masks[i].is_array() && masks[i].size() == static_cast<std::size_t>(n_sa)) {
            thz::ConnectionMask m(n_sa, n_rf);
            for (int r = 0; r < n_sa; ++r) {
                const auto &row = masks[i][static_cast<std::size_t>(r)];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(n_rf))
                    s.fail(where, "each row must hold n_rf booleans");
                for (int c = 0; c < n_rf; ++c) {
                    if (!row[static_cast<std::size_t>(c)].is_boolean())
                        s.fail(where, "each row must hold n_rf booleans");
                    m(r, c) = row[static_cast<std::size_t>(c)].get<bool>();
                }
            }
            p.masks.push_back(m);
        } else {
            s.fail(where, "expected a mask name or an n_sa x n_rf boolean matrix");
        }
    }
    return p;
}

Table run_rate(Context &ctx)
{
    const auto p = parse_rate(ctx);
    Table t{{"mask_id", "n_s", "power_w", "rate"}, {}};
    const std::size_t nm = p.masks.size();
    const auto rates = parallel_map<double>(p.powers.size() * nm, ctx.threads, [&](std::size_t idx) {
        auto o = p.opts;
        o.power = p.powers[idx / nm];
        const auto &mask = p.masks[idx % nm];
        if (p.exhaustive)
            return thz::exhaustive_daosa(p.h, mask, o).rate;
        return thz::daosa_switch_search(p.h, {mask}, o).rate;
    });
    for (std::size_t i = 0; i < rates.size(); ++i)
        t.rows.push_back({std::to_string(i % nm), std::to_string(p.opts.n_streams), fmt12(p.powers[i / nm]),
                          fmt12(rates[i])});
    return t;
}

// sense

struct SensePlan {
    thz::ArrayConfig tx, rx;
    thz::Medium truth, tmpl;
    thz::LineDatabase db;
    std::vector<double> plan;
    std::optional<double> snr_db;
    int trials = 1;
    thz::EstimateOptions est;
    std::uint64_t seed = 0;
};

SensePlan parse_sense(Context &ctx)
{
    auto s = ctx.root().child("sense");
    s.allow({"plan_hz", "advise", "snr_db", "trials", "gases", "refine", "template"});
    SensePlan p;
    p.tx = parse_array(ctx.root().child("tx"), ctx.warnings);
    p.rx = parse_array(ctx.root().child("rx"), ctx.warnings);
    p.truth = parse_medium(ctx.root().child("medium"));
    p.tmpl = s.has("template") ? parse_medium(s.child("template")) : p.truth;
    p.db = ctx.linelist(p.truth);
    p.trials = static_cast<int>(s.integer("trials", 1));
    if (p.trials < 1)
        s.fail("trials", "must be at least 1");
    if (s.has("snr_db")) {
        p.snr_db = s.number("snr_db");
        p.seed = ctx.require_seed("sense.snr_db adds noise");
    }
    p.est.refine = s.boolean("refine", false);
    if (s.has("gases")) {
        const auto &g = s.raw("gases");
        if (!g.is_array() || g.empty())
            s.fail("gases", "expected a nonempty array of gas names");
        for (const auto &name : g) {
            if (!name.is_string())
                s.fail("gases", "expected gas names");
            try {
                p.est.gases.push_back(thz::gas_id(name.get<std::string>()));
            } catch (const thz::InvalidArgument &e) {
                s.fail("gases", e.what());
            }
        }
    } else {
        p.est.gases = thz::absorbing_gases(p.tmpl, p.db);
    }
    if (s.has("plan_hz") == s.has("advise"))
        s.fail("exactly one of plan_hz and advise is required");
    if (s.has("plan_hz")) {
        p.plan = s.numbers("plan_hz");
    } else {
        auto a = s.child("advise");
        a.allow({"candidates_hz", "per_gas"});
        const auto candidates = parse_grid(a.child("candidates_hz"));
        const auto per_gas = static_cast<int>(a.integer("per_gas", 1));
        try {
            p.plan = thz::advise_frequency_plan(candidates, p.est.gases, p.tmpl, p.db, per_gas);
        } catch (const thz::InvalidArgument &e) {
            a.fail(e.what());
        }
    }
    if (p.plan.size() != static_cast<std::size_t>(p.tx.subarray_count()))
        s.fail("plan_hz", "needs one frequency per subarray pair (" + std::to_string(p.tx.subarray_count()) + ")");
    return p;
}

Table run_sense(Context &ctx)
{
    const auto p = parse_sense(ctx);
    const auto model = thz::build_sensing_model(p.tx, p.rx, p.truth, p.db, p.plan);
    const auto clean = model.observations();
    const auto estimates = parallel_map<thz::GasEstimate>(
        static_cast<std::size_t>(p.trials), ctx.threads, [&](std::size_t trial) {
            auto obs = clean;
            if (p.snr_db) {
                thz::Rng rng(thz::derive_seed(p.seed, trial));
                obs = thz::add_observation_noise(obs, *p.snr_db, rng);
            }
            const auto k = thz::extract_absorption(obs, model.geometric);
            return thz::estimate_mixture(model.frequencies_hz, k.k, p.db, p.tmpl, p.est);
        });
    Table t{{"trial", "gas", "q_true", "q_hat", "rel_err", "residual"}, {}};
    for (std::size_t trial = 0; trial < estimates.size(); ++trial) {
        const auto &e = estimates[trial];
        for (std::size_t g = 0; g < e.gases.size(); ++g) {
            const double q = p.truth.gas_mixing_ratio(e.gases[g]);
            const double rel = q > 0.0 ? std::abs(e.mixing_ratio[g] - q) / q : std::abs(e.mixing_ratio[g]);
            t.rows.push_back({std::to_string(trial), thz::gas_name(e.gases[g]), fmt12(q), fmt12(e.mixing_ratio[g]),
                              fmt12(rel), fmt12(e.residual_norm)});
        }
    }
    return t;
}

// output

void write_table(const Context &ctx, const std::string &command, const Table &t, const fs::path &out_dir)
{
    fs::create_directories(out_dir);
    const std::string seed = ctx.seed ? std::to_string(*ctx.seed) : "none";
    const fs::path csv = out_dir / (command + ".csv");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out)
            throw std::runtime_error(csv.string() + ": cannot write");
        out << "# thzsim " << thz::version_string << " config_hash=" << ctx.cfg.hash << " seed=" << seed << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out << (i ? "," : "") << t.columns[i];
        out << '\n';
        for (const auto &row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << row[i];
            out << '\n';
        }
    }
    json meta = {{"tool", "thzsim"},
                 {"version", thz::version_string},
                 {"command", command},
                 {"config_hash", ctx.cfg.hash},
                 {"seed", seed},
                 {"linelist_hash", ctx.linelist_hash},
                 {"rows", t.rows.size()},
                 {"columns", t.columns}};
    std::ofstream side(out_dir / (command + ".provenance.json"), std::ios::binary);
    side << meta.dump(2) << '\n';
}

int run_validate(Context &ctx)
{
    auto root = ctx.root();
    root.allow({"seed", "linelist", "medium", "tx", "rx", "pathloss", "rayleigh", "rate", "sense", "output_dir"});
    std::cout << "config_hash: " << ctx.cfg.hash << '\n'
              << "seed: " << (ctx.seed ? std::to_string(*ctx.seed) : "none") << '\n';
    if (const auto ll = resolve_linelist(root, ctx.cfg.directory)) {
        const auto db = load_linelist(*ll);
        std::cout << "linelist: " << ll->filename().string() << " (" << db.lines.size() << " lines)\n";
    }
    if (root.has("medium")) {
        const auto m = parse_medium(root.child("medium"));
        std::cout << "medium: T=" << fmt12(m.temperature_k) << " K, p=" << fmt12(m.pressure_atm) << " atm, "
                  << m.species.size() << " species\n";
        for (const auto &sp : m.species)
            std::cout << "  " << thz::gas_name(sp.gas) << " isotope " << sp.isotope << ": " << fmt12(sp.mixing_ratio)
                      << '\n';
    }
    for (const char *name : {"tx", "rx"})
        if (root.has(name)) {
            const auto a = parse_array(root.child(name), ctx.warnings);
            std::cout << name << ": " << a.rows << "x" << a.cols << " subarrays, Q=" << a.q
                      << ", f=" << fmt12(a.carrier_hz) << " Hz, delta=" << fmt12(a.sa_spacing_m)
                      << " m, delta_ae=" << fmt12(a.ae_spacing_m) << " m\n";
        }
    if (root.has("pathloss")) {
        const auto p = parse_pathloss(ctx);
        std::cout << "pathloss: " << p.frequencies.size() << " frequencies x " << p.distances.size()
                  << " distances, model " << p.model << '\n';
    }
    if (root.has("rayleigh")) {
        const auto p = parse_rayleigh(ctx);
        std::cout << "rayleigh: " << p.arrays.size() * p.frequencies.size() * p.spacings.size() << " points\n";
    }
    if (root.has("rate")) {
        const auto p = parse_rate(ctx);
        std::cout << "rate: H " << p.h.rows() << "x" << p.h.cols() << ", " << p.masks.size() << " masks, "
                  << p.powers.size() << " powers\n";
    }
    if (root.has("sense")) {
        const auto p = parse_sense(ctx);
        std::cout << "sense: " << p.plan.size() << " pairs, " << p.est.gases.size() << " gases, " << p.trials
                  << " trials\n";
    }
    return 0;
}

} // namespace
} // namespace thzsim

int main(int argc, char **argv)
{
    using namespace thzsim;
    CLI::App app{"thzsim: terahertz link scenarios"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    app.add_option("--config", config_path, "scenario config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "root seed, overrides the config");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    for (const char *cmd : {"pathloss", "rayleigh", "rate", "sense", "validate"})
        app.add_subcommand(cmd)->fallthrough();
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Context ctx;
        ctx.cfg = load_config(config_path);
        ctx.threads = threads;
        auto root = ctx.root();
        root.allow({"seed", "linelist", "medium", "tx", "rx", "pathloss", "rayleigh", "rate", "sense", "output_dir"});
        if (seed)
            ctx.seed = seed;
        else if (root.has("seed"))
            ctx.seed = root.unsigned_integer("seed");

        int status = 0;
        if (command == "validate") {
            status = run_validate(ctx);
        } else {
            Table t;
            if (command == "pathloss")
                t = run_pathloss(ctx);
            else if (command == "rayleigh")
                t = run_rayleigh(ctx);
            else if (command == "rate")
                t = run_rate(ctx);
            else
                t = run_sense(ctx);
            fs::path dir = out_dir.empty() ? fs::path(root.string("output_dir", ".")) : fs::path(out_dir);
            if (out_dir.empty() && dir.is_relative())
                dir = ctx.cfg.directory / dir;
            write_table(ctx, command, t, dir);
            std::cerr << "thzsim: " << command << ": " << t.rows.size() << " rows -> " << (dir / (command + ".csv")).string()
                      << '\n';
        }
        for (const auto &w : ctx.warnings)
            std::cerr << "warning: " << w << '\n';
        return status;
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const thz::LineListParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
