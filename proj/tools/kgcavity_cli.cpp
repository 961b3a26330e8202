// kgcavity command-line driver: one subcommand per data product.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kgcavity/kgcavity.hpp>

using namespace kgcavity;
using nlohmann::json;

namespace {

using io::CsvTable;
using io::RunManifest;

// "a:b:step" (inclusive), "x,y,z", or "x,y,...,z" (progression from the first two).
std::vector<double> parse_list(const std::string& text) {
    auto number = [&](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        double v = 0;
        if (!parse_double(s, v)) throw DomainError("cannot parse number '" + s + "' in list '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos && text.find(',') == std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw DomainError("range must be a:b:step, got '" + text + "'");
        const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
        if (!(step > 0) || b < a) throw DomainError("range needs step > 0 and b >= a: '" + text + "'");
        const auto count = static_cast<long>(std::floor((b - a) / step * (1 + 1e-12))) + 1;
        for (long i = 0; i < count; ++i) out.push_back(a + step * static_cast<double>(i));
        return out;
    }
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::string p = parts[i];
        p.erase(0, p.find_first_not_of(" \t"));
        p.erase(p.find_last_not_of(" \t") + 1);
        if (p == "..." || p == "\xE2\x80\xA6") {
            if (out.size() < 2 || i + 1 != parts.size() - 1)
                throw DomainError("ellipsis needs two leading values and one final value: '" + text + "'");
            const double step = out[1] - out[0];
            const double last = number(parts[i + 1]);
            if (!(step > 0) || last < out.back()) throw DomainError("list ellipsis must increase: '" + text + "'");
            const double start = out[0];
            out.clear();
            const auto count = static_cast<long>(std::floor((last - start) / step * (1 + 1e-12))) + 1;
            for (long k = 0; k < count; ++k) out.push_back(start + step * static_cast<double>(k));
            return out;
        }
        out.push_back(number(p));
    }
    if (out.empty()) throw DomainError("empty list");
    return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_list(text)) {
        if (!(v >= 1) || v != std::floor(v)) throw DomainError("expected positive integers in '" + text + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Region parse_family(const std::string& s) {
    if (s == "left") return Region::left();
    if (s == "right") return Region::right();
    throw DomainError("region must be left or right, got '" + s + "'");
}

struct Common {
    double R = 1.0;
    std::optional<double> r, mu;
    std::string nmax, mmax;
    std::optional<std::size_t> grid;
    std::optional<double> eps;
    double threshold = 0.95;
    bool svg = false;
    std::string cache_dir;
    std::string config_path;
    std::string out = ".";
    std::size_t threads = 0;
    bool paper_norm = false;
    bool verify_double_sum = false;
};

struct Defaults {
    double r_tilde = 0.5;
    double mu_tilde = 0.0;
    std::size_t n_max = 10000;
    std::size_t m_max = 1000;
    std::size_t grid = 2048;
};

struct Resolved {
    CavityConfig cfg;
    Truncation trunc;
    std::vector<std::size_t> n_max_list;
    std::optional<BlockCache> cache;
};

// Flags beat the config file; the config file beats per-command defaults.
Resolved resolve(const Common& c, const Defaults& d, const CLI::App& sub) {
    ConfigFile file;
    if (!c.config_path.empty()) file = read_config_file(c.config_path);
    const bool R_flag = sub.get_parent()->count("--R") > 0;
    const double R = R_flag ? c.R : file.R.value_or(c.R);
    const double r = c.r ? *c.r : file.r.value_or(d.r_tilde * R);
    const double mu = c.mu ? *c.mu : file.mu.value_or(d.mu_tilde / R);
    Resolved out;
    out.cfg = validate_config(R, r, mu);
    out.trunc.n_max_global = file.n_max_global.value_or(d.n_max);
    out.trunc.m_max_local = file.m_max_local.value_or(d.m_max);
    out.trunc.grid_points = c.grid ? *c.grid : file.grid_points.value_or(d.grid);
    out.trunc.resonance_eps = c.eps ? *c.eps : file.resonance_eps.value_or(out.trunc.resonance_eps);
    if (!c.nmax.empty()) {
        out.n_max_list = parse_counts(c.nmax);
        out.trunc.n_max_global = out.n_max_list.front();
    } else {
        out.n_max_list = {out.trunc.n_max_global};
    }
    if (!c.mmax.empty()) {
        const auto m = parse_counts(c.mmax);
        if (m.size() != 1) throw DomainError("--mmax takes a single value");
        out.trunc.m_max_local = m.front();
    }
    out.trunc.validate();
    std::string dir = c.cache_dir;
    if (dir.empty())
        if (const char* env = std::getenv("CAVITY_CACHE_DIR")) dir = env;
    if (!dir.empty()) out.cache.emplace(dir);
    return out;
}

const char* cache_status_name(CacheStatus s) {
    switch (s) {
        case CacheStatus::Disabled: return "disabled";
        case CacheStatus::Hit: return "hit";
        case CacheStatus::Miss: return "miss";
        case CacheStatus::Error: return "error";
    }
    return "unknown";
}

BogoliubovBlock get_block(const Region& region, const Resolved& res, const Truncation& trunc, RunManifest* mf) {
    std::string msg;
    auto block = build_block(region, res.cfg, trunc, res.cache ? &*res.cache : nullptr, &msg);
    if (mf) {
        json rec = {{"region", to_string(region)}, {"status", cache_status_name(block.cache_status)}};
        if (!msg.empty()) rec["message"] = msg;
        mf->append_note("cache", rec);
    }
    return block;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void maybe_svg(const Common& c, RunManifest& mf, const std::string& name, const std::string& svg) {
    if (c.svg) mf.write_text(name, svg);
}

// ---------------------------------------------------------------- modes
struct ModesArgs {
    std::string region = "left";
    std::string m = "1";
    std::string times = "0,0.1,0.2,0.3";
    std::string global;
};

int run_modes(const Common& c, const ModesArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.grid = 1001;
    auto res = resolve(c, d, sub);
    const Region region = parse_family(a.region);
    const auto ms = parse_counts(a.m);
    const auto times = parse_list(a.times);
    Truncation trunc = res.trunc;
    trunc.m_max_local = *std::max_element(ms.begin(), ms.end());
    json params = {{"region", a.region}, {"m", ms}, {"times", times}, {"global", a.global}};
    RunManifest mf("modes", params, res.cfg, trunc, c.out);
    const auto tables = frequencies(res.cfg, trunc);
    const auto block = get_block(region, res, trunc, &mf);
    const auto grid = uniform_grid(res.cfg, trunc.grid_points);
    json gibbs = json::object();
    double worst_tail = 0;
    for (std::size_t m : ms) {
        io::svg::LinePlot plot{"Re u_" + std::to_string(m) + " (" + a.region + ")", "x", "Re u", false, false, {}};
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            const auto s = evolve_local_mode(region, m, grid, times[ti], res.cfg, tables, trunc, block);
            worst_tail = std::max(worst_tail, s.tail_estimate);
            if (times[ti] == 0.0) {
                const auto exact = eval_local_initial(region, m, grid, res.cfg, tables);
                double peak_exact = 0, peak = 0, worst = 0;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    peak_exact = std::max(peak_exact, std::abs(exact.value[i]));
                    peak = std::max(peak, std::abs(s.value[i]));
                    worst = std::max(worst, std::abs(s.value[i] - exact.value[i]));
                }
                gibbs[std::to_string(m)] = {{"relative_overshoot", peak / peak_exact - 1.0},
                                            {"max_abs_error", worst}};
            }
            auto table = io::sampled_mode_table(s, a.region, m, trunc);
            mf.write_csv("modes_" + a.region + "_m" + std::to_string(m) + "_t" + std::to_string(ti) + ".csv", table,
                         {{"tail_estimate", s.tail_estimate}});
            io::svg::Series ser{"t=" + format_double(times[ti]), {}, {}};
            for (std::size_t i = 0; i < grid.size(); ++i) {
                ser.x.push_back(s.grid[i]);
                ser.y.push_back(s.value[i].real());
            }
            plot.series.push_back(std::move(ser));
        }
        maybe_svg(c, mf, "modes_" + a.region + "_m" + std::to_string(m) + ".svg", io::svg::render(plot));
    }
    if (!a.global.empty()) {
        const auto Ns = parse_counts(a.global);
        for (std::size_t N : Ns) {
            if (N > trunc.n_max_global) throw IndexError("global mode index exceeds --nmax");
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                const auto s = eval_global_mode(N, grid, times[ti], res.cfg, tables);
                mf.write_csv("modes_global_N" + std::to_string(N) + "_t" + std::to_string(ti) + ".csv",
                             io::sampled_mode_table(s, "global", N, trunc));
            }
        }
    }
    mf.tail_bound("evolution_tail_max", worst_tail);
    mf.note("gibbs", gibbs);
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- spectrum
struct SpectrumArgs {
    std::string mu_list;
    std::string region = "both";
};

int run_spectrum(const Common& c, const SpectrumArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.r_tilde = 1.0 / std::numbers::pi;
    d.m_max = 200;
    auto res = resolve(c, d, sub);
    std::vector<double> mus = a.mu_list.empty() ? std::vector<double>{res.cfg.reduced_mu()} : parse_list(a.mu_list);
    std::vector<Region> regions;
    if (a.region == "both") regions = {Region::left(), Region::right()};
    else regions = {parse_family(a.region)};
    RunManifest mf("spectrum", {{"mu_list", mus}, {"region", a.region}}, res.cfg, res.trunc, c.out);
    CsvTable t({"mu_tilde", "region", "l", "omega", "n_l", "tail_bound"});
    t.meta("r_tilde", res.cfg.reduced_r());
    t.meta("n_max_global", std::to_string(res.trunc.n_max_global));
    io::svg::LinePlot plot{"vacuum occupation", "omega_l", "<n_l>", true, true, {}};
    double worst = 0;
    for (double mu : mus) {
        const auto cfg = validate_config(res.cfg.R, res.cfg.r, mu / res.cfg.R);
        for (const auto& region : regions) {
            const auto s = vacuum_spectrum(region, cfg, res.trunc);
            io::svg::Series ser{to_string(region) + " mu=" + format_double(mu), s.omega, s.values};
            for (std::size_t l = 0; l < s.values.size(); ++l) {
                t.row(mu, to_string(region), l + 1, s.omega[l], s.values[l], s.tail_bound[l]);
                worst = std::max(worst, s.tail_bound[l]);
            }
            plot.series.push_back(std::move(ser));
        }
    }
    mf.tail_bound("n_l_max", worst);
    mf.write_csv("spectrum.csv", t);
    maybe_svg(c, mf, "spectrum.svg", io::svg::render(plot));
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- rscan
struct RScanArgs {
    std::string kind = "partition";
    std::string values;
    std::size_t total_modes = 20;
};

int run_rscan(const Common& c, const RScanArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.m_max = 10;
    auto res = resolve(c, d, sub);
    LimitKind kind;
    if (a.kind == "partition") kind = LimitKind::PartitionSize;
    else if (a.kind == "mass") kind = LimitKind::Mass;
    else throw DomainError("--kind must be partition or mass");
    std::string spec = a.values;
    if (spec.empty()) spec = kind == LimitKind::PartitionSize ? "0.5,0.9,0.99,0.999" : "0,10,20,40,80";
    const auto values = parse_list(spec);
    std::vector<std::pair<std::size_t, std::size_t>> probes;
    for (std::size_t l = 1; l <= res.trunc.m_max_local; ++l) probes.emplace_back(l, l);
    RunManifest mf("rscan", {{"kind", a.kind}, {"values", values}, {"total_modes", a.total_modes}}, res.cfg,
                   res.trunc, c.out);
    const auto scan = limit_scan(kind, values, probes, a.total_modes, res.cfg, res.trunc);
    const std::string col = kind == LimitKind::PartitionSize ? "r_tilde" : "mu_tilde";
    CsvTable t({col, "l", "N", "n_left", "n_right", "alpha_abs", "beta_abs"});
    CsvTable tot({col, "M", "total_left", "total_right"});
    t.meta("n_max_global", std::to_string(res.trunc.n_max_global));
    tot.meta("n_max_global", std::to_string(res.trunc.n_max_global));
    io::svg::LinePlot plot{"vacuum occupation scan", col, "<n_l>", false, true, {}};
    for (std::size_t k = 0; k < probes.size(); ++k) {
        io::svg::Series ser{"l=" + std::to_string(probes[k].first), {}, {}};
        for (const auto& row : scan.rows) {
            ser.x.push_back(row.value);
            ser.y.push_back(row.n_left[k]);
        }
        plot.series.push_back(std::move(ser));
    }
    for (const auto& row : scan.rows) {
        for (std::size_t k = 0; k < probes.size(); ++k)
            t.row(row.value, probes[k].first, probes[k].second, row.n_left[k], row.n_right[k], row.alpha_abs[k],
                  row.beta_abs[k]);
        tot.row(row.value, a.total_modes, row.total_left, row.total_right);
    }
    mf.write_csv("rscan.csv", t);
    mf.write_csv("rscan_totals.csv", tot);
    maybe_svg(c, mf, "rscan.svg", io::svg::render(plot));
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- correlations
struct CorrArgs {
    std::size_t ncols = 40;
};

int run_correlations(const Common& c, const CorrArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.r_tilde = 1.0 / std::numbers::pi;
    d.m_max = 10;
    auto res = resolve(c, d, sub);
    Truncation tl = res.trunc, tr = res.trunc;
    tr.m_max_local = a.ncols;
    json params = {{"ncols", a.ncols}, {"paper_norm", c.paper_norm}, {"verify_double_sum", c.verify_double_sum}};
    RunManifest mf("correlations", params, res.cfg, res.trunc, c.out);
    const auto left = get_block(Region::left(), res, tl, &mf);
    const auto right = get_block(Region::right(), res, tr, &mf);
    std::vector<std::size_t> ms, ns;
    for (std::size_t m = 1; m <= tl.m_max_local; ++m) ms.push_back(m);
    for (std::size_t n = 1; n <= tr.m_max_local; ++n) ns.push_back(n);
    WickOptions opts;
    opts.paper_norm = true;
    opts.verify_double_sum = c.verify_double_sum;
    const auto rep = wick_moments(ms, ns, left, right, opts);
    const auto tables = frequencies(res.cfg, tl);
    const auto tables_r = frequencies(res.cfg, tr);

    CsvTable t({"m", "n", "omega_m", "omega_bar_n", "cov", "corr", "corr_definition", "corr_paper"});
    t.meta("normalization", c.paper_norm ? "paper" : "definition");
    t.meta("r_tilde", res.cfg.reduced_r());
    t.meta("mu_tilde", res.cfg.reduced_mu());
    CsvTable peaks({"m", "omega_m", "argmax_n", "argmax_n_paper", "nearest_frequency_n"});
    CsvTable moments({"family", "index", "omega", "mean", "variance"});
    io::svg::Heatmap heat{c.paper_norm ? "corr (paper norm)" : "corr", "n", "m", ms.size(), ns.size(), {}};
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double wm = tables.left(ms[i]);
        std::size_t best = 0, best_p = 0, nearest = 0;
        for (std::size_t j = 0; j < ns.size(); ++j) {
            const std::size_t k = i * ns.size() + j;
            const double chosen = c.paper_norm ? rep.corr_paper[k] : rep.corr[k];
            t.row(ms[i], ns[j], wm, tables_r.right(ns[j]), rep.cov[k], chosen, rep.corr[k], rep.corr_paper[k]);
            heat.values.push_back(chosen);
            if (rep.corr[k] > rep.corr[i * ns.size() + best]) best = j;
            if (rep.corr_paper[k] > rep.corr_paper[i * ns.size() + best_p]) best_p = j;
            if (std::abs(tables_r.right(ns[j]) - wm) < std::abs(tables_r.right(ns[nearest]) - wm)) nearest = j;
        }
        peaks.row(ms[i], wm, ns[best], ns[best_p], ns[nearest]);
        moments.row("left", ms[i], wm, rep.mean_left[i], rep.var_left[i]);
    }
    for (std::size_t j = 0; j < ns.size(); ++j)
        moments.row("right", ns[j], tables_r.right(ns[j]), rep.mean_right[j], rep.var_right[j]);
    double tail = 0;
    for (std::size_t m : ms) tail = std::max(tail, row_tails(Region::left(), m, res.cfg, tl.n_max_global).beta2);
    for (std::size_t n : ns) tail = std::max(tail, row_tails(Region::right(), n, res.cfg, tr.n_max_global).beta2);
    mf.tail_bound("mean_max", tail);
    json extra = json::object();
    if (c.verify_double_sum) extra["double_sum_max_rel_diff"] = rep.double_sum_max_rel_diff;
    mf.write_csv("correlations.csv", t, extra);
    mf.write_csv("correlations_peaks.csv", peaks);
    mf.write_csv("correlations_moments.csv", moments);
    maybe_svg(c, mf, "correlations.svg", io::svg::render(heat));
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- quasilocal
struct QuasiArgs {
    std::size_t l = 20;
    std::size_t lmax = 50;
    std::string times;
    std::string region = "left";
};

int run_quasilocal(const Common& c, const QuasiArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.r_tilde = 1.0 / 9.0;
    d.m_max = std::max(a.l, a.lmax);
    d.grid = 1001;
    auto res = resolve(c, d, sub);
    const Region region = parse_family(a.region);
    json params = {{"l", a.l}, {"lmax", a.lmax}, {"threshold", c.threshold}, {"times", a.times},
                   {"region", a.region}};
    RunManifest mf("quasilocal", params, res.cfg, res.trunc, c.out);
    const auto tables = frequencies(res.cfg, res.trunc);

    const auto dist = overlap_distribution(a.l, res.cfg, res.trunc, region);
    CsvTable ov({"N", "Omega", "p"});
    ov.meta("l", std::to_string(a.l));
    ov.meta("n_l", dist.n_l);
    ov.meta("norm_captured", dist.norm_captured);
    ov.meta("beta_weight", dist.beta_weight);
    ov.meta("peak_N", std::to_string(dist.peak_N));
    ov.meta("peak_Omega", dist.peak_Omega);
    io::svg::LinePlot plot{"overlap distribution l=" + std::to_string(a.l), "Omega_N", "p_N", false, false, {}};
    io::svg::Series ser{"p", {}, {}};
    for (std::size_t N = 1; N <= dist.p.size(); ++N) {
        ov.row(N, tables.global(N), dist.p[N - 1]);
        ser.x.push_back(tables.global(N));
        ser.y.push_back(dist.p[N - 1]);
    }
    plot.series.push_back(std::move(ser));
    mf.write_csv("quasilocal_overlap.csv", ov);
    maybe_svg(c, mf, "quasilocal_overlap.svg", io::svg::render(plot));

    CsvTable bw({"l", "omega_l", "delta_omega", "captured", "modes_included", "reachable"});
    bw.meta("threshold", c.threshold);
    CsvTable en({"l", "omega_l", "epsilon_local", "raw", "normalized", "annihilator", "tail_bound_raw",
                 "tail_bound_annihilator"});
    io::svg::LinePlot bplot{"bandwidth", "l", "delta Omega", false, false, {}};
    io::svg::Series bser{"threshold " + format_double(c.threshold), {}, {}};
    double tail = 0;
    for (std::size_t l = 1; l <= a.lmax; ++l) {
        const double wl = local_frequency(region, l, res.cfg) / res.cfg.R;
        try {
            const auto b = bandwidth(l, c.threshold, res.cfg, res.trunc, region);
            bw.row(l, wl, b.delta_omega, b.captured, b.modes_included, "true");
            bser.x.push_back(static_cast<double>(l));
            bser.y.push_back(b.delta_omega);
        } catch (const ThresholdUnreachable& e) {
            bw.row(l, wl, std::numeric_limits<double>::infinity(), e.captured(), res.trunc.n_max_global, "false");
        }
        const auto q = quasilocal_energy(l, res.cfg, res.trunc, region);
        const auto eps = local_quantum_energy(region, l, res.cfg, res.trunc);
        en.row(l, wl, eps.epsilon, q.raw, q.normalized, q.annihilator, q.tail_bound_raw, q.tail_bound_annihilator);
        tail = std::max({tail, q.tail_bound_raw, q.tail_bound_annihilator, eps.tail_bound});
    }
    bplot.series.push_back(std::move(bser));
    mf.tail_bound("energy_max", tail);
    mf.write_csv("quasilocal_bandwidth.csv", bw);
    mf.write_csv("quasilocal_energy.csv", en);
    maybe_svg(c, mf, "quasilocal_bandwidth.svg", io::svg::render(bplot));

    if (!a.times.empty()) {
        const auto times = parse_list(a.times);
        Truncation tw = res.trunc;
        tw.m_max_local = a.l;
        const auto block = get_block(region, res, tw, &mf);
        const auto grid = uniform_grid(res.cfg, tw.grid_points);
        CsvTable cone({"t", "psi_outside", "local_outside"});
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            const auto w = quasilocal_wavepacket(a.l, grid, times[ti], res.cfg, tables, tw, block);
            CsvTable t({"x", "abs_psi", "abs_local", "abs_diff"});
            t.meta("time", times[ti]);
            t.meta("l", std::to_string(a.l));
            for (std::size_t i = 0; i < grid.size(); ++i)
                t.row(grid[i], std::abs(w.psi.value[i]), std::abs(w.local.value[i]), w.abs_diff[i]);
            mf.write_csv("quasilocal_wavepacket_t" + std::to_string(ti) + ".csv", t);
            cone.row(times[ti], w.psi_out_of_cone.fraction, w.local_out_of_cone.fraction);
        }
        mf.write_csv("quasilocal_cone.csv", cone);
    }
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- causality
struct CausalArgs {
    std::size_t m = 1;
    std::string times = "0,0.1,0.2,0.3,0.4,0.5";
    std::optional<double> r_tilde;
    std::size_t n = 1;
    std::string taus;
    bool snapshots = true;
};

int run_causality(const Common& c, const CausalArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.r_tilde = 0.21;
    d.grid = 2001;
    auto res = resolve(c, d, sub);
    Truncation trunc = res.trunc;
    trunc.m_max_local = a.m;
    const auto times = parse_list(a.times);
    const double rt = a.r_tilde ? *a.r_tilde : res.cfg.r + 0.5 * (res.cfg.R - res.cfg.r);
    const double sep = rt - res.cfg.r;
    std::vector<double> taus;
    if (a.taus.empty()) {
        // stay off the light front itself
        for (double f : {0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0}) taus.push_back(sep * f);
    } else {
        taus = parse_list(a.taus);
    }
    json params = {{"m", a.m}, {"times", times}, {"r_tilde", rt}, {"n", a.n}, {"taus", taus}};
    RunManifest mf("causality", params, res.cfg, trunc, c.out);
    const auto tables = frequencies(res.cfg, trunc);
    const auto block = get_block(Region::left(), res, trunc, &mf);
    const auto grid = uniform_grid(res.cfg, trunc.grid_points);

    CsvTable leak({"t", "cone_lo", "cone_hi", "fraction", "outside", "total"});
    leak.meta("m", std::to_string(a.m));
    io::svg::LinePlot plot{"|u_" + std::to_string(a.m) + "| evolution", "x", "|u|", false, false, {}};
    const double omega = tables.left(a.m);
    double worst = 0;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const auto s = evolve_local_mode(Region::left(), a.m, grid, times[ti], res.cfg, tables, trunc, block);
        const auto [lo, hi] = light_cone(Region::left(), times[ti], res.cfg);
        const auto lr = cone_fraction(s, omega, lo, hi);
        leak.row(times[ti], lo, hi, lr.fraction, lr.outside, lr.total);
        worst = std::max(worst, s.tail_estimate);
        if (a.snapshots) {
            mf.write_csv("causality_u" + std::to_string(a.m) + "_t" + std::to_string(ti) + ".csv",
                         io::sampled_mode_table(s, "left", a.m, trunc));
            io::svg::Series ser{"t=" + format_double(times[ti]), {}, {}};
            for (std::size_t i = 0; i < grid.size(); ++i) {
                ser.x.push_back(grid[i]);
                ser.y.push_back(std::abs(s.value[i]));
            }
            plot.series.push_back(std::move(ser));
        }
    }
    mf.tail_bound("evolution_tail_max", worst);
    mf.write_csv("causality_leakage.csv", leak);
    maybe_svg(c, mf, "causality.svg", io::svg::render(plot));

    CsvTable com({"tau", "r_tilde", "separation", "spacelike", "c1", "c2", "c1_spectral", "c2_spectral",
                  "quadrature_error"});
    com.meta("m", std::to_string(a.m));
    com.meta("n", std::to_string(a.n));
    for (double tau : taus) {
        const auto probe = make_probe(res.cfg, rt, tau, a.n);
        const auto cr = commutator_pair(probe, a.m, res.cfg, tables, trunc, block);
        com.row(tau, rt, sep, tau < sep ? "true" : "false", cr.c1, cr.c2, cr.c1_spectral, cr.c2_spectral,
                cr.quadrature_error);
    }
    mf.write_csv("causality_commutators.csv", com);
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- diverge
struct DivergeArgs {
    std::string Ns = "1,2,3";
    std::string Ms = "100,1000,10000,100000";
    std::string nsum_m = "1";
    std::string nsum_list = "1000,10000,100000";
};

int run_diverge(const Common& c, const DivergeArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.r_tilde = 1.0 / std::numbers::pi;
    d.mu_tilde = 10.0;
    auto res = resolve(c, d, sub);
    const auto Ns = parse_counts(a.Ns), Ms = parse_counts(a.Ms);
    const auto nm = parse_counts(a.nsum_m), nl = parse_counts(a.nsum_list);
    json params = {{"N", Ns}, {"M", Ms}, {"nsum_m", nm}, {"nsum_list", nl}};
    RunManifest mf("diverge", params, res.cfg, res.trunc, c.out);
    CsvTable ps({"N", "M", "partial_sum"});
    CsvTable fit({"N", "intercept", "slope", "r2"});
    io::svg::LinePlot plot{"partial sums over local modes", "M", "sum beta^2", true, false, {}};
    for (std::size_t N : Ns) {
        const auto s = divergence_scan(N, res.cfg, Ms, res.trunc.resonance_eps);
        io::svg::Series ser{"N=" + std::to_string(N), {}, s.partial_sums};
        for (std::size_t k = 0; k < s.M.size(); ++k) {
            ps.row(N, s.M[k], s.partial_sums[k]);
            ser.x.push_back(static_cast<double>(s.M[k]));
        }
        fit.row(N, s.fit_intercept, s.fit_slope, s.fit_r2);
        plot.series.push_back(std::move(ser));
    }
    CsvTable conv({"region", "m", "n_max", "alpha2", "beta2", "alpha2_tail", "beta2_tail"});
    bool cauchy = true;
    for (const Region& region : {Region::left(), Region::right()})
        for (std::size_t m : nm) {
            const auto cv = nsum_convergence(region, m, res.cfg, nl, res.trunc.resonance_eps);
            cauchy = cauchy && cv.cauchy_within_tails();
            for (std::size_t k = 0; k < cv.n_max.size(); ++k)
                conv.row(to_string(region), m, cv.n_max[k], cv.alpha2[k], cv.beta2[k], cv.alpha2_tail[k],
                         cv.beta2_tail[k]);
        }
    mf.write_csv("diverge.csv", ps);
    mf.write_csv("diverge_fit.csv", fit);
    mf.write_csv("diverge_nsum.csv", conv, {{"cauchy_within_tails", cauchy}});
    maybe_svg(c, mf, "diverge.svg", io::svg::render(plot));
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- identities
struct IdentArgs {
    std::size_t upto = 10;
};

int run_identities(const Common& c, const IdentArgs& a, const CLI::App& sub) {
    const auto t0 = std::chrono::steady_clock::now();
    Defaults d;
    d.m_max = a.upto;
    Common cc = c;
    if (cc.nmax.empty()) cc.nmax = "1000,10000,100000";
    auto res = resolve(cc, d, sub);
    auto list = res.n_max_list;
    res.trunc.m_max_local = std::max(res.trunc.m_max_local, a.upto);
    RunManifest mf("identities", {{"n_max", list}, {"upto", a.upto}}, res.cfg, res.trunc, c.out);
    CsvTable t({"n_max", "upto", "max_d1", "max_d2", "max_cross", "d1_decreased"});
    io::svg::LinePlot plot{"Bogoliubov identity residuals", "n_max", "residual", true, true, {}};
    io::svg::Series s1{"max D1", {}, {}}, s2{"max D2", {}, {}}, s3{"max cross", {}, {}};
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : list) {
        Truncation tr = res.trunc;
        tr.n_max_global = n;
        const auto left = get_block(Region::left(), res, tr, &mf);
        const auto right = get_block(Region::right(), res, tr, &mf);
        const auto rep = identity_residuals(left, right, a.upto);
        t.row(n, a.upto, rep.max_d1(), rep.max_d2(), rep.max_cross(), rep.max_d1() < prev ? "true" : "false");
        prev = rep.max_d1();
        for (auto* s : {&s1, &s2, &s3}) s->x.push_back(static_cast<double>(n));
        s1.y.push_back(rep.max_d1());
        s2.y.push_back(rep.max_d2());
        s3.y.push_back(rep.max_cross());
    }
    plot.series = {s1, s2, s3};
    mf.write_csv("identities.csv", t);
    maybe_svg(c, mf, "identities.svg", io::svg::render(plot));
    mf.finish(seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------- cache
int run_cache(const Common& c, const std::string& action) {
    std::string dir = c.cache_dir;
    if (dir.empty())
        if (const char* env = std::getenv("CAVITY_CACHE_DIR")) dir = env;
    if (dir.empty()) throw DomainError("no cache directory: pass --cache-dir or set CAVITY_CACHE_DIR");
    BlockCache cache(dir);
    if (action == "list") {
        std::cout << "digest,region,bytes,n_max_global,m_max_local\n";
        for (const auto& e : cache.list()) {
            const auto& m = e.meta;
            auto field = [&](const char* k) { return m.contains(k) ? m[k].dump() : std::string("null"); };
            std::string nmax = "null", mmax = "null";
            if (m.contains("truncation")) {
                nmax = m["truncation"].value("n_max_global", json()).dump();
                mmax = m["truncation"].value("m_max_local", json()).dump();
            }
            std::cout << e.digest << "," << field("region") << "," << e.bytes << "," << nmax << "," << mmax
                      << "\n";
        }
    } else {
        std::cout << json{{"purged", cache.purge()}, {"directory", dir}}.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Klein-Gordon cavity: local vs global quantization"};
    app.set_version_flag("--version", std::string(version_string));
    app.require_subcommand(1);
    Common c;
    app.add_option("--R", c.R, "box size")->capture_default_str();
    app.add_option("--r", c.r, "partition point (same units as --R)");
    app.add_option("--mu", c.mu, "field mass (inverse length)");
    app.add_option("--nmax", c.nmax, "global-mode cutoff; identities accepts a list");
    app.add_option("--mmax", c.mmax, "local-mode cutoff");
    app.add_option("--grid", c.grid, "spatial grid points");
    app.add_option("--eps", c.eps, "resonance threshold");
    app.add_option("--threshold", c.threshold, "bandwidth capture threshold")->capture_default_str();
    app.add_flag("--svg", c.svg, "also render SVG plots");
    app.add_option("--cache-dir", c.cache_dir, "Bogoliubov block cache (default $CAVITY_CACHE_DIR)");
    app.add_option("--config", c.config_path, "key = value config file; flags override it");
    app.add_option("--out", c.out, "output directory")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads (0 = hardware)");
    app.add_flag("--paper-norm", c.paper_norm, "use the total-occupation correlation denominator");
    app.add_flag("--verify-double-sum", c.verify_double_sum, "cross-check covariances by the double sum");
    app.fallthrough();

    ModesArgs ma;
    auto* modes = app.add_subcommand("modes", "sampled local and global modes");
    modes->add_option("--region", ma.region, "left or right")->capture_default_str();
    modes->add_option("--m", ma.m, "local mode indices")->capture_default_str();
    modes->add_option("--times", ma.times, "snapshot times")->capture_default_str();
    modes->add_option("--global", ma.global, "global mode indices to sample as well");

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "vacuum occupation <n_l> per local mode");
    spectrum->add_option("--mu-list", sa.mu_list, "reduced masses R*mu, a:b:step or list");
    spectrum->add_option("--region", sa.region, "left, right or both")->capture_default_str();

    RScanArgs ra;
    auto* rscan = app.add_subcommand("rscan", "occupation trends across partition or mass");
    rscan->add_option("--kind", ra.kind, "partition or mass")->capture_default_str();
    rscan->add_option("--values", ra.values, "r/R or R*mu values");
    rscan->add_option("--total-modes", ra.total_modes, "modes in the total occupation")->capture_default_str();

    CorrArgs ca;
    auto* corr = app.add_subcommand("correlations", "left/right number correlations");
    corr->add_option("--ncols", ca.ncols, "right-family modes")->capture_default_str();

    QuasiArgs qa;
    auto* quasi = app.add_subcommand("quasilocal", "quasi-local states, bandwidth and energies");
    quasi->add_option("--l", qa.l, "mode for the overlap distribution")->capture_default_str();
    quasi->add_option("--lmax", qa.lmax, "modes in the bandwidth and energy tables")->capture_default_str();
    quasi->add_option("--times", qa.times, "wavepacket snapshot times");
    quasi->add_option("--region", qa.region, "left or right")->capture_default_str();

    CausalArgs ka;
    auto* causal = app.add_subcommand("causality", "light-cone leakage and commutators");
    causal->add_option("--m", ka.m, "left mode index")->capture_default_str();
    causal->add_option("--times", ka.times, "evolution times")->capture_default_str();
    causal->add_option("--rtilde", ka.r_tilde, "probe region start");
    causal->add_option("--n", ka.n, "probe mode index")->capture_default_str();
    causal->add_option("--taus", ka.taus, "probe times");
    causal->add_flag("!--no-snapshots", ka.snapshots, "skip mode snapshot files");

    DivergeArgs da;
    auto* diverge = app.add_subcommand("diverge", "partial sums over local modes and N-sum convergence");
    diverge->add_option("--N", da.Ns, "global mode indices")->capture_default_str();
    diverge->add_option("--M-list", da.Ms, "partial-sum cutoffs")->capture_default_str();
    diverge->add_option("--nsum-m", da.nsum_m, "local modes for the N-sum table")->capture_default_str();
    diverge->add_option("--nsum-list", da.nsum_list, "N cutoffs for the N-sum table")->capture_default_str();

    IdentArgs ia;
    auto* ident = app.add_subcommand("identities", "Bogoliubov identity residuals vs n_max");
    ident->add_option("--upto", ia.upto, "largest local index checked")->capture_default_str();

    std::string cache_action;
    auto* cache = app.add_subcommand("cache", "inspect or purge the block cache");
    cache->add_option("action", cache_action, "list or purge")->required()->check(CLI::IsMember({"list", "purge"}));

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        worker_threads() = c.threads;
        if (*modes) return run_modes(c, ma, *modes);
        if (*spectrum) return run_spectrum(c, sa, *spectrum);
        if (*rscan) return run_rscan(c, ra, *rscan);
        if (*corr) return run_correlations(c, ca, *corr);
        if (*quasi) return run_quasilocal(c, qa, *quasi);
        if (*causal) return run_causality(c, ka, *causal);
        if (*diverge) return run_diverge(c, da, *diverge);
        if (*ident) return run_identities(c, ia, *ident);
        if (*cache) return run_cache(c, cache_action);
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}, {"command", cmd}}}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "InternalError"}, {"message", e.what()}, {"command", cmd}}}}.dump()
                  << "\n";
        return 3;
    }
    return 1;
}
