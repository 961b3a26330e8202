#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "format.hpp"
#include "modes.hpp"
#include "version.hpp"

namespace kgcavity::io {

/// CSV with `# key=value` metadata lines above a single header row.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void meta(const std::string& key, double value) { meta_.emplace_back(key, format_double(value)); }

    template <typename... Cells>
    void row(const Cells&... cells) {
        std::vector<std::string> r;
        (r.push_back(cell(cells)), ...);
        if (r.size() != columns_.size()) throw DomainError("csv row width does not match header");
        rows_.push_back(std::move(r));
    }

    void row_cells(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) throw DomainError("csv row width does not match header");
        rows_.push_back(std::move(cells));
    }

    [[nodiscard]] std::string str() const {
        std::string out;
        for (const auto& [k, v] : meta_) out += "# " + k + "=" + v + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
            out += "\n";
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

    static std::string cell(double x) { return format_double(x); }
    static std::string cell(float x) { return format_double(x); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I x) {
        return std::to_string(x);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

[[nodiscard]] inline CsvTable sampled_mode_table(const SampledMode& s, const std::string& region, std::size_t m,
                                                 const Truncation& trunc) {
    CsvTable t({"x", "re_value", "im_value", "re_tderiv", "im_tderiv"});
    t.meta("time", s.time);
    t.meta("region", region);
    t.meta("m", std::to_string(m));
    t.meta("n_max_global", std::to_string(trunc.n_max_global));
    t.meta("grid_points", std::to_string(s.grid.size()));
    t.meta("truncation_warning", s.truncation_warning ? "true" : "false");
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        t.row(s.grid[i], s.value[i].real(), s.value[i].imag(), s.tderiv[i].real(), s.tderiv[i].imag());
    return t;
}

[[nodiscard]] inline nlohmann::json config_json(const CavityConfig& cfg) {
    return {{"R", cfg.R}, {"r", cfg.r}, {"mu", cfg.mu}, {"r_bar", cfg.r_bar},
            {"r_tilde", cfg.reduced_r()}, {"mu_tilde", cfg.reduced_mu()}};
}

[[nodiscard]] inline nlohmann::json truncation_json(const Truncation& t) {
    return {{"n_max_global", t.n_max_global},
            {"m_max_local", t.m_max_local},
            {"grid_points", t.grid_points},
            {"resonance_eps", t.resonance_eps}};
}

/// One command's outputs: CSV payloads with sidecars, plus manifest.json.
class RunManifest {
public:
    RunManifest(std::string command, nlohmann::json parameters, const CavityConfig& cfg, const Truncation& trunc,
                std::filesystem::path out_dir)
        : command_(std::move(command)), parameters_(std::move(parameters)), cfg_(cfg), trunc_(trunc),
          dir_(std::move(out_dir)) {
        nlohmann::json key = {{"command", command_},
                              {"parameters", parameters_},
                              {"config", config_json(cfg_)},
                              {"truncation", truncation_json(trunc_)},
                              {"version", version_string}};
        digest_ = sha256_hex(key.dump());
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw DomainError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    [[nodiscard]] const std::string& digest() const noexcept { return digest_; }
    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }

    void tail_bound(const std::string& key, double value) { tails_[key] = value; }
    void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }
    void append_note(const std::string& key, nlohmann::json value) { notes_[key].push_back(std::move(value)); }

    /// Writes name (CSV) and name.json (sidecar); returns the CSV path.
    std::filesystem::path write_csv(const std::string& name, const CsvTable& table,
                                    const nlohmann::json& extra = nlohmann::json::object()) {
        const auto path = dir_ / name;
        const std::string payload = table.str();
        write_file(path, payload);
        nlohmann::json side = {{"command", command_},
                               {"config", config_json(cfg_)},
                               {"truncation", truncation_json(trunc_)},
                               {"tail_bounds", tails_},
                               {"version", version_string},
                               {"digest", digest_},
                               {"payload_sha256", sha256_hex(payload)},
                               {"rows", table.size()}};
        if (!extra.empty()) side["details"] = extra;
        write_file(dir_ / (name + ".json"), side.dump(2) + "\n");
        outputs_.push_back(name);
        outputs_.push_back(name + ".json");
        return path;
    }

    void write_text(const std::string& name, const std::string& text) {
        write_file(dir_ / name, text);
        outputs_.push_back(name);
    }

    void finish(double wall_seconds) {
        nlohmann::json m = {{"command", command_},
                            {"parameters", parameters_},
                            {"config", config_json(cfg_)},
                            {"truncation", truncation_json(trunc_)},
                            {"outputs", outputs_},
                            {"wall_time_s", wall_seconds},
                            {"tail_bounds", tails_},
                            {"version", version_string},
                            {"digest", digest_}};
        if (!notes_.empty()) m["notes"] = notes_;
        write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    [[nodiscard]] const std::vector<std::string>& outputs() const noexcept { return outputs_; }

private:
    static void write_file(const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DomainError("cannot write " + p.string());
        out << text;
        if (!out) throw DomainError("short write to " + p.string());
    }

    std::string command_;
    nlohmann::json parameters_;
    CavityConfig cfg_;
    Truncation trunc_;
    std::filesystem::path dir_;
    std::string digest_;
    nlohmann::json tails_ = nlohmann::json::object();
    nlohmann::json notes_ = nlohmann::json::object();
    std::vector<std::string> outputs_;
};

namespace svg {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct LinePlot {
    std::string title, xlabel, ylabel;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

inline const char* colour(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

}  // namespace detail

[[nodiscard]] inline std::string render(const LinePlot& p) {
    const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 50;
    auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((p.log_x && !(s.x[i] > 0)) || (p.log_y && !(s.y[i] > 0))) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double v) { return H - bottom - (ty(v) - y0) / (y1 - y0) * (H - top - bottom); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::escape(p.title)
      << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto axis_value = [](double v, bool lg) { return lg ? std::pow(10.0, v) : v; };
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
        const double X = left + (W - left - right) * k / 4, Y = H - bottom - (H - top - bottom) * k / 4;
        o << "<text x=\"" << detail::num(X) << "\" y=\"" << H - bottom + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::label(axis_value(fx, p.log_x)) << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << detail::num(Y + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << detail::label(axis_value(fy, p.log_y)) << "</text>\n";
    }
    o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << detail::escape(p.xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\" font-size=\"13\">" << detail::escape(p.ylabel) << "</text>\n";
    for (std::size_t si = 0; si < p.series.size(); ++si) {
        const auto& s = p.series[si];
        o << "<polyline fill=\"none\" stroke=\"" << detail::colour(si) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((p.log_x && !(s.x[i] > 0)) || (p.log_y && !(s.y[i] > 0))) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            o << detail::num(px(s.x[i])) << "," << detail::num(py(s.y[i])) << " ";
        }
        o << "\"/>\n";
        const double ly = top + 16 * (si + 1);
        o << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30 << "\" y2=\""
          << ly - 4 << "\" stroke=\"" << detail::colour(si) << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - right + 34 << "\" y=\"" << ly << "\" font-size=\"11\">" << detail::escape(s.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

struct Heatmap {
    std::string title, xlabel, ylabel;
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;  // row-major
};

[[nodiscard]] inline std::string render(const Heatmap& h) {
    const double cell = std::max(4.0, std::min(24.0, 480.0 / static_cast<double>(std::max(h.rows, h.cols))));
    const double left = 60, top = 40;
    const double W = left + cell * h.cols + 30, H = top + cell * h.rows + 50;
    double lo = 1e300, hi = -1e300;
    for (double v : h.values)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = std::max(std::abs(lo), std::abs(hi));
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(W) << "\" height=\"" << detail::num(H)
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << detail::num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::escape(h.title) << "</text>\n";
    for (std::size_t i = 0; i < h.rows; ++i)
        for (std::size_t j = 0; j < h.cols; ++j) {
            const double v = h.values[i * h.cols + j];
            const double f = span > 0 && std::isfinite(v) ? v / span : 0.0;
            // diverging palette: blue for negative, red for positive
            const int r = f >= 0 ? 255 : static_cast<int>(255 * (1 + f));
            const int b = f <= 0 ? 255 : static_cast<int>(255 * (1 - f));
            const int g = static_cast<int>(255 * (1 - std::abs(f)));
            char fill[8];
            std::snprintf(fill, sizeof fill, "#%02x%02x%02x", r, g, b);
            o << "<rect x=\"" << detail::num(left + cell * j) << "\" y=\"" << detail::num(top + cell * i)
              << "\" width=\"" << detail::num(cell) << "\" height=\"" << detail::num(cell) << "\" fill=\"" << fill
              << "\"/>\n";
        }
    o << "<text x=\"" << detail::num(left + cell * h.cols / 2) << "\" y=\"" << detail::num(H - 14)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::escape(h.xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << detail::num(top + cell * h.rows / 2) << "\" transform=\"rotate(-90 16 "
      << detail::num(top + cell * h.rows / 2) << ")\" text-anchor=\"middle\" font-size=\"13\">"
      << detail::escape(h.ylabel) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace svg

}  // namespace kgcavity::io
