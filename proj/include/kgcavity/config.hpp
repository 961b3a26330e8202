#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace kgcavity {

/// Box [0,R] split at x=r into [0,r] and [r,R]; field mass mu.
///
/// Values are in user units. All numerics run on the reduced problem R=1,
/// r̃ = r/R, μ̃ = Rμ; see reduced().
struct CavityConfig {
    double R = 1.0;
    double r = 0.5;
    double mu = 0.0;
    double r_bar = 0.5;

    [[nodiscard]] double reduced_r() const noexcept { return r / R; }
    [[nodiscard]] double reduced_mu() const noexcept { return mu * R; }

    /// The same physical setup expressed with R = 1.
    [[nodiscard]] CavityConfig reduced() const noexcept {
        const double rr = reduced_r();
        return CavityConfig{1.0, rr, reduced_mu(), 1.0 - rr};
    }

    friend bool operator==(const CavityConfig&, const CavityConfig&) = default;
};

inline CavityConfig validate_config(double R, double r, double mu) {
    if (!(R > 0) || !std::isfinite(R)) throw DomainError("box size R must be positive and finite");
    if (!(r > 0) || !(r < R)) throw DomainError("partition r must satisfy 0 < r < R");
    if (!(mu >= 0) || !std::isfinite(mu)) throw DomainError("mass mu must be non-negative and finite");
    return CavityConfig{R, r, mu, R - r};
}

struct Truncation {
    std::size_t n_max_global = 10000;
    std::size_t m_max_local = 1000;
    std::size_t grid_points = 2048;
    double resonance_eps = 1e-6;

    void validate() const {
        if (n_max_global < 1 || m_max_local < 1 || grid_points < 1)
            throw DomainError("truncation counts must be >= 1");
        if (!(resonance_eps > 0) || resonance_eps > 1e-6)
            throw DomainError("resonance_eps must lie in (0, 1e-6]");
    }

    friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Mode frequencies of the reduced problem (units of 1/R).
///
/// Omega[N-1] = sqrt(π²N² + μ̃²), omega[m-1] = sqrt(π²m²/r̃² + μ̃²),
/// omega_bar[m-1] = sqrt(π²m²/(1-r̃)² + μ̃²). Multiply by inverse_length to get
/// user units.
struct FrequencyTables {
    std::vector<double> Omega;
    std::vector<double> omega;
    std::vector<double> omega_bar;
    double inverse_length = 1.0;

    [[nodiscard]] double global(std::size_t N) const { return at(Omega, N, "global"); }
    [[nodiscard]] double left(std::size_t m) const { return at(omega, m, "left"); }
    [[nodiscard]] double right(std::size_t m) const { return at(omega_bar, m, "right"); }

private:
    static double at(const std::vector<double>& v, std::size_t i, const char* which) {
        if (i < 1 || i > v.size())
            throw IndexError(std::string(which) + " frequency index " + std::to_string(i) + " out of table");
        return v[i - 1];
    }
};

/// sqrt(π²n²/L² + μ²) in reduced units.
[[nodiscard]] inline double box_frequency(double n, double length, double mu) noexcept {
    const double k = std::numbers::pi * n / length;
    return std::sqrt(k * k + mu * mu);
}

inline FrequencyTables frequencies(const CavityConfig& cfg, const Truncation& trunc) {
    const CavityConfig red = cfg.reduced();
    FrequencyTables t;
    t.inverse_length = 1.0 / cfg.R;
    t.Omega.resize(trunc.n_max_global);
    t.omega.resize(trunc.m_max_local);
    t.omega_bar.resize(trunc.m_max_local);
    for (std::size_t N = 1; N <= trunc.n_max_global; ++N)
        t.Omega[N - 1] = box_frequency(static_cast<double>(N), 1.0, red.mu);
    for (std::size_t m = 1; m <= trunc.m_max_local; ++m) {
        t.omega[m - 1] = box_frequency(static_cast<double>(m), red.r, red.mu);
        t.omega_bar[m - 1] = box_frequency(static_cast<double>(m), red.r_bar, red.mu);
    }
    return t;
}

/// Configuration file contents: `key = value` or `key value` lines, `#` comments.
struct ConfigFile {
    std::optional<double> R, r, mu, resonance_eps;
    std::optional<std::size_t> n_max_global, m_max_local, grid_points;
};

inline ConfigFile parse_config_text(const std::string& text) {
    ConfigFile out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == '=' || c == ':' || c == '\t') c = ' ';
        std::istringstream ls(line);
        std::string key, value, extra;
        if (!(ls >> key)) continue;
        if (!(ls >> value) || (ls >> extra))
            throw DomainError("config line " + std::to_string(lineno) + ": expected `key value`");
        std::size_t used = 0;
        double number = 0;
        try {
            number = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size())
            throw DomainError("config line " + std::to_string(lineno) + ": bad number `" + value + "`");
        auto count = [&]() -> std::size_t {
            if (number < 1 || number != std::floor(number))
                throw DomainError("config key " + key + " must be a positive integer");
            return static_cast<std::size_t>(number);
        };
        if (key == "R") out.R = number;
        else if (key == "r") out.r = number;
        else if (key == "mu") out.mu = number;
        else if (key == "resonance_eps") out.resonance_eps = number;
        else if (key == "n_max_global") out.n_max_global = count();
        else if (key == "m_max_local") out.m_max_local = count();
        else if (key == "grid_points") out.grid_points = count();
        else throw DomainError("config line " + std::to_string(lineno) + ": unknown key `" + key + "`");
    }
    return out;
}

inline ConfigFile read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace kgcavity
