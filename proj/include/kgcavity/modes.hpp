#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "bogoliubov.hpp"
#include "config.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "region.hpp"
#include "summation.hpp"

namespace kgcavity {

/// Cauchy data (φ, φ̇) of a complex mode on a spatial grid at one time.
struct SampledMode {
    std::vector<double> grid;
    std::vector<std::complex<double>> value;
    std::vector<std::complex<double>> tderiv;
    double time = 0.0;
    bool truncation_warning = false;
    double tail_estimate = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return grid.size(); }

    [[nodiscard]] SampledMode conjugate() const {
        SampledMode c = *this;
        for (auto& z : c.value) z = std::conj(z);
        for (auto& z : c.tderiv) z = std::conj(z);
        return c;
    }
};

/// points samples of [0,R] including both endpoints; the last one is exactly R.
[[nodiscard]] inline std::vector<double> uniform_grid(const CavityConfig& cfg, std::size_t points) {
    if (points < 2) throw DomainError("grid needs at least 2 points");
    std::vector<double> x(points);
    const double step = cfg.R / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) x[i] = step * static_cast<double>(i);
    x.back() = cfg.R;
    return x;
}

namespace detail {

inline void check_grid(std::span<const double> grid, const CavityConfig& cfg) {
    for (double x : grid)
        if (!(x >= 0.0) || !(x <= cfg.R)) throw DomainError("grid point outside [0, R]");
}

[[nodiscard]] inline double family_table_frequency(const Region& region, std::size_t m, const FrequencyTables& tables) {
    switch (region.kind) {
        case RegionKind::Left: return tables.left(m);
        case RegionKind::Right: return tables.right(m);
        case RegionKind::Probe: break;
    }
    throw DomainError("probe frequencies are not tabulated");
}

}  // namespace detail

/// 𝒰_N(x) e^{-iΩ_N t}, the stationary mode of the whole box.
[[nodiscard]] inline SampledMode eval_global_mode(std::size_t N, std::span<const double> grid, double t,
                                                 const CavityConfig& cfg, const FrequencyTables& tables) {
    const double Om = tables.global(N);  // reduced
    detail::check_grid(grid, cfg);
    SampledMode s;
    s.grid.assign(grid.begin(), grid.end());
    s.time = t;
    s.value.resize(grid.size());
    s.tderiv.resize(grid.size());
    const double phys = Om * tables.inverse_length;
    const std::complex<double> phase = std::polar(1.0, -Om * (t / cfg.R));
    const double amp = 1.0 / std::sqrt(Om);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.value[i] = amp * sin_pi(static_cast<double>(N) * (grid[i] / cfg.R)) * phase;
        s.tderiv[i] = std::complex<double>(0.0, -phys) * s.value[i];
    }
    return s;
}

/// χ_m on a family's support (open interval), zero elsewhere; t = 0 data.
[[nodiscard]] inline SampledMode local_cauchy_data(const Region& region, std::size_t m, std::span<const double> grid,
                                                  double time, const CavityConfig& cfg, double omega_reduced) {
    if (m < 1) throw IndexError("local mode index is 1-based");
    detail::check_grid(grid, cfg);
    const Interval I = support(region, cfg);
    const double L = I.length();
    const double amp = 1.0 / std::sqrt(L * omega_reduced);
    const double phys = omega_reduced / cfg.R;
    SampledMode s;
    s.grid.assign(grid.begin(), grid.end());
    s.time = time;
    s.value.assign(grid.size(), 0.0);
    s.tderiv.assign(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i] / cfg.R;
        if (!(x > I.a) || !(x < I.b)) continue;
        s.value[i] = amp * sin_pi(static_cast<double>(m) * (x - I.a) / L);
        s.tderiv[i] = std::complex<double>(0.0, -phys) * s.value[i];
    }
    return s;
}

[[nodiscard]] inline SampledMode eval_local_initial(const Region& region, std::size_t m, std::span<const double> grid,
                                                   const CavityConfig& cfg, const FrequencyTables& tables) {
    if (region.kind == RegionKind::Probe) throw DomainError("eval_local_initial expects the Left or Right family");
    return local_cauchy_data(region, m, grid, 0.0, cfg, detail::family_table_frequency(region, m, tables));
}

/// Integral-test estimate of the neglected N > n_max part of the evolution
/// series, pointwise in sup norm (|sin| replaced by its mean 2/π).
[[nodiscard]] inline double evolution_tail_estimate(const Region& region, std::size_t m, const CavityConfig& cfg,
                                                    std::size_t n_max) {
    const Interval I = support(region, cfg);
    const double L = I.length();
    const double q = static_cast<double>(m) / L;
    const double omega = local_frequency(region, m, cfg);
    const double n = static_cast<double>(n_max);
    if (n <= q + 1.0) return std::numeric_limits<double>::infinity();
    const double pi = std::numbers::pi;
    const double k = pi * q;
    // |α e^{-iΩt} + β e^{iΩt}|·|𝒰_N| ≤ 2√Ω|V| ≤ 2|num|k/((Ω²-ω²)√(Lω))
    auto f = [&](double x) { return 2.0 * (2.0 / pi) * k / (pi * pi * (x - q) * (x + q) * std::sqrt(L * omega)); };
    return integral_tail(f, n);
}

struct EvolutionOptions {
    double tail_tolerance = 1e-3;
};

/// u_m(x,t) as the truncated global-mode series Σ_N (α e^{-iΩt} + β e^{iΩt}) 𝒰_N(x).
///
/// Each grid point sums N in ascending order with compensation, so the output
/// does not depend on how points are spread across threads.
[[nodiscard]] inline SampledMode evolve_local_mode(const Region& region, std::size_t m, std::span<const double> grid,
                                                  double t, const CavityConfig& cfg, const FrequencyTables& tables,
                                                  const Truncation& trunc, const BogoliubovBlock& block,
                                                  const EvolutionOptions& opts = {}) {
    if (!(block.region == region)) throw DomainError("block was built for a different region");
    if (trunc.n_max_global > block.cols) throw DomainError("block has fewer columns than n_max_global");
    if (trunc.n_max_global > tables.Omega.size()) throw IndexError("frequency table shorter than n_max_global");
    if (m < 1 || m > block.rows) throw IndexError("local mode index outside block rows");
    detail::check_grid(grid, cfg);

    const std::size_t n = trunc.n_max_global;
    const double tr = t / cfg.R;
    const auto a = block.alpha_row(m);
    const auto b = block.beta_row(m);
    std::vector<std::complex<double>> c(n), d(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double Om = tables.Omega[j];
        const std::complex<double> e = std::polar(1.0, -Om * tr);
        const double amp = 1.0 / std::sqrt(Om);
        c[j] = amp * (a[j] * e + b[j] * std::conj(e));
        d[j] = amp * std::complex<double>(0.0, -Om * tables.inverse_length) * (a[j] * e - b[j] * std::conj(e));
    }

    SampledMode s;
    s.grid.assign(grid.begin(), grid.end());
    s.time = t;
    s.value.resize(grid.size());
    s.tderiv.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double x = grid[i] / cfg.R;
        CompensatedSum<std::complex<double>> v, w;
        for (std::size_t j = 0; j < n; ++j) {
            const double sn = sin_pi(static_cast<double>(j + 1) * x);
            v += c[j] * sn;
            w += d[j] * sn;
        }
        s.value[i] = v.value();
        s.tderiv[i] = w.value();
    });
    s.tail_estimate = evolution_tail_estimate(region, m, cfg, n);
    s.truncation_warning = !(s.tail_estimate <= opts.tail_tolerance);
    return s;
}

}  // namespace kgcavity
