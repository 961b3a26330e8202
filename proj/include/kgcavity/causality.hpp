#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "bogoliubov.hpp"
#include "config.hpp"
#include "error.hpp"
#include "modes.hpp"
#include "quadrature.hpp"
#include "region.hpp"
#include "summation.hpp"

namespace kgcavity {

/// Mode n of the probe family [r̃, R], localized at time τ.
struct ProbeSpec {
    double r_tilde = 0.75;
    double tau = 0.0;
    std::size_t n = 1;
    double omega_tilde = 0.0;  // user units
};

[[nodiscard]] inline ProbeSpec make_probe(const CavityConfig& cfg, double r_tilde, double tau, std::size_t n) {
    if (!(r_tilde > cfg.r) || !(r_tilde < cfg.R)) throw DomainError("probe requires r < r_tilde < R");
    if (!(tau >= 0.0)) throw DomainError("probe time must be >= 0");
    if (n < 1) throw IndexError("probe mode index is 1-based");
    const Region g = Region::probe(r_tilde, cfg);
    return {r_tilde, tau, n, local_frequency(g, n, cfg) / cfg.R};
}

/// Uniform grid on [a, b] (user units), endpoints included.
[[nodiscard]] inline std::vector<double> interval_grid(double a, double b, std::size_t points) {
    if (points < 2 || !(b > a)) throw DomainError("interval grid needs b > a and >= 2 points");
    std::vector<double> x(points);
    for (std::size_t i = 0; i < points; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    x.back() = b;
    return x;
}

struct CommutatorResult {
    double c1 = 0.0;  // |(ũ_n|u_m)| by quadrature at t = τ
    double c2 = 0.0;  // |(ũ_n|u_m*)|
    double c1_spectral = 0.0;
    double c2_spectral = 0.0;
    double quadrature_error = 0.0;
};

/// |[ã_n, a_m†]| and |[ã_n, a_m]| for a left-family mode m and a probe.
///
/// The quadrature route evolves u_m to τ and pairs it with the probe's Cauchy
/// data on [r̃, R]; the spectral route sums the same product mode by mode.
[[nodiscard]] inline CommutatorResult commutator_pair(const ProbeSpec& probe, std::size_t m, const CavityConfig& cfg,
                                                      const FrequencyTables& tables, const Truncation& trunc,
                                                      const BogoliubovBlock& left_block,
                                                      const QuadratureSpec& spec = {}) {
    const Region pr = Region::probe(probe.r_tilde, cfg);
    const double omega_t = local_frequency(pr, probe.n, cfg);  // reduced
    std::size_t points = trunc.grid_points;
    if (points % 2 == 0) ++points;
    const auto grid = interval_grid(probe.r_tilde, cfg.R, points);

    const auto u = evolve_local_mode(left_block.region, m, grid, probe.tau, cfg, tables, trunc, left_block);
    auto probe_data = local_cauchy_data(pr, probe.n, grid, probe.tau, cfg, omega_t);
    CommutatorResult out;
    const auto k1 = kg_inner(probe_data, u, spec);
    const auto k2 = kg_inner(probe_data, u.conjugate(), spec);
    out.c1 = std::abs(k1.value);
    out.c2 = std::abs(k2.value);
    out.quadrature_error = std::max(k1.error_estimate, k2.error_estimate);

    // (ũ|U_N e^{-iΩt}) = (ω̃+Ω) Ṽ e^{-iΩτ},  (ũ|U_N* e^{iΩt}) = (ω̃-Ω) Ṽ e^{iΩτ}
    const Interval I = support(pr, cfg);
    const double mu = cfg.reduced_mu();
    const double tr = probe.tau / cfg.R;
    const auto a = left_block.alpha_row(m);
    const auto b = left_block.beta_row(m);
    CompensatedSum<std::complex<double>> s1, s2;
    for (std::size_t j = 0; j < trunc.n_max_global; ++j) {
        const double Om = tables.Omega[j];
        const double Vt = coeff_pair(I, probe.n, j + 1, mu, trunc.resonance_eps).V;
        const std::complex<double> e = std::polar(1.0, -Om * tr);
        const std::complex<double> plus = (omega_t + Om) * Vt * e;
        const std::complex<double> minus = (omega_t - Om) * Vt * std::conj(e);
        s1 += a[j] * plus + b[j] * minus;
        s2 += a[j] * minus + b[j] * plus;
    }
    out.c1_spectral = std::abs(s1.value());
    out.c2_spectral = std::abs(s2.value());
    return out;
}

/// ∫_{outside [lo,hi]} (|u|² + |u̇|²/ω²) dx over ∫ of the same density.
struct LeakageResult {
    double fraction = 0.0;
    double outside = 0.0;
    double total = 0.0;
};

[[nodiscard]] inline LeakageResult cone_fraction(const SampledMode& s, double omega_phys, double lo, double hi) {
    const std::size_t n = s.grid.size();
    std::vector<double> all(n), out(n);
    const double w2 = omega_phys * omega_phys;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::norm(s.value[i]) + std::norm(s.tderiv[i]) / w2;
        all[i] = d;
        out[i] = (s.grid[i] < lo || s.grid[i] > hi) ? d : 0.0;
    }
    const double h = (s.grid.back() - s.grid.front()) / static_cast<double>(n - 1);
    LeakageResult r;
    r.total = integrate_uniform<double>(all, h).value;
    r.outside = integrate_uniform<double>(out, h).value;
    r.fraction = r.total > 0 ? r.outside / r.total : 0.0;
    return r;
}

/// Causal region of a family at time t, widened by margin.
[[nodiscard]] inline std::pair<double, double> light_cone(const Region& region, double t, const CavityConfig& cfg,
                                                          double margin = 0.0) {
    switch (region.kind) {
        case RegionKind::Left: return {0.0, std::min(cfg.R, cfg.r + t + margin)};
        case RegionKind::Right: return {std::max(0.0, cfg.r - t - margin), cfg.R};
        case RegionKind::Probe: return {std::max(0.0, region.probe_start - t - margin), cfg.R};
    }
    return {0.0, cfg.R};
}

[[nodiscard]] inline LeakageResult lightcone_leakage(const Region& region, std::size_t m, double t,
                                                     const CavityConfig& cfg, const FrequencyTables& tables,
                                                     const Truncation& trunc, const BogoliubovBlock& block,
                                                     double margin = 0.0) {
    if (!(t >= 0.0)) throw DomainError("lightcone_leakage: t must be >= 0");
    std::size_t points = trunc.grid_points;
    if (points % 2 == 0) ++points;
    const auto grid = uniform_grid(cfg, points);
    const auto u = evolve_local_mode(region, m, grid, t, cfg, tables, trunc, block);
    const auto [lo, hi] = light_cone(region, t, cfg, margin);
    return cone_fraction(u, local_frequency(region, m, cfg) / cfg.R, lo, hi);
}

}  // namespace kgcavity
