#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "bogoliubov.hpp"
#include "causality.hpp"
#include "config.hpp"
#include "error.hpp"
#include "modes.hpp"
#include "region.hpp"
#include "summation.hpp"
#include "vacuum.hpp"

namespace kgcavity {

/// |⟨1_N|ψ_l⟩|² for the normalized state a_l†|0_G⟩.
struct OverlapDistribution {
    std::size_t l = 0;
    std::vector<double> p;  // p[N-1] = α_lN²/(1+⟨n_l⟩)
    double n_l = 0.0;
    double norm_captured = 0.0;  // Σ p
    double beta_weight = 0.0;    // Σ β²/(1+⟨n_l⟩), reported separately
    std::size_t peak_N = 0;
    double peak_Omega = 0.0;  // user units
};

[[nodiscard]] inline OverlapDistribution overlap_distribution(std::size_t l, const CavityConfig& cfg,
                                                              const Truncation& trunc,
                                                              const Region& region = Region::left()) {
    trunc.validate();
    const auto row = coefficient_row(region, l, cfg, trunc.n_max_global, trunc.resonance_eps);
    OverlapDistribution d;
    d.l = l;
    d.n_l = compensated_dot(row.beta, row.beta);
    const double norm = 1.0 + d.n_l;
    d.p.resize(row.alpha.size());
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < row.alpha.size(); ++j) {
        d.p[j] = row.alpha[j] * row.alpha[j] / norm;
        acc += d.p[j];
    }
    d.norm_captured = acc.value();
    d.beta_weight = d.n_l / norm;
    const auto it = std::max_element(d.p.begin(), d.p.end());
    d.peak_N = static_cast<std::size_t>(it - d.p.begin()) + 1;
    d.peak_Omega = box_frequency(static_cast<double>(d.peak_N), 1.0, cfg.reduced_mu()) / cfg.R;
    return d;
}

struct Bandwidth {
    std::size_t l = 0;
    double delta_omega = 0.0;  // user units
    double captured = 0.0;
    std::size_t modes_included = 0;
};

/// Smallest symmetric window around ω_l whose p-mass exceeds threshold.
///
/// Modes are added in order of |Ω_N - ω_l|, equal distances together. The
/// window is open, so ΔΩ is the infimum 2·max|Ω_N - ω_l| over included modes.
[[nodiscard]] inline Bandwidth bandwidth(const OverlapDistribution& dist, double threshold, const CavityConfig& cfg,
                                         const Region& region = Region::left()) {
    if (!(threshold > 0.0) || !(threshold < 1.0)) throw DomainError("bandwidth threshold must lie in (0, 1)");
    const double mu = cfg.reduced_mu();
    const double omega = local_frequency(region, dist.l, cfg);
    const std::size_t n = dist.p.size();
    std::vector<double> dist_to(n);
    for (std::size_t j = 0; j < n; ++j)
        dist_to[j] = std::abs(box_frequency(static_cast<double>(j + 1), 1.0, mu) - omega);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist_to[a] < dist_to[b]; });
    CompensatedSum<double> acc;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && dist_to[order[j]] == dist_to[order[i]]) acc += dist.p[order[j++]];
        if (acc.value() > threshold) return {dist.l, 2.0 * dist_to[order[i]] / cfg.R, acc.value(), j};
        i = j;
    }
    throw ThresholdUnreachable("bandwidth: truncation captures only " + std::to_string(acc.value()) +
                                   " of the overlap mass",
                               acc.value());
}

[[nodiscard]] inline Bandwidth bandwidth(std::size_t l, double threshold, const CavityConfig& cfg,
                                         const Truncation& trunc, const Region& region = Region::left()) {
    return bandwidth(overlap_distribution(l, cfg, trunc, region), threshold, cfg, region);
}

/// ψ_m(x,t) = Σ α_mN U_N(x,t)/sqrt(1+⟨n_m⟩) and its comparison with u_m.
struct WavepacketResult {
    SampledMode psi;
    SampledMode local;           // u_m at the same time and truncation
    std::vector<double> abs_diff;  // |ψ| - |u| per grid point
    LeakageResult psi_out_of_cone;
    LeakageResult local_out_of_cone;
};

[[nodiscard]] inline WavepacketResult quasilocal_wavepacket(std::size_t m, std::span<const double> grid, double t,
                                                            const CavityConfig& cfg, const FrequencyTables& tables,
                                                            const Truncation& trunc, const BogoliubovBlock& block) {
    const Region region = block.region;
    if (trunc.n_max_global > block.cols) throw DomainError("block has fewer columns than n_max_global");
    const std::size_t n = trunc.n_max_global;
    const auto a = block.alpha_row(m).first(n);
    const auto b = block.beta_row(m).first(n);
    const double norm = std::sqrt(1.0 + compensated_dot(b, b));
    const double tr = t / cfg.R;
    std::vector<std::complex<double>> c(n), d(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double Om = tables.Omega[j];
        const std::complex<double> e = std::polar(1.0, -Om * tr);
        c[j] = a[j] * e / (norm * std::sqrt(Om));
        d[j] = std::complex<double>(0.0, -Om * tables.inverse_length) * c[j];
    }
    WavepacketResult w;
    w.psi.grid.assign(grid.begin(), grid.end());
    w.psi.time = t;
    w.psi.value.resize(grid.size());
    w.psi.tderiv.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double x = grid[i] / cfg.R;
        CompensatedSum<std::complex<double>> v, dv;
        for (std::size_t j = 0; j < n; ++j) {
            const double sn = sin_pi(static_cast<double>(j + 1) * x);
            v += c[j] * sn;
            dv += d[j] * sn;
        }
        w.psi.value[i] = v.value();
        w.psi.tderiv[i] = dv.value();
    });
    w.local = evolve_local_mode(region, m, grid, t, cfg, tables, trunc, block);
    w.abs_diff.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w.abs_diff[i] = std::abs(w.psi.value[i]) - std::abs(w.local.value[i]);
    const auto [lo, hi] = light_cone(region, t, cfg);
    const double omega = local_frequency(region, m, cfg) / cfg.R;
    w.psi_out_of_cone = cone_fraction(w.psi, omega, lo, hi);
    w.local_out_of_cone = cone_fraction(w.local, omega, lo, hi);
    return w;
}

/// Energies of a_l†|0_G⟩ (raw and normalized) and of a_l|0_G⟩/sqrt⟨n_l⟩, user units.
struct QuasilocalEnergy {
    double raw = 0.0;
    double normalized = 0.0;
    double annihilator = 0.0;
    double tail_bound_raw = 0.0;
    double tail_bound_annihilator = 0.0;
};

[[nodiscard]] inline QuasilocalEnergy quasilocal_energy(std::size_t l, const CavityConfig& cfg, const Truncation& trunc,
                                                        const Region& region = Region::left()) {
    const auto s = row_sums(region, l, cfg, trunc.n_max_global, trunc.resonance_eps);
    const auto t = row_tails(region, l, cfg, trunc.n_max_global);
    QuasilocalEnergy e;
    e.raw = s.energy_alpha / cfg.R;
    e.normalized = e.raw / (1.0 + s.beta2);
    e.annihilator = s.beta2 > 0 ? s.energy_beta / s.beta2 / cfg.R : 0.0;
    e.tail_bound_raw = t.energy_alpha / cfg.R;
    // ratio E/B shifts by at most δE/B when the tails only add to both
    e.tail_bound_annihilator = s.beta2 > 0 ? t.energy_beta / s.beta2 / cfg.R : 0.0;
    return e;
}

/// ⟨ψ_m|n̄_l|ψ_m⟩ - ⟨0_G|n̄_l|0_G⟩ from operator rows (p,q) and (p̄,q̄).
struct ShiftPair {
    double wick = 0.0;    // cov(n_m, n̄_l)/(1+⟨n_m⟩)
    double direct = 0.0;  // ⟨a n̄ a†⟩/⟨a a†⟩ - ⟨n̄⟩ by explicit contraction
};

[[nodiscard]] inline ShiftPair steering_shift_rows(std::span<const double> p, std::span<const double> q,
                                                   std::span<const double> pb, std::span<const double> qb) {
    const double A = compensated_dot(p, p), B = compensated_dot(q, q), Bb = compensated_dot(qb, qb);
    const double ppb = compensated_dot(p, pb), pqb = compensated_dot(p, qb);
    ShiftPair s;
    s.wick = wick_cov(p, q, pb, qb) / (1.0 + B);
    // ⟨a ā† ā a†⟩ = (Σpp̄)² + (Σpq̄)² + A·B̄
    const double four = ppb * ppb + pqb * pqb + A * Bb;
    s.direct = four / A - Bb;
    return s;
}

struct SteeringResult {
    std::size_t m = 0;
    std::vector<std::size_t> l;
    std::vector<double> shift, shift_direct, corr;
};

[[nodiscard]] inline SteeringResult steering_shift(std::size_t m, const std::vector<std::size_t>& l_range,
                                                   const BogoliubovBlock& left, const BogoliubovBlock& right) {
    const auto report = wick_moments({m}, l_range, left, right);
    SteeringResult s{m, l_range, {}, {}, report.corr};
    const auto p = left.alpha_row(m);
    const auto q = detail::negated(left.beta_row(m));
    for (std::size_t l : l_range) {
        const auto qb = detail::negated(right.beta_row(l));
        const auto sh = steering_shift_rows(p, q, right.alpha_row(l), qb);
        s.shift.push_back(sh.wick);
        s.shift_direct.push_back(sh.direct);
    }
    return s;
}

}  // namespace kgcavity
