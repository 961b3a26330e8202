#pragma once

#include <cmath>
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

/// Compensated sums over one coefficient row; energies in reduced units.
struct RowSums {
    double alpha2 = 0.0;    // Σ α²
    double beta2 = 0.0;     // Σ β²  (= ⟨0_G|n|0_G⟩)
    double alphabeta = 0.0;  // Σ α β
    double energy_alpha = 0.0;  // Σ Ω α²
    double energy_beta = 0.0;   // Σ Ω β²
};

/// Integral-test bounds for the N > n_max remainder of the RowSums entries,
/// with sin² replaced by its mean 1/2.
struct RowTails {
    double alpha2 = 0.0;
    double beta2 = 0.0;
    double energy_alpha = 0.0;
    double energy_beta = 0.0;
};

[[nodiscard]] inline RowSums row_sums(const Region& region, std::size_t m, const CavityConfig& cfg, std::size_t n_max,
                                      double resonance_eps = 1e-6) {
    const Interval I = support(region, cfg);
    const double mu = cfg.reduced_mu();
    CompensatedSum<double> a2, b2, ab, ea, eb;
    for (std::size_t N = 1; N <= n_max; ++N) {
        const auto c = coeff_pair(I, m, N, mu, resonance_eps);
        const double Om = box_frequency(static_cast<double>(N), 1.0, mu);
        a2 += c.alpha * c.alpha;
        b2 += c.beta * c.beta;
        ab += c.alpha * c.beta;
        ea += Om * c.alpha * c.alpha;
        eb += Om * c.beta * c.beta;
    }
    return {a2.value(), b2.value(), ab.value(), ea.value(), eb.value()};
}

[[nodiscard]] inline RowSums row_sums(std::span<const double> alpha, std::span<const double> beta,
                                      std::span<const double> Omega) {
    CompensatedSum<double> a2, b2, ab, ea, eb;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        a2 += alpha[j] * alpha[j];
        b2 += beta[j] * beta[j];
        ab += alpha[j] * beta[j];
        ea += Omega[j] * alpha[j] * alpha[j];
        eb += Omega[j] * beta[j] * beta[j];
    }
    return {a2.value(), b2.value(), ab.value(), ea.value(), eb.value()};
}

[[nodiscard]] inline RowTails row_tails(const Region& region, std::size_t m, const CavityConfig& cfg,
                                        std::size_t n_max) {
    const double pi = std::numbers::pi;
    const double L = support(region, cfg).length();
    const double mu = cfg.reduced_mu();
    const double q = static_cast<double>(m) / L;
    const double k = pi * q;
    const double omega = box_frequency(static_cast<double>(m), L, mu);
    const double n = static_cast<double>(n_max);
    auto Om = [&](double x) { return std::sqrt(pi * pi * x * x + mu * mu); };
    // β² ≈ ½ k²/((Ω+ω)² L Ω ω),  α² ≈ ½ k² (Ω+ω)²/((Ω²-ω²)² L Ω ω)
    auto b2 = [&](double x) {
        const double O = Om(x);
        return 0.5 * k * k / ((O + omega) * (O + omega) * L * O * omega);
    };
    auto a2 = [&](double x) {
        const double O = Om(x);
        const double d = pi * pi * (x - q) * (x + q);
        return 0.5 * k * k * (O + omega) * (O + omega) / (d * d * L * O * omega);
    };
    RowTails t;
    t.beta2 = integral_tail(b2, n);
    t.energy_beta = integral_tail([&](double x) { return Om(x) * b2(x); }, n);
    if (n > q + 1.0) {
        t.alpha2 = integral_tail(a2, n);
        t.energy_alpha = integral_tail([&](double x) { return Om(x) * a2(x); }, n);
    } else {
        t.alpha2 = t.energy_alpha = std::numeric_limits<double>::infinity();
    }
    return t;
}

/// ⟨0_G|n_l|0_G⟩ for l = 1..m_max_local with tail estimates.
struct SpectrumResult {
    Region region;
    std::vector<double> omega;  // local frequencies, user units
    std::vector<double> values;
    std::vector<double> tail_bound;
    Truncation truncation;
};

[[nodiscard]] inline SpectrumResult vacuum_spectrum(const Region& region, const CavityConfig& cfg,
                                                    const Truncation& trunc) {
    trunc.validate();
    SpectrumResult s{region, {}, {}, {}, trunc};
    const std::size_t M = trunc.m_max_local;
    s.omega.resize(M);
    s.values.resize(M);
    s.tail_bound.resize(M);
    parallel_for(M, [&](std::size_t i) {
        const std::size_t l = i + 1;
        s.values[i] = row_sums(region, l, cfg, trunc.n_max_global, trunc.resonance_eps).beta2;
        s.tail_bound[i] = row_tails(region, l, cfg, trunc.n_max_global).beta2;
        s.omega[i] = local_frequency(region, l, cfg) / cfg.R;
    });
    return s;
}

/// Same spectrum read off an existing block.
[[nodiscard]] inline SpectrumResult vacuum_spectrum(const BogoliubovBlock& block, const CavityConfig& cfg,
                                                    const Truncation& trunc) {
    SpectrumResult s{block.region, {}, {}, {}, trunc};
    s.truncation.m_max_local = block.rows;
    s.truncation.n_max_global = block.cols;
    for (std::size_t l = 1; l <= block.rows; ++l) {
        const auto b = block.beta_row(l);
        s.values.push_back(compensated_dot(b, b));
        s.tail_bound.push_back(row_tails(block.region, l, cfg, block.cols).beta2);
        s.omega.push_back(local_frequency(block.region, l, cfg) / cfg.R);
    }
    return s;
}

/// Least-squares line y = a + b·x with coefficient of determination.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

[[nodiscard]] inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("fit_line needs at least two matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

/// S(M) = Σ_{m≤M} (β_mN² + β̄_mN²) at fixed global index N.
struct DivergenceScan {
    std::size_t N = 0;
    std::vector<std::size_t> M;
    std::vector<double> partial_sums;
    double fit_intercept = 0.0;
    double fit_slope = 0.0;
    double fit_r2 = 0.0;
};

[[nodiscard]] inline DivergenceScan divergence_scan(std::size_t N, const CavityConfig& cfg,
                                                    const std::vector<std::size_t>& M_list,
                                                    double resonance_eps = 1e-6) {
    if (M_list.empty()) throw DomainError("divergence_scan: empty M list");
    for (std::size_t i = 1; i < M_list.size(); ++i)
        if (M_list[i] <= M_list[i - 1]) throw DomainError("divergence_scan: M list must be increasing");
    DivergenceScan d;
    d.N = N;
    d.M = M_list;
    const Interval left = support(Region::left(), cfg), right = support(Region::right(), cfg);
    const double mu = cfg.reduced_mu();
    CompensatedSum<double> acc;
    std::size_t m = 0;
    for (std::size_t target : M_list) {
        for (++m; m <= target; ++m) {
            const double b = coeff_pair(left, m, N, mu, resonance_eps).beta;
            const double bb = coeff_pair(right, m, N, mu, resonance_eps).beta;
            acc += b * b + bb * bb;
        }
        --m;
        d.partial_sums.push_back(acc.value());
    }
    if (M_list.size() >= 2) {
        std::vector<double> logs;
        for (std::size_t x : M_list) logs.push_back(std::log(static_cast<double>(x)));
        const auto f = fit_line(logs, d.partial_sums);
        d.fit_intercept = f.intercept;
        d.fit_slope = f.slope;
        d.fit_r2 = f.r2;
    }
    return d;
}

/// Fixed-m sums over N at increasing truncations, with Cauchy checks.
struct NSumConvergence {
    Region region;
    std::size_t m = 0;
    std::vector<std::size_t> n_max;
    std::vector<double> alpha2, beta2, alpha2_tail, beta2_tail;

    /// Every increment between consecutive truncations is within the tail
    /// bound of the coarser one (with a relative slack for the sin² averaging).
    [[nodiscard]] bool cauchy_within_tails(double slack = 2.0) const {
        for (std::size_t i = 1; i < n_max.size(); ++i) {
            if (std::abs(alpha2[i] - alpha2[i - 1]) > slack * alpha2_tail[i - 1]) return false;
            if (std::abs(beta2[i] - beta2[i - 1]) > slack * beta2_tail[i - 1]) return false;
        }
        return true;
    }
};

[[nodiscard]] inline NSumConvergence nsum_convergence(const Region& region, std::size_t m, const CavityConfig& cfg,
                                                      const std::vector<std::size_t>& n_list,
                                                      double resonance_eps = 1e-6) {
    NSumConvergence c{region, m, n_list, {}, {}, {}, {}};
    for (std::size_t n : n_list) {
        const auto s = row_sums(region, m, cfg, n, resonance_eps);
        const auto t = row_tails(region, m, cfg, n);
        c.alpha2.push_back(s.alpha2);
        c.beta2.push_back(s.beta2);
        c.alpha2_tail.push_back(t.alpha2);
        c.beta2_tail.push_back(t.beta2);
    }
    return c;
}

/// ε_l = Σ Ω_N (α_lN² + β_lN²), user units, with its tail bound.
struct LocalEnergy {
    std::size_t l = 0;
    double epsilon = 0.0;
    double tail_bound = 0.0;
    [[nodiscard]] double n_particle(std::size_t count) const noexcept { return static_cast<double>(count) * epsilon; }
};

[[nodiscard]] inline LocalEnergy local_quantum_energy(const Region& region, std::size_t l, const CavityConfig& cfg,
                                                      const Truncation& trunc) {
    const auto s = row_sums(region, l, cfg, trunc.n_max_global, trunc.resonance_eps);
    const auto t = row_tails(region, l, cfg, trunc.n_max_global);
    return {l, (s.energy_alpha + s.energy_beta) / cfg.R, (t.energy_alpha + t.energy_beta) / cfg.R};
}

/// Number-operator moments of the global vacuum for local modes.
///
/// Matrices are |m| × |n| row-major. corr follows the definition through the
/// Wick variances; corr_paper uses the total-number denominator (truncated at
/// the block rows) and is filled only on request.
struct MomentReport {
    std::vector<std::size_t> m_indices, n_indices;
    std::vector<double> mean_left, mean_right, var_left, var_right;
    std::vector<double> cov, corr, corr_paper;
    double double_sum_max_rel_diff = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] double cov_at(std::size_t i, std::size_t j) const { return cov[i * n_indices.size() + j]; }
    [[nodiscard]] double corr_at(std::size_t i, std::size_t j) const { return corr[i * n_indices.size() + j]; }
};

struct WickOptions {
    bool verify_double_sum = false;
    bool paper_norm = false;
};

/// Moments of a = Σ p A + q A† on the vacuum: ⟨n⟩ = B, var = A·B + C².
struct SingleModeMoments {
    double mean = 0.0;
    double var = 0.0;
};

[[nodiscard]] inline SingleModeMoments wick_single(std::span<const double> p, std::span<const double> q) {
    const double A = compensated_dot(p, p), B = compensated_dot(q, q), C = compensated_dot(p, q);
    return {B, A * B + C * C};
}

/// cov(n_a, n_b) = (Σ q p̄)(Σ p q̄) + (Σ q q̄)(Σ p p̄).
[[nodiscard]] inline double wick_cov(std::span<const double> p, std::span<const double> q, std::span<const double> pb,
                                     std::span<const double> qb) {
    return compensated_dot(q, pb) * compensated_dot(p, qb) + compensated_dot(q, qb) * compensated_dot(p, pb);
}

/// The same covariance as the explicit (N,P) double sum over β, α entries.
[[nodiscard]] inline double wick_cov_double_sum(std::span<const double> alpha, std::span<const double> beta,
                                                std::span<const double> alpha_b, std::span<const double> beta_b) {
    CompensatedSum<double> acc;
    const std::size_t n = alpha.size();
    for (std::size_t M = 0; M < n; ++M) {
        const double x1 = beta[M] * beta_b[M];
        const double x2 = beta[M] * alpha_b[M];
        CompensatedSum<double> inner;
        for (std::size_t P = 0; P < n; ++P) inner += x1 * alpha[P] * alpha_b[P] + x2 * alpha[P] * beta_b[P];
        acc += inner.value();
    }
    return acc.value();
}

namespace detail {

// operator rows (p, q) = (α, -β)
inline std::vector<double> negated(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x = -x;
    return out;
}

}  // namespace detail

[[nodiscard]] inline MomentReport wick_moments(const std::vector<std::size_t>& m_range,
                                               const std::vector<std::size_t>& n_range, const BogoliubovBlock& left,
                                               const BogoliubovBlock& right, const WickOptions& opts = {}) {
    if (left.cols != right.cols) throw DomainError("wick_moments: blocks must share n_max_global");
    MomentReport r;
    r.m_indices = m_range;
    r.n_indices = n_range;
    const std::size_t nm = m_range.size(), nn = n_range.size();
    std::vector<std::vector<double>> ql(nm), qr(nn);
    for (std::size_t i = 0; i < nm; ++i) {
        ql[i] = detail::negated(left.beta_row(m_range[i]));
        const auto s = wick_single(left.alpha_row(m_range[i]), ql[i]);
        r.mean_left.push_back(s.mean);
        r.var_left.push_back(s.var);
    }
    for (std::size_t j = 0; j < nn; ++j) {
        qr[j] = detail::negated(right.beta_row(n_range[j]));
        const auto s = wick_single(right.alpha_row(n_range[j]), qr[j]);
        r.mean_right.push_back(s.mean);
        r.var_right.push_back(s.var);
    }
    r.cov.assign(nm * nn, 0.0);
    r.corr.assign(nm * nn, 0.0);
    parallel_for(nm, [&](std::size_t i) {
        for (std::size_t j = 0; j < nn; ++j) {
            const double c = wick_cov(left.alpha_row(m_range[i]), ql[i], right.alpha_row(n_range[j]), qr[j]);
            r.cov[i * nn + j] = c;
            const double denom = std::sqrt(r.var_left[i] * r.var_right[j]);
            r.corr[i * nn + j] = denom > 0 ? c / denom : 0.0;
        }
    });
    if (opts.paper_norm) {
        CompensatedSum<double> tl, tr;
        for (std::size_t l = 1; l <= left.rows; ++l) tl += compensated_dot(left.beta_row(l), left.beta_row(l));
        for (std::size_t l = 1; l <= right.rows; ++l) tr += compensated_dot(right.beta_row(l), right.beta_row(l));
        const double denom = std::sqrt(tl.value() * tr.value());
        r.corr_paper.resize(nm * nn);
        for (std::size_t k = 0; k < nm * nn; ++k) r.corr_paper[k] = denom > 0 ? r.cov[k] / denom : 0.0;
    }
    if (opts.verify_double_sum) {
        std::vector<double> diffs(nm * nn, 0.0);
        parallel_for(nm * nn, [&](std::size_t k) {
            const std::size_t i = k / nn, j = k % nn;
            const double ds = wick_cov_double_sum(left.alpha_row(m_range[i]), left.beta_row(m_range[i]),
                                                  right.alpha_row(n_range[j]), right.beta_row(n_range[j]));
            const double c = r.cov[k];
            const double scale = std::max(std::abs(c), std::abs(ds));
            diffs[k] = scale > 0 ? std::abs(ds - c) / scale : 0.0;
        });
        r.double_sum_max_rel_diff = 0.0;
        for (double d : diffs) r.double_sum_max_rel_diff = std::max(r.double_sum_max_rel_diff, d);
    }
    return r;
}

/// Trend table across a mass or partition scan.
enum class LimitKind { Mass, PartitionSize };

struct LimitScanRow {
    double value = 0.0;  // μ̃ or r̃
    std::vector<double> n_left, n_right;       // ⟨n_l⟩, ⟨n̄_l⟩ per probe
    std::vector<double> alpha_abs, beta_abs;   // |α_lN|, |β_lN| per probe (left family)
    double total_left = 0.0;                    // Σ_{m≤M} ⟨n_m⟩
    double total_right = 0.0;                   // Σ_{m≤M} ⟨n̄_m⟩
};

struct LimitScan {
    LimitKind kind = LimitKind::Mass;
    std::vector<std::pair<std::size_t, std::size_t>> probes;  // (l, N)
    std::size_t M = 0;
    std::vector<LimitScanRow> rows;
};

[[nodiscard]] inline LimitScan limit_scan(LimitKind kind, const std::vector<double>& values,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& probes,
                                          std::size_t M, const CavityConfig& base, const Truncation& trunc) {
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1])) throw DomainError("limit_scan: values must be sorted increasing");
    LimitScan scan{kind, probes, M, {}};
    scan.rows.resize(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        const CavityConfig red = base.reduced();
        const CavityConfig cfg = kind == LimitKind::Mass ? validate_config(1.0, red.r, values[i])
                                                         : validate_config(1.0, values[i], red.mu);
        LimitScanRow row;
        row.value = values[i];
        for (auto [l, N] : probes) {
            row.n_left.push_back(row_sums(Region::left(), l, cfg, trunc.n_max_global, trunc.resonance_eps).beta2);
            row.n_right.push_back(row_sums(Region::right(), l, cfg, trunc.n_max_global, trunc.resonance_eps).beta2);
            const auto c = coeff_pair(Region::left(), l, N, cfg, trunc.resonance_eps);
            row.alpha_abs.push_back(std::abs(c.alpha));
            row.beta_abs.push_back(std::abs(c.beta));
        }
        CompensatedSum<double> tl, tr;
        for (std::size_t m = 1; m <= M; ++m) {
            tl += row_sums(Region::left(), m, cfg, trunc.n_max_global, trunc.resonance_eps).beta2;
            tr += row_sums(Region::right(), m, cfg, trunc.n_max_global, trunc.resonance_eps).beta2;
        }
        row.total_left = tl.value();
        row.total_right = tr.value();
        scan.rows[i] = std::move(row);
    });
    return scan;
}

}  // namespace kgcavity
