#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "format.hpp"
#include "parallel.hpp"
#include "region.hpp"
#include "summation.hpp"

namespace kgcavity {

/// One Bogoliubov pair (α_mN, β_mN) plus the underlying overlap V_mN.
struct CoefficientPair {
    double alpha = 0.0;
    double beta = 0.0;
    double V = 0.0;
    bool resonant = false;
};

/// Closed-form overlap ∫ 𝒰_N χ_m dx with χ_m supported on I (reduced units).
///
/// Away from resonance the integral of sin(Kx)·sin(k(x-a)) over [a,b] is
/// ((-1)^m sin(Kb) - sin(Ka))·k/(K²-k²). When K = k it degenerates to 0/0 and
/// the limit (L/2)·cos(Ka) is used instead.
[[nodiscard]] inline CoefficientPair coeff_pair(const Interval& I, std::size_t m, std::size_t N, double mu,
                                                double resonance_eps) {
    if (m < 1 || N < 1) throw IndexError("mode indices are 1-based");
    const double pi = std::numbers::pi;
    const double L = I.length();
    const double dm = static_cast<double>(m);
    const double dN = static_cast<double>(N);
    const double q = dm / L;
    const double k = pi * q;
    const double Omega = box_frequency(dN, 1.0, mu);
    const double omega = box_frequency(dm, L, mu);
    // Ω² - ω² without the μ² cancellation
    const double diff = pi * pi * (dN - q) * (dN + q);
    const double norm = std::sqrt(L * Omega * omega);

    CoefficientPair out;
    if (std::abs(diff) <= resonance_eps * (Omega * Omega + omega * omega)) {
        out.resonant = true;
        out.V = 0.5 * L * cos_pi(dN * I.a) / norm;
        out.alpha = (omega + Omega) * out.V;
        out.beta = diff / (Omega + omega) * out.V;
        return out;
    }
    const double num = (parity_sign(static_cast<long long>(m)) * sin_pi(dN * I.b) - sin_pi(dN * I.a)) * k;
    out.V = num / (diff * norm);
    out.alpha = (omega + Omega) * out.V;
    // β = (Ω-ω)V = num/((Ω+ω)·norm), finite even near resonance
    out.beta = num / ((Omega + omega) * norm);
    return out;
}

[[nodiscard]] inline CoefficientPair coeff_pair(const Region& region, std::size_t m, std::size_t N,
                                                const CavityConfig& cfg, double resonance_eps = 1e-6) {
    return coeff_pair(support(region, cfg), m, N, cfg.reduced_mu(), resonance_eps);
}

/// Row m of a block without storing the whole matrix.
struct CoefficientRow {
    std::vector<double> alpha;
    std::vector<double> beta;
};

[[nodiscard]] inline CoefficientRow coefficient_row(const Region& region, std::size_t m, const CavityConfig& cfg,
                                                    std::size_t n_max, double resonance_eps = 1e-6) {
    const Interval I = support(region, cfg);
    const double mu = cfg.reduced_mu();
    CoefficientRow row;
    row.alpha.resize(n_max);
    row.beta.resize(n_max);
    for (std::size_t N = 1; N <= n_max; ++N) {
        const CoefficientPair c = coeff_pair(I, m, N, mu, resonance_eps);
        row.alpha[N - 1] = c.alpha;
        row.beta[N - 1] = c.beta;
    }
    return row;
}

/// Digest of everything a block depends on: family, r̃, μ̃ and the truncation.
[[nodiscard]] inline std::string block_digest(const Region& region, const CavityConfig& cfg, const Truncation& trunc) {
    std::string key = "kgcavity-block-v1;region=" + to_string(region);
    key += ";r=" + format_double(cfg.reduced_r());
    key += ";mu=" + format_double(cfg.reduced_mu());
    if (region.kind == RegionKind::Probe) key += ";probe=" + format_double(region.probe_start / cfg.R);
    key += ";nmax=" + std::to_string(trunc.n_max_global);
    key += ";mmax=" + std::to_string(trunc.m_max_local);
    key += ";eps=" + format_double(trunc.resonance_eps);
    return sha256_hex(key);
}

enum class CacheStatus { Disabled, Hit, Miss, Error };

/// Truncated α/β matrices of one local family against the global basis.
///
/// Row-major, rows = local index m, columns = global index N, both 1-based in
/// the accessors. Entries are real for this problem.
struct BogoliubovBlock {
    Region region;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::string cfg_hash;
    CacheStatus cache_status = CacheStatus::Disabled;

    [[nodiscard]] double alpha_at(std::size_t m, std::size_t N) const { return alpha[index(m, N)]; }
    [[nodiscard]] double beta_at(std::size_t m, std::size_t N) const { return beta[index(m, N)]; }
    [[nodiscard]] std::complex<double> alpha_complex(std::size_t m, std::size_t N) const { return alpha_at(m, N); }
    [[nodiscard]] std::complex<double> beta_complex(std::size_t m, std::size_t N) const { return beta_at(m, N); }

    [[nodiscard]] std::span<const double> alpha_row(std::size_t m) const { return row(alpha, m); }
    [[nodiscard]] std::span<const double> beta_row(std::size_t m) const { return row(beta, m); }

private:
    [[nodiscard]] std::size_t index(std::size_t m, std::size_t N) const {
        if (m < 1 || m > rows || N < 1 || N > cols)
            throw IndexError("block index (" + std::to_string(m) + "," + std::to_string(N) + ") out of range");
        return (m - 1) * cols + (N - 1);
    }
    [[nodiscard]] std::span<const double> row(const std::vector<double>& v, std::size_t m) const {
        if (m < 1 || m > rows) throw IndexError("block row " + std::to_string(m) + " out of range");
        return std::span<const double>(v).subspan((m - 1) * cols, cols);
    }
};

/// Fills a block from the closed form, data-parallel over rows.
[[nodiscard]] inline BogoliubovBlock compute_block(const Region& region, const CavityConfig& cfg,
                                                   const Truncation& trunc) {
    trunc.validate();
    BogoliubovBlock block;
    block.region = region;
    block.rows = trunc.m_max_local;
    block.cols = trunc.n_max_global;
    block.alpha.resize(block.rows * block.cols);
    block.beta.resize(block.rows * block.cols);
    block.cfg_hash = block_digest(region, cfg, trunc);
    const Interval I = support(region, cfg);
    const double mu = cfg.reduced_mu();
    parallel_for(block.rows, [&](std::size_t i) {
        const std::size_t m = i + 1;
        for (std::size_t N = 1; N <= block.cols; ++N) {
            const CoefficientPair c = coeff_pair(I, m, N, mu, trunc.resonance_eps);
            block.alpha[i * block.cols + N - 1] = c.alpha;
            block.beta[i * block.cols + N - 1] = c.beta;
        }
    });
    return block;
}

/// Residuals of the orthonormality relations expanded in the global basis.
///
/// Matrices are upto × upto, row-major, entry (m,l) at (m-1)*upto + (l-1).
struct IdentityResidualReport {
    std::size_t upto = 0;
    std::size_t n_max = 0;
    std::vector<double> d1_left, d2_left, d1_right, d2_right, cross_d1, cross_d2;

    [[nodiscard]] static double max_of(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }
    [[nodiscard]] double max_d1() const { return std::max(max_of(d1_left), max_of(d1_right)); }
    [[nodiscard]] double max_d2() const { return std::max(max_of(d2_left), max_of(d2_right)); }
    [[nodiscard]] double max_cross() const { return std::max(max_of(cross_d1), max_of(cross_d2)); }
};

[[nodiscard]] inline IdentityResidualReport identity_residuals(const BogoliubovBlock& left,
                                                               const BogoliubovBlock& right, std::size_t upto) {
    if (upto > left.rows || upto > right.rows) throw IndexError("identity_residuals: upto exceeds block rows");
    if (left.cols != right.cols) throw DomainError("identity_residuals: blocks must share n_max_global");
    IdentityResidualReport rep;
    rep.upto = upto;
    rep.n_max = left.cols;
    const std::size_t n = upto * upto;
    for (auto* v : {&rep.d1_left, &rep.d2_left, &rep.d1_right, &rep.d2_right, &rep.cross_d1, &rep.cross_d2})
        v->assign(n, 0.0);

    // (u|v) = Σ α_u α_v - β_u β_v, (u|v*) ∝ Σ α_u β_v - β_u α_v
    auto pairing = [](std::span<const double> a1, std::span<const double> b1, std::span<const double> a2,
                      std::span<const double> b2, bool conj) {
        CompensatedSum<double> acc;
        for (std::size_t N = 0; N < a1.size(); ++N)
            acc += conj ? (a1[N] * b2[N] - b1[N] * a2[N]) : (a1[N] * a2[N] - b1[N] * b2[N]);
        return acc.value();
    };
    parallel_for(upto, [&](std::size_t i) {
        const std::size_t m = i + 1;
        for (std::size_t l = 1; l <= upto; ++l) {
            const std::size_t k = i * upto + (l - 1);
            const double delta = (m == l) ? 1.0 : 0.0;
            rep.d1_left[k] = std::abs(pairing(left.alpha_row(m), left.beta_row(m), left.alpha_row(l),
                                              left.beta_row(l), false) - delta);
            rep.d2_left[k] = std::abs(pairing(left.alpha_row(m), left.beta_row(m), left.alpha_row(l),
                                              left.beta_row(l), true));
            rep.d1_right[k] = std::abs(pairing(right.alpha_row(m), right.beta_row(m), right.alpha_row(l),
                                               right.beta_row(l), false) - delta);
            rep.d2_right[k] = std::abs(pairing(right.alpha_row(m), right.beta_row(m), right.alpha_row(l),
                                               right.beta_row(l), true));
            rep.cross_d1[k] = std::abs(pairing(left.alpha_row(m), left.beta_row(m), right.alpha_row(l),
                                               right.beta_row(l), false));
            rep.cross_d2[k] = std::abs(pairing(left.alpha_row(m), left.beta_row(m), right.alpha_row(l),
                                               right.beta_row(l), true));
        }
    });
    return rep;
}

}  // namespace kgcavity
