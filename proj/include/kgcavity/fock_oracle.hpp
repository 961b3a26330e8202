#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace kgcavity {

/// Occupation-number basis of a few global modes with a per-mode cap.
///
/// State index is the mixed-radix number Σ n_k (cap+1)^k, so basis[i] lists
/// the occupations of state i in lexicographic order of the reversed tuple.
class TruncatedFock {
public:
    static constexpr std::size_t default_budget = 65536;

    TruncatedFock(std::size_t n_modes, std::size_t max_occupation, std::size_t budget = default_budget)
        : n_modes_(n_modes), cap_(max_occupation) {
        if (n_modes < 1 || n_modes > 8) throw DimensionError("TruncatedFock supports 1..8 modes");
        if (max_occupation < 2) throw DimensionError("max_occupation must be at least 2");
        dimension_ = 1;
        for (std::size_t k = 0; k < n_modes; ++k) {
            dimension_ *= (cap_ + 1);
            if (dimension_ > budget)
                throw DimensionError("Fock dimension exceeds budget of " + std::to_string(budget));
        }
        stride_.resize(n_modes);
        std::size_t s = 1;
        for (std::size_t k = 0; k < n_modes; ++k, s *= (cap_ + 1)) stride_[k] = s;
    }

    [[nodiscard]] std::size_t n_modes() const noexcept { return n_modes_; }
    [[nodiscard]] std::size_t max_occupation() const noexcept { return cap_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }

    [[nodiscard]] std::size_t occupation(std::size_t state, std::size_t mode) const noexcept {
        return (state / stride_[mode]) % (cap_ + 1);
    }

    [[nodiscard]] std::vector<std::vector<std::uint8_t>> basis() const {
        std::vector<std::vector<std::uint8_t>> b(dimension_, std::vector<std::uint8_t>(n_modes_));
        for (std::size_t i = 0; i < dimension_; ++i)
            for (std::size_t k = 0; k < n_modes_; ++k) b[i][k] = static_cast<std::uint8_t>(occupation(i, k));
        return b;
    }

    using State = std::vector<std::complex<double>>;

    [[nodiscard]] State vacuum() const {
        State v(dimension_);
        v[0] = 1.0;
        return v;
    }

    /// (Σ_k c_k A_k + d_k A_k†) ψ; raising beyond the cap is dropped.
    [[nodiscard]] State apply_linear(std::span<const std::complex<double>> c, std::span<const std::complex<double>> d,
                                     const State& psi) const {
        State out(dimension_);
        for (std::size_t i = 0; i < dimension_; ++i) {
            const std::complex<double> amp = psi[i];
            if (amp == 0.0) continue;
            for (std::size_t k = 0; k < n_modes_; ++k) {
                const std::size_t n = occupation(i, k);
                if (n > 0 && c[k] != 0.0)
                    out[i - stride_[k]] += c[k] * std::sqrt(static_cast<double>(n)) * amp;
                if (n < cap_ && d[k] != 0.0)
                    out[i + stride_[k]] += d[k] * std::sqrt(static_cast<double>(n + 1)) * amp;
            }
        }
        return out;
    }

    [[nodiscard]] static std::complex<double> inner(const State& a, const State& b) {
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return s;
    }

private:
    std::size_t n_modes_;
    std::size_t cap_;
    std::size_t dimension_ = 1;
    std::vector<std::size_t> stride_;
};

struct OracleMoments {
    double mean_m = 0.0;
    double mean_n = 0.0;
    double second = 0.0;  // ⟨n_m n̄_n⟩
    double var_m = 0.0;
    double var_n = 0.0;
    double cov = 0.0;
    double imag_residue = 0.0;  // |Im ⟨n_m n̄_n⟩|
};

/// Exact vacuum moments of a = Σ p A + q A† and ā = Σ p̄ A + q̄ A† on the
/// truncated space, by explicit operator application.
[[nodiscard]] inline OracleMoments oracle_moments(std::span<const std::complex<double>> p,
                                                  std::span<const std::complex<double>> q,
                                                  std::span<const std::complex<double>> pb,
                                                  std::span<const std::complex<double>> qb,
                                                  const TruncatedFock& fock) {
    const std::size_t K = fock.n_modes();
    if (p.size() != K || q.size() != K || pb.size() != K || qb.size() != K)
        throw DimensionError("oracle rows must have n_modes entries");
    auto conj_of = [](std::span<const std::complex<double>> v) {
        std::vector<std::complex<double>> c(v.begin(), v.end());
        for (auto& z : c) z = std::conj(z);
        return c;
    };
    const std::vector<std::complex<double>> zero(K, 0.0);
    // a† = Σ p* A† + q* A
    const auto pc = conj_of(p), qc = conj_of(q), pbc = conj_of(pb), qbc = conj_of(qb);
    const auto vac = fock.vacuum();

    const auto a0 = fock.apply_linear(p, q, vac);
    const auto n0 = fock.apply_linear(qc, pc, a0);  // a† a |0⟩
    const auto ab0 = fock.apply_linear(pb, qb, vac);
    const auto nb0 = fock.apply_linear(qbc, pbc, ab0);

    OracleMoments o;
    o.mean_m = TruncatedFock::inner(a0, a0).real();
    o.mean_n = TruncatedFock::inner(ab0, ab0).real();
    const double sq_m = TruncatedFock::inner(n0, n0).real();
    const double sq_n = TruncatedFock::inner(nb0, nb0).real();
    const std::complex<double> second = TruncatedFock::inner(n0, nb0);
    o.second = second.real();
    o.imag_residue = std::abs(second.imag());
    o.var_m = sq_m - o.mean_m * o.mean_m;
    o.var_n = sq_n - o.mean_n * o.mean_n;
    o.cov = o.second - o.mean_m * o.mean_n;
    return o;
}

/// Real-row convenience overload.
[[nodiscard]] inline OracleMoments oracle_moments(std::span<const double> p, std::span<const double> q,
                                                  std::span<const double> pb, std::span<const double> qb,
                                                  const TruncatedFock& fock) {
    auto cx = [](std::span<const double> v) { return std::vector<std::complex<double>>(v.begin(), v.end()); };
    const auto a = cx(p), b = cx(q), c = cx(pb), d = cx(qb);
    return oracle_moments(std::span<const std::complex<double>>(a), b, c, d, fock);
}

}  // namespace kgcavity
