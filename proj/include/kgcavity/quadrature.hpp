#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "modes.hpp"
#include "region.hpp"
#include "summation.hpp"

namespace kgcavity {

enum class QuadratureRule { Simpson, Trapezoid };

struct QuadratureSpec {
    QuadratureRule rule = QuadratureRule::Simpson;
    std::size_t refinement_levels = 1;

    void validate() const {
        if (refinement_levels < 1) throw DomainError("refinement_levels must be >= 1");
    }
};

template <typename T>
struct QuadratureEstimate {
    T value{};
    double error_estimate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

template <typename T>
[[nodiscard]] T trapezoid_strided(std::span<const T> y, double h, std::size_t stride) {
    const std::size_t n = y.size();
    CompensatedSum<T> acc;
    acc += T(0.5) * y[0];
    for (std::size_t i = stride; i + stride < n; i += stride) acc += y[i];
    acc += T(0.5) * y[n - 1];
    return acc.value() * (h * static_cast<double>(stride));
}

template <typename T>
[[nodiscard]] T simpson_strided(std::span<const T> y, double h, std::size_t stride) {
    // composite Simpson over (n-1)/stride panels, closing an odd panel with 3/8
    const std::size_t panels = (y.size() - 1) / stride;
    const double H = h * static_cast<double>(stride);
    if (panels == 1) return T(0.5 * H) * (y[0] + y[stride]);
    std::size_t simpson_panels = panels;
    if (panels % 2 == 1) simpson_panels = panels - 3;
    CompensatedSum<T> acc;
    for (std::size_t p = 0; p < simpson_panels; p += 2) {
        const std::size_t i = p * stride;
        acc += (H / 3.0) * (y[i] + T(4.0) * y[i + stride] + y[i + 2 * stride]);
    }
    if (simpson_panels != panels) {
        const std::size_t i = simpson_panels * stride;
        acc += (3.0 * H / 8.0) * (y[i] + T(3.0) * y[i + stride] + T(3.0) * y[i + 2 * stride] + y[i + 3 * stride]);
    }
    return acc.value();
}

}  // namespace detail

/// Integral of uniformly spaced samples with a one-step Richardson error
/// estimate (comparison against every second sample).
template <typename T>
[[nodiscard]] QuadratureEstimate<T> integrate_uniform(std::span<const T> y, double h, const QuadratureSpec& spec = {}) {
    spec.validate();
    QuadratureEstimate<T> out;
    if (y.size() < 2) return {T{}, 0.0};
    const bool simpson = spec.rule == QuadratureRule::Simpson;
    auto rule = [&](std::size_t stride) {
        return simpson ? detail::simpson_strided(y, h, stride) : detail::trapezoid_strided(y, h, stride);
    };
    out.value = rule(1);
    const std::size_t panels = y.size() - 1;
    const bool coarse_ok = simpson ? (panels % 4 == 0) : (panels % 2 == 0);
    if (coarse_ok && panels >= 4) {
        const double order = simpson ? 4.0 : 2.0;
        out.error_estimate = std::abs(out.value - rule(2)) / (std::pow(2.0, order) - 1.0);
    }
    return out;
}

/// Romberg extrapolation of samples on 2^levels·P0 + 1 uniform points.
///
/// With extrapolate = false only the finest trapezoid sum is returned.
template <typename T>
[[nodiscard]] QuadratureEstimate<T> romberg_uniform(std::span<const T> y, double h, std::size_t levels,
                                                    bool extrapolate = true) {
    const std::size_t panels = y.size() - 1;
    const std::size_t top = std::size_t{1} << levels;
    if (levels < 1 || panels % top != 0) throw DomainError("romberg: sample count incompatible with refinement levels");
    std::vector<std::vector<T>> R(levels + 1);
    for (std::size_t j = 0; j <= levels; ++j) {
        R[j].resize(j + 1);
        R[j][0] = detail::trapezoid_strided(y, h, top >> j);
        double factor = 4.0;
        for (std::size_t k = 1; k <= j; ++k, factor *= 4.0)
            R[j][k] = R[j][k - 1] + (R[j][k - 1] - R[j - 1][k - 1]) / (factor - 1.0);
    }
    QuadratureEstimate<T> out;
    if (extrapolate) {
        out.value = R[levels][levels];
        out.error_estimate = std::abs(R[levels][levels] - R[levels - 1][levels - 1]);
    } else {
        out.value = R[levels][0];
        out.error_estimate = std::abs(R[levels][0] - R[levels - 1][0]) / 3.0;
    }
    return out;
}

/// i∫(f*ġ - ḟ*g)dx on a shared uniform grid.
[[nodiscard]] inline QuadratureEstimate<std::complex<double>> kg_inner(const SampledMode& f, const SampledMode& g,
                                                                        const QuadratureSpec& spec = {}) {
    if (f.grid != g.grid) throw GridMismatch("kg_inner: sampled modes live on different grids");
    if (f.time != g.time) throw GridMismatch("kg_inner: sampled modes taken at different times");
    if (f.value.size() != f.grid.size() || g.value.size() != g.grid.size())
        throw GridMismatch("kg_inner: sample/grid length mismatch");
    const std::size_t n = f.grid.size();
    if (n < 2) throw GridMismatch("kg_inner: grid too short");
    const std::complex<double> I(0.0, 1.0);
    std::vector<std::complex<double>> integrand(n);
    for (std::size_t i = 0; i < n; ++i)
        integrand[i] = I * (std::conj(f.value[i]) * g.tderiv[i] - std::conj(f.tderiv[i]) * g.value[i]);
    const double h = (f.grid.back() - f.grid.front()) / static_cast<double>(n - 1);
    return integrate_uniform<std::complex<double>>(integrand, h, spec);
}

/// Quadrature value of ∫ 𝒰_N χ_m dx over the family's support, reduced units.
///
/// Independent of the closed form: samples the integrand directly and
/// extrapolates (Romberg) from a base grid resolving the faster oscillation.
[[nodiscard]] inline QuadratureEstimate<double> overlap_V(std::size_t m, std::size_t N, const Region& region,
                                                          const CavityConfig& cfg, QuadratureSpec spec = {QuadratureRule::Simpson, 5},
                                                          std::size_t min_points = 0) {
    spec.validate();
    if (m < 1 || N < 1) throw IndexError("overlap_V: indices are 1-based");
    const Interval I = support(region, cfg);
    const double L = I.length();
    const double mu = cfg.reduced_mu();
    const double Omega = box_frequency(static_cast<double>(N), 1.0, mu);
    const double omega = box_frequency(static_cast<double>(m), L, mu);
    const double norm = 1.0 / std::sqrt(L * Omega * omega);

    // base panel count: ~0.1 rad per panel on the fastest component
    const double kmax = std::numbers::pi * (static_cast<double>(N) + static_cast<double>(m) / L) * L;
    std::size_t base = 16;
    while (static_cast<double>(base) < kmax / 0.1) base *= 2;
    const std::size_t levels = spec.refinement_levels;
    std::size_t panels = base << levels;
    while (panels + 1 < min_points) panels *= 2;
    const double h = L / static_cast<double>(panels);
    std::vector<double> y(panels + 1);
    for (std::size_t i = 0; i <= panels; ++i) {
        const double s = h * static_cast<double>(i);
        const double x = (i == panels) ? I.b : I.a + s;
        y[i] = norm * sin_pi(static_cast<double>(N) * x) * sin_pi(static_cast<double>(m) * s / L);
    }
    return romberg_uniform<double>(y, h, levels, spec.rule == QuadratureRule::Simpson);
}

}  // namespace kgcavity
