#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace kgcavity {

/// Neumaier (improved Kahan-Babuska) compensated accumulator.
///
/// All series in the library are accumulated in ascending index order through
/// this type, which makes every sum bit-reproducible for a given truncation.
template <typename Real = double>
class CompensatedSum {
public:
    CompensatedSum& operator+=(Real x) noexcept {
        const Real t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    [[nodiscard]] Real value() const noexcept { return sum_ + compensation_; }

private:
    Real sum_{0};
    Real compensation_{0};
};

template <typename Real>
class CompensatedSum<std::complex<Real>> {
public:
    CompensatedSum& operator+=(std::complex<Real> z) noexcept {
        re_ += z.real();
        im_ += z.imag();
        return *this;
    }
    [[nodiscard]] std::complex<Real> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<Real> re_;
    CompensatedSum<Real> im_;
};

template <typename Real>
[[nodiscard]] Real compensated_sum(std::span<const Real> xs) noexcept {
    CompensatedSum<Real> acc;
    for (Real x : xs) acc += x;
    return acc.value();
}

/// Compensated dot product in index order.
[[nodiscard]] inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept {
    CompensatedSum<double> acc;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc.value();
}

/// sin(πx) with exact zeros at integers and exact ±1 at half-integers.
[[nodiscard]] inline double sin_pi(double x) noexcept {
    // reduce to y in [-1, 1]; sin(π(x - 2k)) = sin(πx)
    double y = x - 2.0 * std::nearbyint(0.5 * x);
    double sign = 1.0;
    if (y < 0) {
        y = -y;
        sign = -1.0;
    }
    if (y > 0.5) y = 1.0 - y;  // sin(π(1-y)) = sin(πy)
    if (y == 0.0) return 0.0;
    if (y == 0.5) return sign;
    return sign * std::sin(std::numbers::pi * y);
}

/// cos(πx), exact at integers and half-integers.
[[nodiscard]] inline double cos_pi(double x) noexcept { return sin_pi(x + 0.5); }

/// (-1)^k for integer k.
[[nodiscard]] constexpr double parity_sign(long long k) noexcept { return (k % 2 == 0) ? 1.0 : -1.0; }

/// Estimate of Σ_{N>n} f(N) by the integral test, ∫_n^∞ f(x) dx.
///
/// f must be non-negative and eventually decreasing faster than 1/x.
template <typename F>
[[nodiscard]] double integral_tail(F&& f, double n) {
    if (!(n > 0)) return std::numeric_limits<double>::infinity();
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0;
    double l1 = 0;
    // exp_sinh expects [0, ∞); shift the lower limit
    auto shifted = [&](double s) { return f(n + s); };
    const double value = integrator.integrate(shifted, 0.0, std::numeric_limits<double>::infinity(),
                                              1e-10, &error, &l1);
    return value;
}

}  // namespace kgcavity
