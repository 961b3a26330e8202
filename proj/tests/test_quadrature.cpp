#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <kgcavity/bogoliubov.hpp>
#include <kgcavity/modes.hpp>
#include <kgcavity/quadrature.hpp>

using namespace kgcavity;
using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

struct Setup {
    CavityConfig cfg;
    Truncation tr;
    FrequencyTables tables;
    std::vector<double> grid;
};

Setup make(double r, double mu, std::size_t points = 4097, double R = 1.0) {
    Setup s{validate_config(R, r * R, mu / R), Truncation{64, 16, points, 1e-6}, {}, {}};
    s.tables = frequencies(s.cfg, s.tr);
    s.grid = uniform_grid(s.cfg, points);
    return s;
}

}  // namespace

TEST(Integrate, PolynomialExactness) {
    std::vector<double> x(9), y(9), y4(9);
    for (int i = 0; i < 9; ++i) {
        x[i] = i / 8.0;
        y[i] = x[i] * x[i] * x[i];
        y4[i] = 1 + x[i];
    }
    EXPECT_NEAR(integrate_uniform<double>(y, 1 / 8.0).value, 0.25, 1e-15);
    EXPECT_NEAR(integrate_uniform<double>(y4, 1 / 8.0, {QuadratureRule::Trapezoid, 1}).value, 1.5, 1e-15);
    // even sample count closes with the 3/8 rule, still exact for cubics
    std::vector<double> z(8);
    for (int i = 0; i < 8; ++i) z[i] = std::pow(i / 7.0, 3);
    EXPECT_NEAR(integrate_uniform<double>(z, 1 / 7.0).value, 0.25, 1e-15);
}

TEST(Integrate, SimpsonOrderOnSmoothIntegrand) {
    double prev_err = 0;
    for (int n : {33, 65, 129, 257}) {
        std::vector<double> y(n);
        const double h = pi / (n - 1);
        for (int i = 0; i < n; ++i) y[i] = std::exp(std::sin(i * h));
        const auto est = integrate_uniform<double>(y, h);
        const double exact = 6.2087580357111102;  // ∫_0^π e^{sin x} dx
        const double err = std::abs(est.value - exact);
        if (prev_err > 0) {
            EXPECT_GT(std::log2(prev_err / err), 3.0);
        }
        EXPECT_LT(err, 20 * est.error_estimate + 1e-14);
        prev_err = err;
    }
}

TEST(Romberg, ConvergesFast) {
    std::vector<double> y(1025);
    const double h = 1.0 / 1024;
    for (int i = 0; i <= 1024; ++i) y[i] = std::cos(3 * i * h);
    const auto r = romberg_uniform<double>(y, h, 4);
    EXPECT_NEAR(r.value, std::sin(3.0) / 3, 1e-15);
    EXPECT_THROW((void)romberg_uniform<double>(std::vector<double>(1000), h, 4), DomainError);
}

TEST(KgInner, GlobalModesOrthonormal) {
    for (double R : {1.0, 2.5}) {
        auto s = make(0.5, 3.0, 4097, R);
        for (double t : {0.0, 0.37}) {
            for (std::size_t N = 1; N <= 5; ++N) {
                const auto f = eval_global_mode(N, s.grid, t, s.cfg, s.tables);
                const auto self = kg_inner(f, f);
                EXPECT_NEAR(self.value.real(), 1.0, 1e-12);
                EXPECT_NEAR(self.value.imag(), 0.0, 1e-14);
                EXPECT_NEAR(std::abs(kg_inner(f, f.conjugate()).value), 0.0, 1e-13);
                const auto g = eval_global_mode(N + 2, s.grid, t, s.cfg, s.tables);
                EXPECT_NEAR(std::abs(kg_inner(f, g).value), 0.0, 1e-12);
            }
        }
    }
}

TEST(KgInner, LocalInitialDataOrthonormal) {
    auto s = make(0.3, 2.0, 8193);
    for (const Region g : {Region::left(), Region::right()}) {
        for (std::size_t m = 1; m <= 4; ++m) {
            const auto u = eval_local_initial(g, m, s.grid, s.cfg, s.tables);
            for (std::size_t l = 1; l <= 4; ++l) {
                const auto v = eval_local_initial(g, l, s.grid, s.cfg, s.tables);
                // r = 0.3 is not on the grid, so the support edge costs O(h²)
                EXPECT_NEAR(std::abs(kg_inner(u, v).value - cd(m == l ? 1.0 : 0.0)), 0.0, 5e-4) << m << l;
            }
        }
    }
    auto h = make(0.5, 0.0, 4097);
    const auto u1 = eval_local_initial(Region::left(), 1, h.grid, h.cfg, h.tables);
    const auto u2 = eval_local_initial(Region::left(), 2, h.grid, h.cfg, h.tables);
    const auto v1 = eval_local_initial(Region::right(), 1, h.grid, h.cfg, h.tables);
    EXPECT_NEAR(kg_inner(u1, u1).value.real(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(kg_inner(u1, u2).value), 0.0, 1e-13);
    EXPECT_EQ(kg_inner(u1, v1).value, cd(0.0, 0.0));
}

TEST(KgInner, HermitianSymmetries) {
    auto s = make(0.4, 1.0, 2049);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        SampledMode f, g;
        f.grid = g.grid = s.grid;
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
            f.value.emplace_back(nd(rng), nd(rng));
            f.tderiv.emplace_back(nd(rng), nd(rng));
            g.value.emplace_back(nd(rng), nd(rng));
            g.tderiv.emplace_back(nd(rng), nd(rng));
        }
        const cd fg = kg_inner(f, g).value, gf = kg_inner(g, f).value;
        EXPECT_LT(std::abs(fg - std::conj(gf)), 1e-12 * (1 + std::abs(fg)));
        const cd cc = kg_inner(f.conjugate(), g.conjugate()).value;
        EXPECT_LT(std::abs(cc + std::conj(fg)), 1e-12 * (1 + std::abs(fg)));
    }
}

TEST(KgInner, MismatchedInputsRejected) {
    auto s = make(0.4, 1.0, 257);
    const auto f = eval_global_mode(1, s.grid, 0.0, s.cfg, s.tables);
    const auto g = eval_global_mode(1, s.grid, 0.1, s.cfg, s.tables);
    EXPECT_THROW((void)kg_inner(f, g), GridMismatch);
    const auto grid2 = uniform_grid(s.cfg, 129);
    const auto h = eval_global_mode(1, grid2, 0.0, s.cfg, s.tables);
    EXPECT_THROW((void)kg_inner(f, h), GridMismatch);
    EXPECT_THROW((void)integrate_uniform<double>(std::vector<double>(5), 0.1, {QuadratureRule::Simpson, 0}),
                 DomainError);
}

TEST(OverlapOracle, Examples) {
    const auto cfg = validate_config(1, 0.5, 0);
    EXPECT_NEAR(overlap_V(1, 1, Region::left(), cfg).value, 2 / (3 * pi * pi), 1e-14);
    EXPECT_NEAR(overlap_V(3, 2, Region::left(), cfg).value, 0.0, 1e-14);
    // resonance: (r/2)/sqrt(R r Ω ω), Ω = ω = 2π
    const auto res = overlap_V(1, 2, Region::left(), cfg, {QuadratureRule::Simpson, 5}, (1u << 17) + 1);
    EXPECT_NEAR(res.value, 0.25 / std::sqrt(0.5 * 4 * pi * pi), 1e-10);
    EXPECT_LT(res.error_estimate, 1e-10);
}

TEST(OverlapOracle, AgreesWithKgInnerOfSampledModes) {
    // (U_N|u_m) at t = 0 is (ω+Ω)V; compute it from sampled Cauchy data
    auto s = make(0.5, 0.0, 16385);
    for (std::size_t N : {1u, 3u, 5u}) {
        const auto U = eval_global_mode(N, s.grid, 0.0, s.cfg, s.tables);
        const auto u = eval_local_initial(Region::left(), 1, s.grid, s.cfg, s.tables);
        const double V = overlap_V(1, N, Region::left(), s.cfg).value;
        EXPECT_NEAR(kg_inner(U, u).value.real(), (s.tables.left(1) + s.tables.global(N)) * V, 1e-8);
        const double beta = -kg_inner(U.conjugate(), u).value.real();
        EXPECT_NEAR(beta, (s.tables.global(N) - s.tables.left(1)) * V, 1e-8);
    }
}
