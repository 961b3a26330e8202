#include <gtest/gtest.h>

#include <random>
#include <vector>

#include <kgcavity/fock_oracle.hpp>
#include <kgcavity/vacuum.hpp>

using namespace kgcavity;

TEST(TruncatedFock, BasisAndLimits) {
    TruncatedFock f(3, 2);
    EXPECT_EQ(f.dimension(), 27u);
    const auto b = f.basis();
    EXPECT_EQ(b[0], (std::vector<std::uint8_t>{0, 0, 0}));
    EXPECT_EQ(b[1], (std::vector<std::uint8_t>{1, 0, 0}));
    EXPECT_EQ(b[3], (std::vector<std::uint8_t>{0, 1, 0}));
    EXPECT_EQ(b[26], (std::vector<std::uint8_t>{2, 2, 2}));
    EXPECT_EQ(TruncatedFock(8, 3).dimension(), 65536u);
    EXPECT_THROW(TruncatedFock(9, 2), DimensionError);
    EXPECT_THROW(TruncatedFock(4, 1), DimensionError);
    EXPECT_THROW(TruncatedFock(6, 3, 1000), DimensionError);
}

TEST(OracleMoments, AnnihilatorOfVacuum) {
    TruncatedFock f(4, 2);
    const std::vector<double> p = {0.3, -0.2, 0.5, 1.0}, z(4, 0.0);
    const auto o = oracle_moments(p, z, p, z, f);
    EXPECT_EQ(o.mean_m, 0.0);
    EXPECT_EQ(o.var_m, 0.0);
    EXPECT_EQ(o.second, 0.0);
}

TEST(OracleMoments, PureCreatorRow) {
    TruncatedFock f(3, 2);
    const std::vector<double> p = {0, 0, 0}, q = {1, 0, 0};
    const auto o = oracle_moments(p, q, p, q, f);
    EXPECT_DOUBLE_EQ(o.mean_m, 1.0);
    EXPECT_DOUBLE_EQ(o.var_m, 0.0);
    const auto w = wick_single(p, q);
    EXPECT_EQ(w.mean, 1.0);
    EXPECT_EQ(w.var, 0.0);
}

TEST(OracleMoments, WickAgreesOnRandomRows) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd(0.0, 0.6);
    const TruncatedFock f2(6, 2), f3(6, 3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p(6), q(6), pb(6), qb(6);
        for (int k = 0; k < 6; ++k) {
            p[k] = nd(rng);
            q[k] = nd(rng);
            pb[k] = nd(rng);
            qb[k] = nd(rng);
        }
        const auto o = oracle_moments(p, q, pb, qb, f2);
        const auto wm = wick_single(p, q), wn = wick_single(pb, qb);
        EXPECT_NEAR(o.mean_m, wm.mean, 1e-12);
        EXPECT_NEAR(o.mean_n, wn.mean, 1e-12);
        EXPECT_NEAR(o.var_m, wm.var, 1e-12);
        EXPECT_NEAR(o.var_n, wn.var, 1e-12);
        EXPECT_NEAR(o.cov, wick_cov(p, q, pb, qb), 1e-12);
        EXPECT_LE(o.imag_residue, 1e-14);
        const auto o3 = oracle_moments(p, q, pb, qb, f3);
        EXPECT_EQ(o.mean_m, o3.mean_m);
        EXPECT_EQ(o.var_m, o3.var_m);
        EXPECT_EQ(o.second, o3.second);
        EXPECT_EQ(o.cov, o3.cov);
    }
}

TEST(OracleMoments, ComplexRowsMatchConjugatedWick) {
    // ⟨n⟩ = Σ|q|², the oracle takes the conjugates for a† itself
    TruncatedFock f(3, 2);
    using cd = std::complex<double>;
    const std::vector<cd> p = {{0.4, 0.1}, {0.0, -0.7}, {0.2, 0.2}}, q = {{0.3, -0.5}, {0.1, 0.0}, {0.0, 0.6}};
    const auto o = oracle_moments(std::span<const cd>(p), q, p, q, f);
    double B = 0;
    for (auto z : q) B += std::norm(z);
    EXPECT_NEAR(o.mean_m, B, 1e-14);
    EXPECT_THROW((void)oracle_moments(std::span<const cd>(p), q, p, std::vector<cd>(2), f), DimensionError);
}

TEST(OracleMoments, TruncatedBlocksMatchWickMoments) {
    const auto cfg = validate_config(1, 1 / std::numbers::pi, 3);
    const Truncation tr{6, 4, 16, 1e-6};
    const auto L = compute_block(Region::left(), cfg, tr);
    const auto R = compute_block(Region::right(), cfg, tr);
    const auto rep = wick_moments({1, 2, 3, 4}, {1, 2, 3, 4}, L, R);
    const TruncatedFock f(6, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const auto q = detail::negated(L.beta_row(i + 1));
            const auto qb = detail::negated(R.beta_row(j + 1));
            const auto o = oracle_moments(L.alpha_row(i + 1), q, R.alpha_row(j + 1), qb, f);
            EXPECT_NEAR(o.mean_m, rep.mean_left[i], 1e-12);
            EXPECT_NEAR(o.mean_n, rep.mean_right[j], 1e-12);
            EXPECT_NEAR(o.var_m, rep.var_left[i], 1e-12);
            EXPECT_NEAR(o.cov, rep.cov_at(i, j), 1e-12);
        }
}
