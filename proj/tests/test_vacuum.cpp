#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <kgcavity/cache.hpp>
#include <kgcavity/vacuum.hpp>

using namespace kgcavity;
constexpr double pi = std::numbers::pi;

namespace {
Truncation trunc(std::size_t n, std::size_t m) { return Truncation{n, m, 16, 1e-6}; }
}  // namespace

TEST(Spectrum, PositiveWithTails) {
    const auto s = vacuum_spectrum(Region::left(), validate_config(1, 0.3, 2), trunc(5000, 30));
    ASSERT_EQ(s.values.size(), 30u);
    for (std::size_t i = 0; i < 30; ++i) {
        EXPECT_GT(s.values[i], 0.0);
        EXPECT_GT(s.tail_bound[i], 0.0);
        EXPECT_LT(s.tail_bound[i], 1e-3 * s.values[i]);
    }
}

TEST(Spectrum, ClosedSumMatchesBlock) {
    const auto cfg = validate_config(1, 0.3, 2);
    const auto tr = trunc(2000, 8);
    const auto a = vacuum_spectrum(Region::right(), cfg, tr);
    const auto b = vacuum_spectrum(compute_block(Region::right(), cfg, tr), cfg, tr);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-15);
}

TEST(Spectrum, MirrorFormula) {
    // Σ_N l²π²/(r³ Ω ω) sin²(πNr)/(Ω+ω)²
    const double r = 0.37, mu = 4;
    const auto s = vacuum_spectrum(Region::left(), validate_config(1, r, mu), trunc(3000, 3));
    for (int l = 1; l <= 3; ++l) {
        const double w = std::sqrt(std::pow(pi * l / r, 2) + mu * mu);
        double acc = 0;
        for (int N = 1; N <= 3000; ++N) {
            const double O = std::sqrt(std::pow(pi * N, 2) + mu * mu);
            acc += l * l * pi * pi / (r * r * r * O * w) * std::pow(std::sin(pi * N * r), 2) / std::pow(O + w, 2);
        }
        EXPECT_NEAR(s.values[l - 1], acc, 1e-12 * acc);
    }
}

TEST(Spectrum, HalfBoxSymmetry) {
    const auto cfg = validate_config(1, 0.5, 1.5);
    const auto l = vacuum_spectrum(Region::left(), cfg, trunc(4000, 20));
    const auto r = vacuum_spectrum(Region::right(), cfg, trunc(4000, 20));
    for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(l.values[i], r.values[i], 1e-14 * l.values[i]);
}

TEST(Spectrum, HeavierFieldFewerParticles) {
    const auto a = vacuum_spectrum(Region::left(), validate_config(1, 1 / pi, 10), trunc(10000, 20));
    const auto b = vacuum_spectrum(Region::left(), validate_config(1, 1 / pi, 50), trunc(10000, 20));
    for (std::size_t i = 0; i < 20; ++i) EXPECT_LT(b.values[i], a.values[i]);
}

TEST(Spectrum, VanishesTowardFullBox) {
    const auto half = vacuum_spectrum(Region::left(), validate_config(1, 0.5, 0), trunc(10000, 20));
    const auto full = vacuum_spectrum(Region::left(), validate_config(1, 0.999, 0), trunc(10000, 20));
    for (std::size_t i = 0; i < 20; ++i) EXPECT_LT(full.values[i], 0.01 * half.values[i]);
}

TEST(Spectrum, FrozenHalfBoxRegression) {
    // direct summation at n_max = 10⁶; tail estimate 1.0e-13
    const auto s = row_sums(Region::left(), 1, validate_config(1, 0.5, 0), 1000000);
    const auto t = row_tails(Region::left(), 1, validate_config(1, 0.5, 0), 1000000);
    EXPECT_NEAR(s.beta2, 0.053963550926911998, 1e-15);
    EXPECT_NEAR(t.beta2, 1.013e-13, 1e-15);
    // the exact value lies above the partial sum, by about the tail
    const auto s10k = row_sums(Region::left(), 1, validate_config(1, 0.5, 0), 10000);
    const auto t10k = row_tails(Region::left(), 1, validate_config(1, 0.5, 0), 10000);
    EXPECT_NEAR(s.beta2 - s10k.beta2, t10k.beta2, 0.05 * t10k.beta2);
}

TEST(Divergence, LogGrowthInM) {
    const auto cfg = validate_config(1, 1 / pi, 10);
    for (std::size_t N : {1u, 2u, 3u}) {
        const auto d = divergence_scan(N, cfg, {100, 1000, 10000, 100000});
        EXPECT_GT(d.fit_r2, 0.99) << N;
        EXPECT_GT(d.fit_slope, 0.0) << N;
        for (std::size_t i = 1; i < d.partial_sums.size(); ++i) EXPECT_GE(d.partial_sums[i], d.partial_sums[i - 1]);
    }
}

TEST(Divergence, PartialSumsMatchDirectSum) {
    const auto cfg = validate_config(1, 0.3, 1);
    const auto d = divergence_scan(2, cfg, {5, 17});
    double acc = 0;
    for (std::size_t m = 1; m <= 17; ++m) {
        acc += std::pow(coeff_pair(Region::left(), m, 2, cfg).beta, 2) + std::pow(coeff_pair(Region::right(), m, 2, cfg).beta, 2);
        if (m == 5) {
            EXPECT_NEAR(d.partial_sums[0], acc, 1e-16);
        }
    }
    EXPECT_NEAR(d.partial_sums[1], acc, 1e-16);
    EXPECT_THROW((void)divergence_scan(2, cfg, {10, 5}), DomainError);
}

TEST(Divergence, VanishingPrefactorAtHalfBox) {
    const auto d = divergence_scan(2, validate_config(1, 0.5, 0), {10, 100, 1000});
    for (double s : d.partial_sums) EXPECT_EQ(s, 0.0);
}

TEST(Divergence, NSumsConvergeWithinTails) {
    const auto cfg = validate_config(1, 1 / pi, 10);
    for (const Region g : {Region::left(), Region::right()})
        for (std::size_t m : {1u, 5u, 10u}) {
            const auto c = nsum_convergence(g, m, cfg, {1000, 2000, 4000, 8000, 16000});
            EXPECT_TRUE(c.cauchy_within_tails()) << m;
            for (std::size_t i = 0; i < c.n_max.size(); ++i) {
                EXPECT_TRUE(std::isfinite(c.alpha2[i]));
                EXPECT_NEAR(c.alpha2[i] - c.beta2[i], 1.0, 1e-2);
            }
        }
}

TEST(Energy, PositiveFiniteAndLimit) {
    const auto cfg = validate_config(1, 0.3, 5);
    for (std::size_t l = 1; l <= 50; l += 7) {
        const auto a = local_quantum_energy(Region::left(), l, cfg, trunc(20000, 1));
        const auto b = local_quantum_energy(Region::left(), l, cfg, trunc(40000, 1));
        EXPECT_GT(a.epsilon, 0.0);
        EXPECT_LT(std::abs(b.epsilon - a.epsilon), a.tail_bound);
        EXPECT_DOUBLE_EQ(a.n_particle(3), 3 * a.epsilon);
    }
    const auto near_full = local_quantum_energy(Region::left(), 1, validate_config(1, 0.999, 0), trunc(100000, 1));
    EXPECT_NEAR(near_full.epsilon, pi, 5e-3);
    // user units scale as 1/R
    const auto big = local_quantum_energy(Region::left(), 2, validate_config(2, 0.6, 2.5), trunc(20000, 1));
    EXPECT_NEAR(big.epsilon, local_quantum_energy(Region::left(), 2, cfg, trunc(20000, 1)).epsilon / 2, 1e-12);
}

TEST(Wick, LocalVacuumSubstituteHasNoCorrelation) {
    const auto cfg = validate_config(1, 1 / pi, 0);
    auto L = compute_block(Region::left(), cfg, trunc(500, 3));
    auto R = compute_block(Region::right(), cfg, trunc(500, 3));
    std::fill(L.beta.begin(), L.beta.end(), 0.0);
    std::fill(R.beta.begin(), R.beta.end(), 0.0);
    const auto rep = wick_moments({1, 2, 3}, {1, 2, 3}, L, R);
    for (double c : rep.cov) EXPECT_EQ(c, 0.0);
    for (double c : rep.corr) EXPECT_EQ(c, 0.0);
}

TEST(Wick, FactoredMatchesDoubleSumAndBounds) {
    const auto cfg = validate_config(1, 1 / pi, 0);
    const auto L = compute_block(Region::left(), cfg, trunc(1500, 4));
    const auto R = compute_block(Region::right(), cfg, trunc(1500, 5));
    WickOptions opts;
    opts.verify_double_sum = true;
    opts.paper_norm = true;
    const auto rep = wick_moments({1, 2, 3, 4}, {1, 2, 3, 4, 5}, L, R, opts);
    EXPECT_LE(rep.double_sum_max_rel_diff, 1e-10);
    for (double v : rep.var_left) EXPECT_GE(v, 0.0);
    for (double v : rep.var_right) EXPECT_GE(v, 0.0);
    for (double c : rep.corr) EXPECT_LE(std::abs(c), 1 + 1e-9);
    double tl = 0, tr = 0;
    for (std::size_t l = 1; l <= 4; ++l) tl += compensated_dot(L.beta_row(l), L.beta_row(l));
    for (std::size_t l = 1; l <= 5; ++l) tr += compensated_dot(R.beta_row(l), R.beta_row(l));
    EXPECT_NEAR(rep.corr_paper[7], rep.cov[7] / std::sqrt(tl * tr), 1e-15);
    // cov is invariant under flipping the sign convention of β
    auto Lf = L, Rf = R;
    for (double& b : Lf.beta) b = -b;
    for (double& b : Rf.beta) b = -b;
    const auto flipped = wick_moments({1, 2, 3, 4}, {1, 2, 3, 4, 5}, Lf, Rf);
    for (std::size_t k = 0; k < rep.cov.size(); ++k) EXPECT_NEAR(flipped.cov[k], rep.cov[k], 1e-18);
    EXPECT_THROW((void)wick_moments({1}, {1}, L, compute_block(Region::right(), cfg, trunc(100, 1))), DomainError);
}

TEST(Wick, VarianceMatchesDefinition) {
    // var(n) = ⟨n²⟩ - ⟨n⟩² via the four-point contraction: A·B + C²
    const std::vector<double> p = {1.1, 0.2, -0.3}, q = {0.4, -0.1, 0.05};
    const auto s = wick_single(p, q);
    const double A = 1.21 + 0.04 + 0.09, B = 0.16 + 0.01 + 0.0025, C = 0.44 - 0.02 - 0.015;
    EXPECT_NEAR(s.mean, B, 1e-15);
    EXPECT_NEAR(s.var, A * B + C * C, 1e-15);
}

TEST(LimitScan, MassDecreasesPerMode) {
    const auto scan = limit_scan(LimitKind::Mass, {0, 10, 20, 40, 80}, {{1, 1}, {3, 2}, {10, 5}}, 10,
                                 validate_config(1, 1 / pi, 0), trunc(10000, 10));
    for (std::size_t i = 1; i < scan.rows.size(); ++i)
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_LT(scan.rows[i].n_left[k], scan.rows[i - 1].n_left[k]);
            EXPECT_LT(scan.rows[i].beta_abs[k], scan.rows[i - 1].beta_abs[k]);
        }
    EXPECT_THROW((void)limit_scan(LimitKind::Mass, {3, 1}, {{1, 1}}, 1, validate_config(1, 0.5, 0), trunc(10, 1)),
                 DomainError);
}

TEST(LimitScan, PartitionTowardFullBoxDoesNotCommute) {
    const auto scan = limit_scan(LimitKind::PartitionSize, {0.5, 0.9, 0.99, 0.999}, {{1, 1}, {5, 5}}, 20,
                                 validate_config(1, 0.5, 0), trunc(20000, 20));
    const auto& last = scan.rows.back();
    for (std::size_t k = 0; k < 2; ++k) EXPECT_LT(last.n_left[k], 1e-2 * scan.rows.front().n_left[k]);
    // the right region shrinks to zero width, and its particle content does not vanish
    EXPECT_GT(last.total_left + last.total_right, 0.1 * (scan.rows.front().total_left + scan.rows.front().total_right));
}

TEST(LimitScan, PartitionTowardZeroStaysFinite) {
    const auto scan = limit_scan(LimitKind::PartitionSize, {0.003, 0.01, 0.03, 0.1}, {{1, 1}}, 20,
                                 validate_config(1, 0.5, 0), trunc(100000, 20));
    std::vector<double> totals;
    for (const auto& row : scan.rows) totals.push_back(row.total_left + row.total_right);
    for (double t : totals) EXPECT_GT(t, 0.1);
    EXPECT_LT(std::abs(totals[0] - totals[1]) / totals[1], 0.05);
}
