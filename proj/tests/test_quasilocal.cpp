#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <kgcavity/cache.hpp>
#include <kgcavity/quasilocal.hpp>

using namespace kgcavity;
constexpr double pi = std::numbers::pi;

namespace {
Truncation trunc(std::size_t n, std::size_t m, std::size_t grid = 2048) { return Truncation{n, m, grid, 1e-6}; }

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}
}  // namespace

TEST(OverlapDistribution, PeakAtLocalFrequency) {
    const auto cfg = validate_config(1, 1.0 / 9, 0);
    const auto d = overlap_distribution(20, cfg, trunc(20000, 20));
    // πl/r = 180π ≈ 565.5, shared exactly by Ω_180
    EXPECT_EQ(d.peak_N, 180u);
    EXPECT_NEAR(d.peak_Omega, 20 * pi * 9, 1e-9);
    for (double p : d.p) EXPECT_GE(p, 0.0);
    EXPECT_NEAR(d.norm_captured, 1.0, 1e-3);
    EXPECT_NEAR(d.beta_weight, d.n_l / (1 + d.n_l), 1e-15);
}

TEST(OverlapDistribution, CapturedMassConvergesToOne) {
    const auto cfg = validate_config(1, 0.3, 2);
    double prev = 1.0;
    for (std::size_t n : {1000u, 4000u, 16000u}) {
        const auto d = overlap_distribution(3, cfg, trunc(n, 3));
        const double gap = std::abs(1.0 - d.norm_captured);
        EXPECT_LT(gap, prev);
        prev = gap;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(OverlapDistribution, ConcentratesTowardFullBox) {
    const auto d = overlap_distribution(3, validate_config(1, 0.999, 0), trunc(4000, 3));
    EXPECT_EQ(d.peak_N, 3u);
    EXPECT_GT(d.p[2], 0.99);
}

TEST(Bandwidth, DegenerateThresholdAndErrors) {
    const auto cfg = validate_config(1, 0.3, 0);
    const auto d = overlap_distribution(2, cfg, trunc(5000, 2));
    const auto b = bandwidth(d, 1e-9, cfg);
    // one contributing mode: the nearest Ω_N with nonzero weight
    double best = 1e300;
    for (std::size_t N = 1; N <= 5000; ++N)
        if (d.p[N - 1] > 0) best = std::min(best, std::abs(pi * N - 2 * pi / 0.3));
    EXPECT_DOUBLE_EQ(b.delta_omega, 2 * best);
    EXPECT_THROW((void)bandwidth(d, 0.0, cfg), DomainError);
    EXPECT_THROW((void)bandwidth(d, 1.0, cfg), DomainError);
    try {
        (void)bandwidth(20, 0.95, validate_config(1, 1.0 / 9, 0), trunc(100, 20));
        FAIL() << "expected ThresholdUnreachable";
    } catch (const ThresholdUnreachable& e) {
        EXPECT_LT(e.captured(), 0.95);
        EXPECT_EQ(e.kind(), "ThresholdUnreachable");
    }
}

TEST(Bandwidth, ShrinksWithLargerRegion) {
    double prev = 1e300;
    for (double r : {1.0 / 9, 1.0 / 3, 2.0 / 3}) {
        const auto b = bandwidth(20, 0.95, validate_config(1, r, 0), trunc(20000, 20));
        EXPECT_TRUE(std::isfinite(b.delta_omega));
        EXPECT_GT(b.captured, 0.95);
        EXPECT_LT(b.delta_omega, prev) << r;
        prev = b.delta_omega;
    }
}

TEST(Bandwidth, UserUnits) {
    const auto a = bandwidth(4, 0.9, validate_config(1, 0.3, 2), trunc(8000, 4));
    const auto b = bandwidth(4, 0.9, validate_config(3, 0.9, 2.0 / 3), trunc(8000, 4));
    EXPECT_NEAR(b.delta_omega, a.delta_omega / 3, 1e-9);
}

TEST(Wavepacket, ExponentialTailsOutsideRegion) {
    const double r = 0.21;
    const auto cfg = validate_config(1, r, 1 / r);
    const auto tr = trunc(10000, 1);
    const auto tables = frequencies(cfg, tr);
    const auto block = build_block(Region::left(), cfg, tr);
    const auto grid = uniform_grid(cfg, 1025);
    const auto w = quasilocal_wavepacket(1, grid, 0.0, cfg, tables, tr, block);
    double psi_out = 0, u_out = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] > r + 0.05 && grid[i] < r + 0.15) {
            psi_out = std::max(psi_out, std::abs(w.psi.value[i]));
            u_out = std::max(u_out, std::abs(w.local.value[i]));
        }
    EXPECT_GT(psi_out, 100 * u_out);
    EXPECT_GT(w.psi_out_of_cone.fraction, 100 * w.local_out_of_cone.fraction);
    // decaying: the tail near the edge exceeds the tail further out
    auto at = [&](double x) { return std::abs(w.psi.value[static_cast<std::size_t>(x * 1024)]); };
    EXPECT_GT(at(r + 0.05), at(r + 0.3));
    EXPECT_EQ(w.abs_diff.size(), grid.size());
}

TEST(Wavepacket, ApproachesGlobalModeTowardFullBox) {
    const auto cfg = validate_config(1, 0.999, 0);
    const auto tr = trunc(4000, 2);
    const auto tables = frequencies(cfg, tr);
    const auto block = build_block(Region::left(), cfg, tr);
    const auto grid = uniform_grid(cfg, 257);
    const auto w = quasilocal_wavepacket(2, grid, 0.3, cfg, tables, tr, block);
    const auto U = eval_global_mode(2, grid, 0.3, cfg, tables);
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(w.psi.value[i] - U.value[i]));
    EXPECT_LT(worst, 2e-2);
}

TEST(QuasilocalEnergy, PositiveFiniteAndLimit) {
    for (double mu : {0.0, 10.0, 50.0}) {
        const auto cfg = validate_config(1, 1 / pi, mu);
        for (std::size_t l = 1; l <= 50; ++l) {
            const auto e = quasilocal_energy(l, cfg, trunc(20000, 1));
            EXPECT_GT(e.raw, 0.0);
            EXPECT_GT(e.normalized, 0.0);
            EXPECT_GT(e.annihilator, 0.0);
            if (l % 10 == 1) {
                const auto e2 = quasilocal_energy(l, cfg, trunc(40000, 1));
                EXPECT_LT(std::abs(e2.raw - e.raw), e.tail_bound_raw);
                EXPECT_LT(std::abs(e2.annihilator - e.annihilator), e.tail_bound_annihilator);
            }
        }
    }
    const auto lim = quasilocal_energy(2, validate_config(1, 0.999, 0), trunc(100000, 1));
    EXPECT_NEAR(lim.normalized, 2 * pi, 2e-2);
}

TEST(Steering, WickAndDirectRoutesAgree) {
    const auto cfg = validate_config(1, 1 / pi, 0);
    const auto tr = trunc(100000, 10);
    const auto L = compute_block(Region::left(), cfg, Truncation{100000, 2, 16, 1e-6});
    const auto R = compute_block(Region::right(), cfg, tr);
    std::vector<std::size_t> ls;
    for (std::size_t l = 1; l <= 10; ++l) ls.push_back(l);
    const auto s = steering_shift(2, ls, L, R);
    for (std::size_t k = 0; k < ls.size(); ++k)
        EXPECT_LT(std::abs(s.shift[k] - s.shift_direct[k]), 1e-10 * std::abs(s.shift[k]) + 1e-13) << ls[k];
}

TEST(Steering, ProportionalToCorrelationAndKnightNonLocal) {
    const auto cfg = validate_config(1, 1 / pi, 0);
    const auto L = compute_block(Region::left(), cfg, trunc(10000, 3));
    const auto R = compute_block(Region::right(), cfg, trunc(10000, 15));
    std::vector<std::size_t> ls;
    for (std::size_t l = 1; l <= 15; ++l) ls.push_back(l);
    WickOptions opts;
    opts.paper_norm = true;
    const auto rep = wick_moments({3}, ls, L, R, opts);
    const auto s = steering_shift(3, ls, L, R);
    for (std::size_t k = 0; k < ls.size(); ++k) {
        const double factor = std::sqrt(rep.var_left[0] * rep.var_right[k]) / (1 + rep.mean_left[0]);
        EXPECT_NEAR(s.shift[k], factor * s.corr[k], 1e-13);
        if (s.corr[k] != 0.0) {
            EXPECT_NE(s.shift[k], 0.0);
        }
    }
    // the l-independent total-number denominator makes the shift a fixed multiple of corr
    EXPECT_EQ(argmax(s.shift), argmax(rep.corr_paper));
    const double ratio = s.shift[0] / rep.corr_paper[0];
    for (std::size_t k = 0; k < ls.size(); ++k) EXPECT_NEAR(s.shift[k], ratio * rep.corr_paper[k], 1e-15);
    EXPECT_GT(ratio, 0.0);
}

TEST(Steering, StrictlyLocalCounterpartHasNoShift) {
    const std::vector<double> p = {0.9, 0.3, -0.2}, z = {0, 0, 0}, pb = {0.1, -0.5, 0.7};
    const auto s = steering_shift_rows(p, z, pb, z);
    EXPECT_EQ(s.wick, 0.0);
    // disjoint-support rows: orthogonal p rows make the direct route vanish too
    const std::vector<double> a = {1, 0, 0}, b = {0, 1, 0};
    const auto d = steering_shift_rows(a, z, b, z);
    EXPECT_EQ(d.wick, 0.0);
    EXPECT_EQ(d.direct, 0.0);
    auto L = compute_block(Region::left(), validate_config(1, 0.4, 1), trunc(300, 2));
    auto R = compute_block(Region::right(), validate_config(1, 0.4, 1), trunc(300, 4));
    std::fill(L.beta.begin(), L.beta.end(), 0.0);
    std::fill(R.beta.begin(), R.beta.end(), 0.0);
    for (double x : steering_shift(1, {1, 2, 3, 4}, L, R).shift) EXPECT_EQ(x, 0.0);
}
