#include "cil/rng.hpp"
#include "cil/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace cil;

namespace {

std::vector<double> normals(std::uint64_t seed, std::size_t n, double mean = 0.0, double sd = 1.0) {
    Stream g(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = mean + sd * g.normal();
    return v;
}

} // namespace

TEST(Sample, MomentsAndCounts) {
    const Sample s({1.0, 2.0, 4.0}, {2, 0, 1});
    EXPECT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.mean(), 2.0);
    EXPECT_DOUBLE_EQ(s.variance(), 3.0);
    EXPECT_EQ(Sample({5.0}).variance(), 0.0);
    EXPECT_THROW(Sample({}), std::invalid_argument);
    EXPECT_THROW(Sample({NAN}), std::invalid_argument);
    EXPECT_THROW(Sample({1.0}, {1, 2}), std::invalid_argument);
}

TEST(Quantile, TypeSeven) {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
    EXPECT_THROW(quantile(v, 1.5), std::invalid_argument);
}

TEST(Normal, KnownValues) {
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(kolmogorov_sf(1.3580986393225505), 0.05, 1e-6);
    EXPECT_NEAR(kolmogorov_sf(0.0), 1.0, 1e-12);
}

TEST(KsNormal, SelfCalibrated) {
    // Under the null, rejections at 5% happen about 5% of the time.
    int rejections = 0;
    const int trials = 400;
    for (int k = 0; k < trials; ++k) {
        const auto r = ks_normal(Sample(normals(1000 + k, 1000)), 0.0, 1.0);
        rejections += r.p_value < 0.05;
    }
    EXPECT_GE(rejections, 6);
    EXPECT_LE(rejections, 36);
}

TEST(KsNormal, DetectsShiftAndScale) {
    EXPECT_LT(ks_normal(Sample(normals(5, 5000, 0.1)), 0.0, 1.0).p_value, 1e-3);
    EXPECT_LT(ks_normal(Sample(normals(6, 5000, 0.0, 1.2)), 0.0, 1.0).p_value, 1e-3);
    EXPECT_THROW(ks_normal(Sample(normals(7, 50)), 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ks_normal(Sample(normals(7, 500)), 0.0, 0.0), std::invalid_argument);
}

TEST(Bootstrap, CoverageOfTheMean) {
    int covered = 0;
    const int trials = 200;
    for (int k = 0; k < trials; ++k) {
        Stream g(5000 + k);
        std::vector<double> v(200);
        for (auto& x : v) x = g.exponential(1.0);
        const auto [lo, hi] = bootstrap_ci(
            Sample(v),
            [](std::span<const double> s) {
                double m = 0.0;
                for (double x : s) m += x;
                return m / static_cast<double>(s.size());
            },
            0.95, 1000, k);
        covered += lo <= 1.0 && 1.0 <= hi;
    }
    EXPECT_GE(covered, 170);
    EXPECT_LE(covered, 199);
}

TEST(Bootstrap, DeterministicAndValidated) {
    const Sample s(normals(3, 100));
    auto mean = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    EXPECT_EQ(bootstrap_ci(s, mean, 0.95, 1000, 9), bootstrap_ci(s, mean, 0.95, 1000, 9));
    EXPECT_THROW(bootstrap_ci(s, mean, 0.95, 10, 9), std::invalid_argument);
    EXPECT_THROW(bootstrap_ci(s, mean, 1.0, 1000, 9), std::invalid_argument);
}

TEST(Slopes, ExactPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double t : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.emplace_back(t, 3.0 * std::pow(t, -0.5));
    const auto f = loglog_slope(pts);
    EXPECT_NEAR(f.slope, -0.5, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(f.std_error, 0.0, 1e-10);
}

TEST(Slopes, ExactExponential) {
    std::vector<std::pair<double, double>> pts;
    for (double t : {5.0, 10.0, 20.0, 40.0}) pts.emplace_back(t, 0.7 * std::exp(-0.03 * t));
    EXPECT_NEAR(loglinear_slope(pts).slope, -0.03, 1e-12);
}

TEST(Slopes, NoisyFitCoversTruth) {
    Stream g(11);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 40; ++k) {
        const double t = std::pow(2.0, 0.25 * k);
        pts.emplace_back(t, std::pow(t, -0.5) * std::exp(0.05 * g.normal()));
    }
    const auto f = loglog_slope(pts);
    EXPECT_LT(std::abs(f.slope + 0.5), 4.0 * f.std_error);
    EXPECT_GT(f.std_error, 0.0);
}

TEST(Slopes, Preconditions) {
    const std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 1.0}};
    EXPECT_THROW(loglog_slope(two), std::invalid_argument);
    const std::vector<std::pair<double, double>> zero{{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}};
    EXPECT_THROW(loglog_slope(zero), std::invalid_argument);
    EXPECT_THROW(loglinear_slope(zero), std::invalid_argument);
    const std::vector<std::pair<double, double>> flat{{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}};
    EXPECT_THROW(loglog_slope(flat), std::invalid_argument);
}

TEST(Pearson, Extremes) {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    EXPECT_NEAR(pearson(a, b), 1.0, 1e-12);
    EXPECT_NEAR(pearson(a, c), -1.0, 1e-12);
    EXPECT_THROW(pearson(a, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Independence, RandomWalkPasses) {
    Stream g(21);
    std::vector<std::vector<double>> rows(2000);
    for (auto& r : rows) {
        double x = 0.0;
        r.push_back(x);
        for (int j = 0; j < 3; ++j) r.push_back(x += g.normal());
    }
    const auto rep = increment_independence(rows);
    ASSERT_TRUE(rep.has_value());
    EXPECT_EQ(rep->rho.size(), 2u);
    for (double r : rep->rho) EXPECT_LT(std::abs(r), 0.1);
    EXPECT_GT(rep->test.p_value, 0.001);
}

TEST(Independence, DetectsCorrelatedIncrements) {
    Stream g(22);
    std::vector<std::vector<double>> rows(2000);
    for (auto& r : rows) {
        const double a = g.normal();
        const double b = -0.5 * a + g.normal();
        r = {0.0, a, a + b};
        r.push_back(r.back() + g.normal());
    }
    const auto rep = increment_independence(rows);
    ASSERT_TRUE(rep.has_value());
    EXPECT_LT(rep->rho[0], -0.3);
    EXPECT_LT(rep->test.p_value, 1e-6);
}

TEST(Independence, Shapes) {
    std::vector<std::vector<double>> two(600, std::vector<double>{0.0, 1.0});
    EXPECT_FALSE(increment_independence(two).has_value());
    EXPECT_THROW(increment_independence(std::vector<std::vector<double>>(10, {0.0, 1.0, 2.0})),
                 std::invalid_argument);
    auto ragged = two;
    ragged[3].push_back(1.0);
    EXPECT_THROW(increment_independence(ragged), std::invalid_argument);
}

TEST(ClopperPearson, ClosedFormEnds) {
    const auto [lo0, hi0] = clopper_pearson(0, 10);
    EXPECT_EQ(lo0, 0.0);
    EXPECT_NEAR(hi0, 1.0 - std::pow(0.025, 0.1), 1e-10);
    const auto [lo1, hi1] = clopper_pearson(10, 10);
    EXPECT_NEAR(lo1, std::pow(0.025, 0.1), 1e-10);
    EXPECT_EQ(hi1, 1.0);
    EXPECT_NEAR(clopper_pearson(0, 2000).second, 1.0 - std::pow(0.025, 1.0 / 2000.0), 1e-12);
}

TEST(ClopperPearson, Symmetric) {
    for (std::size_t k = 0; k <= 20; ++k) {
        const auto a = clopper_pearson(k, 20);
        const auto b = clopper_pearson(20 - k, 20);
        EXPECT_NEAR(a.first, 1.0 - b.second, 1e-10);
        EXPECT_LE(a.first, static_cast<double>(k) / 20.0);
        EXPECT_GE(a.second, static_cast<double>(k) / 20.0);
    }
    EXPECT_THROW(clopper_pearson(3, 2), std::invalid_argument);
    EXPECT_THROW(clopper_pearson(0, 0), std::invalid_argument);
}

TEST(ClopperPearson, Coverage) {
    // Exact intervals cover at least the nominal level.
    Stream g(31);
    int covered = 0;
    const int trials = 2000;
    for (int k = 0; k < trials; ++k) {
        std::size_t hits = 0;
        for (int j = 0; j < 50; ++j) hits += g.uniform() < 0.1;
        const auto [lo, hi] = clopper_pearson(hits, 50);
        covered += lo <= 0.1 && 0.1 <= hi;
    }
    EXPECT_GE(covered, 1900 - 30);
}

TEST(Overlap, ClosedIntervals) {
    EXPECT_TRUE(overlaps({0.0, 1.0}, {1.0, 2.0}));
    EXPECT_FALSE(overlaps({0.0, 1.0}, {1.5, 2.0}));
}

TEST(Series, CsvLayout) {
    std::ostringstream out;
    write_series_csv(out, Series{{1.0, 0.5, 0.25, 0.75, 10}});
    EXPECT_EQ(out.str(), "t,estimate,ci_low,ci_high,n\n1,0.5,0.25,0.75,10\n");
}

TEST(Stream, NormalMoments) {
    const auto v = normals(99, 100000);
    const Sample s(v);
    EXPECT_NEAR(s.mean(), 0.0, 0.02);
    EXPECT_NEAR(s.sd(), 1.0, 0.02);
}

TEST(Stream, BelowIsUniform) {
    Stream g(5);
    std::vector<int> counts(7, 0);
    for (int k = 0; k < 70000; ++k) ++counts[g.below(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}
