#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mht/error.hpp"
#include "mht/stats.hpp"

using namespace mht;

TEST(Cdfs, ReferenceValues) {
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(normal_cdf(1.96), 0.97500210485177952, 1e-12);
    EXPECT_NEAR(normal_cdf(3.0, 1.0, 2.0), normal_cdf(1.0), 1e-15);
    // Gamma(2, 1): 1 - (1 + x) e^{-x}
    EXPECT_NEAR(gamma_cdf(1.5, 2.0, 1.0), 1.0 - 2.5 * std::exp(-1.5), 1e-13);
    // Inverse-gamma(1, 2): e^{-2/x}
    EXPECT_NEAR(inverse_gamma_cdf(3.0, 1.0, 2.0), std::exp(-2.0 / 3.0), 1e-13);
    EXPECT_NEAR(lognormal_cdf(std::exp(0.3), 0.3, 0.7), 0.5, 1e-15);
    EXPECT_EQ(gamma_cdf(-1.0, 2.0, 1.0), 0.0);
}

TEST(Ks, OneSample) {
    const std::vector<double> s = {0.1, 0.4, 0.7};
    // uniform CDF: largest gap is at x = 0.7 (F_n jumps from 2/3 to 1)
    EXPECT_NEAR(ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); }), 0.3, 1e-12);
    EXPECT_THROW(ks_statistic(std::vector<double>{}, [](double) { return 0.0; }), DataError);
}

TEST(Ks, TwoSample) {
    const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> b = {3.5, 4.5, 5.5, 6.5};
    EXPECT_NEAR(ks_two_sample(a, b), 0.75, 1e-12);
    EXPECT_NEAR(ks_two_sample(a, a), 0.0, 1e-12);
}

TEST(Ks, LargeNormalSample) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    std::vector<double> s(100000);
    for (auto& v : s) v = n(rng);
    EXPECT_LT(ks_statistic(s, [](double x) { return normal_cdf(x); }), 0.01);
}

TEST(Histograms, LinearCountsAndNormalization) {
    const std::vector<double> s = {0.1, 0.2, 0.6, 0.9, 1.5, -3.0};
    const Histogram h = linear_histogram(s, 2, 0.0, 1.0);
    EXPECT_EQ(h.counted, 4u);
    EXPECT_EQ(h.outside, 2u);
    EXPECT_DOUBLE_EQ(h.mass[0], 0.5);
    EXPECT_DOUBLE_EQ(h.mass[1], 0.5);
    EXPECT_EQ(h.nonempty(), 2u);
}

TEST(Histograms, UpperEdgeIsIncluded) {
    const std::vector<double> s = {0.0, 1.0};
    const Histogram h = linear_histogram(s, 4, 0.0, 1.0);
    EXPECT_EQ(h.counted, 2u);
    EXPECT_DOUBLE_EQ(h.mass[3], 0.5);
}

TEST(Histograms, LogEdges) {
    const std::vector<double> s = {1.5, 15.0, 150.0};
    const Histogram h = log_histogram(s, 3, 1.0, 1000.0);
    EXPECT_NEAR(h.edges[1], 10.0, 1e-12);
    EXPECT_NEAR(h.edges[2], 100.0, 1e-10);
    for (double m : h.mass) EXPECT_NEAR(m, 1.0 / 3.0, 1e-15);
    EXPECT_THROW(log_histogram(s, 3, 0.0, 1.0), ParameterError);
    EXPECT_THROW(linear_histogram(s, 0, 0.0, 1.0), ParameterError);
}

TEST(Moments, Basic) {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(mean(v), 2.5);
    EXPECT_DOUBLE_EQ(variance(v), 1.25);
    // uniform four-point: m4 = 2.5625, var^2 = 1.5625
    EXPECT_NEAR(excess_kurtosis(v), 2.5625 / 1.5625 - 3.0, 1e-12);
    EXPECT_THROW(mean(std::vector<double>{}), DataError);
}
