#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mht/error.hpp"
#include "mht/sde.hpp"
#include "mht/stats.hpp"

using namespace mht;

namespace {

SdeParams single(double gamma, double kappa, double s, std::size_t steps, double dt = 1e-3) {
    SdeParams p;
    p.gamma = {gamma};
    p.kappa = {kappa};
    p.s_exponent = s;
    p.dt = dt;
    p.steps = steps;
    return p;
}

}  // namespace

TEST(SdeParamsValidation, Rejections) {
    SdeParams p = single(1.0, 1.0, 0.5, 10);
    EXPECT_NO_THROW(p.validate());
    p.s_exponent = 0.7;
    EXPECT_THROW(p.validate(), ParameterError);
    p = single(1.0, 1.0, 0.5, 10, 0.2);
    EXPECT_THROW(p.validate(), ParameterError);
    p = single(-1.0, 1.0, 0.5, 10);
    EXPECT_THROW(p.validate(), ParameterError);
    p = single(1.0, 1.0, 0.5, 10);
    p.kappa = {1.0, 2.0};
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(SdeParamsGeometric, RatesAndShapes) {
    const double beta[] = {4.0, 8.0};
    const SdeParams p = SdeParams::geometric(beta, 0.5, 0.5, 2.0, 10.0);
    EXPECT_DOUBLE_EQ(p.gamma[1], 5.0);
    EXPECT_NEAR(p.beta()[0], 4.0, 1e-12);
    EXPECT_NEAR(p.beta()[1], 8.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.eps0, 2.0);
}

TEST(Simulate, NoiseFreeRelaxation) {
    SdeParams p;
    p.gamma = {0.01, 0.02};
    p.kappa = {0.0, 0.0};
    p.dt = 1e-4;
    p.steps = 3000000;
    p.record_stride = 10000;
    p.default_burn_in = false;
    p.initial = {2.0, 0.5};
    const SdeTrajectory t = simulate_hierarchy(p, 1);
    const double a = 1.0;   // eps1(0) - eps0
    const double b = -0.5;  // eps2(0) - eps0
    const double c = a * p.gamma[1] / (p.gamma[1] - p.gamma[0]);
    double worst = 0.0;
    for (std::size_t k = 0; k < t.time.size(); ++k) {
        const double s = t.time[k];
        const double e1 = 1.0 + a * std::exp(-p.gamma[0] * s);
        const double e2 = 1.0 + c * std::exp(-p.gamma[0] * s) + (b - c) * std::exp(-p.gamma[1] * s);
        worst = std::max({worst, std::abs(t.levels[0][k] - e1), std::abs(t.levels[1][k] - e2)});
    }
    EXPECT_LT(worst, 1e-6);
    EXPECT_EQ(t.excursions, 0u);
}

TEST(Simulate, DeterministicAndRecorded) {
    SdeParams p = single(1.0, 1.0, 0.5, 1000);
    p.record_stride = 10;
    const SdeTrajectory a = simulate_hierarchy(p, 3);
    const SdeTrajectory b = simulate_hierarchy(p, 3);
    EXPECT_EQ(a.levels, b.levels);
    EXPECT_EQ(a.time.size(), 101u);
    EXPECT_DOUBLE_EQ(a.sample_dt, 1e-2);
}

TEST(Simulate, ScaleInvariance) {
    const double beta[] = {3.0, 5.0};
    SdeParams p = SdeParams::geometric(beta, 0.5, 0.5);
    p.steps = 20000;
    SdeParams q = p;
    const double lambda = 7.5;
    q.eps0 = lambda;
    const SdeTrajectory a = simulate_hierarchy(p, 4);
    const SdeTrajectory b = simulate_hierarchy(q, 4);
    ASSERT_EQ(a.excursions, 0u);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < a.time.size(); k += 97)
            EXPECT_NEAR(b.levels[i][k] / lambda, a.levels[i][k], 1e-12 * a.levels[i][k]);
}

TEST(Stationary, GammaConditional) {
    SdeParams p = single(1.0, 1.0, 0.5, 60000000);
    p.record_stride = 100;
    const SdeTrajectory t = simulate_hierarchy(p, 5);
    EXPECT_LT(stationary_check(t.levels[0], t.sample_dt, 1.0, 2.0, ModelClass::Wishart, 1.0), 0.015);
    EXPECT_NEAR(mean(t.levels[0]), 1.0, 0.01);
}

TEST(Stationary, InverseGammaConditional) {
    // s = 1: beta = 2 gamma / kappa^2 = 2
    SdeParams p = single(1.0, 1.0, 1.0, 60000000);
    p.record_stride = 100;
    const SdeTrajectory t = simulate_hierarchy(p, 6);
    EXPECT_LT(stationary_check(t.levels[0], t.sample_dt, 1.0, 2.0, ModelClass::InverseWishart, 1.0), 0.015);
}

TEST(Stationary, ShortTrajectoryRejected) {
    const std::vector<double> x(50, 1.0);
    EXPECT_THROW(stationary_check(x, 1.0, 1.0, 2.0, ModelClass::Wishart, 1.0), DataError);
}
