#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mht/error.hpp"
#include "mht/quadrature.hpp"
#include "mht/special_fn.hpp"

using namespace mht;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(LogGamma, RealSpecialValues) {
    EXPECT_NEAR(log_gamma({1.0, 0.0}).real(), 0.0, 1e-14);
    EXPECT_NEAR(log_gamma({5.0, 0.0}).real(), std::log(24.0), 1e-13);
    EXPECT_NEAR(log_gamma({0.5, 0.0}).real(), 0.5 * std::log(std::numbers::pi), 1e-13);
}

TEST(LogGamma, ComplexPrincipalBranch) {
    struct Case {
        std::complex<double> z;
        double re;
        double im;
    };
    // mpmath.loggamma
    const Case cases[] = {
        {{3.0, 4.0}, -1.7566267846037841, 4.7426644380346579},
        {{-2.5, 0.1}, -0.1031492440428192, -9.3144442683598381},
        {{0.1, -20.0}, -31.695265907346563, -39.284410010649361},
    };
    for (const auto& c : cases) {
        const auto v = log_gamma(c.z);
        EXPECT_NEAR(v.real(), c.re, 1e-11) << c.z;
        EXPECT_NEAR(v.imag(), c.im, 1e-11) << c.z;
    }
}

TEST(LogGamma, ModTwoPiAgreesAfterExponentiation) {
    const std::complex<double> z(-7.3, 12.1);
    const auto a = std::exp(log_gamma(z));
    const auto b = std::exp(log_gamma_mod_2pi(z));
    EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(LogGamma, PolesThrow) {
    EXPECT_THROW(log_gamma({0.0, 0.0}), DomainError);
    EXPECT_THROW(log_gamma({-3.0, 0.0}), DomainError);
}

TEST(Polygamma, ReferenceValues) {
    EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-14);
    EXPECT_NEAR(digamma(2.5), 0.70315664064524319, 1e-13);
    EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-13);
    EXPECT_NEAR(trigamma(0.3), 12.24536454610773, 1e-11);
}

TEST(MeijerG, ExponentialKernel) {
    const GValue g = meijer_g(GKernelSpec::lower({0.0}), 1.0);
    EXPECT_LT(rel(g.value, std::exp(-1.0)), 1e-9);
}

TEST(MeijerG, BesselKernel) {
    const GValue g = meijer_g(GKernelSpec::lower({0.0, 0.0}), 1.0);
    EXPECT_LT(rel(g.value, 0.22778774549906687), 1e-9);
}

TEST(MeijerG, MixedKernelIsPowerLaw) {
    // G^{1,1}_{1,1}(-1 | 0 | x) = Gamma(2) (1 + x)^{-2}
    const GValue g = meijer_g(GKernelSpec::mixed({-1.0}, 0.0), 0.5);
    EXPECT_LT(rel(g.value, 1.0 / 2.25), 1e-9);
}

TEST(MeijerG, ReferenceValues) {
    // mpmath.meijerg
    EXPECT_LT(rel(meijer_g(GKernelSpec::lower({0.0, 0.5, 1.0}), 2.0).value, 0.10251197441769431), 1e-8);
    EXPECT_LT(rel(meijer_g(GKernelSpec::lower({1.5, 2.5}), 0.3).value, 0.092439660242954737), 1e-8);
    EXPECT_LT(rel(meijer_g(GKernelSpec::mixed({-1.2, -2.5}, 0.0), 0.7).value, 0.38341645056377292), 1e-8);
    // G^{0,2}_{2,0}(1/2, 1 | 3) = G^{2,0}_{0,2}(1/2, 0 | 1/3) = 2 (1/3)^{1/4} K_{1/2}(2/sqrt 3)
    EXPECT_LT(rel(meijer_g(GKernelSpec::upper({0.5, 1.0}), 3.0).value, 0.55859219642173011), 1e-8);
}

TEST(MeijerG, ExtremeArgumentsInLogForm) {
    const GKernelSpec spec = GKernelSpec::lower({0.0, 0.0, 0.0});
    EXPECT_NEAR(meijer_g_log(spec, std::log(1e-8)).log_abs, 4.9539190615202802, 1e-7);
    const GValue far = meijer_g_log(spec, std::log(1e8));
    EXPECT_TRUE(far.underflow);
    EXPECT_NEAR(far.log_abs, -1397.3285453721272, 1e-6);
}

TEST(MeijerG, InversionIdentity) {
    const GKernelSpec spec = GKernelSpec::lower({0.3, 1.7});
    const double x = 0.8;
    EXPECT_LT(rel(meijer_g(spec.inverted(), 1.0 / x).value, meijer_g(spec, x).value), 1e-9);
}

TEST(MeijerG, ShiftIdentity) {
    const GKernelSpec spec = GKernelSpec::lower({0.3, 1.7});
    const double x = 2.2;
    const double sigma = 0.75;
    EXPECT_LT(rel(meijer_g(spec.shifted(sigma), x).value, std::pow(x, sigma) * meijer_g(spec, x).value), 1e-9);
}

TEST(MeijerG, MellinConsistency) {
    const GKernelSpec specs[] = {GKernelSpec::lower({0.0}), GKernelSpec::lower({0.5, 1.0}),
                                 GKernelSpec::lower({0.0, 1.5, 2.0})};
    for (const auto& spec : specs) {
        for (double s : {1.0, 2.0, 3.0}) {
            const auto integrand = [&](double x) { return std::pow(x, s - 1.0) * meijer_g(spec, x).value; };
            const QuadResult q = integrate(integrand, 0.0, INFINITY, 1e-9);
            EXPECT_LT(rel(q.value, std::exp(log_mellin(spec, s))), 1e-6) << "s=" << s << " m=" << spec.m();
        }
    }
}

TEST(MeijerG, StripAndValidation) {
    const GKernelSpec lower = GKernelSpec::lower({-0.5, 1.0});
    EXPECT_DOUBLE_EQ(lower.strip_lo(), 0.5);
    EXPECT_TRUE(std::isinf(lower.strip_hi()));
    EXPECT_THROW(meijer_g(lower, -1.0), DomainError);
    GKernelSpec bad;
    EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(MeijerG, TruncatedContourReportsAccuracyError) {
    ContourParams tight;
    tight.step = 1.0;
    tight.max_half_width = 1e-3;
    try {
        meijer_g(GKernelSpec::lower({0.0, 0.0}), 1.0, tight);
        FAIL() << "expected AccuracyError";
    } catch (const AccuracyError& e) {
        EXPECT_TRUE(std::isfinite(e.partial()));
        EXPECT_GT(e.error_estimate(), 0.0);
    }
}

TEST(TailAsymptote, GammaClassSingleLevel) {
    const double beta[] = {1.0};
    const TailAsymptote t = TailAsymptote::make(ModelClass::Wishart, beta, 1.0);
    EXPECT_DOUBLE_EQ(t.theta, 0.0);
    EXPECT_NEAR(log_tail_asymptote(t, 3.0), -std::sqrt(2.0) * 3.0, 1e-12);
}

TEST(TailAsymptote, InverseClassExponent) {
    const double beta[] = {2.0, 3.0};
    const TailAsymptote t = TailAsymptote::make(ModelClass::InverseWishart, beta, 1.0);
    EXPECT_DOUBLE_EQ(t.leading_exponent, 7.0);
    EXPECT_NEAR(log_tail_asymptote(t, 10.0), -7.0 * std::log(10.0), 1e-12);
}
