#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "mht/error.hpp"
#include "mht/special_fn.hpp"

namespace mht {
namespace {

using cd = std::complex<double>;

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kLogPi = 1.1447298858494001741434273513531;
constexpr double kStirlingRadius2 = 81.0;

// B_{2k} / (2k (2k - 1)), k = 1..8
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
};

// Accurate to ~1e-17 for |z| >= 9 away from the negative real axis.
cd stirling(cd z) {
    const cd w = 1.0 / z;
    const cd w2 = w * w;
    cd series = kStirling.back();
    for (int k = static_cast<int>(kStirling.size()) - 2; k >= 0; --k) series = series * w2 + kStirling[k];
    return (z - 0.5) * std::log(z) - z + kLogSqrt2Pi + series * w;
}

// ln sin(pi z) on the principal branch, without overflow for large |Im z|.
cd log_sin_pi(cd z) {
    const double pi = std::numbers::pi;
    if (std::abs(z.imag()) < 20.0) return std::log(std::sin(pi * z));
    // sin(pi z) = -exp(-i pi z) (1 - exp(2 i pi z)) / (2i) for Im z > 0, mirrored below;
    // the exp(2 i pi z) correction is below 1e-54 here.
    const cd v = z.imag() > 0 ? -cd(0, 1) * pi * z + cd(-std::log(2.0), pi / 2)
                              : cd(0, 1) * pi * z + cd(-std::log(2.0), -pi / 2);
    // reduce the imaginary part to the principal range
    double im = std::remainder(v.imag(), 2 * pi);
    if (im <= -pi) im += 2 * pi;
    return {v.real(), im};
}

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
        throw DomainError("log_gamma: pole at non-positive integer");

    if (z.real() < -20.0) {
        // Reflection; the 2 pi correction keeps the result continuous off the negative axis.
        const double tmp = std::copysign(2 * std::numbers::pi, z.imag()) * std::floor(0.5 * z.real() + 0.25);
        return cd(kLogPi, tmp) - log_sin_pi(z) - log_gamma(1.0 - z);
    }

    if (std::norm(z) >= kStirlingRadius2 && z.real() > 0.0) return stirling(z);

    // Shift upward until the Stirling series applies, subtracting principal logs.
    cd shift = 0.0;
    cd w = z;
    while (std::norm(w) < kStirlingRadius2 || w.real() <= 0.0) {
        shift += std::log(w);
        w += 1.0;
    }
    return stirling(w) - shift;
}

std::complex<double> log_gamma_mod_2pi(std::complex<double> z) {
    if (std::norm(z) >= kStirlingRadius2 && z.real() > 0.0) return stirling(z);
    if (z.real() < -20.0) return log_gamma(z);
    // One log of the accumulated product instead of one log per shift.
    cd product = 1.0;
    cd w = z;
    while (std::norm(w) < kStirlingRadius2 || w.real() <= 0.0) {
        product *= w;
        w += 1.0;
    }
    if (product == 0.0) throw DomainError("log_gamma: pole at non-positive integer");
    return stirling(w) - std::log(product);
}

double digamma(double x) {
    return boost::math::digamma(x);
}

double trigamma(double x) {
    return boost::math::trigamma(x);
}

}  // namespace mht
