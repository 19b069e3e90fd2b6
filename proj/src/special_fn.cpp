#include "mht/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "mht/error.hpp"

namespace mht {
namespace {

using cd = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTiny = -690.7755278982137;  // ln(1e-300)
// The contour never comes closer than this to a pole of the Mellin transform.
constexpr double kMinPoleDistance = 0.01;
constexpr long kMaxEvaluations = 4'000'000;

std::vector<double> plus(std::vector<double> v, double s) {
    for (double& x : v) x += s;
    return v;
}

std::vector<double> one_minus(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return 1.0 - x; });
    return out;
}

struct Saddle {
    double c;
    double width;
    double pole_distance;
};

// Derivatives of phi(c) = ln M(c) - c L on the real axis.
double dphi(const GKernelSpec& g, double c, double log_x) {
    double d = -log_x;
    for (double b : g.b_top) d += digamma(c + b);
    for (double a : g.a_top) d -= digamma(1.0 - c - a);
    return d;
}

double d2phi(const GKernelSpec& g, double c) {
    double d = 0.0;
    for (double b : g.b_top) d += trigamma(c + b);
    for (double a : g.a_top) d += trigamma(1.0 - c - a);
    return d;
}

// Real saddle point of the integrand: minimizes the convex phi over the admissible strip,
// which puts the contour where the integrand magnitude matches |G| and cancellation is least.
Saddle locate_saddle(const GKernelSpec& g, double log_x, double lo, double hi) {
    const double left_limit = std::isfinite(lo) ? lo + kMinPoleDistance : -kInf;
    const double right_limit = std::isfinite(hi) ? hi - kMinPoleDistance : kInf;

    // Bracket the root of dphi; dphi -> -inf at the left edge and +inf at the right edge.
    double a, b;
    if (std::isfinite(left_limit) && std::isfinite(right_limit)) {
        a = left_limit;
        b = right_limit;
    } else if (std::isfinite(left_limit)) {
        a = left_limit;
        double span = 1.0;
        b = a + span;
        while (dphi(g, b, log_x) < 0.0) {
            a = b;
            span *= 2.0;
            b = a + span;
        }
    } else {
        b = right_limit;
        double span = 1.0;
        a = b - span;
        while (dphi(g, a, log_x) > 0.0) {
            b = a;
            span *= 2.0;
            a = b - span;
        }
    }

    double c;
    if (dphi(g, a, log_x) >= 0.0) {
        c = a;
    } else if (dphi(g, b, log_x) <= 0.0) {
        c = b;
    } else {
        // safeguarded Newton
        c = 0.5 * (a + b);
        for (int it = 0; it < 100; ++it) {
            const double d = dphi(g, c, log_x);
            if (d > 0) b = c; else a = c;
            double next = c - d / d2phi(g, c);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - c) < 1e-10 * (1.0 + std::abs(c))) {
                c = next;
                break;
            }
            c = next;
        }
    }
    const double dist = std::min(c - lo, hi - c);
    return {c, 1.0 / std::sqrt(d2phi(g, c)), dist};
}

// ln M(s) - s L at complex s.
cd log_integrand(const GKernelSpec& g, cd s, double log_x) {
    cd acc = -s * log_x;
    for (double b : g.b_top) acc += log_gamma_mod_2pi(s + b);
    for (double a : g.a_top) acc += log_gamma_mod_2pi(1.0 - s - a);
    return acc;
}

}  // namespace

GKernelSpec GKernelSpec::lower(std::vector<double> b) {
    GKernelSpec g;
    g.b_top = std::move(b);
    return g;
}

GKernelSpec GKernelSpec::upper(std::vector<double> a) {
    GKernelSpec g;
    g.a_top = std::move(a);
    return g;
}

GKernelSpec GKernelSpec::mixed(std::vector<double> a, double b0) {
    GKernelSpec g;
    g.a_top = std::move(a);
    g.b_top = {b0};
    return g;
}

GKernelSpec GKernelSpec::inverted() const {
    GKernelSpec g;
    g.b_top = one_minus(a_top);
    g.a_top = one_minus(b_top);
    g.b_bottom = one_minus(a_bottom);
    g.a_bottom = one_minus(b_bottom);
    return g;
}

GKernelSpec GKernelSpec::shifted(double sigma) const {
    GKernelSpec g;
    g.b_top = plus(b_top, sigma);
    g.a_top = plus(a_top, sigma);
    g.b_bottom = plus(b_bottom, sigma);
    g.a_bottom = plus(a_bottom, sigma);
    return g;
}

double GKernelSpec::strip_lo() const {
    if (b_top.empty()) return -kInf;
    return -*std::min_element(b_top.begin(), b_top.end());
}

double GKernelSpec::strip_hi() const {
    if (a_top.empty()) return kInf;
    return 1.0 - *std::max_element(a_top.begin(), a_top.end());
}

void GKernelSpec::validate() const {
    if (!b_bottom.empty() || !a_bottom.empty())
        throw ParameterError("meijer_g: denominator parameters are not supported");
    const int mm = m(), nn = n();
    const bool supported = (nn == 0 && mm >= 1) || (mm == 0 && nn >= 1) || (mm == 1 && nn >= 1);
    if (!supported)
        throw ParameterError("meijer_g: unsupported index pattern m=" + std::to_string(mm) +
                             ", n=" + std::to_string(nn));
    for (double v : b_top)
        if (!std::isfinite(v)) throw ParameterError("meijer_g: non-finite parameter");
    for (double v : a_top)
        if (!std::isfinite(v)) throw ParameterError("meijer_g: non-finite parameter");
    if (!(strip_lo() < strip_hi()))
        throw ParameterError("meijer_g: no admissible contour (poles of the two gamma products overlap)");
}

double log_mellin(const GKernelSpec& g, double s) {
    double acc = 0.0;
    for (double b : g.b_top) acc += boost::math::lgamma(s + b);
    for (double a : g.a_top) acc += boost::math::lgamma(1.0 - s - a);
    return acc;
}

GValue meijer_g(const GKernelSpec& spec, double x, const ContourParams& contour) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("meijer_g: argument must be positive and finite");
    return meijer_g_log(spec, std::log(x), contour);
}

GValue meijer_g_log(const GKernelSpec& spec, double log_x, const ContourParams& contour) {
    spec.validate();
    if (!std::isfinite(log_x)) throw DomainError("meijer_g: argument must be positive and finite");
    if (!(contour.tol > 0) || !(contour.half_width > 0) || contour.step < 0)
        throw ParameterError("meijer_g: contour parameters must be positive");

    const double lo = spec.strip_lo();
    const double hi = spec.strip_hi();

    Saddle sd;
    if (std::isnan(contour.c)) {
        sd = locate_saddle(spec, log_x, lo, hi);
    } else {
        if (!(contour.c > lo && contour.c < hi))
            throw ParameterError("meijer_g: contour abscissa outside the admissible strip");
        sd = {contour.c, 1.0 / std::sqrt(d2phi(spec, contour.c)), std::min(contour.c - lo, hi - contour.c)};
    }
    const double c = sd.c;
    const double ref = log_mellin(spec, c) - c * log_x;

    // The trapezoid rule on an integrand analytic in a strip of half-width d converges like
    // exp(-2 pi d / h); the nearest pole sits sd.pole_distance away.
    double h = contour.step > 0 ? contour.step
                                : std::min({0.7 * sd.width, 0.25 * sd.pole_distance, 2.0});

    auto sample = [&](double t, double& envelope) {
        const cd v = log_integrand(spec, cd(c, t), log_x) - ref;
        envelope = std::exp(v.real());
        return envelope * std::cos(v.imag());
    };

    long evaluations = 0;
    std::vector<double> vals;
    double env0 = 0.0;
    vals.push_back(sample(0.0, env0));

    // Extend `vals` (spacing h) until the envelope is negligible relative to the running sum.
    auto extend = [&](double estimate) {
        double tail_sum = std::accumulate(vals.begin() + 1, vals.end(), 0.0);
        for (;;) {
            const double t = static_cast<double>(vals.size()) * h;
            if (t > contour.max_half_width || evaluations > kMaxEvaluations) return false;
            double env = 0.0;
            vals.push_back(sample(t, env));
            ++evaluations;
            tail_sum += vals.back();
            const double sum = h * (0.5 * vals[0] + tail_sum);
            const double scale = std::max(std::abs(estimate), std::abs(sum));
            if (t >= contour.half_width && env < 1e-2 * std::max(contour.tol * scale, 1e-17)) return true;
        }
    };

    auto trapezoid = [&]() {
        double s = 0.5 * vals[0];
        double r = 0.5 * std::abs(vals[0]);
        for (std::size_t k = 1; k < vals.size(); ++k) {
            s += vals[k];
            r += std::abs(vals[k]);
        }
        return std::pair{h * s, h * r};
    };

    auto fail = [&](const std::string& why, double partial, double err) {
        const double scale = std::exp(ref) / std::numbers::pi;
        throw AccuracyError("meijer_g: " + why, partial * scale, err * scale);
    };

    if (!extend(0.0)) fail("integrand did not decay within max_half_width", trapezoid().first, kInf);
    auto [prev, mass] = trapezoid();
    double delta = kInf;
    double current = prev;
    bool converged = false;

    for (int level = 1; level <= contour.max_refinements; ++level) {
        // halve the step: interleave midpoints, then extend the tail if needed
        const std::size_t old_size = vals.size();
        std::vector<double> refined(2 * old_size - 1);
        h *= 0.5;
        for (std::size_t k = 0; k < old_size; ++k) refined[2 * k] = vals[k];
        for (std::size_t k = 0; k + 1 < old_size; ++k) {
            double env = 0.0;
            refined[2 * k + 1] = sample(static_cast<double>(2 * k + 1) * h, env);
            ++evaluations;
        }
        vals = std::move(refined);
        if (!extend(prev)) fail("integrand did not decay within max_half_width", prev, kInf);
        std::tie(current, mass) = trapezoid();
        delta = std::abs(current - prev);
        const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * mass;
        if (delta <= std::max(contour.tol * std::abs(current), rounding)) {
            converged = true;
            delta = std::max(delta, rounding);
            break;
        }
        prev = current;
        if (evaluations > kMaxEvaluations) break;
    }
    if (!converged) fail("step refinement did not converge", current, delta);

    GValue out;
    out.contour = c;
    out.sign = current < 0 ? -1 : 1;
    if (current == 0.0) {
        out.log_abs = -kInf;
        out.value = 0.0;
        out.underflow = true;
        out.abs_error = std::exp(ref + std::log(delta) - std::log(std::numbers::pi));
        return out;
    }
    out.log_abs = ref + std::log(std::abs(current)) - std::log(std::numbers::pi);
    out.abs_error = std::exp(ref + std::log(delta) - std::log(std::numbers::pi));
    if (out.log_abs < kLogTiny) {
        out.value = 0.0;
        out.underflow = true;
    } else {
        out.value = out.sign * std::exp(out.log_abs);
    }
    return out;
}

TailAsymptote TailAsymptote::make(ModelClass cls, std::span<const double> beta, double eps0) {
    if (beta.empty()) throw ParameterError("tail_asymptote: empty beta");
    TailAsymptote t;
    t.model_class = cls;
    t.levels = static_cast<int>(beta.size());
    t.beta.assign(beta.begin(), beta.end());
    t.eps0 = eps0;
    const double n = t.levels;
    if (cls == ModelClass::Wishart) {
        t.theta = (std::accumulate(beta.begin(), beta.end(), 0.0) - n) / (n + 1.0);
        t.leading_exponent = 2.0 / (n + 1.0);
    } else {
        t.theta = 0.0;
        t.leading_exponent = 2.0 * *std::min_element(beta.begin(), beta.end()) + 3.0;
    }
    return t;
}

double log_tail_asymptote(const TailAsymptote& t, double x) {
    const double ax = std::abs(x);
    if (t.model_class == ModelClass::InverseWishart) {
        if (ax == 0.0) throw DomainError("tail_asymptote: power law undefined at the origin");
        return -t.leading_exponent * std::log(ax);
    }
    double log_omega = 0.0;
    for (double b : t.beta) log_omega += std::log(b);
    const double n1 = t.levels + 1.0;
    const double z = std::exp(log_omega) * ax * ax / (2.0 * t.eps0);
    const double prefactor = t.theta == 0.0 ? 0.0 : 2.0 * t.theta * std::log(ax);
    return prefactor - n1 * std::pow(z, 1.0 / n1);
}

double tail_asymptote(const TailAsymptote& t, double x) {
    return std::exp(log_tail_asymptote(t, x));
}

}  // namespace mht
