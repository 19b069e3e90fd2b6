#include "mht/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mht/error.hpp"
#include "mht/quadrature.hpp"

namespace mht {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double sum_lgamma(const std::vector<double>& beta, double shift) {
    double acc = 0.0;
    for (double b : beta) acc += boost::math::lgamma(b + shift);
    return acc;
}

std::vector<double> shifted(const std::vector<double>& beta, double s) {
    std::vector<double> out(beta);
    for (double& b : out) b += s;
    return out;
}

double safe_exp(double v) {
    return v < -745.0 ? 0.0 : std::exp(v);
}

double log_signal_at_origin(const HModel& model) {
    const auto& beta = model.beta();
    if (model.model_class() == ModelClass::Wishart) {
        if (std::any_of(beta.begin(), beta.end(), [](double b) { return b <= 0.5; })) return kInf;
        return 0.5 * model.log_omega() - 0.5 * (kLog2Pi + std::log(model.eps0())) - sum_lgamma(beta, 0.0) +
               sum_lgamma(beta, -0.5);
    }
    return -0.5 * (kLog2Pi + model.log_omega() + std::log(model.eps0())) - sum_lgamma(beta, 1.0) +
           sum_lgamma(beta, 1.5);
}

double log_signal_meijer(const HModel& model, double x) {
    if (x == 0.0) return log_signal_at_origin(model);
    const auto& beta = model.beta();
    const double log_x2 = 2.0 * std::log(std::abs(x));
    const double log_eps0 = std::log(model.eps0());
    if (model.model_class() == ModelClass::Wishart) {
        std::vector<double> b = shifted(beta, -0.5);
        b.push_back(0.0);
        const double log_z = model.log_omega() + log_x2 - std::numbers::ln2 - log_eps0;
        const GValue g = meijer_g_log(GKernelSpec::lower(std::move(b)), log_z);
        return 0.5 * model.log_omega() - 0.5 * (kLog2Pi + log_eps0) - sum_lgamma(beta, 0.0) + g.log_abs;
    }
    std::vector<double> a(beta.size());
    std::transform(beta.begin(), beta.end(), a.begin(), [](double b) { return -b - 0.5; });
    const double log_z = log_x2 - std::numbers::ln2 - model.log_omega() - log_eps0;
    const GValue g = meijer_g_log(GKernelSpec::mixed(std::move(a), 0.0), log_z);
    return -0.5 * (kLog2Pi + model.log_omega() + log_eps0) - sum_lgamma(beta, 1.0) + g.log_abs;
}

// NaN when the closed form is not usable (Bessel-K underflow); callers fall back to the G route.
double log_signal_closed_form(const HModel& model, double x) {
    if (model.levels() != 1) throw ParameterError("closed-form signal density requires N = 1");
    const double beta = model.beta()[0];
    const double eps0 = model.eps0();
    if (x == 0.0) return log_signal_at_origin(model);
    if (model.model_class() == ModelClass::Wishart) {
        // G^{2,0}_{0,2}(beta - 1/2, 0 | z) = 2 z^{(beta - 1/2)/2} K_{beta - 1/2}(2 sqrt z)
        const double z = beta * x * x / (2.0 * eps0);
        const double arg = 2.0 * std::sqrt(z);
        const double k = boost::math::cyl_bessel_k(beta - 0.5, arg);
        if (!(k > 0.0) || !std::isfinite(k)) return std::numeric_limits<double>::quiet_NaN();
        return 0.5 * std::log(beta) - 0.5 * (kLog2Pi + std::log(eps0)) - boost::math::lgamma(beta) +
               std::numbers::ln2 + 0.5 * (beta - 0.5) * std::log(z) + std::log(k);
    }
    return -0.5 * (kLog2Pi + std::log(beta * eps0)) + boost::math::lgamma(beta + 1.5) -
           boost::math::lgamma(beta + 1.0) - (beta + 1.5) * std::log1p(x * x / (2.0 * beta * eps0));
}

}  // namespace

std::string to_string(ModelClass cls) {
    return cls == ModelClass::Wishart ? "wishart" : "inverse-wishart";
}

ModelClass parse_model_class(const std::string& name) {
    if (name == "wishart" || name == "gamma") return ModelClass::Wishart;
    if (name == "inverse-wishart" || name == "inverse" || name == "inverse-gamma") return ModelClass::InverseWishart;
    throw ParameterError("unknown model class '" + name + "'");
}

HModel::HModel(ModelClass cls, std::vector<double> beta, double eps0)
    : cls_(cls), beta_(std::move(beta)), eps0_(eps0), log_omega_(0.0) {
    if (beta_.empty()) throw ParameterError("HModel: at least one level is required");
    for (double b : beta_) {
        if (!(b > 0.0) || !std::isfinite(b)) throw ParameterError("HModel: beta must be positive and finite");
        log_omega_ += std::log(b);
    }
    if (!(eps0_ > 0.0) || !std::isfinite(eps0_)) throw ParameterError("HModel: eps0 must be positive");
}

HModel HModel::common(ModelClass cls, int levels, double beta, double eps0) {
    if (levels < 1) throw ParameterError("HModel: at least one level is required");
    return HModel(cls, std::vector<double>(static_cast<std::size_t>(levels), beta), eps0);
}

double log_background_density(const HModel& model, double eps) {
    if (!(eps > 0.0)) throw DomainError("background_density: eps must be positive");
    const auto& beta = model.beta();
    const double log_eps0 = std::log(model.eps0());
    if (model.model_class() == ModelClass::Wishart) {
        // (omega / eps0 Gamma(beta)) G^{N,0}_{0,N}(- | beta - 1 | omega eps / eps0)
        const GValue g =
            meijer_g_log(GKernelSpec::lower(shifted(beta, -1.0)), model.log_omega() + std::log(eps) - log_eps0);
        return model.log_omega() - log_eps0 - sum_lgamma(beta, 0.0) + g.log_abs;
    }
    // Inverse class through argument inversion: with u = eps / (eps0 omega),
    // f = u^{-2} G^{N,0}_{0,N}(- | beta | 1/u) / (eps0 omega Gamma(beta + 1)).
    const double log_u = std::log(eps) - log_eps0 - model.log_omega();
    const GValue g = meijer_g_log(GKernelSpec::lower(beta), -log_u);
    return -log_eps0 - model.log_omega() - sum_lgamma(beta, 1.0) - 2.0 * log_u + g.log_abs;
}

double background_density(const HModel& model, double eps) {
    return safe_exp(log_background_density(model, eps));
}

double log_signal_density(const HModel& model, double x) {
    if (std::isnan(x)) throw DomainError("signal_density: NaN argument");
    if (model.levels() == 1) {
        const double v = log_signal_closed_form(model, x);
        if (!std::isnan(v)) return v;
    }
    return log_signal_meijer(model, x);
}

double signal_density(const HModel& model, double x) {
    return safe_exp(log_signal_density(model, x));
}

double signal_density_meijer(const HModel& model, double x) {
    return safe_exp(log_signal_meijer(model, x));
}

double signal_density_closed_form(const HModel& model, double x) {
    const double v = log_signal_closed_form(model, x);
    return std::isnan(v) ? 0.0 : safe_exp(v);
}

double signal_density_quadrature(const HModel& model, double x, double tol) {
    const double x2 = x * x;
    auto integrand = [&](double eps) {
        if (eps <= 0.0) return 0.0;
        const double log_gauss = -0.5 * (kLog2Pi + std::log(eps)) - x2 / (2.0 * eps);
        return safe_exp(log_gauss + log_background_density(model, eps));
    };
    const double split = model.eps0();
    return integrate(integrand, 0.0, split, tol).value + integrate(integrand, split, kInf, tol).value;
}

double background_moment(const HModel& model, int order) {
    if (order < 1) throw ParameterError("background_moment: order must be >= 1");
    const double n = order;
    double log_m = n * std::log(model.eps0());
    for (double b : model.beta()) {
        if (model.model_class() == ModelClass::Wishart) {
            log_m += boost::math::lgamma(b + n) - n * std::log(b) - boost::math::lgamma(b);
        } else {
            if (n >= b + 1.0) return kInf;
            log_m += n * std::log(b) + boost::math::lgamma(b + 1.0 - n) - boost::math::lgamma(b + 1.0);
        }
    }
    return std::exp(log_m);
}

namespace {

double draw_background(const HModel& model, std::mt19937_64& rng) {
    double eps = model.eps0();
    for (double b : model.beta()) {
        if (model.model_class() == ModelClass::Wishart) {
            std::gamma_distribution<double> g(b, 1.0 / b);
            eps *= g(rng);
        } else {
            std::gamma_distribution<double> g(b + 1.0, 1.0);
            eps *= b / g(rng);
        }
    }
    return eps;
}

}  // namespace

std::vector<double> sample_background(const HModel& model, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (double& v : out) v = draw_background(model, rng);
    return out;
}

std::vector<double> sample_signal(const HModel& model, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(count);
    for (double& v : out) {
        const double eps = draw_background(model, rng);
        v = std::sqrt(eps) * normal(rng);
    }
    return out;
}

LognormalParams lognormal_limit(const HModel& model) {
    double mean = std::log(model.eps0());
    double var = 0.0;
    for (double b : model.beta()) {
        if (model.model_class() == ModelClass::Wishart) {
            mean += digamma(b) - std::log(b);
            var += trigamma(b);
        } else {
            mean += std::log(b) - digamma(b + 1.0);
            var += trigamma(b + 1.0);
        }
    }
    return {mean, std::sqrt(var)};
}

namespace {

template <typename LogDensity>
DensityCurve tabulate(std::span<const double> grid, LogDensity&& log_density) {
    DensityCurve c;
    c.grid.assign(grid.begin(), grid.end());
    c.values.reserve(grid.size());
    c.log_values.reserve(grid.size());
    for (double x : grid) {
        const double lv = log_density(x);
        c.log_values.push_back(lv);
        c.values.push_back(safe_exp(lv));
    }
    return c;
}

}  // namespace

DensityCurve background_curve(const HModel& model, std::span<const double> grid) {
    return tabulate(grid, [&](double e) { return log_background_density(model, e); });
}

DensityCurve signal_curve(const HModel& model, std::span<const double> grid) {
    return tabulate(grid, [&](double x) { return log_signal_density(model, x); });
}

}  // namespace mht
