#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mht/special_fn.hpp"

namespace mht {

std::string to_string(ModelClass cls);
/// Accepts "wishart"/"gamma" and "inverse-wishart"/"inverse"/"inverse-gamma".
ModelClass parse_model_class(const std::string& name);

/// Hierarchical background model: N levels with shape parameters beta_i around the
/// equilibrium scale eps0. Wishart is the gamma class, InverseWishart the inverse-gamma class.
class HModel {
public:
    HModel(ModelClass cls, std::vector<double> beta, double eps0 = 1.0);

    /// All N levels share one beta.
    static HModel common(ModelClass cls, int levels, double beta, double eps0 = 1.0);

    ModelClass model_class() const noexcept { return cls_; }
    int levels() const noexcept { return static_cast<int>(beta_.size()); }
    const std::vector<double>& beta() const noexcept { return beta_; }
    double eps0() const noexcept { return eps0_; }
    /// omega = prod beta_j
    double omega() const noexcept { return std::exp(log_omega_); }
    double log_omega() const noexcept { return log_omega_; }

private:
    ModelClass cls_;
    std::vector<double> beta_;
    double eps0_;
    double log_omega_;
};

/// f_N(eps), the density of the short-scale background.
double background_density(const HModel& model, double eps);
double log_background_density(const HModel& model, double eps);

/// P_N(x), the Gaussian compounded with f_N. Symmetric in x; may be +inf at x = 0
/// when some beta_j <= 1/2 in the Wishart class.
double signal_density(const HModel& model, double x);
double log_signal_density(const HModel& model, double x);

/// P_N(x) through the general G-function route, bypassing the N = 1 closed forms.
double signal_density_meijer(const HModel& model, double x);
/// N = 1 closed forms: the Bessel-K law (Wishart) and the Student-like power law (inverse).
double signal_density_closed_form(const HModel& model, double x);
/// P_N(x) by adaptive quadrature of the Gaussian against background_density.
double signal_density_quadrature(const HModel& model, double x, double tol = 1e-11);

/// E[eps^order]; +inf when the moment diverges (inverse class, order >= min(beta) + 1).
double background_moment(const HModel& model, int order);

/// eps = eps0 * prod xi_i with independent mean-one gamma (Wishart) or inverse-gamma factors.
std::vector<double> sample_background(const HModel& model, std::size_t count, std::uint64_t seed);
/// x = sqrt(eps) z with z standard normal.
std::vector<double> sample_signal(const HModel& model, std::size_t count, std::uint64_t seed);

struct LognormalParams {
    double lambda = 0.0;
    double sigma = 0.0;
};

/// Lognormal with the same mean and variance of ln eps as f_N.
LognormalParams lognormal_limit(const HModel& model);

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> log_values;
};

DensityCurve background_curve(const HModel& model, std::span<const double> grid);
DensityCurve signal_curve(const HModel& model, std::span<const double> grid);

}  // namespace mht
