#pragma once

#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace mht {

/// Principal branch of log Gamma(z). Throws DomainError at the poles z = 0, -1, -2, ...
std::complex<double> log_gamma(std::complex<double> z);
/// log Gamma(z) up to an unspecified multiple of 2 pi i; cheaper, and enough wherever only
/// exp(log Gamma) is consumed.
std::complex<double> log_gamma_mod_2pi(std::complex<double> z);

double digamma(double x);
double trigamma(double x);

/// Index lists of a scalar Meijer G-function
///
///     G^{m,n}_{p,q}( a_top, a_bottom | b_top, b_bottom | x )
///
/// whose Mellin transform is
///
///     prod_j Gamma(s + b_top_j) prod_j Gamma(1 - s - a_top_j)
///     -------------------------------------------------------------
///     prod_j Gamma(1 - s - b_bottom_j) prod_j Gamma(s + a_bottom_j)
///
/// m = |b_top|, n = |a_top|, q = m + |b_bottom|, p = n + |a_bottom|.
/// Only the pure-numerator families G^{m,0}_{0,m}, G^{0,n}_{n,0} and G^{1,n}_{n,1}
/// are evaluated; everything the H-theory densities need reduces to one of these.
struct GKernelSpec {
    std::vector<double> b_top;
    std::vector<double> a_top;
    std::vector<double> b_bottom;
    std::vector<double> a_bottom;

    int m() const noexcept { return static_cast<int>(b_top.size()); }
    int n() const noexcept { return static_cast<int>(a_top.size()); }
    int q() const noexcept { return m() + static_cast<int>(b_bottom.size()); }
    int p() const noexcept { return n() + static_cast<int>(a_bottom.size()); }

    /// G^{m,0}_{0,m}(- | b | x)
    static GKernelSpec lower(std::vector<double> b);
    /// G^{0,n}_{n,0}(a | - | x)
    static GKernelSpec upper(std::vector<double> a);
    /// G^{1,n}_{n,1}(a | b0 | x)
    static GKernelSpec mixed(std::vector<double> a, double b0);

    /// Parameters of G(1/x) written as a G-function of x: (a, b) -> (1 - b, 1 - a), m <-> n.
    GKernelSpec inverted() const;
    /// Parameters of x^sigma G(x): every a and b shifted by sigma.
    GKernelSpec shifted(double sigma) const;

    /// Admissible strip lo < Re(s) < hi for the Mellin-Barnes contour (may be infinite).
    double strip_lo() const;
    double strip_hi() const;
    /// Throws ParameterError unless the index pattern is supported and a contour exists.
    void validate() const;
};

/// Mellin-Barnes quadrature controls. A NaN abscissa or a zero step selects them automatically.
struct ContourParams {
    double c = std::numeric_limits<double>::quiet_NaN();
    double half_width = 1.0;       // minimum truncation of |Im s|; extended until the tail is negligible
    double step = 0.0;             // initial trapezoid step, halved until converged
    double tol = 1e-10;            // target error, relative to |G|
    double max_half_width = 1e4;
    int max_refinements = 16;
};

struct GValue {
    double value = 0.0;        // 0 when |G| underflows below 1e-300
    double log_abs = 0.0;      // ln |G|, valid even on underflow
    int sign = 1;
    double abs_error = 0.0;
    bool underflow = false;
    double contour = 0.0;      // abscissa actually used
};

/// Meijer G-function at x > 0 by trapezoidal quadrature of the inverse Mellin
/// integral along Re(s) = c.
GValue meijer_g(const GKernelSpec& spec, double x, const ContourParams& contour = {});

/// Same, with the argument given as ln x so that extreme arguments stay representable.
GValue meijer_g_log(const GKernelSpec& spec, double log_x, const ContourParams& contour = {});

/// Mellin transform of the kernel at real s (inside the strip), in log form.
double log_mellin(const GKernelSpec& spec, double s);

enum class ModelClass { Wishart, InverseWishart };

/// Large-|x| behaviour of the signal density.
struct TailAsymptote {
    ModelClass model_class = ModelClass::Wishart;
    int levels = 1;
    std::vector<double> beta;
    double eps0 = 1.0;
    double theta = 0.0;             // power prefactor exponent / 2 (gamma class)
    double leading_exponent = 0.0;  // 2/(N+1) for the gamma class, 2 min(beta) + 3 for the inverse class

    static TailAsymptote make(ModelClass cls, std::span<const double> beta, double eps0);
};

/// Unnormalized tail approximation:
///   gamma class:   |x|^{2 theta} exp[-(N+1) (omega x^2 / 2 eps0)^{1/(N+1)}]
///   inverse class: |x|^{-(2 min beta + 3)}
double tail_asymptote(const TailAsymptote& t, double x);
double log_tail_asymptote(const TailAsymptote& t, double x);

}  // namespace mht
