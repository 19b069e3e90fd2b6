#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mht {

/// One-sample two-sided Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// Two-sample statistic sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);
/// Gamma(shape, scale): density x^{k-1} e^{-x/scale}.
double gamma_cdf(double x, double shape, double scale);
/// Inverse-gamma(shape, scale): density x^{-k-1} e^{-scale/x}.
double inverse_gamma_cdf(double x, double shape, double scale);
double lognormal_cdf(double x, double lambda, double sigma);

/// Bin edges plus probability masses. Samples outside [edges.front(), edges.back()]
/// are not counted; masses are normalized over the counted samples.
struct Histogram {
    std::vector<double> edges;
    std::vector<double> mass;
    std::size_t counted = 0;
    std::size_t outside = 0;

    std::size_t bins() const noexcept { return mass.size(); }
    double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    std::size_t nonempty() const;
};

Histogram linear_histogram(std::span<const double> samples, std::size_t bins, double lo, double hi);
/// Logarithmically spaced bins on [lo, hi], lo > 0.
Histogram log_histogram(std::span<const double> samples, std::size_t bins, double lo, double hi);

double mean(std::span<const double> v);
/// Population variance (divides by n).
double variance(std::span<const double> v);
double excess_kurtosis(std::span<const double> v);

}  // namespace mht
