#include "mht/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mht/error.hpp"

namespace mht {

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DataError("ks_statistic: no samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("ks_two_sample: no samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * boost::math::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double gamma_cdf(double x, double shape, double scale) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, x / scale);
}

double inverse_gamma_cdf(double x, double shape, double scale) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_q(shape, scale / x);
}

double lognormal_cdf(double x, double lambda, double sigma) {
    if (x <= 0.0) return 0.0;
    return normal_cdf(std::log(x), lambda, sigma);
}

std::size_t Histogram::nonempty() const {
    return static_cast<std::size_t>(std::count_if(mass.begin(), mass.end(), [](double m) { return m > 0.0; }));
}

namespace {

template <typename BinOf>
Histogram fill(std::span<const double> samples, std::vector<double> edges, BinOf&& bin_of) {
    Histogram h;
    const std::size_t bins = edges.size() - 1;
    std::vector<std::size_t> counts(bins, 0);
    for (double v : samples) {
        if (!(v >= edges.front() && v <= edges.back())) {
            ++h.outside;
            continue;
        }
        auto k = bin_of(v);
        // guard against rounding at the edges
        while (k > 0 && v < edges[k]) --k;
        while (k + 1 < bins && v >= edges[k + 1]) ++k;
        ++counts[k];
        ++h.counted;
    }
    h.edges = std::move(edges);
    h.mass.resize(bins, 0.0);
    if (h.counted > 0)
        for (std::size_t k = 0; k < bins; ++k)
            h.mass[k] = static_cast<double>(counts[k]) / static_cast<double>(h.counted);
    return h;
}

}  // namespace

Histogram linear_histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw ParameterError("linear_histogram: invalid bins or range");
    std::vector<double> edges(bins + 1);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t k = 0; k <= bins; ++k) edges[k] = lo + w * static_cast<double>(k);
    edges.back() = hi;
    return fill(samples, std::move(edges), [&](double v) {
        return std::min(bins - 1, static_cast<std::size_t>((v - lo) / w));
    });
}

Histogram log_histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
    if (bins < 1 || !(lo > 0.0) || !(hi > lo)) throw ParameterError("log_histogram: invalid bins or range");
    const double llo = std::log(lo);
    const double w = (std::log(hi) - llo) / static_cast<double>(bins);
    std::vector<double> edges(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) edges[k] = std::exp(llo + w * static_cast<double>(k));
    edges.front() = lo;
    edges.back() = hi;
    return fill(samples, std::move(edges), [&](double v) {
        return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, (std::log(v) - llo) / w)));
    });
}

double mean(std::span<const double> v) {
    if (v.empty()) throw DataError("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double excess_kurtosis(std::span<const double> v) {
    const double m = mean(v);
    double s2 = 0.0;
    double s4 = 0.0;
    for (double x : v) {
        const double d2 = (x - m) * (x - m);
        s2 += d2;
        s4 += d2 * d2;
    }
    const double n = static_cast<double>(v.size());
    return (s4 / n) / ((s2 / n) * (s2 / n)) - 3.0;
}

}  // namespace mht
