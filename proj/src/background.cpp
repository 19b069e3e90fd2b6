#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mht/error.hpp"
#include "mht/parallel.hpp"
#include "mht/pipeline.hpp"

namespace mht {

BackgroundSeries windowed_variance(std::span<const double> series, int window, int step, std::size_t segment_length) {
    if (window < 2) throw ParameterError("windowed_variance: window must be at least 2");
    if (step < 1) throw ParameterError("windowed_variance: step must be positive");
    const std::size_t seg = segment_length == 0 ? series.size() : segment_length;
    if (seg == 0 || series.size() % seg != 0)
        throw ParameterError("windowed_variance: series length is not a multiple of the segment length");
    const auto l = static_cast<std::size_t>(window);
    if (l > seg) throw ParameterError("windowed_variance: window longer than the series");

    BackgroundSeries bg;
    bg.window = window;
    bg.values.reserve((series.size() / seg) * ((seg - l) / static_cast<std::size_t>(step) + 1));
    for (std::size_t start = 0; start < series.size(); start += seg) {
        for (std::size_t t = start + l - 1; t < start + seg; t += static_cast<std::size_t>(step)) {
            const double* w = series.data() + (t + 1 - l);
            double m = 0.0;
            for (std::size_t j = 0; j < l; ++j) m += w[j];
            m /= static_cast<double>(l);
            double v = 0.0;
            for (std::size_t j = 0; j < l; ++j) v += (w[j] - m) * (w[j] - m);
            bg.values.push_back(v / static_cast<double>(l));
        }
    }
    bg.histogram = background_histogram(bg.values);
    return bg;
}

Histogram background_histogram(std::span<const double> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : values) {
        if (v > 0.0) lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    lo = std::max(lo, 1e-4);
    if (!(hi > lo)) {
        // degenerate (e.g. constant series): an empty histogram over a nominal range
        return log_histogram(values, kBackgroundBins, 1e-4, 1.0);
    }
    return log_histogram(values, kBackgroundBins, lo * (1.0 - 1e-9), hi * (1.0 + 1e-9));
}

Histogram return_histogram(std::span<const double> values) {
    return linear_histogram(values, kReturnBins, -kReturnRange, kReturnRange);
}

double kl_from_masses(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ParameterError("kl_from_masses: length mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        kl += p[i] * std::log(p[i] / std::max(q[i], 1e-300));
    }
    return std::max(kl, 0.0);
}

std::vector<double> bin_masses(const Histogram& h, const std::function<double(double)>& density) {
    const std::size_t k = h.bins();
    std::vector<double> at_edge(k + 1);
    for (std::size_t i = 0; i <= k; ++i) at_edge[i] = density(h.edges[i]);
    std::vector<double> q(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double mid = density(0.5 * (h.edges[i] + h.edges[i + 1]));
        q[i] = h.width(i) / 6.0 * (at_edge[i] + 4.0 * mid + at_edge[i + 1]);
    }
    return q;
}

namespace {

KlResult finish(const Histogram& h, const std::vector<double>& q) {
    KlResult r;
    r.model_mass = std::accumulate(q.begin(), q.end(), 0.0);
    r.support_warning = r.model_mass < 0.99;
    r.kl = kl_from_masses(h.mass, q);
    return r;
}

}  // namespace

KlResult kl_divergence(const Histogram& h, const std::function<double(double)>& density) {
    const double total = std::accumulate(h.mass.begin(), h.mass.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw ParameterError("kl_divergence: histogram masses must sum to 1");
    return finish(h, bin_masses(h, density));
}

std::vector<double> mixture_bin_masses(const Histogram& h, std::span<const double> eps, std::size_t groups) {
    if (eps.empty()) throw DataError("mixture_bin_masses: no variance samples");
    if (groups < 1) throw ParameterError("mixture_bin_masses: groups must be positive");
    std::vector<double> sorted(eps.begin(), eps.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const std::size_t g = std::min(groups, m);

    const std::size_t k = h.bins();
    std::vector<double> q(k, 0.0);
    std::vector<double> cdf(k + 1);
    for (std::size_t gi = 0; gi < g; ++gi) {
        const std::size_t b = gi * m / g;
        const std::size_t e = (gi + 1) * m / g;
        double var = 0.0;
        for (std::size_t j = b; j < e; ++j) var += sorted[j];
        var /= static_cast<double>(e - b);
        const double weight = static_cast<double>(e - b) / static_cast<double>(m);
        const double sd = std::sqrt(std::max(var, 0.0));
        for (std::size_t i = 0; i <= k; ++i) {
            const double x = h.edges[i];
            cdf[i] = sd > 0.0 ? normal_cdf(x / sd) : (x >= 0.0 ? 1.0 : 0.0);
        }
        for (std::size_t i = 0; i < k; ++i) q[i] += weight * (cdf[i + 1] - cdf[i]);
    }
    return q;
}

KlResult compound_kl(const Histogram& h, std::span<const double> eps, std::size_t groups) {
    return finish(h, mixture_bin_masses(h, eps, groups));
}

double kl_difference_noise(const Histogram& h, std::span<const double> q_a, std::span<const double> q_b,
                           double samples) {
    if (q_a.size() != h.bins() || q_b.size() != h.bins()) throw ParameterError("kl_difference_noise: length mismatch");
    // KL(p||q_a) - KL(p||q_b) = sum p ln(q_b / q_a); its sampling error follows from the
    // variance of that log ratio under the empirical distribution.
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < h.bins(); ++k) {
        if (h.mass[k] <= 0.0) continue;
        const double d = std::log(std::max(q_b[k], 1e-300) / std::max(q_a[k], 1e-300));
        m1 += h.mass[k] * d;
        m2 += h.mass[k] * d * d;
    }
    return 2.0 * std::sqrt(std::max(m2 - m1 * m1, 0.0) / std::max(samples, 1.0));
}

WindowSearch optimal_window(const ReturnsMatrix& r, const WindowOptions& options) {
    if (options.l_min < 2 || options.l_max < options.l_min) throw ParameterError("optimal_window: empty L range");
    if (r.length() < static_cast<std::size_t>(options.l_max))
        throw DataError("optimal_window: series shorter than the largest window");
    const std::size_t assets = r.assets();
    const std::size_t nl = static_cast<std::size_t>(options.l_max - options.l_min + 1);

    WindowSearch out;
    out.l_min = options.l_min;
    out.l_max = options.l_max;
    out.per_asset.assign(assets, options.l_min);
    out.no_structure.assign(assets, false);
    out.profile.assign(assets, std::vector<double>(nl, 0.0));

    parallel_for(assets, options.threads, [&](std::size_t i) {
        std::vector<double> row(r.length());
        for (std::size_t t = 0; t < r.length(); ++t)
            row[t] = r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
        const Histogram hist = return_histogram(row);
        auto& prof = out.profile[i];
        for (std::size_t k = 0; k < nl; ++k) {
            const BackgroundSeries bg = windowed_variance(row, options.l_min + static_cast<int>(k));
            prof[k] = compound_kl(hist, bg.values, options.groups).kl;
        }
        // Baseline without background structure: a single Gaussian with the row variance.
        const double var = variance(row);
        const std::vector<double> q_gauss = mixture_bin_masses(hist, std::span<const double>(&var, 1));
        const auto best = static_cast<std::size_t>(std::min_element(prof.begin(), prof.end()) - prof.begin());
        const int best_l = options.l_min + static_cast<int>(best);
        const std::vector<double> q_best =
            mixture_bin_masses(hist, windowed_variance(row, best_l).values, options.groups);
        const double gain = kl_from_masses(hist.mass, q_gauss) - prof[best];
        if (gain > kl_difference_noise(hist, q_gauss, q_best, static_cast<double>(hist.counted))) {
            out.per_asset[i] = best_l;
        } else {
            out.no_structure[i] = true;
            out.per_asset[i] = options.l_min;
        }
    });

    out.histogram.assign(nl, 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < assets; ++i) {
        ++out.histogram[static_cast<std::size_t>(out.per_asset[i] - options.l_min)];
        sum += out.per_asset[i];
        if (out.no_structure[i]) ++out.no_structure_count;
    }
    out.mean = assets > 0 ? sum / static_cast<double>(assets) : 0.0;
    return out;
}

double recovered_return_check(std::span<const double> series, const BackgroundSeries& bg, std::size_t groups) {
    const Histogram h = return_histogram(series);
    return compound_kl(h, bg.values, groups).kl;
}

}  // namespace mht
