#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include "mht/error.hpp"
#include "mht/parallel.hpp"
#include "mht/pipeline.hpp"

namespace mht {

int default_threads() {
    if (const char* env = std::getenv("MHT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<KlResult> evaluate(const Histogram& h, int levels, ModelClass cls, double eps0, double beta) {
    try {
        const HModel model = HModel::common(cls, levels, beta, eps0);
        const KlResult r = kl_divergence(h, [&](double e) { return background_density(model, e); });
        if (!std::isfinite(r.kl) || !std::isfinite(r.model_mass)) return std::nullopt;
        return r;
    } catch (const NumericalError&) {
        return std::nullopt;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

}  // namespace

BetaFit fit_beta(const Histogram& h, int levels, ModelClass model_class, double eps0, const FitOptions& options) {
    if (levels < 1) throw ParameterError("fit_beta: levels must be positive");
    if (options.grid_points < 3 || !(options.beta_lo > 0.0) || !(options.beta_hi > options.beta_lo))
        throw ParameterError("fit_beta: invalid search range");

    BetaFit fit;
    fit.model_class = model_class;
    fit.levels = levels;

    const auto g = static_cast<std::size_t>(options.grid_points);
    std::vector<double> grid(g);
    const double llo = std::log(options.beta_lo);
    const double lstep = (std::log(options.beta_hi) - llo) / static_cast<double>(g - 1);
    for (std::size_t k = 0; k < g; ++k) grid[k] = std::exp(llo + lstep * static_cast<double>(k));
    grid.back() = options.beta_hi;

    std::vector<std::optional<KlResult>> coarse(g);
    parallel_for(g, options.threads,
                 [&](std::size_t k) { coarse[k] = evaluate(h, levels, model_class, eps0, grid[k]); });
    fit.evaluations = static_cast<int>(g);

    std::size_t best = g;
    for (std::size_t k = 0; k < g; ++k) {
        if (!coarse[k]) {
            ++fit.skipped;
            continue;
        }
        if (best == g || coarse[k]->kl < coarse[best]->kl) best = k;
    }
    if (best == g) throw NumericalError("fit_beta: density not finite anywhere on the search grid");

    double best_beta = grid[best];
    KlResult best_result = *coarse[best];
    auto objective = [&](double beta) {
        ++fit.evaluations;
        const auto r = evaluate(h, levels, model_class, eps0, beta);
        if (!r) {
            ++fit.skipped;
            return kInf;
        }
        if (r->kl < best_result.kl) {
            best_result = *r;
            best_beta = beta;
        }
        return r->kl;
    };

    // Golden-section refinement on the bracket around the best grid point.
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, g - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > options.beta_tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }

    fit.beta = best_beta;
    fit.kl = best_result.kl;
    fit.model_mass = best_result.model_mass;
    fit.support_warning = best_result.support_warning;
    return fit;
}

Selection select_model(const std::vector<BetaFit>& fits, double flattening) {
    if (fits.empty()) throw ParameterError("select_model: no fits");
    std::map<ModelClass, std::vector<const BetaFit*>> by_class;
    for (const auto& f : fits) by_class[f.model_class].push_back(&f);

    ModelClass best_class = fits.front().model_class;
    double best_kl = kInf;
    for (auto& [cls, list] : by_class) {
        std::sort(list.begin(), list.end(), [](const BetaFit* x, const BetaFit* y) { return x->levels < y->levels; });
        for (const BetaFit* f : list) {
            if (f->kl < best_kl) {
                best_kl = f->kl;
                best_class = cls;
            }
        }
    }

    const auto& list = by_class[best_class];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const BetaFit* later = nullptr;
        for (std::size_t j = i + 1; j < list.size(); ++j)
            if (!later || list[j]->kl < later->kl) later = list[j];
        if (!later) break;
        const double gain = list[i]->kl - later->kl;
        if (!(gain >= flattening * list[i]->kl))
            return {best_class, list[i]->levels, list[i]->beta, list[i]->kl};
    }
    const BetaFit* last = list.back();
    return {best_class, last->levels, last->beta, last->kl};
}

FitReport model_scan(const BackgroundSeries& bg, const ScanOptions& options) {
    if (options.max_levels < 1) throw ParameterError("model_scan: max_levels must be positive");
    if (bg.histogram.counted == 0) throw DataError("model_scan: empty background histogram");

    FitReport report;
    report.eps0_used = options.eps0;
    report.flattening = options.flattening;
    report.background_length = bg.values.size();
    // Overlapping windows: roughly one independent estimate per window length.
    const double effective = static_cast<double>(bg.histogram.counted) / std::max(1, bg.window);

    const ModelClass classes[] = {ModelClass::Wishart, ModelClass::InverseWishart};
    const auto n = static_cast<std::size_t>(options.max_levels);
    report.fits.resize(2 * n);
    FitOptions inner = options.fit;
    inner.threads = 1;
    parallel_for(2 * n, options.fit.threads, [&](std::size_t k) {
        report.fits[k] = fit_beta(bg.histogram, static_cast<int>(k % n) + 1, classes[k / n], options.eps0, inner);
    });
    report.selected = select_model(report.fits, options.flattening);

    // Sampling noise of the step from the selected N to the next, as a diagnostic.
    const auto find = [&](int levels) -> const BetaFit* {
        for (const auto& f : report.fits)
            if (f.model_class == report.selected.model_class && f.levels == levels) return &f;
        return nullptr;
    };
    const BetaFit* sel = find(report.selected.levels);
    const BetaFit* next = find(report.selected.levels + 1);
    const BetaFit* prev = find(report.selected.levels - 1);
    const auto masses = [&](const BetaFit& f) {
        const HModel model = HModel::common(f.model_class, f.levels, f.beta, options.eps0);
        return bin_masses(bg.histogram, [&](double e) { return background_density(model, e); });
    };
    try {
        const std::vector<double> q_sel = masses(*sel);
        if (next) report.noise_floor = kl_difference_noise(bg.histogram, q_sel, masses(*next), effective);
        if (prev && prev->kl - sel->kl < kl_difference_noise(bg.histogram, masses(*prev), q_sel, effective))
            report.warnings.push_back("KL gain from N=" + std::to_string(prev->levels) + " to N=" +
                                      std::to_string(sel->levels) + " is within sampling noise");
    } catch (const NumericalError&) {
    } catch (const DomainError&) {
    }
    return report;
}

PipelineResult run_pipeline(const PriceTable& prices, const PipelineOptions& options) {
    PipelineResult out;
    const ReturnsMatrix normalized = normalize(log_returns(prices, options.dt_days));
    const Whitening w = rotate_whiten(normalized, correlation(normalized));
    out.aggregated = aggregate(w.returns);

    std::optional<WindowSearch> search;
    int window = 0;
    if (options.fixed_window) {
        window = *options.fixed_window;
    } else {
        WindowOptions wo = options.window;
        wo.threads = options.scan.fit.threads;
        search = optimal_window(w.returns, wo);
        window = static_cast<int>(std::lround(search->mean));
    }
    out.background = windowed_variance(out.aggregated, window, 1, w.returns.length());
    out.returns_histogram = return_histogram(out.aggregated);

    FitReport report = model_scan(out.background, options.scan);
    report.assets = prices.assets();
    report.dates = prices.dates.size();
    report.series_length = out.aggregated.size();
    report.dropped = prices.dropped;
    std::vector<std::string> warnings = prices.warnings;
    warnings.insert(warnings.end(), w.warnings.begin(), w.warnings.end());
    warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
    report.warnings = std::move(warnings);
    report.window_used = window;
    if (search) {
        report.window_mean = search->mean;
        report.window_min = search->l_min;
        report.window_max = search->l_max;
        report.window_per_asset = search->per_asset;
        report.window_histogram = search->histogram;
        report.no_structure_count = search->no_structure_count;
    } else {
        report.window_mean = window;
        report.window_min = window;
        report.window_max = window;
    }
    for (const auto& f : report.fits)
        if (f.support_warning)
            report.warnings.push_back("model mass below 0.99 on the histogram support for " +
                                      to_string(f.model_class) + " N=" + std::to_string(f.levels));
    report.recovered_kl = recovered_return_check(out.aggregated, out.background);
    out.report = std::move(report);
    return out;
}

}  // namespace mht
