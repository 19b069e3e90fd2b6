#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mht/distributions.hpp"
#include "mht/stats.hpp"

namespace mht {

// ---------------------------------------------------------------- ingestion

struct PriceTable {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;     // ISO dates, ascending
    Eigen::MatrixXd close;              // assets x dates
    std::vector<std::string> dropped;   // tickers removed for missing dates
    std::vector<std::string> warnings;

    std::size_t assets() const noexcept { return tickers.size(); }
};

struct LoadOptions {
    std::size_t min_assets = 2;
    std::size_t min_dates = 10;
};

/// Long-format CSV with header `date,ticker,close`. Assets missing any date are dropped.
PriceTable load_prices(const std::string& path, const LoadOptions& options = {});
PriceTable parse_prices(std::istream& in, const LoadOptions& options = {});
void write_prices(std::ostream& out, const PriceTable& table);

// ---------------------------------------------------------------- returns

struct ReturnsMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd values;  // p x T
    bool normalized = false;
    bool whitened = false;

    std::size_t assets() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

ReturnsMatrix log_returns(const PriceTable& prices, int dt_days = 1);
/// Rows to zero mean and unit population variance. Throws DataError on a constant row.
ReturnsMatrix normalize(const ReturnsMatrix& r);
/// C = M M^T / T. Symmetric, unit diagonal, eigenvalues clipped at 0 (may be singular).
Eigen::MatrixXd correlation(const ReturnsMatrix& r);

struct Whitening {
    ReturnsMatrix returns;
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // columns; largest-magnitude component of each is positive
    std::size_t floored = 0;       // eigenvalues raised to 1e-10
    std::vector<std::string> warnings;
};

/// r~ = Lambda^{-1/2} U^T r. Throws DataError when more than p/10 eigenvalues need flooring.
Whitening rotate_whiten(const ReturnsMatrix& r, const Eigen::MatrixXd& c);
/// Asset-major concatenation of a whitened matrix.
std::vector<double> aggregate(const ReturnsMatrix& r);

// ---------------------------------------------------------------- background

struct BackgroundSeries {
    int window = 0;
    std::vector<double> values;
    Histogram histogram;
};

inline constexpr std::size_t kBackgroundBins = 200;
inline constexpr std::size_t kReturnBins = 401;
inline constexpr double kReturnRange = 12.0;

/// Sliding (1/L) variance estimates. With segment_length > 0 the series is treated as
/// consecutive segments of that length and windows never straddle a boundary.
BackgroundSeries windowed_variance(std::span<const double> series, int window, int step = 1,
                                   std::size_t segment_length = 0);
/// 200 logarithmic bins over the positive values (floored at 1e-4), small safety margins.
Histogram background_histogram(std::span<const double> values);
/// 401 linear bins on [-12, 12].
Histogram return_histogram(std::span<const double> values);

// ---------------------------------------------------------------- divergence

struct KlResult {
    double kl = 0.0;
    double model_mass = 0.0;       // model probability inside the histogram support
    bool support_warning = false;  // model_mass < 0.99
};

/// D(p || q) from bin masses; q floored at 1e-300, empty p bins contribute 0.
double kl_from_masses(std::span<const double> p, std::span<const double> q);
/// Bin masses by Simpson's rule on each bin, sharing edge evaluations.
std::vector<double> bin_masses(const Histogram& h, const std::function<double(double)>& density);
KlResult kl_divergence(const Histogram& h, const std::function<double(double)>& density);

/// Exact bin masses of the Gaussian mixture (1/M) sum_k N(0, eps_k). Samples are compressed
/// into at most `groups` equal-count groups (by sorted value) carrying their mean variance.
std::vector<double> mixture_bin_masses(const Histogram& h, std::span<const double> eps, std::size_t groups = 1024);
KlResult compound_kl(const Histogram& h, std::span<const double> eps, std::size_t groups = 1024);

// ---------------------------------------------------------------- window search

struct WindowOptions {
    int l_min = 5;
    int l_max = 60;
    std::size_t groups = 256;
    int threads = 1;
};

struct WindowSearch {
    std::vector<int> per_asset;               // L* per asset
    std::vector<bool> no_structure;           // flat KL profile within noise
    std::vector<std::vector<double>> profile; // KL(L) per asset
    double mean = 0.0;
    std::vector<std::size_t> histogram;       // counts for L = l_min..l_max
    int l_min = 0;
    int l_max = 0;
    std::size_t no_structure_count = 0;
};

/// Twice the sampling standard error of KL(p||q_a) - KL(p||q_b) given `samples` independent draws.
double kl_difference_noise(const Histogram& h, std::span<const double> q_a, std::span<const double> q_b,
                           double samples);

WindowSearch optimal_window(const ReturnsMatrix& r, const WindowOptions& options = {});

/// KL between the histogram of `series` and the Gaussian compound over bg.values.
double recovered_return_check(std::span<const double> series, const BackgroundSeries& bg,
                              std::size_t groups = 1024);

// ---------------------------------------------------------------- fitting

struct FitOptions {
    double beta_lo = 0.1;
    double beta_hi = 100.0;
    int grid_points = 40;
    double beta_tol = 1e-3;
    int threads = 1;
};

struct BetaFit {
    ModelClass model_class = ModelClass::Wishart;
    int levels = 1;
    double beta = 0.0;
    double kl = 0.0;
    double model_mass = 0.0;
    bool support_warning = false;
    int evaluations = 0;
    int skipped = 0;
};

/// Common-beta fit of f_N to the background histogram by log-grid search then golden section.
BetaFit fit_beta(const Histogram& h, int levels, ModelClass model_class, double eps0 = 1.0,
                 const FitOptions& options = {});

struct ScanOptions {
    int max_levels = 7;
    double flattening = 0.10;
    double eps0 = 1.0;
    FitOptions fit;
};

struct Selection {
    ModelClass model_class = ModelClass::Wishart;
    int levels = 1;
    double beta = 0.0;
    double kl = 0.0;
};

/// Smallest N of the best class whose KL cannot be improved by more than the flattening
/// fraction at any larger N.
Selection select_model(const std::vector<BetaFit>& fits, double flattening);

struct FitReport {
    static constexpr int kSchemaVersion = 1;
    std::vector<BetaFit> fits;
    Selection selected;
    double eps0_used = 1.0;
    double flattening = 0.10;
    double noise_floor = 0.0;  // sampling noise of the KL gain from the selected N to the next one
    std::size_t assets = 0;
    std::size_t dates = 0;
    std::size_t series_length = 0;
    std::size_t background_length = 0;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;
    // optimal window summary
    int window_used = 0;
    double window_mean = 0.0;
    int window_min = 0;
    int window_max = 0;
    std::vector<int> window_per_asset;
    std::vector<std::size_t> window_histogram;
    std::size_t no_structure_count = 0;
    double recovered_kl = 0.0;
};

FitReport model_scan(const BackgroundSeries& bg, const ScanOptions& options = {});

struct PipelineOptions {
    ScanOptions scan;
    WindowOptions window;
    std::optional<int> fixed_window;  // skip the L search
    int dt_days = 1;
};

struct PipelineResult {
    FitReport report;
    std::vector<double> aggregated;
    BackgroundSeries background;
    Histogram returns_histogram;
};

PipelineResult run_pipeline(const PriceTable& prices, const PipelineOptions& options = {});

}  // namespace mht
