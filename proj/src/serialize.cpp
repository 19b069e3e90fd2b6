#include "mht/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "mht/error.hpp"

namespace mht {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// JSON has no infinities; they are written as null.
json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double read_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

void write_density_csv(std::ostream& out, const DensityCurve& curve) {
    out << "x,density\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out << format_double(curve.grid[i]) << ',' << format_double(curve.values[i]) << '\n';
}

json density_to_json(const DensityCurve& curve) {
    json j;
    j["grid"] = curve.grid;
    json values = json::array();
    json logs = json::array();
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        values.push_back(number(curve.values[i]));
        logs.push_back(number(curve.log_values[i]));
    }
    j["values"] = values;
    j["log_values"] = logs;
    return j;
}

void write_cov_csv(std::ostream& out, const CovMatrix& m) {
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

json cov_to_json(const CovMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return {{"dim", m.dim()}, {"entries", rows}};
}

CovMatrix cov_from_json(const json& j) {
    const int p = j.at("dim").get<int>();
    const json& rows = j.at("entries");
    if (p < 1 || rows.size() != static_cast<std::size_t>(p)) throw DataError("cov_from_json: dimension mismatch");
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(p))
            throw DataError("cov_from_json: dimension mismatch");
        for (int k = 0; k < p; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    return CovMatrix(m);
}

void write_trajectory_csv(std::ostream& out, const SdeTrajectory& traj) {
    out << 't';
    for (std::size_t i = 0; i < traj.levels.size(); ++i) out << ",eps" << (i + 1);
    out << '\n';
    for (std::size_t k = 0; k < traj.time.size(); ++k) {
        out << format_double(traj.time[k]);
        for (const auto& level : traj.levels) out << ',' << format_double(level[k]);
        out << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const Histogram& h, std::span<const double> model_masses) {
    if (model_masses.size() != h.bins()) throw ParameterError("write_comparison_csv: length mismatch");
    const bool log_bins = h.edges.front() > 0.0 && h.bins() > 1 &&
                          std::abs((h.edges[2] - h.edges[1]) - (h.edges[1] - h.edges[0])) >
                              1e-9 * (h.edges[1] - h.edges[0]);
    out << "x,empirical,model\n";
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double x = log_bins ? std::sqrt(h.edges[i] * h.edges[i + 1]) : 0.5 * (h.edges[i] + h.edges[i + 1]);
        const double w = h.width(i);
        out << format_double(x) << ',' << format_double(h.mass[i] / w) << ',' << format_double(model_masses[i] / w)
            << '\n';
    }
}

json report_to_json(const FitReport& r) {
    json fits = json::array();
    for (const auto& f : r.fits) {
        fits.push_back({{"model_class", to_string(f.model_class)},
                        {"N", f.levels},
                        {"beta_star", number(f.beta)},
                        {"kl", number(f.kl)},
                        {"model_mass", number(f.model_mass)},
                        {"support_warning", f.support_warning},
                        {"evaluations", f.evaluations},
                        {"skipped", f.skipped}});
    }
    json j;
    j["schema_version"] = FitReport::kSchemaVersion;
    j["fits"] = fits;
    j["selected"] = {{"model_class", to_string(r.selected.model_class)},
                     {"N", r.selected.levels},
                     {"beta_star", number(r.selected.beta)},
                     {"kl", number(r.selected.kl)}};
    j["eps0_used"] = r.eps0_used;
    j["flattening"] = r.flattening;
    j["noise_floor"] = r.noise_floor;
    j["assets"] = r.assets;
    j["dates"] = r.dates;
    j["series_length"] = r.series_length;
    j["background_length"] = r.background_length;
    j["dropped"] = r.dropped;
    j["warnings"] = r.warnings;
    j["optimal_window"] = {{"window_used", r.window_used},
                           {"mean", r.window_mean},
                           {"l_min", r.window_min},
                           {"l_max", r.window_max},
                           {"per_asset", r.window_per_asset},
                           {"histogram", r.window_histogram},
                           {"no_structure_count", r.no_structure_count}};
    j["recovered_kl"] = number(r.recovered_kl);
    return j;
}

FitReport report_from_json(const json& j) {
    try {
        if (j.at("schema_version").get<int>() != FitReport::kSchemaVersion)
            throw DataError("unsupported report schema version");
        FitReport r;
        for (const auto& f : j.at("fits")) {
            BetaFit b;
            b.model_class = parse_model_class(f.at("model_class").get<std::string>());
            b.levels = f.at("N").get<int>();
            b.beta = read_number(f.at("beta_star"));
            b.kl = read_number(f.at("kl"));
            b.model_mass = read_number(f.at("model_mass"));
            b.support_warning = f.at("support_warning").get<bool>();
            b.evaluations = f.at("evaluations").get<int>();
            b.skipped = f.at("skipped").get<int>();
            r.fits.push_back(b);
        }
        const json& s = j.at("selected");
        r.selected.model_class = parse_model_class(s.at("model_class").get<std::string>());
        r.selected.levels = s.at("N").get<int>();
        r.selected.beta = read_number(s.at("beta_star"));
        r.selected.kl = read_number(s.at("kl"));
        r.eps0_used = j.at("eps0_used").get<double>();
        r.flattening = j.at("flattening").get<double>();
        r.noise_floor = j.at("noise_floor").get<double>();
        r.assets = j.at("assets").get<std::size_t>();
        r.dates = j.at("dates").get<std::size_t>();
        r.series_length = j.at("series_length").get<std::size_t>();
        r.background_length = j.at("background_length").get<std::size_t>();
        r.dropped = j.at("dropped").get<std::vector<std::string>>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        const json& w = j.at("optimal_window");
        r.window_used = w.at("window_used").get<int>();
        r.window_mean = w.at("mean").get<double>();
        r.window_min = w.at("l_min").get<int>();
        r.window_max = w.at("l_max").get<int>();
        r.window_per_asset = w.at("per_asset").get<std::vector<int>>();
        r.window_histogram = w.at("histogram").get<std::vector<std::size_t>>();
        r.no_structure_count = w.at("no_structure_count").get<std::size_t>();
        r.recovered_kl = read_number(j.at("recovered_kl"));
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    } catch (const ParameterError& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

std::string format_report(const FitReport& r) {
    std::ostringstream out;
    char buf[160];
    out << "Model scan (" << r.assets << " assets, " << r.dates << " dates, aggregated length " << r.series_length
        << ")\n";
    std::snprintf(buf, sizeof buf, "Window L = %d (mean optimal L %.2f over [%d, %d])\n", r.window_used,
                  r.window_mean, r.window_min, r.window_max);
    out << buf;
    int max_n = 0;
    for (const auto& f : r.fits) max_n = std::max(max_n, f.levels);
    out << "\n  N | inverse-wishart beta      KL | wishart beta      KL\n";
    out << "----+--------------------------------+---------------------------\n";
    for (int n = 1; n <= max_n; ++n) {
        const BetaFit* inv = nullptr;
        const BetaFit* wis = nullptr;
        for (const auto& f : r.fits) {
            if (f.levels != n) continue;
            (f.model_class == ModelClass::Wishart ? wis : inv) = &f;
        }
        std::snprintf(buf, sizeof buf, "%3d | %20.2f %8.4f | %12.2f %8.4f\n", n, inv ? inv->beta : NAN,
                      inv ? inv->kl : NAN, wis ? wis->beta : NAN, wis ? wis->kl : NAN);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "\nSelected: %s, N = %d, beta = %.3f, KL = %.4f\n",
                  to_string(r.selected.model_class).c_str(), r.selected.levels, r.selected.beta, r.selected.kl);
    out << buf;
    std::snprintf(buf, sizeof buf, "Recovered-return KL: %.4f\n", r.recovered_kl);
    out << buf;
    for (const auto& w : r.warnings) out << "warning: " << w << '\n';
    return out.str();
}

}  // namespace mht
