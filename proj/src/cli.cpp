#include "mht/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mht/distributions.hpp"
#include "mht/error.hpp"
#include "mht/matrix_ensembles.hpp"
#include "mht/parallel.hpp"
#include "mht/pipeline.hpp"
#include "mht/sde.hpp"
#include "mht/serialize.hpp"

namespace mht {
namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct Common {
    std::optional<int> threads;
    int resolved_threads() const { return threads ? *threads : default_threads(); }
};

struct SimulateArgs {
    std::string mode = "matrix";
    std::string model_class = "wishart";
    int levels = 2;
    std::vector<double> beta{6.0};
    double eps0 = 1e-4;
    int assets = 50;
    std::size_t steps = 4000;
    std::vector<std::size_t> blocks;
    std::string start_date = "2000-01-03";
    double gamma1 = 0.01;
    double spacing = 10.0;
    double dt = 0.0;
    std::size_t stride = 1;
    std::uint64_t seed = kDefaultSeed;
    std::string output = "-";
};

struct EvalArgs {
    std::string model_class = "wishart";
    int levels = 1;
    std::vector<double> beta{1.0};
    double eps0 = 1.0;
    std::string grid = "-10:10:201";
    std::string kind = "signal";
    std::string format = "csv";
    std::string output = "-";
};

struct FitArgs {
    std::string input;
    std::string output = "-";
    std::string curves;
    int max_levels = 7;
    double eps0 = 1.0;
    std::optional<int> window;
    int l_min = 5;
    int l_max = 60;
    double flattening = 0.10;
    std::size_t min_dates = 10;
    std::uint64_t seed = kDefaultSeed;
};

struct ReportArgs {
    std::string input;
    std::string format = "table";
    std::string output = "-";
};

std::vector<double> expand_beta(const std::vector<double>& beta, int levels) {
    if (levels < 1) throw ParameterError("--levels must be positive");
    if (beta.size() == 1) return std::vector<double>(static_cast<std::size_t>(levels), beta[0]);
    if (beta.size() != static_cast<std::size_t>(levels))
        throw ParameterError("--beta takes one value or one per level");
    return beta;
}

// Output is assembled in memory and written only once everything succeeded.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open output file '" + path + "'");
    f << content;
    if (!f) throw DataError("failed writing output file '" + path + "'");
}

// Days since 1970-01-01 for a proleptic Gregorian date, and back.
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const long y = static_cast<long>(yoe) + era * 400 + (m <= 2);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", y, m, d);
    return buf;
}

std::vector<std::string> business_days(const std::string& start, std::size_t count) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (start.size() != 10 || std::sscanf(start.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3 || m < 1 || m > 12 ||
        d < 1 || d > 31)
        throw ParameterError("--start-date must be an ISO date");
    long day = days_from_civil(y, m, d);
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const long weekday = ((day % 7) + 11) % 7;  // 0 = Monday
        if (weekday < 5) out.push_back(civil_from_days(day));
        ++day;
    }
    return out;
}

std::string simulate(const SimulateArgs& a) {
    const ModelClass cls = parse_model_class(a.model_class);
    const std::vector<double> beta = expand_beta(a.beta, a.levels);
    std::ostringstream out;
    if (a.mode == "sde") {
        SdeParams params = SdeParams::geometric(beta, a.gamma1, cls == ModelClass::Wishart ? 0.5 : 1.0, a.eps0,
                                                a.spacing);
        params.dt = a.dt;
        params.steps = a.steps;
        params.record_stride = a.stride;
        write_trajectory_csv(out, simulate_hierarchy(params, a.seed));
        return out.str();
    }
    if (a.mode != "matrix") throw ParameterError("--mode must be 'matrix' or 'sde'");
    if (a.assets < 1) throw ParameterError("--assets must be positive");
    if (!(a.eps0 > 0.0)) throw ParameterError("--eps0 must be positive");

    MarketSpec spec;
    spec.chain.model_class = cls;
    spec.chain.beta = beta;
    spec.chain.sigma0 = CovMatrix::identity(a.assets, a.eps0);
    spec.steps = a.steps;
    spec.block_lengths = a.blocks.empty() ? default_block_lengths(a.levels) : a.blocks;
    spec.validate();
    const Eigen::MatrixXd r = simulate_market(spec, a.seed);

    PriceTable table;
    table.dates = business_days(a.start_date, a.steps + 1);
    char name[16];
    for (int i = 0; i < a.assets; ++i) {
        std::snprintf(name, sizeof name, "S%03d", i + 1);
        table.tickers.emplace_back(name);
    }
    table.close.resize(a.assets, static_cast<Eigen::Index>(a.steps + 1));
    for (int i = 0; i < a.assets; ++i) {
        double logp = std::log(100.0);
        table.close(i, 0) = 100.0;
        for (Eigen::Index t = 0; t < r.cols(); ++t) {
            logp += r(i, t);
            table.close(i, t + 1) = std::exp(logp);
        }
    }
    write_prices(out, table);
    return out.str();
}

std::string evaluate(const EvalArgs& a) {
    const HModel model(parse_model_class(a.model_class), expand_beta(a.beta, a.levels), a.eps0);
    const std::vector<double> grid = parse_grid(a.grid);
    if (a.format != "csv" && a.format != "json") throw ParameterError("--format must be 'csv' or 'json'");
    DensityCurve curve;
    if (a.kind == "signal") {
        curve = signal_curve(model, grid);
    } else if (a.kind == "background") {
        for (double x : grid)
            if (!(x > 0.0)) throw ParameterError("background density grid must be positive");
        curve = background_curve(model, grid);
    } else {
        throw ParameterError("--kind must be 'signal' or 'background'");
    }
    std::ostringstream out;
    if (a.format == "csv")
        write_density_csv(out, curve);
    else
        out << density_to_json(curve).dump(2) << '\n';
    return out.str();
}

struct FitOutputs {
    std::string report;
    std::string background_csv;
    std::string returns_csv;
};

FitOutputs fit(const FitArgs& a, int threads) {
    if (a.max_levels < 1) throw ParameterError("--max-levels must be positive");
    if (a.l_min < 2 || a.l_max < a.l_min) throw ParameterError("--l-min/--l-max must satisfy 2 <= l-min <= l-max");
    if (a.window && *a.window < 2) throw ParameterError("--window must be at least 2");
    if (!(a.eps0 > 0.0)) throw ParameterError("--eps0 must be positive");
    if (!(a.flattening >= 0.0)) throw ParameterError("--flattening must be non-negative");

    LoadOptions lo;
    lo.min_dates = a.min_dates;
    const PriceTable prices = load_prices(a.input, lo);

    PipelineOptions po;
    po.scan.max_levels = a.max_levels;
    po.scan.eps0 = a.eps0;
    po.scan.flattening = a.flattening;
    po.scan.fit.threads = threads;
    po.window.l_min = a.l_min;
    po.window.l_max = a.l_max;
    po.fixed_window = a.window;
    const PipelineResult res = run_pipeline(prices, po);

    FitOutputs out;
    out.report = report_to_json(res.report).dump(2) + "\n";
    if (!a.curves.empty()) {
        const auto& sel = res.report.selected;
        const HModel model = HModel::common(sel.model_class, sel.levels, sel.beta, a.eps0);
        std::ostringstream bg;
        write_comparison_csv(bg, res.background.histogram,
                             bin_masses(res.background.histogram, [&](double e) { return background_density(model, e); }));
        out.background_csv = bg.str();
        std::ostringstream rt;
        write_comparison_csv(rt, res.returns_histogram,
                             bin_masses(res.returns_histogram, [&](double x) { return signal_density(model, x); }));
        out.returns_csv = rt.str();
    }
    return out;
}

std::string report(const ReportArgs& a) {
    if (a.format != "table" && a.format != "json") throw ParameterError("--format must be 'table' or 'json'");
    std::ifstream in(a.input);
    if (!in) throw DataError("cannot open report '" + a.input + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
    const FitReport r = report_from_json(j);
    return a.format == "table" ? format_report(r) : report_to_json(r).dump(2) + "\n";
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
    if (c2 == std::string::npos || spec.find(':', c2 + 1) != std::string::npos)
        throw ParameterError("grid must be lo:hi:count");
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
    try {
        std::size_t pos = 0;
        const std::string slo = spec.substr(0, c1);
        const std::string shi = spec.substr(c1 + 1, c2 - c1 - 1);
        const std::string scount = spec.substr(c2 + 1);
        lo = std::stod(slo, &pos);
        if (pos != slo.size()) throw ParameterError("grid: bad lower bound");
        hi = std::stod(shi, &pos);
        if (pos != shi.size()) throw ParameterError("grid: bad upper bound");
        count = std::stol(scount, &pos);
        if (pos != scount.size()) throw ParameterError("grid: bad count");
    } catch (const std::logic_error&) {
        throw ParameterError("grid must be lo:hi:count");
    }
    if (count < 1 || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw ParameterError("grid needs count >= 1 and lo <= hi");
    if (count > 10000000) throw ParameterError("grid count too large");
    std::vector<double> g(static_cast<std::size_t>(count));
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    for (long i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = hi;
    return g;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical heavy-tail models: densities, simulation and fitting", "mht"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--threads", common.threads, "Worker threads (default: MHT_THREADS or hardware)")
        ->check(CLI::Range(1, 1024));

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Synthetic price data (matrix) or SDE trajectories (sde) as CSV");
    s->add_option("--mode", sim.mode, "matrix | sde")->capture_default_str();
    s->add_option("--class", sim.model_class, "wishart | inverse-wishart")->capture_default_str();
    s->add_option("--levels", sim.levels, "Number of hierarchy levels N")->capture_default_str();
    s->add_option("--beta", sim.beta, "Shape parameter(s), one or N values")->delimiter(',');
    s->add_option("--eps0", sim.eps0, "Equilibrium variance")->capture_default_str();
    s->add_option("--assets", sim.assets, "Number of assets (matrix mode)")->capture_default_str();
    s->add_option("--steps", sim.steps, "Number of return steps / recorded SDE steps")->capture_default_str();
    s->add_option("--blocks", sim.blocks, "Redraw period per level, slowest first (matrix mode)")->delimiter(',');
    s->add_option("--start-date", sim.start_date, "First ISO date (matrix mode)")->capture_default_str();
    s->add_option("--gamma1", sim.gamma1, "Slowest relaxation rate (sde mode)")->capture_default_str();
    s->add_option("--spacing", sim.spacing, "Rate ratio between levels (sde mode)")->capture_default_str();
    s->add_option("--dt", sim.dt, "Integration step, 0 = automatic (sde mode)")->capture_default_str();
    s->add_option("--stride", sim.stride, "Record every k-th step (sde mode)")->capture_default_str();
    s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    s->add_option("--output,-o", sim.output, "Output file, '-' for stdout")->capture_default_str();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Tabulate a model density as CSV or JSON");
    e->add_option("--class", ev.model_class, "wishart | inverse-wishart")->capture_default_str();
    e->add_option("--levels", ev.levels, "Number of hierarchy levels N")->capture_default_str();
    e->add_option("--beta", ev.beta, "Shape parameter(s), one or N values")->delimiter(',');
    e->add_option("--eps0", ev.eps0, "Equilibrium variance")->capture_default_str();
    e->add_option("--grid", ev.grid, "Grid lo:hi:count")->capture_default_str();
    e->add_option("--kind", ev.kind, "signal | background")->capture_default_str();
    e->add_option("--format", ev.format, "csv | json")->capture_default_str();
    e->add_option("--output,-o", ev.output, "Output file, '-' for stdout")->capture_default_str();

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Run the full pipeline on a price CSV and write a JSON report");
    f->add_option("--input,-i", fa.input, "Long-format CSV date,ticker,close")->required();
    f->add_option("--output,-o", fa.output, "Report file, '-' for stdout")->capture_default_str();
    f->add_option("--curves", fa.curves, "Prefix for <prefix>_background.csv and <prefix>_returns.csv");
    f->add_option("--max-levels", fa.max_levels, "Largest N scanned")->capture_default_str();
    f->add_option("--eps0", fa.eps0, "Equilibrium variance used in the fits")->capture_default_str();
    f->add_option("--window", fa.window, "Fixed window L (skips the optimal-L search)");
    f->add_option("--l-min", fa.l_min, "Smallest window searched")->capture_default_str();
    f->add_option("--l-max", fa.l_max, "Largest window searched")->capture_default_str();
    f->add_option("--flattening", fa.flattening, "Relative KL gain below which larger N is not selected")
        ->capture_default_str();
    f->add_option("--min-dates", fa.min_dates, "Minimum number of dates after cleaning")->capture_default_str();
    f->add_option("--seed", fa.seed, "Random seed (the pipeline itself is deterministic)")->capture_default_str();

    ReportArgs ra;
    auto* r = app.add_subcommand("report", "Render a JSON report as a table");
    r->add_option("--input,-i", ra.input, "Report JSON")->required();
    r->add_option("--format", ra.format, "table | json")->capture_default_str();
    r->add_option("--output,-o", ra.output, "Output file, '-' for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s) {
            emit(sim.output, simulate(sim), out);
        } else if (*e) {
            emit(ev.output, evaluate(ev), out);
        } else if (*f) {
            const FitOutputs o = fit(fa, common.resolved_threads());
            emit(fa.output, o.report, out);
            if (!fa.curves.empty()) {
                emit(fa.curves + "_background.csv", o.background_csv, out);
                emit(fa.curves + "_returns.csv", o.returns_csv, out);
            }
        } else if (*r) {
            emit(ra.output, report(ra), out);
        }
    } catch (const ParameterError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const DataError& ex) {
        err << "data error: " << ex.what() << '\n';
        return kExitData;
    } catch (const NumericalError& ex) {
        err << "numerical error: " << ex.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mht");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mht
