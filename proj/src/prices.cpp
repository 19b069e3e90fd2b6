#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mht/error.hpp"
#include "mht/pipeline.hpp"

namespace mht {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

PriceTable parse_prices(std::istream& in, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::map<std::string, std::map<std::string, double>> by_ticker;
    std::map<std::string, bool> all_dates;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (!header_seen) {
            std::string first = fields.empty() ? std::string() : fields[0];
            if (first.rfind("\xEF\xBB\xBF", 0) == 0) first = first.substr(3);
            if (fields.size() != 3 || first != "date" || fields[1] != "ticker" || fields[2] != "close")
                throw DataError(line_error(line_no, "expected header 'date,ticker,close'"));
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) throw DataError(line_error(line_no, "expected 3 fields"));
        const std::string& date = fields[0];
        const std::string& ticker = fields[1];
        if (!is_iso_date(date)) throw DataError(line_error(line_no, "invalid ISO date '" + date + "'"));
        if (ticker.empty()) throw DataError(line_error(line_no, "empty ticker"));
        double close = 0.0;
        const std::string& text = fields[2];
        const auto res = std::from_chars(text.data(), text.data() + text.size(), close);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw DataError(line_error(line_no, "unparseable close '" + text + "'"));
        if (!(close > 0.0) || !std::isfinite(close))
            throw DataError(line_error(line_no, "close must be positive and finite"));
        auto& series = by_ticker[ticker];
        if (!series.emplace(date, close).second)
            throw DataError(line_error(line_no, "duplicate row for " + ticker + " on " + date));
        all_dates[date] = true;
    }
    if (!header_seen) throw DataError("price file is empty");

    PriceTable table;
    for (const auto& [date, unused] : all_dates) table.dates.push_back(date);
    std::vector<const std::map<std::string, double>*> kept;
    for (const auto& [ticker, series] : by_ticker) {
        if (series.size() == all_dates.size()) {
            table.tickers.push_back(ticker);
            kept.push_back(&series);
        } else {
            table.dropped.push_back(ticker);
        }
    }
    if (!table.dropped.empty()) {
        std::string msg = "dropped assets with missing dates:";
        for (const auto& t : table.dropped) msg += " " + t;
        table.warnings.push_back(msg);
    }
    if (table.tickers.size() < options.min_assets || table.dates.size() < options.min_dates)
        throw DataError("insufficient data after cleaning: " + std::to_string(table.tickers.size()) + " assets, " +
                        std::to_string(table.dates.size()) + " dates");

    table.close.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(table.dates.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        Eigen::Index j = 0;
        for (const auto& [date, close] : *kept[i]) table.close(static_cast<Eigen::Index>(i), j++) = close;
    }
    return table;
}

PriceTable load_prices(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open price file '" + path + "'");
    return parse_prices(in, options);
}

void write_prices(std::ostream& out, const PriceTable& table) {
    out << "date,ticker,close\n";
    char buf[64];
    for (std::size_t j = 0; j < table.dates.size(); ++j) {
        for (std::size_t i = 0; i < table.tickers.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          table.close(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out << table.dates[j] << ',' << table.tickers[i] << ',' << buf << '\n';
        }
    }
}

}  // namespace mht
