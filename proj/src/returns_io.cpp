#include "liqprem/returns_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "liqprem/errors.hpp"

namespace liqprem {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return s;
}

[[noreturn]] void fail_row(const std::string& path, std::size_t data_row, const std::string& what) {
    throw ParseError(path + ": row " + std::to_string(data_row) + ": " + what);
}

double parse_value(std::string_view s, const std::string& path, std::size_t data_row) {
    s = trim(s);
    if (s.empty()) fail_row(path, data_row, "missing value");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail_row(path, data_row, "non-numeric value '" + std::string(s) + "'");
    if (!std::isfinite(v)) fail_row(path, data_row, "non-finite value");
    return v;
}

// Shared scaffold for the two CSV shapes: header check, date parsing,
// monotonicity. Returns (dates, values).
std::pair<std::vector<Date>, std::vector<double>> load_dated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "date,value")
        throw ParseError(path + ": expected header 'date,value'");

    std::vector<Date> dates;
    std::vector<double> values;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        std::string_view row = trim(line);
        if (row.empty()) continue;
        ++data_row;
        auto comma = row.find(',');
        if (comma == std::string_view::npos) fail_row(path, data_row, "expected 'date,value'");
        Date d;
        try {
            d = parse_iso_date(trim(row.substr(0, comma)));
        } catch (const ParseError& e) {
            fail_row(path, data_row, e.what());
        }
        if (!dates.empty() && d <= dates.back())
            fail_row(path, data_row, "dates must be strictly increasing");
        dates.push_back(d);
        values.push_back(parse_value(row.substr(comma + 1), path, data_row));
    }
    return {std::move(dates), std::move(values)};
}

}  // namespace

Date parse_iso_date(std::string_view s) {
    auto bad = [&] { throw ParseError("malformed date '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') bad();
    int nums[3] = {0, 0, 0};
    const std::pair<int, int> spans[3] = {{0, 4}, {5, 2}, {8, 2}};
    for (int i = 0; i < 3; ++i) {
        auto part = s.substr(spans[i].first, spans[i].second);
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), nums[i]);
        if (ec != std::errc() || ptr != part.data() + part.size()) bad();
    }
    std::chrono::year_month_day ymd{std::chrono::year(nums[0]),
                                    std::chrono::month(static_cast<unsigned>(nums[1])),
                                    std::chrono::day(static_cast<unsigned>(nums[2]))};
    if (!ymd.ok()) bad();
    return std::chrono::sys_days(ymd);
}

std::string format_iso_date(Date d) {
    std::chrono::year_month_day ymd(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

ReturnSeries load_returns(const std::string& path, ReturnFormat format) {
    auto [dates, values] = load_dated_csv(path);
    ReturnSeries out;
    out.source_id = path;
    switch (format) {
        case ReturnFormat::levels: {
            if (values.size() < 2)
                throw ParseError(path + ": need at least 2 level rows");
            for (std::size_t i = 0; i < values.size(); ++i)
                if (!(values[i] > 0.0)) fail_row(path, i + 1, "level must be positive");
            out.dates.assign(dates.begin() + 1, dates.end());
            out.log_returns.reserve(values.size() - 1);
            for (std::size_t i = 1; i < values.size(); ++i)
                out.log_returns.push_back(std::log(values[i] / values[i - 1]));
            break;
        }
        case ReturnFormat::simple_returns: {
            for (std::size_t i = 0; i < values.size(); ++i)
                if (!(values[i] > -1.0)) fail_row(path, i + 1, "simple return must exceed -1");
            out.dates = std::move(dates);
            out.log_returns.reserve(values.size());
            for (double v : values) out.log_returns.push_back(std::log1p(v));
            break;
        }
        case ReturnFormat::log_returns:
            out.dates = std::move(dates);
            out.log_returns = std::move(values);
            break;
    }
    return out;
}

RateSeries load_rates(const std::string& path) {
    auto [dates, values] = load_dated_csv(path);
    if (dates.empty()) throw ParseError(path + ": no rate rows");
    return {std::move(dates), std::move(values)};
}

ReturnSeries equal_weight_buy_and_hold(std::span<const ReturnSeries> series) {
    if (series.size() < 2)
        throw std::invalid_argument("portfolio needs at least 2 series");

    // Inner join of the calendars.
    std::vector<Date> common = series[0].dates;
    for (std::size_t i = 1; i < series.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), series[i].dates.begin(),
                              series[i].dates.end(), std::back_inserter(next));
        common.swap(next);
    }
    if (common.empty()) throw DataError("portfolio alignment: no common dates");

    // Per-series level on the common grid, anchored at 1 just before the
    // first common date. Returns falling between common dates compound into
    // the next common date's level.
    const std::size_t n = series.size();
    const std::size_t m = common.size();
    std::vector<std::vector<double>> levels(n, std::vector<double>(m));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = series[i];
        double cum = 0.0;
        std::size_t k = 0;
        for (std::size_t j = 0; j < m; ++j) {
            while (k < s.dates.size() && s.dates[k] <= common[j])
                cum += s.log_returns[k++];
            levels[i][j] = std::exp(cum);
        }
    }

    ReturnSeries out;
    out.source_id = "equal_weight_portfolio";
    out.dates = common;
    out.log_returns.resize(m);
    double prev = 1.0;  // each series at level 1, equal weights
    for (std::size_t j = 0; j < m; ++j) {
        double level = 0.0;
        for (std::size_t i = 0; i < n; ++i) level += levels[i][j];
        level /= static_cast<double>(n);
        out.log_returns[j] = std::log(level / prev);
        prev = level;
    }
    return out;
}

double rate_at(const RateSeries& rates, Date date) {
    if (rates.dates.empty()) throw DataError("rate lookup on empty series");
    if (date < rates.dates.front())
        throw DataError("rate lookup before first observation " +
                        format_iso_date(rates.dates.front()));
    auto it = std::upper_bound(rates.dates.begin(), rates.dates.end(), date);
    return rates.annual_rates[static_cast<std::size_t>(it - rates.dates.begin()) - 1];
}

}  // namespace liqprem
