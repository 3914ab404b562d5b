#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liqprem {

using Date = std::chrono::sys_days;

// Strict YYYY-MM-DD. Throws ParseError on anything else.
Date parse_iso_date(std::string_view s);
std::string format_iso_date(Date d);

enum class ReturnFormat { levels, simple_returns, log_returns };

// Daily log-returns on the series' own trading calendar; a return belongs to
// the date it realized on.
struct ReturnSeries {
    std::vector<Date> dates;          // strictly increasing
    std::vector<double> log_returns;  // same length as dates
    std::string source_id;
};

struct RateSeries {
    std::vector<Date> dates;                // strictly increasing
    std::vector<double> annual_rates;       // continuously compounded
};

// CSV with header `date,value`. levels are converted via ln(v_t/v_{t-1})
// (the first row anchors the level and yields no return), simple returns via
// ln(1+r), log returns pass through. Errors name the offending data row.
ReturnSeries load_returns(const std::string& path, ReturnFormat format);

RateSeries load_rates(const std::string& path);

// Buy-and-hold portfolio over the inner join of the series' calendars: each
// index is bought once at equal weight just before the first common date and
// never rebalanced, so weights drift with performance.
ReturnSeries equal_weight_buy_and_hold(std::span<const ReturnSeries> series);

// Last observation carried forward. Requires date >= first observation.
double rate_at(const RateSeries& rates, Date date);

}  // namespace liqprem
