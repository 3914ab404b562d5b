#include "liqprem/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liqprem/closed_form.hpp"
#include "liqprem/errors.hpp"
#include "liqprem/hmm.hpp"
#include "liqprem/math.hpp"

namespace liqprem {

namespace {

constexpr double kLedgerTol = 1e-12;

Date annual_boundary(int year, int month, int day) {
    return std::chrono::sys_days(std::chrono::year(year) /
                                 std::chrono::month(static_cast<unsigned>(month)) /
                                 std::chrono::day(static_cast<unsigned>(day)));
}

// Calendar-year subtraction for integral windows (Feb 29 clamps to Feb 28);
// day-count approximation otherwise.
Date minus_years(Date d, double years) {
    double integral = 0.0;
    if (std::modf(years, &integral) == 0.0) {
        std::chrono::year_month_day ymd(d);
        auto y = ymd.year() - std::chrono::years(static_cast<int>(integral));
        std::chrono::year_month_day back(y, ymd.month(), ymd.day());
        if (!back.ok()) back = std::chrono::year_month_day(y, ymd.month(), std::chrono::day(28));
        return std::chrono::sys_days(back);
    }
    return d - std::chrono::days(std::llround(years * 365.2425));
}

int year_of(Date d) {
    return static_cast<int>(std::chrono::year_month_day(d).year());
}

struct Marks {
    double investor;
    double manager;
    double reinsurer;
};

void check_ledger(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("ledger invariant violated: ") + what);
}

}  // namespace

void BacktestConfig::validate() const {
    if (!(theta_days >= 0.0)) throw std::invalid_argument("theta_days must be non-negative");
    if (!(c_m > 0.0 && c_m < 1.0)) throw std::invalid_argument("c_m must lie in (0,1)");
    if (!(alpha_m >= 0.0 && alpha_m < 1.0)) throw std::invalid_argument("alpha_m must lie in [0,1)");
    if (!(m_m >= 0.0 && m_m < 1.0)) throw std::invalid_argument("m_m must lie in [0,1)");
    if (!(window_years > 0.0)) throw std::invalid_argument("window_years must be positive");
    if (max_periods < 1) throw std::invalid_argument("max_periods must be at least 1");
    std::chrono::year_month_day probe(std::chrono::year(2001),
                                      std::chrono::month(static_cast<unsigned>(start_month)),
                                      std::chrono::day(static_cast<unsigned>(start_day)));
    if (!probe.ok()) throw std::invalid_argument("period start month/day is not a calendar day");
}

SettleOutput settle_period(const PeriodSettleInput& in) {
    double grow = std::exp(in.r * in.elapsed_years);
    double premium_grown = in.m_r * grow * in.x_i;
    double call = std::max(in.x_end - (1.0 + in.m_m) * in.x_i, 0.0);
    double put_notional = std::max(in.x_i - in.x_end, 0.0);
    double put_barrier = std::max((1.0 - in.c_m) * in.x_i - in.x_end, 0.0);

    SettleOutput out;
    out.perf_fee = in.alpha_m * call;
    out.investor = in.x_end - in.m_m * in.x_i - premium_grown - out.perf_fee + put_notional;
    out.manager = grow * in.side_m + in.m_m * in.x_i + out.perf_fee - put_notional + put_barrier;
    out.reinsurer = grow * in.side_r + premium_grown - put_barrier;

    double total = out.investor + out.manager + out.reinsurer;
    double expected = in.x_end + grow * (in.side_m + in.side_r);
    double scale = std::max({1.0, std::fabs(expected), in.x_i});
    check_ledger(std::fabs(total - expected) <= kLedgerTol * scale, "conservation at settlement");
    check_ledger(put_notional - put_barrier <= in.c_m * in.x_i + kLedgerTol * scale,
                 "manager loss cap");
    return out;
}

BacktestLedger run_backtest(const BacktestConfig& config, const ReturnSeries& returns,
                            const RateSeries& rates) {
    config.validate();
    config.mc.validate();
    const auto& dates = returns.dates;
    const std::size_t n = dates.size();
    if (n == 0) throw DataError("empty return series");

    // Level path anchored at 1 before the first return.
    std::vector<double> cum(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += returns.log_returns[j];
        cum[j] = acc;
    }

    // First period start: earliest annual boundary whose trailing calibration
    // window is fully covered by the series.
    std::size_t start_idx = n;
    Date window_start{};
    for (int y = year_of(dates.front()); y <= year_of(dates.back()) + 1; ++y) {
        Date b = annual_boundary(y, config.start_month, config.start_day);
        auto it = std::lower_bound(dates.begin(), dates.end(), b);
        if (it == dates.end()) break;
        Date cand_window = minus_years(*it, config.window_years);
        if (cand_window >= dates.front()) {
            start_idx = static_cast<std::size_t>(it - dates.begin());
            window_start = cand_window;
            break;
        }
    }
    if (start_idx == n)
        throw DataError("insufficient history: no period start with a full trailing window");

    BacktestLedger ledger;
    double x_i = 1.0;
    double side_m = 0.0;
    double side_r = 0.0;

    for (int period = 0; period < config.max_periods; ++period) {
        const Date start_date = dates[start_idx];
        Date next_boundary = annual_boundary(
            year_of(annual_boundary(year_of(start_date), config.start_month, config.start_day)) + 1,
            config.start_month, config.start_day);
        if (next_boundary <= start_date)
            next_boundary = annual_boundary(year_of(start_date) + 1, config.start_month,
                                            config.start_day);
        auto next_it = std::lower_bound(dates.begin(), dates.end(), next_boundary);
        if (next_it == dates.end()) break;  // tail days cannot fill a year
        const auto next_start_idx = static_cast<std::size_t>(next_it - dates.begin());
        const std::size_t end_idx = next_start_idx - 1;
        if (end_idx <= start_idx) break;

        // Trailing calibration window (window_start, start].
        auto lo_it = std::upper_bound(dates.begin(), dates.end(), window_start);
        const auto lo_idx = static_cast<std::size_t>(lo_it - dates.begin());
        const std::size_t window_len = start_idx - lo_idx + 1;
        std::span<const double> window(returns.log_returns.data() + lo_idx, window_len);

        const double rate = rate_at(rates, start_date);

        ContractTerms terms;
        terms.x0 = 1.0;
        terms.c_m = config.c_m;
        terms.alpha_m = config.alpha_m;
        terms.m_m = config.m_m;
        terms.horizon_years = 1.0;
        terms.theta_days = config.theta_days;

        double m_r = 0.0;
        double sigma_window = 0.0;
        HmmFitResult fit;
        bool have_fit = false;
        if (config.pricer == PricerKind::gbm_closed_form) {
            if (window_len < 2)
                throw DataError("insufficient history: calibration window has " +
                                std::to_string(window_len) + " observations");
            EmpiricalMoments mo = empirical_moments(window);
            sigma_window = mo.sigma_emp;
            if (sigma_window > 0.0) {
                GbmParams params;
                params.r = rate;
                params.sigma = sigma_window;
                m_r = premium_gbm(terms, params, Measure::risk_neutral).m_r;
            }  // a zero-volatility window prices to zero
        } else {
            if (window_len < 50)
                throw DataError("insufficient history: calibration window has " +
                                std::to_string(window_len) + " observations, need 50");
            HmmInit init = init_heuristic(window, config.hmm_window_days,
                                          config.hmm_vol_multiplier);
            fit = baum_welch(window, init);
            have_fit = true;
            sigma_window = empirical_moments(window).sigma_emp;
            SimConfig mc = config.mc;
            mc.measure = Measure::risk_neutral;
            mc.initial_state = fit.decoded_states.back() == 2 ? InitialState::stressed
                                                              : InitialState::normal;
            m_r = estimate_premium_ms(mc, fit.regime, terms, rate).m_r;
        }

        PeriodRecord rec;
        rec.start = start_date;
        rec.x_i = x_i;
        rec.premium = m_r;
        rec.rate = rate;
        rec.sigma_emp = sigma_window;

        // Daily ledger across the period; breaches checked after the start day.
        std::size_t breach_idx = 0;
        bool breached = false;
        std::size_t last_mark = end_idx;
        std::size_t liq_hi = 0;
        double theta_frac = 0.0;
        for (std::size_t j = start_idx + 1; j <= end_idx; ++j) {
            if (std::exp(cum[j] - cum[start_idx]) <= 1.0 - config.c_m) {
                breached = true;
                breach_idx = j;
                break;
            }
        }
        if (breached) {
            double offset = std::floor(config.theta_days);
            theta_frac = config.theta_days - offset;
            liq_hi = breach_idx + static_cast<std::size_t>(offset) + (theta_frac > 0.0 ? 1 : 0);
            if (liq_hi >= n)
                throw DataError("liquidation window exceeds the series by " +
                                std::to_string(liq_hi - (n - 1)) + " trading days");
            last_mark = liq_hi;
        }

        // Forward-filtered state estimates for the ledger rows (MS pricer).
        std::vector<std::array<double, 2>> filt;
        if (have_fit) {
            std::span<const double> through(returns.log_returns.data() + lo_idx,
                                            last_mark - lo_idx + 1);
            filt = forward_filter(through, fit.model);
        }

        for (std::size_t j = start_idx; j <= last_mark; ++j) {
            double t = static_cast<double>(j - start_idx) / 252.0;
            double x = x_i * std::exp(cum[j] - cum[start_idx]);
            PeriodSettleInput day{x_i,  x,          side_m,       side_r, m_r,
                                  rate, t,          config.c_m,   config.alpha_m,
                                  config.m_m};
            SettleOutput marks = settle_period(day);
            double floor_t = (1.0 - config.m_m - m_r * std::exp(rate * t)) * x_i;
            check_ledger(marks.investor >= floor_t - kLedgerTol * std::max(1.0, x_i),
                         "investor period floor");
            DailyRecord row;
            row.date = dates[j];
            row.investor = marks.investor;
            row.manager = marks.manager;
            row.reinsurer = marks.reinsurer;
            row.regime_estimate =
                have_fit ? (filt[j - lo_idx][1] > filt[j - lo_idx][0] ? 2 : 1) : 1;
            row.premium = m_r;
            ledger.days.push_back(row);
        }

        PeriodSettleInput settle_in;
        settle_in.x_i = x_i;
        settle_in.side_m = side_m;
        settle_in.side_r = side_r;
        settle_in.m_r = m_r;
        settle_in.r = rate;
        settle_in.c_m = config.c_m;
        settle_in.alpha_m = config.alpha_m;
        settle_in.m_m = config.m_m;
        if (breached) {
            double offset = std::floor(config.theta_days);
            double log_liq;
            if (theta_frac > 0.0) {
                std::size_t g = breach_idx + static_cast<std::size_t>(offset);
                // Fractional theta lands between trading days: log-linear value.
                log_liq = (1.0 - theta_frac) * (cum[g] - cum[start_idx]) +
                          theta_frac * (cum[g + 1] - cum[start_idx]);
            } else {
                log_liq = cum[liq_hi] - cum[start_idx];
            }
            settle_in.x_end = x_i * std::exp(log_liq);
            settle_in.elapsed_years =
                (static_cast<double>(breach_idx - start_idx) + config.theta_days) / 252.0;
            rec.breached = true;
            rec.breach_date = dates[breach_idx];
            rec.liquidation_date = dates[liq_hi];
            rec.end = dates[liq_hi];
        } else {
            settle_in.x_end = x_i * std::exp(cum[end_idx] - cum[start_idx]);
            settle_in.elapsed_years = 1.0;  // contractual year
            rec.end = dates[end_idx];
        }
        SettleOutput out = settle_period(settle_in);
        rec.perf_fee = out.perf_fee;
        rec.investor_end = out.investor;
        rec.manager_end = out.manager;
        rec.reinsurer_end = out.reinsurer;
        ledger.periods.push_back(rec);

        ledger.summary.investor = out.investor;
        ledger.summary.manager = out.manager;
        ledger.summary.reinsurer = out.reinsurer;
        ledger.summary.n_periods = period + 1;
        if (breached) {
            ledger.summary.breached = true;
            break;  // liquidation ends the engagement
        }

        x_i = out.investor;
        side_m = out.manager;
        side_r = out.reinsurer;
        start_idx = next_start_idx;
        window_start = minus_years(dates[start_idx], config.window_years);
        if (window_start < dates.front()) break;  // should not happen; defensive
    }

    if (ledger.periods.empty())
        throw DataError("insufficient history: no full period fits the series");
    return ledger;
}

}  // namespace liqprem
