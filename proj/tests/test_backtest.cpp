#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "liqprem/backtest.hpp"
#include "liqprem/closed_form.hpp"
#include "liqprem/contract.hpp"
#include "liqprem/errors.hpp"
#include "support/fixtures.hpp"

using namespace liqprem;

namespace {

ReturnSeries series_from(std::vector<Date> dates, std::vector<double> rets) {
    ReturnSeries rs;
    rs.dates = std::move(dates);
    rs.log_returns = std::move(rets);
    rs.source_id = "fixture";
    return rs;
}

RateSeries flat_rate(Date d, double r) {
    RateSeries rs;
    rs.dates = {d};
    rs.annual_rates = {r};
    return rs;
}

const DailyRecord* find_day(const BacktestLedger& ledger, Date d) {
    auto it = std::find_if(ledger.days.begin(), ledger.days.end(),
                           [d](const DailyRecord& row) { return row.date == d; });
    return it == ledger.days.end() ? nullptr : &*it;
}

std::size_t index_of(const std::vector<Date>& dates, Date d) {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    REQUIRE(it != dates.end());
    REQUIRE(*it == d);
    return static_cast<std::size_t>(it - dates.begin());
}

}  // namespace

TEST_CASE("settlement with the fund back at its start level returns the notional and grown sides") {
    PeriodSettleInput in;
    in.x_i = 1.25;
    in.x_end = 1.25;
    in.side_m = 0.04;
    in.side_r = 0.015;
    in.m_r = 0.0;
    in.r = 0.05;
    in.elapsed_years = 1.0;
    in.c_m = 0.1;
    in.alpha_m = 0.0;
    in.m_m = 0.0;

    SettleOutput out = settle_period(in);
    double grow = std::exp(0.05);
    CHECK(out.investor == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(out.manager == doctest::Approx(grow * 0.04).epsilon(1e-14));
    CHECK(out.reinsurer == doctest::Approx(grow * 0.015).epsilon(1e-14));
    CHECK(out.perf_fee == 0.0);
}

TEST_CASE("settlement with zero side accounts matches the terminal party split") {
    const double x_ends[] = {0.5, 0.8, 0.88, 0.9, 0.92, 1.0, 1.05, 1.2, 1.6};
    struct Cfg {
        double m_m, alpha, t;
    };
    const Cfg cfgs[] = {{0.0, 0.5, 1.0}, {0.02, 0.35, 0.3}};
    for (const Cfg& cfg : cfgs) {
        ContractTerms terms;
        terms.x0 = 1.0;
        terms.c_m = 0.1;
        terms.alpha_m = cfg.alpha;
        terms.m_m = cfg.m_m;
        for (double x : x_ends) {
            PeriodSettleInput in;
            in.x_i = 1.0;
            in.x_end = x;
            in.side_m = 0.0;
            in.side_r = 0.0;
            in.m_r = 0.0015;
            in.r = 0.02;
            in.elapsed_years = cfg.t;
            in.c_m = terms.c_m;
            in.alpha_m = cfg.alpha;
            in.m_m = cfg.m_m;
            SettleOutput out = settle_period(in);
            PartyValues pv = party_payoffs(terms, x, 0.0015, 0.02, cfg.t);
            CHECK(out.investor == doctest::Approx(pv.investor).epsilon(1e-12));
            CHECK(out.manager == doctest::Approx(pv.manager).epsilon(1e-12));
            CHECK(out.reinsurer == doctest::Approx(pv.reinsurer).epsilon(1e-12));
            CHECK(out.reinsurer ==
                  doctest::Approx(reinsurer_payoff(terms, x, cfg.t, 0.0015, 0.02)).epsilon(1e-12));
        }
    }
}

TEST_CASE("a breach settlement pins the manager loss to the deposit and charges the shortfall") {
    PeriodSettleInput in;
    in.x_i = 2.0;
    in.x_end = 0.85 * 2.0;
    in.side_m = 0.0;
    in.side_r = 0.0;
    in.m_r = 0.001;
    in.r = 0.02;
    in.elapsed_years = (3.0 + 1.0) / 252.0;
    in.c_m = 0.1;
    in.alpha_m = 0.5;
    in.m_m = 0.0;

    SettleOutput out = settle_period(in);
    double pg = 0.001 * std::exp(0.02 * in.elapsed_years) * 2.0;
    // shortfall below the barrier: (0.90 - 0.85) * x_i
    CHECK(out.reinsurer == doctest::Approx(pg - 0.05 * 2.0).epsilon(1e-13));
    CHECK(out.manager == doctest::Approx(-0.1 * 2.0).epsilon(1e-13));
    CHECK(out.investor == doctest::Approx(2.0 - pg).epsilon(1e-13));
    CHECK(out.investor + out.manager + out.reinsurer == doctest::Approx(in.x_end).epsilon(1e-13));
}

TEST_CASE("performance fees are reported and paid out of the investor leg") {
    PeriodSettleInput in;
    in.x_i = 1.0;
    in.x_end = 1.4;
    in.side_m = 0.05;
    in.side_r = 0.01;
    in.m_r = 0.001;
    in.r = 0.02;
    in.elapsed_years = 1.0;
    in.c_m = 0.1;
    in.alpha_m = 0.5;
    in.m_m = 0.02;

    SettleOutput out = settle_period(in);
    double grow = std::exp(0.02);
    CHECK(out.perf_fee == doctest::Approx(0.5 * (1.4 - 1.02)).epsilon(1e-14));
    CHECK(out.investor == doctest::Approx(1.4 - 0.02 - 0.001 * grow - 0.19).epsilon(1e-13));
    CHECK(out.manager == doctest::Approx(grow * 0.05 + 0.02 + 0.19).epsilon(1e-13));
    CHECK(out.reinsurer == doctest::Approx(grow * 0.01 + 0.001 * grow).epsilon(1e-13));
}

TEST_CASE("config validation rejects broken settings") {
    BacktestConfig cfg;
    cfg.theta_days = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = BacktestConfig{};
    cfg.c_m = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = BacktestConfig{};
    cfg.alpha_m = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = BacktestConfig{};
    cfg.window_years = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = BacktestConfig{};
    cfg.max_periods = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = BacktestConfig{};
    cfg.start_month = 2;
    cfg.start_day = 30;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_NOTHROW(BacktestConfig{}.validate());
}

TEST_CASE("a flat series with zero fees leaves every party at its starting value") {
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 900);
    ReturnSeries rs = series_from(dates, std::vector<double>(dates.size(), 0.0));
    RateSeries rates = flat_rate(dates.front(), 0.02);

    BacktestConfig cfg;
    cfg.pricer = PricerKind::gbm_closed_form;
    BacktestLedger ledger = run_backtest(cfg, rs, rates);

    REQUIRE(ledger.periods.size() == 1);
    const PeriodRecord& p = ledger.periods.front();
    CHECK(p.start == fixtures::make_date(2005, 4, 1));
    CHECK(p.end == fixtures::make_date(2006, 3, 31));
    CHECK(p.x_i == 1.0);
    CHECK(p.rate == 0.02);
    CHECK(p.sigma_emp == 0.0);
    CHECK(p.premium == 0.0);  // a zero-volatility window prices to zero
    CHECK_FALSE(p.breached);
    CHECK(p.investor_end == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.manager_end == 0.0);
    CHECK(p.reinsurer_end == 0.0);

    CHECK(ledger.summary.n_periods == 1);
    CHECK_FALSE(ledger.summary.breached);
    CHECK(ledger.summary.investor == doctest::Approx(1.0).epsilon(1e-14));

    REQUIRE_FALSE(ledger.days.empty());
    CHECK(ledger.days.front().date == p.start);
    CHECK(ledger.days.back().date == p.end);
    CHECK(ledger.days.size() == index_of(dates, p.end) - index_of(dates, p.start) + 1);
    for (const DailyRecord& row : ledger.days) {
        CHECK(row.investor == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(row.manager == 0.0);
        CHECK(row.reinsurer == 0.0);
        CHECK(row.regime_estimate == 1);
        CHECK(row.premium == 0.0);
    }
}

TEST_CASE("the first period waits for a full trailing window and calibrates on it alone") {
    // Wild swings live only before mid-March 2003; if the two-year window of
    // the 2005 start leaked past its left edge the recorded volatility would
    // be an order of magnitude larger.
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 900);
    std::vector<double> rets(dates.size());
    Date calm_from = fixtures::make_date(2003, 3, 15);
    for (std::size_t j = 0; j < dates.size(); ++j) {
        double s = dates[j] < calm_from ? 0.05 : 0.001;
        rets[j] = (j % 2 == 0) ? s : -s;
    }
    ReturnSeries rs = series_from(dates, rets);
    RateSeries rates = flat_rate(dates.front(), 0.01);

    BacktestConfig cfg;
    BacktestLedger ledger = run_backtest(cfg, rs, rates);

    REQUIRE_FALSE(ledger.periods.empty());
    CHECK(ledger.periods.front().start == fixtures::make_date(2005, 4, 1));
    CHECK(ledger.periods.front().sigma_emp > 0.0);
    CHECK(ledger.periods.front().sigma_emp < 0.05);
    CHECK(ledger.periods.front().sigma_emp ==
          doctest::Approx(0.001 * std::sqrt(252.0)).epsilon(0.05));
}

TEST_CASE("a growth fixture rolls party accounts across periods") {
    fixtures::TempDir tmp;
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 1300);
    std::vector<double> levels(dates.size());
    levels[0] = 1.0;
    for (std::size_t k = 1; k < dates.size(); ++k) {
        double ret = 0.0004 + ((k % 2 == 1) ? 0.001 : -0.001);
        levels[k] = levels[k - 1] * std::exp(ret);
    }
    auto level_file = tmp.path() / "levels.csv";
    fixtures::write_dated_csv(level_file, dates, levels);

    auto rate_file = tmp.path() / "rates.csv";
    fixtures::write_dated_csv(rate_file, {fixtures::make_date(2003, 1, 2),
                                          fixtures::make_date(2005, 4, 15)},
                              {0.05, 0.01});

    ReturnSeries rs = load_returns(level_file.string(), ReturnFormat::levels);
    RateSeries rates = load_rates(rate_file.string());

    BacktestConfig cfg;
    cfg.alpha_m = 0.5;
    cfg.m_m = 0.01;
    BacktestLedger ledger = run_backtest(cfg, rs, rates);

    REQUIRE(ledger.periods.size() == 2);  // the tail after April 2007 cannot fill a year
    const PeriodRecord& p0 = ledger.periods[0];
    const PeriodRecord& p1 = ledger.periods[1];

    CHECK(p0.start == fixtures::make_date(2005, 4, 1));
    CHECK(p1.start == fixtures::make_date(2006, 4, 3));  // April 1 2006 is a Saturday
    CHECK(p0.rate == 0.05);                              // last observation carried forward
    CHECK(p1.rate == 0.01);

    // The struck premium is exactly the closed form at the recorded window
    // volatility and the period rate.
    for (const PeriodRecord& p : ledger.periods) {
        ContractTerms terms;
        terms.c_m = cfg.c_m;
        terms.alpha_m = cfg.alpha_m;
        terms.m_m = cfg.m_m;
        terms.theta_days = cfg.theta_days;
        GbmParams gp;
        gp.r = p.rate;
        gp.sigma = p.sigma_emp;
        CHECK(p.sigma_emp > 0.0);
        CHECK(p.premium ==
              doctest::Approx(premium_gbm(terms, gp, Measure::risk_neutral).m_r).epsilon(1e-14));
        CHECK_FALSE(p.breached);
    }

    // Roll: the investor's settlement funds the next period's notional.
    CHECK(p0.x_i == 1.0);
    CHECK(p1.x_i == p0.investor_end);

    // External conservation against the raw level path: everything the three
    // parties hold must equal the fund plus the grown side accounts.
    auto rel = [&](const PeriodRecord& p) {
        std::size_t a = index_of(rs.dates, p.start);
        std::size_t b = index_of(rs.dates, p.end);
        double acc = 0.0;
        for (std::size_t j = a + 1; j <= b; ++j) acc += rs.log_returns[j];
        return std::exp(acc);
    };
    double x_end0 = p0.x_i * rel(p0);
    CHECK(p0.investor_end + p0.manager_end + p0.reinsurer_end ==
          doctest::Approx(x_end0).epsilon(1e-10));
    double x_end1 = p1.x_i * rel(p1);
    double grown_sides = std::exp(p1.rate) * (p0.manager_end + p0.reinsurer_end);
    CHECK(p1.investor_end + p1.manager_end + p1.reinsurer_end ==
          doctest::Approx(x_end1 + grown_sides).epsilon(1e-10));

    // Growth beats the 1% management hurdle, so fees accrue to the manager.
    CHECK(p0.perf_fee > 0.0);
    CHECK(p1.manager_end > p0.manager_end);

    // Day-one mark nets the premium and management fee off the notional.
    for (const PeriodRecord& p : ledger.periods) {
        const DailyRecord* first = find_day(ledger, p.start);
        REQUIRE(first != nullptr);
        CHECK(first->investor ==
              doctest::Approx((1.0 - cfg.m_m - p.premium) * p.x_i).epsilon(1e-12));
        CHECK(first->premium == p.premium);
        CHECK(first->regime_estimate == 1);
    }

    CHECK(ledger.days.front().date == p0.start);
    CHECK(ledger.days.back().date == p1.end);
    CHECK(ledger.summary.n_periods == 2);
    CHECK(ledger.summary.investor == p1.investor_end);
    CHECK(ledger.summary.manager == p1.manager_end);
    CHECK(ledger.summary.reinsurer == p1.reinsurer_end);

    BacktestConfig truncated = cfg;
    truncated.max_periods = 1;
    CHECK(run_backtest(truncated, rs, rates).summary.n_periods == 1);
}

namespace {

// Calm alternating window, then a still fund that drops 15% in one day ten
// trading days into the first period. Every post-start return other than the
// crash is zero, so the liquidation value is 0.85 regardless of theta.
struct CrashFixture {
    ReturnSeries rs;
    RateSeries rates;
    std::size_t start_j = 0;
    std::size_t crash_j = 0;
};

CrashFixture make_crash_fixture() {
    CrashFixture fx;
    // Long enough that the 2005 period fits in full; the breach cuts it short.
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 900);
    Date start_date = fixtures::make_date(2005, 4, 1);
    std::size_t start_j = index_of(dates, start_date);
    std::size_t crash_j = start_j + 10;
    std::vector<double> rets(dates.size(), 0.0);
    for (std::size_t j = 0; j <= start_j; ++j) rets[j] = (j % 2 == 0) ? 0.002 : -0.002;
    rets[crash_j] = std::log(0.85);
    fx.rs = series_from(std::move(dates), std::move(rets));
    fx.rates = flat_rate(fx.rs.dates.front(), 0.03);
    fx.start_j = start_j;
    fx.crash_j = crash_j;
    return fx;
}

}  // namespace

TEST_CASE("an engineered crash breaches on the known date and settles the hand-computed split") {
    CrashFixture fx = make_crash_fixture();

    struct ThetaCase {
        double theta;
        std::size_t liq_offset;  // trading days from the breach to the recorded liquidation
        double elapsed;
    };
    const ThetaCase cases[] = {
        {1.0, 1, 11.0 / 252.0},
        {20.0, 20, 30.0 / 252.0},
        {1.5, 2, 11.5 / 252.0},  // fractional theta lands between trading days
    };

    for (const ThetaCase& tc : cases) {
        CAPTURE(tc.theta);
        BacktestConfig cfg;
        cfg.theta_days = tc.theta;
        cfg.alpha_m = 0.5;
        BacktestLedger ledger = run_backtest(cfg, fx.rs, fx.rates);

        REQUIRE(ledger.periods.size() == 1);  // liquidation ends the engagement
        const PeriodRecord& p = ledger.periods.front();
        CHECK(p.breached);
        CHECK(ledger.summary.breached);
        CHECK(ledger.summary.n_periods == 1);
        CHECK(p.breach_date == fx.rs.dates[fx.crash_j]);
        CHECK(p.liquidation_date == fx.rs.dates[fx.crash_j + tc.liq_offset]);
        CHECK(p.end == p.liquidation_date);

        // Premium struck off the alternating window, priced by the closed form.
        ContractTerms terms;
        terms.c_m = cfg.c_m;
        terms.alpha_m = cfg.alpha_m;
        terms.theta_days = tc.theta;
        GbmParams gp;
        gp.r = 0.03;
        gp.sigma = p.sigma_emp;
        CHECK(p.sigma_emp == doctest::Approx(0.002 * std::sqrt(252.0)).epsilon(0.02));
        CHECK(p.premium ==
              doctest::Approx(premium_gbm(terms, gp, Measure::risk_neutral).m_r).epsilon(1e-14));

        double pg = p.premium * std::exp(0.03 * tc.elapsed);
        CHECK(p.investor_end == doctest::Approx(1.0 - pg).epsilon(1e-12));
        CHECK(p.manager_end == doctest::Approx(-0.1).epsilon(1e-12));  // full deposit lost
        CHECK(p.reinsurer_end == doctest::Approx(pg - 0.05).epsilon(1e-12));

        // Marks run from the start day through the liquidation day.
        CHECK(ledger.days.size() == 10 + tc.liq_offset + 1);
        CHECK(ledger.days.back().date == p.liquidation_date);

        const DailyRecord* at_breach = find_day(ledger, p.breach_date);
        REQUIRE(at_breach != nullptr);
        double pg_breach = p.premium * std::exp(0.03 * 10.0 / 252.0);
        CHECK(at_breach->investor == doctest::Approx(1.0 - pg_breach).epsilon(1e-12));
        CHECK(at_breach->manager == doctest::Approx(-0.1).epsilon(1e-12));
        CHECK(at_breach->reinsurer == doctest::Approx(pg_breach - 0.05).epsilon(1e-12));
    }
}

TEST_CASE("liquidation windows that run past the series raise a data error") {
    CrashFixture fx = make_crash_fixture();
    BacktestConfig cfg;
    cfg.theta_days = 400.0;  // breach sits ~596 days in; a 900-day series cannot hold it
    CHECK_THROWS_WITH_AS(run_backtest(cfg, fx.rs, fx.rates),
                         doctest::Contains("liquidation window exceeds"), DataError);
}

TEST_CASE("insufficient history raises a data error") {
    BacktestConfig cfg;

    SUBCASE("no start has a full trailing window") {
        auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 6, 2), 260);
        ReturnSeries rs = series_from(dates, std::vector<double>(dates.size(), 0.0));
        CHECK_THROWS_WITH_AS(run_backtest(cfg, rs, flat_rate(dates.front(), 0.01)),
                             doctest::Contains("insufficient history"), DataError);
    }

    SUBCASE("the series ends before the first period can fill a year") {
        auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 600);
        ReturnSeries rs = series_from(dates, std::vector<double>(dates.size(), 0.0));
        CHECK_THROWS_AS(run_backtest(cfg, rs, flat_rate(dates.front(), 0.01)), DataError);
    }
}

TEST_CASE("the switching pricer refuses calibration windows under fifty observations") {
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 600);
    auto sample = fixtures::simulate_regime_sample(dates.size(), 0.0005, 0.004, -0.001, 0.01,
                                                   0.02, 0.08, 21);
    ReturnSeries rs = series_from(dates, sample.returns);

    BacktestConfig cfg;
    cfg.pricer = PricerKind::markov_switching_mc;
    cfg.window_years = 0.1;
    cfg.mc.n_paths = 1000;
    CHECK_THROWS_WITH_AS(run_backtest(cfg, rs, flat_rate(dates.front(), 0.01)),
                         doctest::Contains("need 50"), DataError);
}

TEST_CASE("the switching pricer backtest produces a coherent ledger") {
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 900);
    auto sample = fixtures::simulate_regime_sample(dates.size(), 0.0008, 0.003, -0.001, 0.008,
                                                   0.02, 0.10, 5);
    ReturnSeries rs = series_from(dates, sample.returns);
    RateSeries rates = flat_rate(dates.front(), 0.02);

    BacktestConfig cfg;
    cfg.pricer = PricerKind::markov_switching_mc;
    cfg.mc.n_paths = 4000;
    cfg.mc.seed = 11;
    cfg.mc.n_threads = 1;
    BacktestLedger ledger = run_backtest(cfg, rs, rates);

    REQUIRE(ledger.periods.size() == 1);
    const PeriodRecord& p = ledger.periods.front();
    CHECK(p.start == fixtures::make_date(2005, 4, 1));
    CHECK(p.sigma_emp > 0.0);
    CHECK(p.premium >= 0.0);
    CHECK(std::isfinite(p.premium));
    CHECK(ledger.summary.n_periods == 1);
    CHECK(ledger.summary.breached == p.breached);
    CHECK(ledger.summary.investor == p.investor_end);

    REQUIRE_FALSE(ledger.days.empty());
    for (const DailyRecord& row : ledger.days) {
        CHECK((row.regime_estimate == 1 || row.regime_estimate == 2));
        CHECK(row.premium == p.premium);
        CHECK(std::isfinite(row.investor));
    }
}

TEST_CASE("invalid simulation settings fail fast even under the closed-form pricer") {
    auto dates = fixtures::weekday_calendar(fixtures::make_date(2003, 1, 2), 900);
    ReturnSeries rs = series_from(dates, std::vector<double>(dates.size(), 0.0));

    BacktestConfig cfg;
    cfg.mc.n_paths = 0;
    CHECK_THROWS_AS(run_backtest(cfg, rs, flat_rate(dates.front(), 0.01)), std::invalid_argument);
}
