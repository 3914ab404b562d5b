#pragma once

#include <vector>

#include "liqprem/contract.hpp"
#include "liqprem/regime_mc.hpp"
#include "liqprem/returns_io.hpp"

namespace liqprem {

enum class PricerKind { gbm_closed_form, markov_switching_mc };

struct BacktestConfig {
    PricerKind pricer = PricerKind::gbm_closed_form;
    double theta_days = 1.0;
    double c_m = 0.1;
    double alpha_m = 0.5;
    double m_m = 0.0;       // flat management fee; 0 reproduces the reference setup
    double window_years = 2.0;
    int start_month = 4;    // annual contracts roll on this calendar day
    int start_day = 1;
    int max_periods = 13;
    SimConfig mc;           // Markov-switching pricer settings (measure forced to Q)
    int hmm_window_days = 21;
    double hmm_vol_multiplier = 1.5;

    void validate() const;
};

// One settlement: either the contractual year end (elapsed_years = 1) or a
// breach liquidation (elapsed_years = tau + theta).
struct PeriodSettleInput {
    double x_i;             // X_I(i): investor notional at period start
    double x_end;           // fund value at evaluation
    double side_m;          // X_M(i): manager side account at period start
    double side_r;          // X_R(i): reinsurer side account at period start
    double m_r;             // period premium (fraction of x_i)
    double r;               // period rate
    double elapsed_years;
    double c_m, alpha_m, m_m;
};

struct SettleOutput {
    double investor;
    double manager;
    double reinsurer;
    double perf_fee;  // the alpha_m call component, for reporting
};

SettleOutput settle_period(const PeriodSettleInput& in);

struct DailyRecord {
    Date date;
    double investor;
    double manager;
    double reinsurer;
    int regime_estimate;  // filtered state (MS pricer); 1 under the GBM pricer
    double premium;       // the active period's m_R, fraction of x_i
};

struct PeriodRecord {
    Date start;            // first trading day of the period (premium struck here)
    Date end;              // last trading day covered (settlement or liquidation)
    double x_i;
    double premium;
    double rate;
    double sigma_emp;      // trailing-window annualized volatility (diagnostic)
    double perf_fee;
    bool breached = false;
    Date breach_date{};
    Date liquidation_date{};
    double investor_end;
    double manager_end;
    double reinsurer_end;
};

struct TerminalSummary {
    double investor = 0.0;
    double manager = 0.0;
    double reinsurer = 0.0;
    int n_periods = 0;
    bool breached = false;
};

struct BacktestLedger {
    std::vector<DailyRecord> days;
    std::vector<PeriodRecord> periods;
    TerminalSummary summary;
};

// Annual contract cycles on the historical series: calibrate on the trailing
// window, price the period's premium under the risk-neutral measure, monitor
// the barrier daily, liquidate theta days after a breach (crossing period
// boundaries on the physical calendar) and stop, otherwise settle the year
// and roll the parties' values into the next period. Only full periods run;
// trailing days that cannot fill a year are not traded.
BacktestLedger run_backtest(const BacktestConfig& config, const ReturnSeries& returns,
                            const RateSeries& rates);

}  // namespace liqprem
