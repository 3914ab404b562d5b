/* liqprem: first-loss liquidity-premium engine, C interface.
 *
 * All functions return LP_OK (0) or a nonzero error code; lp_last_error()
 * returns a thread-local message for the most recent failure on the calling
 * thread. Handles returned through out-parameters are owned by the caller
 * and released with the matching *_free function. Premiums are fractions of
 * initial fund value (multiply by 1e4 for basis points).
 */
#ifndef LIQPREM_H
#define LIQPREM_H

#include <stddef.h>

#if defined(_WIN32)
#define LP_API __declspec(dllexport)
#else
#define LP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    LP_OK = 0,
    LP_EINVAL = 1,      /* invalid argument or configuration */
    LP_EPARSE = 2,      /* malformed input file */
    LP_EESTIMATION = 3, /* calibration failed to produce a usable model */
    LP_EDATA = 4,       /* insufficient or inconsistent data */
    LP_EINTERNAL = 5    /* unexpected internal failure */
};

enum { LP_MEASURE_RISK_NEUTRAL = 0, LP_MEASURE_EMPIRICAL = 1 };
enum { LP_STATE_STATIONARY = 0, LP_STATE_NORMAL = 1, LP_STATE_STRESSED = 2 };
enum { LP_FORMAT_LEVELS = 0, LP_FORMAT_SIMPLE_RETURNS = 1, LP_FORMAT_LOG_RETURNS = 2 };
enum { LP_PRICER_GBM = 0, LP_PRICER_MS = 1 };

typedef struct lp_series lp_series;
typedef struct lp_rates lp_rates;
typedef struct lp_hmm lp_hmm;
typedef struct lp_ledger lp_ledger;

typedef struct lp_contract {
    double x0;            /* initial fund value */
    double c_m;           /* manager first-loss deposit, fraction of x0 */
    double alpha_m;       /* performance-fee share */
    double m_m;           /* upfront management fee, fraction of x0 */
    double horizon_years; /* contract horizon T */
    double theta_days;    /* liquidation delay in trading days */
} lp_contract;

typedef struct lp_gbm {
    double r;     /* risk-free rate, continuous compounding */
    double sigma; /* annualized volatility */
    int has_drift;
    double drift; /* annualized level drift b; required for the empirical measure */
} lp_gbm;

typedef struct lp_regime {
    double mu1, mu2;       /* annualized level drifts by state */
    double sigma1, sigma2; /* annualized volatilities by state */
    double p;              /* daily P(normal -> stressed) */
    double q;              /* daily P(stressed -> normal) */
} lp_regime;

typedef struct lp_sim {
    long long n_paths;
    int steps_per_year;
    unsigned long long seed;
    int antithetic;     /* nonzero pairs each path with its mirrored twin */
    int initial_state;  /* LP_STATE_* */
    int measure;        /* LP_MEASURE_* */
    int n_threads;      /* 0 = hardware concurrency */
} lp_sim;

typedef struct lp_result {
    double m_r;
    double std_error;      /* valid when has_std_error is nonzero */
    double breach_fraction;
    long long n_paths;
    int has_std_error;
} lp_result;

typedef struct lp_backtest_cfg {
    int pricer; /* LP_PRICER_* */
    double theta_days;
    double c_m;
    double alpha_m;
    double m_m;
    double window_years;
    int start_month;
    int start_day;
    int max_periods;
    lp_sim mc; /* Monte Carlo settings for LP_PRICER_MS */
    int hmm_window_days;
    double hmm_vol_multiplier;
} lp_backtest_cfg;

typedef struct lp_period {
    int start_y, start_m, start_d;
    int end_y, end_m, end_d;
    double x_i;       /* investor capital at period start */
    double premium;   /* m_r charged for the period */
    double rate;      /* rate in force at period start */
    double sigma_emp; /* annualized window volatility */
    double perf_fee;
    int breached;
    int breach_y, breach_m, breach_d; /* valid when breached */
    int liq_y, liq_m, liq_d;          /* valid when breached */
    double investor_end, manager_end, reinsurer_end;
} lp_period;

LP_API const char* lp_version(void);
LP_API const char* lp_last_error(void);

/* Closed-form pricing under geometric Brownian motion. */
LP_API int lp_price_gbm(const lp_contract* terms, const lp_gbm* params, int measure,
                        lp_result* out);
/* Same price split into its two factors: the liquidation-shortfall put value
 * v1 and the discounted barrier-hitting factor v2; m_r = v1 * v2 / x0. */
LP_API int lp_price_gbm_components(const lp_contract* terms, const lp_gbm* params, int measure,
                                   double* v1, double* v2, double* m_r);

/* Monte Carlo pricing under the two-state Markov-switching model. */
LP_API int lp_price_ms(const lp_contract* terms, const lp_regime* regime, double r,
                       const lp_sim* sim, lp_result* out);
/* Convex blend of a run started in the normal state (weight_good) and one
 * started in the stressed state (1 - weight_good). */
LP_API int lp_price_ms_weighted(const lp_contract* terms, const lp_regime* regime, double r,
                                const lp_sim* sim, double weight_good, lp_result* out);

/* Dated series I/O. Files are two-column CSVs with header "date,value". */
LP_API int lp_series_load(const char* path, int format, lp_series** out);
LP_API int lp_series_equal_weight(const lp_series* const* items, size_t count, lp_series** out);
LP_API size_t lp_series_size(const lp_series* s);
LP_API int lp_series_row(const lp_series* s, size_t i, int* y, int* m, int* d,
                         double* log_return);
LP_API int lp_series_moments(const lp_series* s, double* mu_emp, double* sigma_emp,
                             double* b_hat);
LP_API void lp_series_free(lp_series* s);

LP_API int lp_rates_load(const char* path, lp_rates** out);
LP_API void lp_rates_free(lp_rates* r);

/* Two-state Gaussian hidden Markov fit on daily log-returns. Pass max_iter 0
 * and tol 0 for the defaults (500, 1e-8); window_days/vol_multiplier seed the
 * initial state labeling (0 picks the defaults 21 and 1.5). */
LP_API int lp_hmm_fit(const lp_series* s, int max_iter, double tol, int window_days,
                      double vol_multiplier, lp_hmm** out);
LP_API int lp_hmm_params(const lp_hmm* h, lp_regime* out); /* annualized */
LP_API int lp_hmm_daily(const lp_hmm* h, double* mean1, double* sd1, double* mean2, double* sd2);
LP_API int lp_hmm_stats(const lp_hmm* h, double* log_likelihood, int* iterations,
                        int* converged);
LP_API int lp_hmm_stationary(const lp_hmm* h, double* pi_normal, double* pi_stressed);
LP_API size_t lp_hmm_state_count(const lp_hmm* h);
LP_API int lp_hmm_state(const lp_hmm* h, size_t i, int* state); /* 1 normal, 2 stressed */
LP_API void lp_hmm_free(lp_hmm* h);

/* Rolling annual backtest with per-party ledgers. */
LP_API int lp_backtest_run(const lp_backtest_cfg* cfg, const lp_series* s, const lp_rates* r,
                           lp_ledger** out);
LP_API size_t lp_ledger_days(const lp_ledger* l);
LP_API int lp_ledger_day(const lp_ledger* l, size_t i, int* y, int* m, int* d, double* investor,
                         double* manager, double* reinsurer, int* regime_estimate,
                         double* premium);
LP_API size_t lp_ledger_periods(const lp_ledger* l);
LP_API int lp_ledger_period(const lp_ledger* l, size_t i, lp_period* out);
LP_API int lp_ledger_summary(const lp_ledger* l, double* investor, double* manager,
                             double* reinsurer, int* n_periods, int* breached);
LP_API void lp_ledger_free(lp_ledger* l);

#ifdef __cplusplus
}
#endif

#endif /* LIQPREM_H */
