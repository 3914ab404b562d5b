#include "liqprem.h"

#include <chrono>
#include <exception>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqprem/backtest.hpp"
#include "liqprem/closed_form.hpp"
#include "liqprem/contract.hpp"
#include "liqprem/errors.hpp"
#include "liqprem/hmm.hpp"
#include "liqprem/regime_mc.hpp"
#include "liqprem/returns_io.hpp"

struct lp_series {
    liqprem::ReturnSeries data;
};
struct lp_rates {
    liqprem::RateSeries data;
};
struct lp_hmm {
    liqprem::HmmFitResult data;
};
struct lp_ledger {
    liqprem::BacktestLedger data;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
int translate(Fn&& fn) {
    try {
        fn();
        return LP_OK;
    } catch (const liqprem::ParseError& e) {
        set_error(e.what());
        return LP_EPARSE;
    } catch (const liqprem::EstimationError& e) {
        set_error(e.what());
        return LP_EESTIMATION;
    } catch (const liqprem::DataError& e) {
        set_error(e.what());
        return LP_EDATA;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return LP_EINVAL;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return LP_EINTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return LP_EINTERNAL;
    }
}

int require(bool ok, const char* msg) {
    if (!ok) {
        set_error(msg);
        return LP_EINVAL;
    }
    return LP_OK;
}

liqprem::ContractTerms to_terms(const lp_contract& c) {
    liqprem::ContractTerms t;
    t.x0 = c.x0;
    t.c_m = c.c_m;
    t.alpha_m = c.alpha_m;
    t.m_m = c.m_m;
    t.horizon_years = c.horizon_years;
    t.theta_days = c.theta_days;
    return t;
}

liqprem::GbmParams to_gbm(const lp_gbm& g) {
    liqprem::GbmParams p;
    p.r = g.r;
    p.sigma = g.sigma;
    if (g.has_drift) p.b = g.drift;
    return p;
}

liqprem::RegimeParams to_regime(const lp_regime& r) {
    liqprem::RegimeParams p;
    p.mu1 = r.mu1;
    p.mu2 = r.mu2;
    p.sigma1 = r.sigma1;
    p.sigma2 = r.sigma2;
    p.p = r.p;
    p.q = r.q;
    return p;
}

int to_measure(int m, liqprem::Measure& out) {
    if (m == LP_MEASURE_RISK_NEUTRAL) {
        out = liqprem::Measure::risk_neutral;
        return LP_OK;
    }
    if (m == LP_MEASURE_EMPIRICAL) {
        out = liqprem::Measure::empirical;
        return LP_OK;
    }
    set_error("measure must be LP_MEASURE_RISK_NEUTRAL or LP_MEASURE_EMPIRICAL");
    return LP_EINVAL;
}

int to_sim(const lp_sim& s, liqprem::SimConfig& out) {
    out.n_paths = s.n_paths;
    out.steps_per_year = s.steps_per_year;
    out.seed = s.seed;
    out.antithetic = s.antithetic != 0;
    out.n_threads = s.n_threads;
    switch (s.initial_state) {
        case LP_STATE_NORMAL: out.initial_state = liqprem::InitialState::normal; break;
        case LP_STATE_STRESSED: out.initial_state = liqprem::InitialState::stressed; break;
        case LP_STATE_STATIONARY: out.initial_state = liqprem::InitialState::stationary_draw; break;
        default:
            set_error("initial_state must be an LP_STATE_* value");
            return LP_EINVAL;
    }
    return to_measure(s.measure, out.measure);
}

void fill_result(const liqprem::PremiumResult& r, lp_result& out) {
    out.m_r = r.m_r;
    out.std_error = r.std_error.value_or(0.0);
    out.has_std_error = r.std_error.has_value() ? 1 : 0;
    out.breach_fraction = r.breach_fraction.value_or(0.0);
    out.n_paths = r.n_paths.value_or(0);
}

void split_date(liqprem::Date d, int* y, int* m, int* dd) {
    std::chrono::year_month_day ymd(d);
    if (y) *y = static_cast<int>(ymd.year());
    if (m) *m = static_cast<int>(static_cast<unsigned>(ymd.month()));
    if (dd) *dd = static_cast<int>(static_cast<unsigned>(ymd.day()));
}

liqprem::ReturnFormat to_format(int f) {
    switch (f) {
        case LP_FORMAT_LEVELS: return liqprem::ReturnFormat::levels;
        case LP_FORMAT_SIMPLE_RETURNS: return liqprem::ReturnFormat::simple_returns;
        case LP_FORMAT_LOG_RETURNS: return liqprem::ReturnFormat::log_returns;
        default: throw std::invalid_argument("format must be an LP_FORMAT_* value");
    }
}

}  // namespace

extern "C" {

const char* lp_version(void) { return "1.0.0"; }

const char* lp_last_error(void) { return g_last_error.c_str(); }

int lp_price_gbm(const lp_contract* terms, const lp_gbm* params, int measure, lp_result* out) {
    if (int rc = require(terms && params && out, "null pointer argument")) return rc;
    liqprem::Measure m;
    if (int rc = to_measure(measure, m)) return rc;
    return translate([&] {
        liqprem::PremiumResult res = liqprem::premium_gbm(to_terms(*terms), to_gbm(*params), m);
        fill_result(res, *out);
    });
}

int lp_price_gbm_components(const lp_contract* terms, const lp_gbm* params, int measure,
                            double* v1, double* v2, double* m_r) {
    if (int rc = require(terms && params && v1 && v2 && m_r, "null pointer argument")) return rc;
    liqprem::Measure m;
    if (int rc = to_measure(measure, m)) return rc;
    return translate([&] {
        liqprem::ContractTerms t = to_terms(*terms);
        liqprem::GbmParams g = to_gbm(*params);
        t.validate();
        g.validate();
        *v1 = liqprem::put_component_v1(t.theta_years(), t.barrier(), g.r, g.sigma, m, g.b);
        *v2 = liqprem::discounted_hitting_factor_v2(t.horizon_years, t.barrier(), t.x0, g.r,
                                                    g.sigma, m, g.b);
        *m_r = *v1 * *v2 / t.x0;
    });
}

int lp_price_ms(const lp_contract* terms, const lp_regime* regime, double r, const lp_sim* sim,
                lp_result* out) {
    if (int rc = require(terms && regime && sim && out, "null pointer argument")) return rc;
    liqprem::SimConfig cfg;
    if (int rc = to_sim(*sim, cfg)) return rc;
    return translate([&] {
        liqprem::PremiumResult res =
            liqprem::estimate_premium_ms(cfg, to_regime(*regime), to_terms(*terms), r);
        fill_result(res, *out);
    });
}

int lp_price_ms_weighted(const lp_contract* terms, const lp_regime* regime, double r,
                         const lp_sim* sim, double weight_good, lp_result* out) {
    if (int rc = require(terms && regime && sim && out, "null pointer argument")) return rc;
    liqprem::SimConfig cfg;
    if (int rc = to_sim(*sim, cfg)) return rc;
    return translate([&] {
        if (!(weight_good >= 0.0 && weight_good <= 1.0))
            throw std::invalid_argument("weight_good must lie in [0,1]");
        liqprem::SimConfig good_cfg = cfg;
        good_cfg.initial_state = liqprem::InitialState::normal;
        liqprem::SimConfig stressed_cfg = cfg;
        stressed_cfg.initial_state = liqprem::InitialState::stressed;
        liqprem::PremiumResult good =
            liqprem::estimate_premium_ms(good_cfg, to_regime(*regime), to_terms(*terms), r);
        liqprem::PremiumResult stressed =
            liqprem::estimate_premium_ms(stressed_cfg, to_regime(*regime), to_terms(*terms), r);
        fill_result(liqprem::weighted_premium(good, stressed, weight_good), *out);
    });
}

int lp_series_load(const char* path, int format, lp_series** out) {
    if (int rc = require(path && out, "null pointer argument")) return rc;
    return translate([&] {
        auto s = std::make_unique<lp_series>();
        s->data = liqprem::load_returns(path, to_format(format));
        *out = s.release();
    });
}

int lp_series_equal_weight(const lp_series* const* items, size_t count, lp_series** out) {
    if (int rc = require(items && out, "null pointer argument")) return rc;
    return translate([&] {
        std::vector<liqprem::ReturnSeries> series;
        series.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!items[i]) throw std::invalid_argument("null series in equal-weight input");
            series.push_back(items[i]->data);
        }
        auto s = std::make_unique<lp_series>();
        s->data = liqprem::equal_weight_buy_and_hold(series);
        *out = s.release();
    });
}

size_t lp_series_size(const lp_series* s) { return s ? s->data.dates.size() : 0; }

int lp_series_row(const lp_series* s, size_t i, int* y, int* m, int* d, double* log_return) {
    if (int rc = require(s != nullptr, "null pointer argument")) return rc;
    if (int rc = require(i < s->data.dates.size(), "row index out of range")) return rc;
    split_date(s->data.dates[i], y, m, d);
    if (log_return) *log_return = s->data.log_returns[i];
    return LP_OK;
}

int lp_series_moments(const lp_series* s, double* mu_emp, double* sigma_emp, double* b_hat) {
    if (int rc = require(s != nullptr, "null pointer argument")) return rc;
    return translate([&] {
        liqprem::EmpiricalMoments mo = liqprem::empirical_moments(s->data.log_returns);
        if (mu_emp) *mu_emp = mo.mu_emp;
        if (sigma_emp) *sigma_emp = mo.sigma_emp;
        if (b_hat) *b_hat = mo.b_hat;
    });
}

void lp_series_free(lp_series* s) { delete s; }

int lp_rates_load(const char* path, lp_rates** out) {
    if (int rc = require(path && out, "null pointer argument")) return rc;
    return translate([&] {
        auto r = std::make_unique<lp_rates>();
        r->data = liqprem::load_rates(path);
        *out = r.release();
    });
}

void lp_rates_free(lp_rates* r) { delete r; }

int lp_hmm_fit(const lp_series* s, int max_iter, double tol, int window_days,
               double vol_multiplier, lp_hmm** out) {
    if (int rc = require(s && out, "null pointer argument")) return rc;
    return translate([&] {
        int iters = max_iter > 0 ? max_iter : 500;
        double eps = tol > 0.0 ? tol : 1e-8;
        int window = window_days > 0 ? window_days : 21;
        double mult = vol_multiplier > 0.0 ? vol_multiplier : 1.5;
        liqprem::HmmInit init = liqprem::init_heuristic(s->data.log_returns, window, mult);
        auto h = std::make_unique<lp_hmm>();
        h->data = liqprem::baum_welch(s->data.log_returns, init, iters, eps);
        *out = h.release();
    });
}

int lp_hmm_params(const lp_hmm* h, lp_regime* out) {
    if (int rc = require(h && out, "null pointer argument")) return rc;
    const liqprem::RegimeParams& r = h->data.regime;
    out->mu1 = r.mu1;
    out->mu2 = r.mu2;
    out->sigma1 = r.sigma1;
    out->sigma2 = r.sigma2;
    out->p = r.p;
    out->q = r.q;
    return LP_OK;
}

int lp_hmm_daily(const lp_hmm* h, double* mean1, double* sd1, double* mean2, double* sd2) {
    if (int rc = require(h != nullptr, "null pointer argument")) return rc;
    if (mean1) *mean1 = h->data.daily_means[0];
    if (sd1) *sd1 = h->data.daily_sds[0];
    if (mean2) *mean2 = h->data.daily_means[1];
    if (sd2) *sd2 = h->data.daily_sds[1];
    return LP_OK;
}

int lp_hmm_stats(const lp_hmm* h, double* log_likelihood, int* iterations, int* converged) {
    if (int rc = require(h != nullptr, "null pointer argument")) return rc;
    if (log_likelihood) *log_likelihood = h->data.log_likelihood;
    if (iterations) *iterations = h->data.n_iterations;
    if (converged) *converged = h->data.converged ? 1 : 0;
    return LP_OK;
}

int lp_hmm_stationary(const lp_hmm* h, double* pi_normal, double* pi_stressed) {
    if (int rc = require(h != nullptr, "null pointer argument")) return rc;
    return translate([&] {
        auto [pi1, pi2] = liqprem::stationary_distribution(h->data.regime);
        if (pi_normal) *pi_normal = pi1;
        if (pi_stressed) *pi_stressed = pi2;
    });
}

size_t lp_hmm_state_count(const lp_hmm* h) { return h ? h->data.decoded_states.size() : 0; }

int lp_hmm_state(const lp_hmm* h, size_t i, int* state) {
    if (int rc = require(h && state, "null pointer argument")) return rc;
    if (int rc = require(i < h->data.decoded_states.size(), "state index out of range")) return rc;
    *state = h->data.decoded_states[i];
    return LP_OK;
}

void lp_hmm_free(lp_hmm* h) { delete h; }

int lp_backtest_run(const lp_backtest_cfg* cfg, const lp_series* s, const lp_rates* r,
                    lp_ledger** out) {
    if (int rc = require(cfg && s && r && out, "null pointer argument")) return rc;
    liqprem::BacktestConfig bc;
    switch (cfg->pricer) {
        case LP_PRICER_GBM: bc.pricer = liqprem::PricerKind::gbm_closed_form; break;
        case LP_PRICER_MS: bc.pricer = liqprem::PricerKind::markov_switching_mc; break;
        default:
            set_error("pricer must be LP_PRICER_GBM or LP_PRICER_MS");
            return LP_EINVAL;
    }
    bc.theta_days = cfg->theta_days;
    bc.c_m = cfg->c_m;
    bc.alpha_m = cfg->alpha_m;
    bc.m_m = cfg->m_m;
    bc.window_years = cfg->window_years;
    bc.start_month = cfg->start_month;
    bc.start_day = cfg->start_day;
    bc.max_periods = cfg->max_periods;
    if (int rc = to_sim(cfg->mc, bc.mc)) return rc;
    bc.hmm_window_days = cfg->hmm_window_days > 0 ? cfg->hmm_window_days : 21;
    bc.hmm_vol_multiplier = cfg->hmm_vol_multiplier > 0.0 ? cfg->hmm_vol_multiplier : 1.5;
    return translate([&] {
        auto l = std::make_unique<lp_ledger>();
        l->data = liqprem::run_backtest(bc, s->data, r->data);
        *out = l.release();
    });
}

size_t lp_ledger_days(const lp_ledger* l) { return l ? l->data.days.size() : 0; }

int lp_ledger_day(const lp_ledger* l, size_t i, int* y, int* m, int* d, double* investor,
                  double* manager, double* reinsurer, int* regime_estimate, double* premium) {
    if (int rc = require(l != nullptr, "null pointer argument")) return rc;
    if (int rc = require(i < l->data.days.size(), "day index out of range")) return rc;
    const liqprem::DailyRecord& row = l->data.days[i];
    split_date(row.date, y, m, d);
    if (investor) *investor = row.investor;
    if (manager) *manager = row.manager;
    if (reinsurer) *reinsurer = row.reinsurer;
    if (regime_estimate) *regime_estimate = row.regime_estimate;
    if (premium) *premium = row.premium;
    return LP_OK;
}

size_t lp_ledger_periods(const lp_ledger* l) { return l ? l->data.periods.size() : 0; }

int lp_ledger_period(const lp_ledger* l, size_t i, lp_period* out) {
    if (int rc = require(l && out, "null pointer argument")) return rc;
    if (int rc = require(i < l->data.periods.size(), "period index out of range")) return rc;
    const liqprem::PeriodRecord& p = l->data.periods[i];
    split_date(p.start, &out->start_y, &out->start_m, &out->start_d);
    split_date(p.end, &out->end_y, &out->end_m, &out->end_d);
    out->x_i = p.x_i;
    out->premium = p.premium;
    out->rate = p.rate;
    out->sigma_emp = p.sigma_emp;
    out->perf_fee = p.perf_fee;
    out->breached = p.breached ? 1 : 0;
    out->breach_y = out->breach_m = out->breach_d = 0;
    out->liq_y = out->liq_m = out->liq_d = 0;
    if (p.breached) {
        split_date(p.breach_date, &out->breach_y, &out->breach_m, &out->breach_d);
        split_date(p.liquidation_date, &out->liq_y, &out->liq_m, &out->liq_d);
    }
    out->investor_end = p.investor_end;
    out->manager_end = p.manager_end;
    out->reinsurer_end = p.reinsurer_end;
    return LP_OK;
}

int lp_ledger_summary(const lp_ledger* l, double* investor, double* manager, double* reinsurer,
                      int* n_periods, int* breached) {
    if (int rc = require(l != nullptr, "null pointer argument")) return rc;
    const liqprem::TerminalSummary& s = l->data.summary;
    if (investor) *investor = s.investor;
    if (manager) *manager = s.manager;
    if (reinsurer) *reinsurer = s.reinsurer;
    if (n_periods) *n_periods = s.n_periods;
    if (breached) *breached = s.breached ? 1 : 0;
    return LP_OK;
}

void lp_ledger_free(lp_ledger* l) { delete l; }

}  // extern "C"
