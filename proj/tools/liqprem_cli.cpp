// liqprem command-line front end: pricing, calibration, sweeps, backtests.
// Links only the C API; emits JSON/CSV for external plotting.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "liqprem.h"

using json = nlohmann::ordered_json;

namespace {

constexpr double kBps = 1e4;

using SeriesPtr = std::unique_ptr<lp_series, decltype(&lp_series_free)>;
using RatesPtr = std::unique_ptr<lp_rates, decltype(&lp_rates_free)>;
using HmmPtr = std::unique_ptr<lp_hmm, decltype(&lp_hmm_free)>;
using LedgerPtr = std::unique_ptr<lp_ledger, decltype(&lp_ledger_free)>;

// LP_EINVAL is a usage problem (exit 2); everything else is a computation
// failure (exit 3).
int fail(int rc) {
    std::cerr << "error: " << lp_last_error() << "\n";
    return rc == LP_EINVAL ? 2 : 3;
}

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

int env_threads() {
    const char* v = std::getenv("LIQPREM_THREADS");
    if (!v || !*v) return 0;
    return std::atoi(v);
}

std::string format_date(int y, int m, int d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

int parse_measure(const std::string& name, int& out) {
    if (name == "risk-neutral" || name == "rn" || name == "q") {
        out = LP_MEASURE_RISK_NEUTRAL;
        return 0;
    }
    if (name == "empirical" || name == "p") {
        out = LP_MEASURE_EMPIRICAL;
        return 0;
    }
    return usage_error("unknown measure '" + name + "' (risk-neutral|empirical)");
}

int parse_state(const std::string& name, int& out) {
    if (name == "good" || name == "normal") {
        out = LP_STATE_NORMAL;
        return 0;
    }
    if (name == "stressed" || name == "bad") {
        out = LP_STATE_STRESSED;
        return 0;
    }
    if (name == "stationary") {
        out = LP_STATE_STATIONARY;
        return 0;
    }
    return usage_error("unknown initial state '" + name + "' (good|stressed|stationary)");
}

int parse_format(const std::string& name, int& out) {
    if (name == "levels") {
        out = LP_FORMAT_LEVELS;
        return 0;
    }
    if (name == "simple") {
        out = LP_FORMAT_SIMPLE_RETURNS;
        return 0;
    }
    if (name == "log") {
        out = LP_FORMAT_LOG_RETURNS;
        return 0;
    }
    return usage_error("unknown format '" + name + "' (levels|simple|log)");
}

SeriesPtr load_series(const std::string& path, int format, int& rc) {
    lp_series* raw = nullptr;
    rc = lp_series_load(path.c_str(), format, &raw);
    return SeriesPtr(raw, &lp_series_free);
}

// Shared GBM flag bundle (price-gbm and the sigma/theta sweep axes).
struct GbmFlags {
    double x0 = 1.0;
    double c_m = 0.1;
    double rate = 0.01;
    double sigma = 0.05;
    double horizon = 1.0;
    double theta_days = 1.0;
    std::string measure = "risk-neutral";
    double drift = 0.0;
    bool has_drift = false;
    double mu_emp = 0.0;
    bool has_mu_emp = false;
};

void add_gbm_flags(CLI::App* cmd, GbmFlags& f, CLI::Option*& drift_opt,
                   CLI::Option*& mu_emp_opt) {
    cmd->add_option("--x0", f.x0, "initial fund value")->capture_default_str();
    cmd->add_option("--cm", f.c_m, "manager first-loss deposit fraction")->capture_default_str();
    cmd->add_option("--rate,-r", f.rate, "risk-free rate")->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "annualized volatility")->capture_default_str();
    cmd->add_option("--horizon,-T", f.horizon, "contract horizon in years")
        ->capture_default_str();
    cmd->add_option("--theta-days", f.theta_days, "liquidation delay in trading days")
        ->capture_default_str();
    cmd->add_option("--measure", f.measure, "pricing measure (risk-neutral|empirical)")
        ->capture_default_str();
    drift_opt = cmd->add_option("--drift", f.drift, "annualized level drift b (empirical)");
    mu_emp_opt = cmd->add_option("--mu-emp", f.mu_emp,
                                 "annualized log drift; implies b = mu + sigma^2/2");
    drift_opt->excludes(mu_emp_opt);
}

// Resolves the drift flags against the measure; fills the lp_gbm struct.
int resolve_gbm(const GbmFlags& f, lp_gbm& out) {
    int measure = 0;
    if (int rc = parse_measure(f.measure, measure)) return rc;
    out.r = f.rate;
    out.sigma = f.sigma;
    out.has_drift = 0;
    out.drift = 0.0;
    if (f.has_drift) {
        out.has_drift = 1;
        out.drift = f.drift;
    } else if (f.has_mu_emp) {
        out.has_drift = 1;
        out.drift = f.mu_emp + 0.5 * f.sigma * f.sigma;
    }
    if (measure == LP_MEASURE_EMPIRICAL && !out.has_drift)
        return usage_error("the empirical measure needs --drift or --mu-emp");
    return 0;
}

int run_price_gbm(const GbmFlags& f) {
    lp_gbm params;
    if (int rc = resolve_gbm(f, params)) return rc;
    int measure = 0;
    parse_measure(f.measure, measure);

    lp_contract terms{f.x0, f.c_m, 0.0, 0.0, f.horizon, f.theta_days};
    double v1 = 0.0, v2 = 0.0, m_r = 0.0;
    if (int rc = lp_price_gbm_components(&terms, &params, measure, &v1, &v2, &m_r))
        return fail(rc);

    json out;
    out["command"] = "price-gbm";
    out["measure"] = measure == LP_MEASURE_EMPIRICAL ? "empirical" : "risk-neutral";
    json inputs;
    inputs["x0"] = f.x0;
    inputs["c_m"] = f.c_m;
    inputs["rate"] = f.rate;
    inputs["sigma"] = f.sigma;
    inputs["horizon_years"] = f.horizon;
    inputs["theta_days"] = f.theta_days;
    if (params.has_drift) inputs["drift"] = params.drift;
    out["inputs"] = inputs;
    out["v1"] = v1;
    out["v2"] = v2;
    out["premium"] = m_r;
    out["premium_bps"] = m_r * kBps;
    std::cout << out.dump(2) << "\n";
    return 0;
}

// Shared Markov-switching flag bundle (price-ms and the sigma1 sweep axis).
struct MsFlags {
    double x0 = 1.0;
    double c_m = 0.1;
    double rate = 0.01;
    double horizon = 1.0;
    double theta_days = 1.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 0.05;
    double sigma2 = 0.10;
    double p = 0.02;
    double q = 0.08;
    long long n_paths = 100000;
    int steps_per_year = 252;
    unsigned long long seed = 0;
    bool antithetic = true;
    std::string initial_state = "good";
    std::string measure = "risk-neutral";
    double weight_good = -1.0;
    int threads = 0;
};

void add_ms_flags(CLI::App* cmd, MsFlags& f, bool require_seed) {
    cmd->add_option("--x0", f.x0)->capture_default_str();
    cmd->add_option("--cm", f.c_m)->capture_default_str();
    cmd->add_option("--rate,-r", f.rate)->capture_default_str();
    cmd->add_option("--horizon,-T", f.horizon)->capture_default_str();
    cmd->add_option("--theta-days", f.theta_days)->capture_default_str();
    cmd->add_option("--mu1", f.mu1, "annualized level drift, normal state")
        ->capture_default_str();
    cmd->add_option("--mu2", f.mu2, "annualized level drift, stressed state")
        ->capture_default_str();
    cmd->add_option("--sigma1", f.sigma1, "annualized volatility, normal state")
        ->capture_default_str();
    cmd->add_option("--sigma2", f.sigma2, "annualized volatility, stressed state")
        ->capture_default_str();
    cmd->add_option("--p", f.p, "daily P(normal -> stressed)")->capture_default_str();
    cmd->add_option("--q", f.q, "daily P(stressed -> normal)")->capture_default_str();
    cmd->add_option("--paths,-N", f.n_paths, "Monte Carlo paths")->capture_default_str();
    cmd->add_option("--steps-per-year", f.steps_per_year)->capture_default_str();
    auto* seed = cmd->add_option("--seed", f.seed, "RNG seed");
    if (require_seed) seed->required();
    cmd->add_flag("--antithetic,!--no-antithetic", f.antithetic, "antithetic pairing")
        ->capture_default_str();
    cmd->add_option("--initial-state", f.initial_state, "good|stressed|stationary")
        ->capture_default_str();
    cmd->add_option("--measure", f.measure, "risk-neutral|empirical")->capture_default_str();
    cmd->add_option("--weight-good", f.weight_good,
                    "blend weight on the normal start (enables the weighted premium)");
    cmd->add_option("--threads", f.threads, "worker threads (0 = auto)")
        ->default_val(env_threads());
}

int resolve_ms(const MsFlags& f, lp_regime& regime, lp_sim& sim) {
    regime = lp_regime{f.mu1, f.mu2, f.sigma1, f.sigma2, f.p, f.q};
    sim.n_paths = f.n_paths;
    sim.steps_per_year = f.steps_per_year;
    sim.seed = f.seed;
    sim.antithetic = f.antithetic ? 1 : 0;
    sim.n_threads = f.threads;
    if (int rc = parse_state(f.initial_state, sim.initial_state)) return rc;
    if (int rc = parse_measure(f.measure, sim.measure)) return rc;
    return 0;
}

int run_price_ms(const MsFlags& f, bool weighted) {
    lp_regime regime;
    lp_sim sim;
    if (int rc = resolve_ms(f, regime, sim)) return rc;
    if (weighted && (f.weight_good < 0.0 || f.weight_good > 1.0))
        return usage_error("--weight-good must lie in [0,1]");

    lp_contract terms{f.x0, f.c_m, 0.0, 0.0, f.horizon, f.theta_days};
    lp_result res;
    int rc = weighted
                 ? lp_price_ms_weighted(&terms, &regime, f.rate, &sim, f.weight_good, &res)
                 : lp_price_ms(&terms, &regime, f.rate, &sim, &res);
    if (rc) return fail(rc);

    json out;
    out["command"] = "price-ms";
    out["measure"] = sim.measure == LP_MEASURE_EMPIRICAL ? "empirical" : "risk-neutral";
    json inputs;
    inputs["x0"] = f.x0;
    inputs["c_m"] = f.c_m;
    inputs["rate"] = f.rate;
    inputs["horizon_years"] = f.horizon;
    inputs["theta_days"] = f.theta_days;
    inputs["mu1"] = f.mu1;
    inputs["mu2"] = f.mu2;
    inputs["sigma1"] = f.sigma1;
    inputs["sigma2"] = f.sigma2;
    inputs["p"] = f.p;
    inputs["q"] = f.q;
    inputs["n_paths"] = f.n_paths;
    inputs["steps_per_year"] = f.steps_per_year;
    inputs["seed"] = f.seed;
    inputs["antithetic"] = f.antithetic;
    if (weighted)
        inputs["weight_good"] = f.weight_good;
    else
        inputs["initial_state"] = f.initial_state;
    out["inputs"] = inputs;
    out["premium"] = res.m_r;
    out["premium_bps"] = res.m_r * kBps;
    out["std_error"] = res.std_error;
    out["std_error_bps"] = res.std_error * kBps;
    out["breach_fraction"] = res.breach_fraction;
    out["n_paths"] = res.n_paths;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_fit_hmm(const std::string& input, const std::string& format_name, int max_iter,
                double tol, int window_days, double vol_multiplier,
                const std::string& states_csv) {
    int format = 0;
    if (int rc = parse_format(format_name, format)) return rc;
    int rc = 0;
    SeriesPtr series = load_series(input, format, rc);
    if (rc) return fail(rc);

    lp_hmm* raw = nullptr;
    rc = lp_hmm_fit(series.get(), max_iter, tol, window_days, vol_multiplier, &raw);
    if (rc) return fail(rc);
    HmmPtr fit(raw, &lp_hmm_free);

    lp_regime params;
    double mean1, sd1, mean2, sd2, loglik, pi1, pi2;
    int iterations = 0, converged = 0;
    lp_hmm_params(fit.get(), &params);
    lp_hmm_daily(fit.get(), &mean1, &sd1, &mean2, &sd2);
    lp_hmm_stats(fit.get(), &loglik, &iterations, &converged);
    lp_hmm_stationary(fit.get(), &pi1, &pi2);

    size_t n = lp_hmm_state_count(fit.get());
    std::vector<int> states(n);
    std::vector<std::string> dates(n);
    for (size_t i = 0; i < n; ++i) {
        int y, m, d;
        lp_hmm_state(fit.get(), i, &states[i]);
        lp_series_row(series.get(), i, &y, &m, &d, nullptr);
        dates[i] = format_date(y, m, d);
    }

    json spans = json::array();
    for (size_t i = 0; i < n;) {
        if (states[i] != 2) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j + 1 < n && states[j + 1] == 2) ++j;
        spans.push_back(json{{"start", dates[i]}, {"end", dates[j]}});
        i = j + 1;
    }

    double hi = std::max(params.sigma1, params.sigma2);
    bool single_regime = hi > 0.0 && (params.sigma2 - params.sigma1) <= 0.05 * hi;

    json out;
    out["command"] = "fit-hmm";
    out["input"] = input;
    out["n_observations"] = n;
    out["log_likelihood"] = loglik;
    out["iterations"] = iterations;
    out["converged"] = converged != 0;
    out["annualized"] = json{{"mu1", params.mu1},
                             {"mu2", params.mu2},
                             {"sigma1", params.sigma1},
                             {"sigma2", params.sigma2}};
    out["daily"] =
        json{{"mean1", mean1}, {"sd1", sd1}, {"mean2", mean2}, {"sd2", sd2}};
    out["transition"] = json{{"p", params.p}, {"q", params.q}};
    out["stationary"] = json{{"normal", pi1}, {"stressed", pi2}};
    out["single_regime_flag"] = single_regime;
    out["crisis_spans"] = spans;
    std::cout << out.dump(2) << "\n";

    if (!states_csv.empty()) {
        std::ofstream os(states_csv);
        if (!os) return usage_error("cannot open '" + states_csv + "' for writing");
        os << "date,state\n";
        for (size_t i = 0; i < n; ++i) os << dates[i] << "," << states[i] << "\n";
    }
    return 0;
}

int build_grid(const std::vector<double>& explicit_grid, double lo, double hi, double step,
               bool have_range, std::vector<double>& out) {
    if (!explicit_grid.empty() && have_range)
        return usage_error("--grid and --min/--max/--step are mutually exclusive");
    if (!explicit_grid.empty()) {
        out = explicit_grid;
    } else if (have_range) {
        if (step <= 0.0) return usage_error("--step must be positive");
        for (double v = lo; v <= hi + 1e-12 * std::max(1.0, std::fabs(hi)); v += step)
            out.push_back(v);
    } else {
        return usage_error("sweep needs --grid or --min/--max/--step");
    }
    if (out.empty()) return usage_error("sweep grid is empty");
    for (size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) return usage_error("sweep grid must be strictly increasing");
    return 0;
}

int run_sweep(const std::string& axis, const std::vector<double>& grid,
              const std::string& output, const GbmFlags& gf, const MsFlags& mf) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!output.empty()) {
        file.open(output);
        if (!file) return usage_error("cannot open '" + output + "' for writing");
        os = &file;
    }
    char line[256];

    if (axis == "sigma" || axis == "theta") {
        int measure = 0;
        if (int rc = parse_measure(gf.measure, measure)) return rc;
        *os << "axis,value,premium,premium_bps\n";
        for (double v : grid) {
            GbmFlags point = gf;
            if (axis == "sigma")
                point.sigma = v;
            else
                point.theta_days = v;
            lp_gbm params;
            if (int rc = resolve_gbm(point, params)) return rc;
            lp_contract terms{point.x0, point.c_m, 0.0, 0.0, point.horizon, point.theta_days};
            lp_result res;
            if (int rc = lp_price_gbm(&terms, &params, measure, &res)) return fail(rc);
            std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g\n", axis.c_str(), v,
                          res.m_r, res.m_r * kBps);
            *os << line;
        }
        return 0;
    }
    if (axis == "sigma1") {
        *os << "axis,value,premium,premium_bps,std_error\n";
        for (double v : grid) {
            MsFlags point = mf;
            point.sigma1 = v;
            lp_regime regime;
            lp_sim sim;
            if (int rc = resolve_ms(point, regime, sim)) return rc;
            lp_contract terms{point.x0, point.c_m, 0.0, 0.0, point.horizon, point.theta_days};
            lp_result res;
            if (int rc = lp_price_ms(&terms, &regime, point.rate, &sim, &res)) return fail(rc);
            std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g\n", axis.c_str(), v,
                          res.m_r, res.m_r * kBps, res.std_error);
            *os << line;
        }
        return 0;
    }
    return usage_error("unknown axis '" + axis + "' (sigma|theta|sigma1)");
}

int run_backtest_cmd(const std::vector<std::string>& returns_paths, bool equal_weight,
                     const std::string& format_name, const std::string& rates_path,
                     const std::string& pricer_name, const lp_backtest_cfg& base,
                     const std::string& ledger_csv) {
    int format = 0;
    if (int rc = parse_format(format_name, format)) return rc;
    if (returns_paths.size() > 1 && !equal_weight)
        return usage_error("multiple --returns series require --equal-weight");

    std::vector<SeriesPtr> parts;
    std::vector<const lp_series*> raw_parts;
    for (const auto& path : returns_paths) {
        int rc = 0;
        SeriesPtr s = load_series(path, format, rc);
        if (rc) return fail(rc);
        raw_parts.push_back(s.get());
        parts.push_back(std::move(s));
    }
    SeriesPtr portfolio(nullptr, &lp_series_free);
    const lp_series* series = raw_parts.front();
    if (raw_parts.size() > 1) {
        lp_series* combined = nullptr;
        if (int rc = lp_series_equal_weight(raw_parts.data(), raw_parts.size(), &combined))
            return fail(rc);
        portfolio = SeriesPtr(combined, &lp_series_free);
        series = portfolio.get();
    }

    lp_rates* raw_rates = nullptr;
    if (int rc = lp_rates_load(rates_path.c_str(), &raw_rates)) return fail(rc);
    RatesPtr rates(raw_rates, &lp_rates_free);

    lp_backtest_cfg cfg = base;
    if (pricer_name == "gbm") {
        cfg.pricer = LP_PRICER_GBM;
    } else if (pricer_name == "ms") {
        cfg.pricer = LP_PRICER_MS;
    } else {
        return usage_error("unknown pricer '" + pricer_name + "' (gbm|ms)");
    }

    lp_ledger* raw_ledger = nullptr;
    if (int rc = lp_backtest_run(&cfg, series, rates.get(), &raw_ledger)) return fail(rc);
    LedgerPtr ledger(raw_ledger, &lp_ledger_free);

    if (!ledger_csv.empty()) {
        std::ofstream os(ledger_csv);
        if (!os) return usage_error("cannot open '" + ledger_csv + "' for writing");
        os << "date,investor,manager,reinsurer,regime_estimate,premium\n";
        char line[256];
        size_t n = lp_ledger_days(ledger.get());
        for (size_t i = 0; i < n; ++i) {
            int y, m, d, regime;
            double inv, man, rei, prem;
            lp_ledger_day(ledger.get(), i, &y, &m, &d, &inv, &man, &rei, &regime, &prem);
            std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%d,%.17g\n",
                          format_date(y, m, d).c_str(), inv, man, rei, regime, prem);
            os << line;
        }
    }

    // Human-readable period table on stderr; machine-readable JSON on stdout.
    std::fprintf(stderr, "%-3s %-10s %-10s %12s %12s %8s %8s %s\n", "i", "start", "end",
                 "investor_in", "premium_bps", "rate", "sigma", "breached");
    json periods = json::array();
    size_t np = lp_ledger_periods(ledger.get());
    for (size_t i = 0; i < np; ++i) {
        lp_period p;
        lp_ledger_period(ledger.get(), i, &p);
        std::string start = format_date(p.start_y, p.start_m, p.start_d);
        std::string end = format_date(p.end_y, p.end_m, p.end_d);
        std::fprintf(stderr, "%-3zu %-10s %-10s %12.6f %12.4f %8.4f %8.4f %s\n", i, start.c_str(),
                      end.c_str(), p.x_i, p.premium * kBps, p.rate, p.sigma_emp,
                      p.breached ? "yes" : "no");
        json jp;
        jp["start"] = start;
        jp["end"] = end;
        jp["investor_start"] = p.x_i;
        jp["premium"] = p.premium;
        jp["premium_bps"] = p.premium * kBps;
        jp["rate"] = p.rate;
        jp["sigma_emp"] = p.sigma_emp;
        jp["performance_fee"] = p.perf_fee;
        jp["breached"] = p.breached != 0;
        if (p.breached) {
            jp["breach_date"] = format_date(p.breach_y, p.breach_m, p.breach_d);
            jp["liquidation_date"] = format_date(p.liq_y, p.liq_m, p.liq_d);
        }
        jp["investor_end"] = p.investor_end;
        jp["manager_end"] = p.manager_end;
        jp["reinsurer_end"] = p.reinsurer_end;
        periods.push_back(jp);
    }

    double inv, man, rei;
    int n_periods, breached;
    lp_ledger_summary(ledger.get(), &inv, &man, &rei, &n_periods, &breached);
    json out;
    out["command"] = "backtest";
    out["pricer"] = pricer_name;
    out["n_periods"] = n_periods;
    out["breached"] = breached != 0;
    out["terminal"] = json{{"investor", inv}, {"manager", man}, {"reinsurer", rei}};
    out["n_ledger_days"] = lp_ledger_days(ledger.get());
    out["periods"] = periods;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"liqprem: first-loss liquidity-premium pricing toolkit"};
    app.require_subcommand(1);

    // price-gbm
    GbmFlags gbm;
    CLI::Option *gbm_drift, *gbm_mu;
    auto* cmd_gbm = app.add_subcommand("price-gbm", "closed-form GBM premium");
    add_gbm_flags(cmd_gbm, gbm, gbm_drift, gbm_mu);

    // price-ms
    MsFlags ms;
    auto* cmd_ms = app.add_subcommand("price-ms", "Markov-switching Monte Carlo premium");
    add_ms_flags(cmd_ms, ms, true);

    // fit-hmm
    std::string fit_input, fit_format = "levels", fit_states_csv;
    int fit_max_iter = 500, fit_window = 21;
    double fit_tol = 1e-8, fit_mult = 1.5;
    auto* cmd_fit = app.add_subcommand("fit-hmm", "two-state HMM calibration");
    cmd_fit->add_option("--input,-i", fit_input, "dated CSV of levels or returns")->required();
    cmd_fit->add_option("--format", fit_format, "levels|simple|log")->capture_default_str();
    cmd_fit->add_option("--max-iter", fit_max_iter)->capture_default_str();
    cmd_fit->add_option("--tol", fit_tol)->capture_default_str();
    cmd_fit->add_option("--window-days", fit_window, "rolling window for the initial labeling")
        ->capture_default_str();
    cmd_fit->add_option("--vol-multiplier", fit_mult, "threshold multiplier for the labeling")
        ->capture_default_str();
    cmd_fit->add_option("--states-csv", fit_states_csv, "write decoded states to this CSV");

    // sweep
    std::string sweep_axis, sweep_output;
    std::vector<double> sweep_grid;
    double sweep_min = 0.0, sweep_max = 0.0, sweep_step = 0.0;
    GbmFlags sweep_gbm;
    MsFlags sweep_ms;
    auto* cmd_sweep = app.add_subcommand("sweep", "premium curve along one axis");
    cmd_sweep->add_option("--axis", sweep_axis, "sigma|theta|sigma1")->required();
    cmd_sweep->add_option("--grid", sweep_grid, "explicit grid values")->delimiter(',');
    auto* opt_min = cmd_sweep->add_option("--min", sweep_min);
    auto* opt_max = cmd_sweep->add_option("--max", sweep_max);
    cmd_sweep->add_option("--step", sweep_step);
    cmd_sweep->add_option("--output,-o", sweep_output, "CSV path (default stdout)");
    CLI::Option *sweep_drift, *sweep_mu;
    add_gbm_flags(cmd_sweep, sweep_gbm, sweep_drift, sweep_mu);
    cmd_sweep->add_option("--mu1", sweep_ms.mu1)->capture_default_str();
    cmd_sweep->add_option("--mu2", sweep_ms.mu2)->capture_default_str();
    cmd_sweep->add_option("--sigma2", sweep_ms.sigma2)->capture_default_str();
    cmd_sweep->add_option("--p", sweep_ms.p)->capture_default_str();
    cmd_sweep->add_option("--q", sweep_ms.q)->capture_default_str();
    cmd_sweep->add_option("--paths,-N", sweep_ms.n_paths)->capture_default_str();
    cmd_sweep->add_option("--seed", sweep_ms.seed)->capture_default_str();
    cmd_sweep->add_flag("--antithetic,!--no-antithetic", sweep_ms.antithetic)
        ->capture_default_str();
    cmd_sweep->add_option("--initial-state", sweep_ms.initial_state)->capture_default_str();
    cmd_sweep->add_option("--threads", sweep_ms.threads)->default_val(env_threads());

    // backtest
    std::vector<std::string> bt_returns;
    bool bt_equal_weight = false;
    std::string bt_format = "levels", bt_rates, bt_pricer = "gbm", bt_ledger_csv;
    lp_backtest_cfg bt_cfg{};
    bt_cfg.theta_days = 1.0;
    bt_cfg.c_m = 0.1;
    bt_cfg.alpha_m = 0.5;
    bt_cfg.m_m = 0.0;
    bt_cfg.window_years = 2.0;
    bt_cfg.start_month = 4;
    bt_cfg.start_day = 1;
    bt_cfg.max_periods = 13;
    bt_cfg.mc = lp_sim{100000, 252, 1, 1, LP_STATE_NORMAL, LP_MEASURE_RISK_NEUTRAL, 0};
    bt_cfg.hmm_window_days = 21;
    bt_cfg.hmm_vol_multiplier = 1.5;
    auto* cmd_bt = app.add_subcommand("backtest", "rolling annual backtest with ledgers");
    cmd_bt->add_option("--returns", bt_returns, "dated CSV (repeat for a portfolio)")
        ->required();
    cmd_bt->add_flag("--equal-weight", bt_equal_weight,
                     "combine multiple series into a buy-and-hold portfolio");
    cmd_bt->add_option("--format", bt_format, "levels|simple|log")->capture_default_str();
    cmd_bt->add_option("--rates", bt_rates, "dated CSV of annual rates")->required();
    cmd_bt->add_option("--pricer", bt_pricer, "gbm|ms")->capture_default_str();
    cmd_bt->add_option("--theta-days", bt_cfg.theta_days)->capture_default_str();
    cmd_bt->add_option("--cm", bt_cfg.c_m)->capture_default_str();
    cmd_bt->add_option("--alpha", bt_cfg.alpha_m, "performance-fee share")
        ->capture_default_str();
    cmd_bt->add_option("--mm", bt_cfg.m_m, "upfront management fee")->capture_default_str();
    cmd_bt->add_option("--window-years", bt_cfg.window_years)->capture_default_str();
    cmd_bt->add_option("--start-month", bt_cfg.start_month)->capture_default_str();
    cmd_bt->add_option("--start-day", bt_cfg.start_day)->capture_default_str();
    cmd_bt->add_option("--max-periods", bt_cfg.max_periods)->capture_default_str();
    cmd_bt->add_option("--paths,-N", bt_cfg.mc.n_paths)->capture_default_str();
    cmd_bt->add_option("--seed", bt_cfg.mc.seed)->capture_default_str();
    bool bt_antithetic = true;
    cmd_bt->add_flag("--antithetic,!--no-antithetic", bt_antithetic)->capture_default_str();
    cmd_bt->add_option("--hmm-window-days", bt_cfg.hmm_window_days)->capture_default_str();
    cmd_bt->add_option("--vol-multiplier", bt_cfg.hmm_vol_multiplier)->capture_default_str();
    int bt_threads = 0;
    cmd_bt->add_option("--threads", bt_threads)->default_val(env_threads());
    cmd_bt->add_option("--ledger-csv", bt_ledger_csv, "write the daily ledger to this CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    gbm.has_drift = gbm_drift->count() > 0;
    gbm.has_mu_emp = gbm_mu->count() > 0;
    sweep_gbm.has_drift = sweep_drift->count() > 0;
    sweep_gbm.has_mu_emp = sweep_mu->count() > 0;

    if (cmd_gbm->parsed()) return run_price_gbm(gbm);
    if (cmd_ms->parsed()) return run_price_ms(ms, cmd_ms->count("--weight-good") > 0);
    if (cmd_fit->parsed())
        return run_fit_hmm(fit_input, fit_format, fit_max_iter, fit_tol, fit_window, fit_mult,
                           fit_states_csv);
    if (cmd_sweep->parsed()) {
        std::vector<double> grid;
        bool have_range = opt_min->count() > 0 || opt_max->count() > 0;
        if (int rc = build_grid(sweep_grid, sweep_min, sweep_max, sweep_step, have_range, grid))
            return rc;
        // The MS axis shares the GBM bundle's common terms.
        sweep_ms.x0 = sweep_gbm.x0;
        sweep_ms.c_m = sweep_gbm.c_m;
        sweep_ms.rate = sweep_gbm.rate;
        sweep_ms.horizon = sweep_gbm.horizon;
        sweep_ms.theta_days = sweep_gbm.theta_days;
        sweep_ms.measure = sweep_gbm.measure;
        return run_sweep(sweep_axis, grid, sweep_output, sweep_gbm, sweep_ms);
    }
    if (cmd_bt->parsed()) {
        bt_cfg.mc.antithetic = bt_antithetic ? 1 : 0;
        bt_cfg.mc.n_threads = bt_threads;
        return run_backtest_cmd(bt_returns, bt_equal_weight, bt_format, bt_rates, bt_pricer,
                                bt_cfg, bt_ledger_csv);
    }
    return 2;
}
