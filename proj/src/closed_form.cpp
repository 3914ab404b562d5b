#include "liqprem/closed_form.hpp"

#include <cmath>
#include <stdexcept>

#include "liqprem/math.hpp"

namespace liqprem {

double hitting_density(double t_years, const HittingLawParams& law) {
    if (!(t_years > 0.0)) throw std::invalid_argument("hitting density requires t > 0");
    if (!(law.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (law.a == 0.0) throw std::invalid_argument("degenerate barrier a = 0");
    // Evaluated in log space: the t^{-3/2} prefactor overflows long before the
    // Gaussian factor underflows, but their sum of logs is well behaved.
    double dev = law.a - law.mu * t_years;
    double log_f = std::log(std::fabs(law.a)) - std::log(law.sigma)
                 - 0.5 * std::log(2.0 * M_PI * t_years * t_years * t_years)
                 - dev * dev / (2.0 * law.sigma * law.sigma * t_years);
    return std::exp(log_f);
}

double put_component_v1(double theta_years, double barrier, double r, double sigma,
                        Measure measure, std::optional<double> b) {
    if (!(theta_years >= 0.0)) throw std::invalid_argument("theta must be non-negative");
    if (!(barrier > 0.0)) throw std::invalid_argument("barrier must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (measure == Measure::empirical && !b)
        throw std::invalid_argument("empirical measure requires the drift b");
    if (theta_years == 0.0) return 0.0;

    double drift = measure == Measure::risk_neutral ? r : *b;
    double sq_t = std::sqrt(theta_years);
    double d1 = (drift + 0.5 * sigma * sigma) * sq_t / sigma;
    double d2 = d1 - sigma * sq_t;
    double growth = measure == Measure::risk_neutral
                        ? 1.0
                        : std::exp((drift - r) * theta_years);
    return barrier * (std::exp(-r * theta_years) * norm_cdf(-d2) - growth * norm_cdf(-d1));
}

double discounted_hitting_factor_v2(double horizon_years, double barrier, double x0,
                                    double r, double sigma, Measure measure,
                                    std::optional<double> b) {
    if (!(horizon_years > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(barrier > 0.0) || !(x0 > 0.0)) throw std::invalid_argument("levels must be positive");
    if (barrier > x0) throw std::invalid_argument("barrier above the initial value");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (measure == Measure::empirical && !b)
        throw std::invalid_argument("empirical measure requires the drift b");
    if (barrier == x0) return 1.0;  // immediate hit, e^{-r*0} = 1

    double drift = measure == Measure::risk_neutral ? r : *b;
    double mu = drift - 0.5 * sigma * sigma;
    double beta_sq = mu * mu + 2.0 * r * sigma * sigma;
    if (beta_sq < 0.0)
        throw std::invalid_argument("discount rate too negative for the transform");
    double beta = std::sqrt(beta_sq);
    double sig_sq = sigma * sigma;
    double a = std::log(barrier / x0);  // < 0
    double ratio = barrier / x0;
    double sq_t = sigma * std::sqrt(horizon_years);
    // delta = sign(ln(x0/barrier)) = +1 here since barrier < x0.
    double term_plus = std::pow(ratio, (mu + beta) / sig_sq)
                     * norm_cdf((a + beta * horizon_years) / sq_t);
    double term_minus = std::pow(ratio, (mu - beta) / sig_sq)
                      * norm_cdf((a - beta * horizon_years) / sq_t);
    return term_plus + term_minus;
}

PremiumResult premium_gbm(const ContractTerms& terms, const GbmParams& params,
                          Measure measure) {
    terms.validate();
    params.validate();
    double v1 = put_component_v1(terms.theta_years(), terms.barrier(), params.r,
                                 params.sigma, measure, params.b);
    double v2 = discounted_hitting_factor_v2(terms.horizon_years, terms.barrier(),
                                             terms.x0, params.r, params.sigma,
                                             measure, params.b);
    PremiumResult res;
    res.m_r = v1 * v2 / terms.x0;
    return res;
}

EmpiricalMoments empirical_moments(std::span<const double> daily_log_returns) {
    const std::size_t n = daily_log_returns.size();
    if (n < 2) throw std::invalid_argument("need at least 2 observations");
    double mean = 0.0;
    for (double x : daily_log_returns) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : daily_log_returns) {
        double d = x - mean;
        ss += d * d;
    }
    double daily_var = ss / static_cast<double>(n - 1);

    EmpiricalMoments m;
    m.mu_emp = kTradingDaysPerYear * mean;
    m.sigma_emp = std::sqrt(kTradingDaysPerYear * daily_var);
    m.b_hat = m.mu_emp + 0.5 * m.sigma_emp * m.sigma_emp;
    return m;
}

}  // namespace liqprem
