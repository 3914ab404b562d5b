#pragma once

#include <optional>
#include <span>

#include "liqprem/contract.hpp"

namespace liqprem {

// Law of the first time the log-price Y_t = mu*t + sigma*W_t reaches level a.
struct HittingLawParams {
    double a;      // log-barrier ln(K/x0), < 0 for K < x0
    double mu;     // log-process drift: r - sigma^2/2 (risk-neutral) or b - sigma^2/2
    double sigma;  // annual volatility, > 0
};

// First-passage (inverse Gaussian) density at t, per year. Requires t > 0.
double hitting_density(double t_years, const HittingLawParams& law);

// Discounted value at breach of the liquidation put: an at-the-money put on
// the fund, struck and issued at the barrier, with tenor theta. Under the
// empirical measure the drift b replaces r inside the distribution; the
// discount rate stays r.
double put_component_v1(double theta_years, double barrier, double r, double sigma,
                        Measure measure, std::optional<double> b = std::nullopt);

// E[e^{-r*tau} 1{tau <= T}] for the first passage of the fund to the barrier.
// Requires 0 < barrier <= x0; equals 1 when barrier == x0.
double discounted_hitting_factor_v2(double horizon_years, double barrier, double x0,
                                    double r, double sigma, Measure measure,
                                    std::optional<double> b = std::nullopt);

// Upfront second-loss premium as a fraction of x0: V1(theta) * V2(T) / x0.
PremiumResult premium_gbm(const ContractTerms& terms, const GbmParams& params,
                          Measure measure);

struct EmpiricalMoments {
    double mu_emp;     // 252 * mean daily log-return
    double sigma_emp;  // sqrt(252) * sample sd of daily log-returns
    double b_hat;      // mu_emp + sigma_emp^2 / 2
};

// Annualized moment estimates from daily log-returns. Requires >= 2 points.
EmpiricalMoments empirical_moments(std::span<const double> daily_log_returns);

}  // namespace liqprem
