#include "liqprem/contract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liqprem {

void ContractTerms::validate() const {
    if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
    if (!(c_m > 0.0 && c_m < 1.0)) throw std::invalid_argument("c_m must lie in (0,1)");
    if (!(alpha_m >= 0.0 && alpha_m < 1.0)) throw std::invalid_argument("alpha_m must lie in [0,1)");
    if (!(m_m >= 0.0 && m_m < 1.0)) throw std::invalid_argument("m_m must lie in [0,1)");
    if (!(horizon_years > 0.0)) throw std::invalid_argument("horizon_years must be positive");
    if (!(theta_days >= 0.0)) throw std::invalid_argument("theta_days must be non-negative");
}

void GbmParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!std::isfinite(r)) throw std::invalid_argument("r must be finite");
    if (b && !std::isfinite(*b)) throw std::invalid_argument("b must be finite");
}

void RegimeParams::validate() const {
    if (!(sigma1 > 0.0 && sigma2 > 0.0))
        throw std::invalid_argument("state volatilities must be positive");
    if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("transition probabilities must lie in [0,1]");
    if (!std::isfinite(mu1) || !std::isfinite(mu2))
        throw std::invalid_argument("state drifts must be finite");
}

std::pair<double, double> stationary_distribution(const RegimeParams& regime) {
    regime.validate();
    double s = regime.p + regime.q;
    if (!(s > 0.0))
        throw std::invalid_argument("stationary distribution undefined for p = q = 0");
    return {regime.q / s, regime.p / s};
}

double reinsurer_payoff(const ContractTerms& terms, double x_at_eval,
                        double tau_plus_theta_years, double m_r, double r) {
    terms.validate();
    if (x_at_eval < 0.0) throw std::invalid_argument("fund value must be non-negative");
    if (tau_plus_theta_years < 0.0) throw std::invalid_argument("evaluation time must be non-negative");
    double shortfall = std::max(terms.barrier() - x_at_eval, 0.0);
    return m_r * std::exp(r * tau_plus_theta_years) * terms.x0 - shortfall;
}

PartyValues party_payoffs(const ContractTerms& terms, double x_terminal,
                          double m_r, double r, double t_years) {
    terms.validate();
    if (x_terminal < 0.0) throw std::invalid_argument("fund value must be non-negative");

    double x0 = terms.x0;
    double premium_grown = m_r * std::exp(r * t_years) * x0;
    double call = std::max(x_terminal - (1.0 + terms.m_m) * x0, 0.0);  // performance fee base
    double put_x0 = std::max(x0 - x_terminal, 0.0);                    // first-dollar protection
    double put_k = std::max(terms.barrier() - x_terminal, 0.0);        // second-loss shortfall

    PartyValues v;
    v.investor = x_terminal - terms.m_m * x0 - premium_grown - terms.alpha_m * call + put_x0;
    v.manager = terms.m_m * x0 + terms.alpha_m * call - put_x0 + put_k;
    v.reinsurer = premium_grown - put_k;
    return v;
}

}  // namespace liqprem
