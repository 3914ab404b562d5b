#pragma once

#include <cstdint>
#include <optional>
#include <utility>

namespace liqprem {

enum class Measure { risk_neutral, empirical };

// First-loss contract: the manager's deposit c_m covers losses down to the
// barrier K = (1-c_m)*x0; the reinsurer covers losses beyond K for an upfront
// premium m_r (quoted as a fraction of x0).
struct ContractTerms {
    double x0 = 1.0;            // initial investment
    double c_m = 0.1;           // managerial deposit fraction, in (0,1)
    double alpha_m = 0.0;       // performance fee fraction, in [0,1)
    double m_m = 0.0;           // flat management fee fraction, in [0,1)
    double horizon_years = 1.0; // T
    double theta_days = 1.0;    // liquidation window, trading days, may be fractional

    double barrier() const { return (1.0 - c_m) * x0; }
    double theta_years() const { return theta_days / 252.0; }

    // Throws std::invalid_argument when the contract geometry is broken.
    void validate() const;
};

struct GbmParams {
    double r = 0.01;          // risk-free rate, annual, continuously compounded
    double sigma = 0.05;      // annual volatility, > 0
    std::optional<double> b;  // empirical drift, required for Measure::empirical

    void validate() const;
};

// Two-state market: state 1 is the normal (low volatility) regime, state 2
// the stressed one. p and q are daily switch probabilities:
//   p = P(next = stressed | current = normal)
//   q = P(next = normal   | current = stressed)
// so the one-step matrix is [[1-p, p], [q, 1-q]] and the long-run occupancy
// is pi = (q/(p+q), p/(p+q)).
struct RegimeParams {
    double mu1 = 0.0;    // annual arithmetic drift, normal state (empirical measure only)
    double mu2 = 0.0;    // annual arithmetic drift, stressed state
    double sigma1 = 0.05;
    double sigma2 = 0.10;
    double p = 0.02;     // daily P(normal -> stressed)
    double q = 0.08;     // daily P(stressed -> normal)

    void validate() const;
};

// (pi1, pi2) long-run occupancy of (normal, stressed). Requires p + q > 0.
std::pair<double, double> stationary_distribution(const RegimeParams& regime);

struct PremiumResult {
    double m_r = 0.0;                        // fraction of x0
    std::optional<double> std_error;         // MC only
    std::optional<std::int64_t> n_paths;     // MC only
    std::optional<double> breach_fraction;   // MC only
};

struct PartyValues {
    double investor = 0.0;
    double manager = 0.0;
    double reinsurer = 0.0;
};

// Reinsurer position at liquidation: premium compounded to tau+theta minus
// the shortfall below the barrier.
double reinsurer_payoff(const ContractTerms& terms, double x_at_eval,
                        double tau_plus_theta_years, double m_r, double r);

// Terminal split of the fund value among the three parties, evaluated at
// time t (t = T for a full-term contract, t = tau+theta after a breach).
// The three values always sum to x_terminal exactly.
PartyValues party_payoffs(const ContractTerms& terms, double x_terminal,
                          double m_r, double r, double t_years);

}  // namespace liqprem
