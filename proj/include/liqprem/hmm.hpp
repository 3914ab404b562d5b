#pragma once

#include <array>
#include <span>
#include <vector>

#include "liqprem/contract.hpp"

namespace liqprem {

// Two-state Gaussian HMM on daily log-returns, state 0 = normal, 1 = stressed.
// a[i][j] = P(state j tomorrow | state i today).
struct HmmDailyModel {
    std::array<double, 2> pi{0.5, 0.5};  // initial state distribution
    std::array<std::array<double, 2>, 2> a{{{0.98, 0.02}, {0.08, 0.92}}};
    std::array<double, 2> mean{0.0, 0.0};  // daily
    std::array<double, 2> sd{0.003, 0.012};
};

struct HmmInit {
    std::array<double, 2> daily_mean{0.0, 0.0};
    std::array<double, 2> daily_sd{0.003, 0.012};
    double p = 0.02;  // daily P(normal -> stressed)
    double q = 0.08;  // daily P(stressed -> normal)
};

struct HmmFitResult {
    HmmDailyModel model;                     // fitted daily parameters
    RegimeParams regime;                     // annualized view of the same fit
    std::array<double, 2> daily_means{};
    std::array<double, 2> daily_sds{};
    double log_likelihood = 0.0;
    std::vector<double> log_likelihood_path;  // one entry per EM iteration
    int n_iterations = 0;
    bool converged = false;
    std::vector<int> decoded_states;          // Viterbi path over {1,2}
};

// Rolling-volatility labeling: a day is stressed when the trailing
// window_days sample sd exceeds vol_multiplier times the full-sample sd.
// Degenerate labelings fall back to a quantile split on |returns|.
HmmInit init_heuristic(std::span<const double> returns, int window_days = 21,
                       double vol_multiplier = 1.5);

// Scaled forward-backward EM. Stops when the log-likelihood gain drops below
// tol or after max_iter sweeps. State 0 is relabeled to the lower-volatility
// state after convergence. Requires >= 50 observations.
HmmFitResult baum_welch(std::span<const double> returns, const HmmInit& init,
                        int max_iter = 500, double tol = 1e-8);

// Log-likelihood of the data under the model (scaled forward pass).
double log_likelihood(std::span<const double> returns, const HmmDailyModel& model);

// Most likely state sequence over {1,2}, log-space dynamic program.
std::vector<int> viterbi(std::span<const double> returns, const HmmDailyModel& model);

// Filtered state probabilities P(state = i | returns up to t), one row per
// observation. Used for day-by-day regime estimates without look-ahead.
std::vector<std::array<double, 2>> forward_filter(std::span<const double> returns,
                                                  const HmmDailyModel& model);

// Daily fit -> annual RegimeParams: sigma_state = sqrt(252) * daily_sd,
// mu_state = 252 * daily_mean + sigma_state^2 / 2 (arithmetic drift),
// p and q stay daily.
RegimeParams annualize(const std::array<double, 2>& daily_means,
                       const std::array<double, 2>& daily_sds, double p, double q);

}  // namespace liqprem
