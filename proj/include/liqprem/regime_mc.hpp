#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "liqprem/contract.hpp"
#include "liqprem/rng.hpp"

namespace liqprem {

enum class InitialState { normal, stressed, stationary_draw };

struct SimConfig {
    std::int64_t n_paths = 100000;
    int steps_per_year = 252;
    std::uint64_t seed = 1;
    bool antithetic = true;  // pairs flip the Gaussians, never the chain
    InitialState initial_state = InitialState::normal;
    Measure measure = Measure::risk_neutral;
    int n_threads = 0;  // 0 = hardware concurrency; results do not depend on it

    void validate() const;
};

struct PathOutcome {
    bool breached = false;
    double tau_years = 0.0;            // first grid time at/below the barrier
    double x_at_eval = 0.0;            // fund value at tau + theta
    double discounted_shortfall = 0.0; // e^{-r(tau+theta)} [K - X_{tau+theta}]^+
};

// States over {1,2}, length n_steps + 1, element 0 = initial_state. The
// increment over (t_{i-1}, t_i] is governed by the state at t_i.
std::vector<std::uint8_t> simulate_chain(const RegimeParams& regime,
                                         std::uint8_t initial_state,
                                         std::size_t n_steps, std::mt19937_64& rng);

// Walks one path along a fixed state sequence. gaussian_sign = -1 yields the
// antithetic partner. Monitoring runs on the daily grid over (0, T]; after a
// breach the path continues theta more days (a fractional tail becomes one
// scaled partial step) to the liquidation value.
PathOutcome simulate_path(std::span<const std::uint8_t> states, const RegimeParams& regime,
                          const ContractTerms& terms, double r, Measure measure,
                          int steps_per_year, double gaussian_sign, NormalSampler& gauss);

// Mean discounted shortfall across paths = the fair upfront premium, as a
// fraction of x0, with standard error and breach diagnostics.
PremiumResult estimate_premium_ms(const SimConfig& config, const RegimeParams& regime,
                                  const ContractTerms& terms, double r);

// Convex combination of two premium estimates (e.g. by long-run occupancy).
PremiumResult weighted_premium(const PremiumResult& good, const PremiumResult& stressed,
                               double w_good);

int resolve_thread_count(int requested);

}  // namespace liqprem
