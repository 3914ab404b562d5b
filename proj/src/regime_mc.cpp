#include "liqprem/regime_mc.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "liqprem/math.hpp"

namespace liqprem {

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
    if (antithetic && n_paths % 2 != 0)
        throw std::invalid_argument("antithetic sampling needs an even n_paths");
    if (steps_per_year < 1) throw std::invalid_argument("steps_per_year must be positive");
    if (n_threads < 0) throw std::invalid_argument("n_threads must be non-negative");
}

std::vector<std::uint8_t> simulate_chain(const RegimeParams& regime,
                                         std::uint8_t initial_state,
                                         std::size_t n_steps, std::mt19937_64& rng) {
    if (initial_state != 1 && initial_state != 2)
        throw std::invalid_argument("initial state must be 1 or 2");
    std::vector<std::uint8_t> states(n_steps + 1);
    states[0] = initial_state;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        double u = uniform01(rng);
        if (states[i - 1] == 1)
            states[i] = u < regime.p ? 2 : 1;
        else
            states[i] = u < regime.q ? 1 : 2;
    }
    return states;
}

PathOutcome simulate_path(std::span<const std::uint8_t> states, const RegimeParams& regime,
                          const ContractTerms& terms, double r, Measure measure,
                          int steps_per_year, double gaussian_sign, NormalSampler& gauss) {
    const double spy = static_cast<double>(steps_per_year);
    const double dt = 1.0 / spy;
    const double sqrt_dt = std::sqrt(dt);
    const auto monitor_steps =
        static_cast<std::size_t>(std::llround(terms.horizon_years * spy));
    const double theta_steps = terms.theta_days * (spy / 252.0);
    const auto full_theta = static_cast<std::size_t>(std::floor(theta_steps));
    const double frac_theta = theta_steps - static_cast<double>(full_theta);
    const std::size_t needed = monitor_steps + full_theta + (frac_theta > 0.0 ? 1 : 0);
    if (states.size() < needed + 1)
        throw std::invalid_argument("state sequence shorter than the simulation grid");

    const double log_barrier = std::log(terms.barrier() / terms.x0);

    auto state_drift = [&](std::uint8_t s) {
        if (measure == Measure::risk_neutral) return r;
        return s == 1 ? regime.mu1 : regime.mu2;
    };
    auto state_sigma = [&](std::uint8_t s) { return s == 1 ? regime.sigma1 : regime.sigma2; };

    PathOutcome out;
    double log_x = 0.0;
    std::size_t breach_step = 0;
    for (std::size_t i = 1; i <= monitor_steps; ++i) {
        double sig = state_sigma(states[i]);
        log_x += (state_drift(states[i]) - 0.5 * sig * sig) * dt +
                 sig * sqrt_dt * gaussian_sign * gauss.next();
        if (log_x <= log_barrier) {
            out.breached = true;
            breach_step = i;
            break;
        }
    }
    if (!out.breached) return out;

    for (std::size_t j = 1; j <= full_theta; ++j) {
        double sig = state_sigma(states[breach_step + j]);
        log_x += (state_drift(states[breach_step + j]) - 0.5 * sig * sig) * dt +
                 sig * sqrt_dt * gaussian_sign * gauss.next();
    }
    if (frac_theta > 0.0) {
        double part_dt = frac_theta * dt;
        std::uint8_t s = states[breach_step + full_theta + 1];
        double sig = state_sigma(s);
        log_x += (state_drift(s) - 0.5 * sig * sig) * part_dt +
                 sig * std::sqrt(part_dt) * gaussian_sign * gauss.next();
    }

    out.tau_years = static_cast<double>(breach_step) * dt;
    out.x_at_eval = terms.x0 * std::exp(log_x);
    double horizon = out.tau_years + theta_steps * dt;
    double shortfall = std::max(terms.barrier() - out.x_at_eval, 0.0);
    out.discounted_shortfall = std::exp(-r * horizon) * shortfall;
    return out;
}

namespace {

struct BlockStats {
    double sum = 0.0;     // estimator contributions
    double sum_sq = 0.0;
    std::int64_t breaches = 0;
};

// Kahan-compensated accumulator; blocks are folded in index order so the
// result is identical for any worker count.
struct Compensated {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

PremiumResult estimate_premium_ms(const SimConfig& config, const RegimeParams& regime,
                                  const ContractTerms& terms, double r) {
    config.validate();
    regime.validate();
    terms.validate();

    const double spy = static_cast<double>(config.steps_per_year);
    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(terms.horizon_years * spy)) +
        static_cast<std::size_t>(std::ceil(terms.theta_days * (spy / 252.0)));

    // A unit is one antithetic pair, or one path when antithetic is off.
    const std::int64_t n_units = config.antithetic ? config.n_paths / 2 : config.n_paths;
    const std::int64_t paths_per_unit = config.antithetic ? 2 : 1;
    auto [pi1, pi2] = config.initial_state == InitialState::stationary_draw
                          ? stationary_distribution(regime)
                          : std::pair<double, double>{0.0, 0.0};
    (void)pi2;

    constexpr std::int64_t kBlock = 4096;
    const auto n_blocks = static_cast<std::size_t>((n_units + kBlock - 1) / kBlock);
    std::vector<BlockStats> blocks(n_blocks);

    auto run_unit = [&](std::int64_t u, BlockStats& acc) {
        std::mt19937_64 chain_rng = substream(config.seed, static_cast<std::uint64_t>(u), 0);
        std::uint8_t init_state = 1;
        switch (config.initial_state) {
            case InitialState::normal: init_state = 1; break;
            case InitialState::stressed: init_state = 2; break;
            case InitialState::stationary_draw:
                init_state = uniform01(chain_rng) < pi1 ? 1 : 2;
                break;
        }
        auto states = simulate_chain(regime, init_state, n_steps, chain_rng);

        double unit_sum = 0.0;
        for (std::int64_t m = 0; m < paths_per_unit; ++m) {
            NormalSampler gauss(substream(config.seed, static_cast<std::uint64_t>(u), 1));
            double sign = m == 0 ? 1.0 : -1.0;
            PathOutcome o = simulate_path(states, regime, terms, r, config.measure,
                                          config.steps_per_year, sign, gauss);
            unit_sum += o.discounted_shortfall / terms.x0;
            if (o.breached) ++acc.breaches;
        }
        double z = unit_sum / static_cast<double>(paths_per_unit);
        acc.sum += z;
        acc.sum_sq += z * z;
    };

    const int workers = std::min<int>(resolve_thread_count(config.n_threads),
                                      static_cast<int>(n_blocks));
    std::atomic<std::size_t> next_block{0};
    auto worker = [&] {
        for (;;) {
            std::size_t blk = next_block.fetch_add(1);
            if (blk >= n_blocks) return;
            std::int64_t lo = static_cast<std::int64_t>(blk) * kBlock;
            std::int64_t hi = std::min<std::int64_t>(lo + kBlock, n_units);
            for (std::int64_t u = lo; u < hi; ++u) run_unit(u, blocks[blk]);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    Compensated sum, sum_sq;
    std::int64_t breaches = 0;
    for (const auto& b : blocks) {
        sum.add(b.sum);
        sum_sq.add(b.sum_sq);
        breaches += b.breaches;
    }

    const double n = static_cast<double>(n_units);
    double mean = sum.sum / n;
    PremiumResult res;
    res.m_r = mean;
    res.n_paths = config.n_paths;
    res.breach_fraction =
        static_cast<double>(breaches) / static_cast<double>(config.n_paths);
    if (n_units > 1) {
        double var = std::max(0.0, (sum_sq.sum - n * mean * mean) / (n - 1.0));
        res.std_error = std::sqrt(var / n);
    } else {
        res.std_error = 0.0;
    }
    return res;
}

PremiumResult weighted_premium(const PremiumResult& good, const PremiumResult& stressed,
                               double w_good) {
    if (!(w_good >= 0.0 && w_good <= 1.0))
        throw std::invalid_argument("w_good must lie in [0,1]");
    double w2 = 1.0 - w_good;
    PremiumResult res;
    res.m_r = w_good * good.m_r + w2 * stressed.m_r;
    if (good.std_error && stressed.std_error)
        res.std_error = std::sqrt(w_good * w_good * *good.std_error * *good.std_error +
                                  w2 * w2 * *stressed.std_error * *stressed.std_error);
    if (good.n_paths && stressed.n_paths) res.n_paths = *good.n_paths + *stressed.n_paths;
    if (good.breach_fraction && stressed.breach_fraction)
        res.breach_fraction = w_good * *good.breach_fraction + w2 * *stressed.breach_fraction;
    return res;
}

}  // namespace liqprem
