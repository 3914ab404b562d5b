#include "liqprem/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "liqprem/errors.hpp"
#include "liqprem/math.hpp"

namespace liqprem {

namespace {

constexpr double kVarianceFloor = 1e-8;  // daily variance; EM degeneracy guard
constexpr double kSdFloor = 1e-4;

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments sample_moments(std::span<const double> x) {
    Moments m;
    if (x.empty()) return m;
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    if (x.size() < 2) return m;
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return m;
}

Moments labeled_moments(std::span<const double> x, const std::vector<int>& labels, int which) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (labels[i] == which) {
            sum += x[i];
            ++n;
        }
    Moments m;
    if (n == 0) return m;
    m.mean = sum / static_cast<double>(n);
    if (n < 2) return m;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (labels[i] == which) ss += (x[i] - m.mean) * (x[i] - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(n - 1));
    return m;
}

double clamp_prob(double p, std::size_t n) {
    double lo = 1.0 / static_cast<double>(n);
    return std::clamp(p, lo, 1.0 - lo);
}

double gauss_density(double x, double mean, double sd) {
    double z = (x - mean) / sd;
    return norm_pdf(z) / sd;
}

HmmDailyModel model_from_init(const HmmInit& init) {
    HmmDailyModel m;
    double s = init.p + init.q;
    m.pi = s > 0.0 ? std::array<double, 2>{init.q / s, init.p / s}
                   : std::array<double, 2>{0.5, 0.5};
    m.a = {{{1.0 - init.p, init.p}, {init.q, 1.0 - init.q}}};
    m.mean = init.daily_mean;
    for (int i = 0; i < 2; ++i) m.sd[i] = std::max(init.daily_sd[i], kSdFloor);
    return m;
}

void relabel_low_vol_first(HmmDailyModel& m) {
    if (m.sd[0] <= m.sd[1]) return;
    std::swap(m.mean[0], m.mean[1]);
    std::swap(m.sd[0], m.sd[1]);
    std::swap(m.pi[0], m.pi[1]);
    auto a = m.a;
    m.a = {{{a[1][1], a[1][0]}, {a[0][1], a[0][0]}}};
}

// One EM sweep; returns the log-likelihood of the INPUT model and overwrites
// it with the re-estimated one. Non-finite intermediates surface as NaN.
double em_sweep(std::span<const double> x, HmmDailyModel& m) {
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> emit(n), alpha(n), beta(n);
    std::vector<double> scale(n);

    for (std::size_t t = 0; t < n; ++t)
        for (int i = 0; i < 2; ++i) emit[t][i] = gauss_density(x[t], m.mean[i], m.sd[i]);

    double ll = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double c = 0.0;
        for (int j = 0; j < 2; ++j) {
            double pred = t == 0 ? m.pi[j]
                                 : alpha[t - 1][0] * m.a[0][j] + alpha[t - 1][1] * m.a[1][j];
            alpha[t][j] = pred * emit[t][j];
            c += alpha[t][j];
        }
        if (!(c > 0.0) || !std::isfinite(c)) return std::numeric_limits<double>::quiet_NaN();
        alpha[t][0] /= c;
        alpha[t][1] /= c;
        scale[t] = c;
        ll += std::log(c);
    }
    beta[n - 1] = {1.0, 1.0};
    for (std::size_t t = n - 1; t-- > 0;)
        for (int i = 0; i < 2; ++i)
            beta[t][i] = (m.a[i][0] * emit[t + 1][0] * beta[t + 1][0] +
                          m.a[i][1] * emit[t + 1][1] * beta[t + 1][1]) /
                         scale[t + 1];

    // Accumulate the sufficient statistics.
    std::array<double, 2> gamma_sum{0.0, 0.0}, gamma_sum_t{0.0, 0.0};
    std::array<double, 2> mean_num{0.0, 0.0};
    std::array<std::array<double, 2>, 2> xi_sum{{{0.0, 0.0}, {0.0, 0.0}}};
    std::array<double, 2> gamma0{};
    std::vector<std::array<double, 2>> gamma(n);
    for (std::size_t t = 0; t < n; ++t) {
        double norm = alpha[t][0] * beta[t][0] + alpha[t][1] * beta[t][1];
        for (int i = 0; i < 2; ++i) gamma[t][i] = alpha[t][i] * beta[t][i] / norm;
        for (int i = 0; i < 2; ++i) {
            gamma_sum[i] += gamma[t][i];
            mean_num[i] += gamma[t][i] * x[t];
            if (t + 1 < n) gamma_sum_t[i] += gamma[t][i];
        }
        if (t == 0) gamma0 = gamma[t];
        if (t + 1 < n)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    xi_sum[i][j] += alpha[t][i] * m.a[i][j] * emit[t + 1][j] *
                                    beta[t + 1][j] / scale[t + 1];
    }

    HmmDailyModel next = m;
    next.pi = gamma0;
    for (int i = 0; i < 2; ++i) {
        double row = xi_sum[i][0] + xi_sum[i][1];
        if (row > 0.0)
            for (int j = 0; j < 2; ++j) next.a[i][j] = xi_sum[i][j] / row;
        if (gamma_sum[i] > 0.0) {
            next.mean[i] = mean_num[i] / gamma_sum[i];
            double var_num = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                double d = x[t] - next.mean[i];
                var_num += gamma[t][i] * d * d;
            }
            next.sd[i] = std::sqrt(std::max(var_num / gamma_sum[i], kVarianceFloor));
        }
    }
    m = next;
    return ll;
}

}  // namespace

HmmInit init_heuristic(std::span<const double> returns, int window_days,
                       double vol_multiplier) {
    const std::size_t n = returns.size();
    if (window_days < 2) throw std::invalid_argument("window_days must be at least 2");
    if (n <= static_cast<std::size_t>(window_days))
        throw std::invalid_argument("series shorter than the rolling window");

    double full_sd = sample_moments(returns).sd;
    const std::size_t w = static_cast<std::size_t>(window_days);
    std::vector<int> labels(n, 0);
    for (std::size_t i = w - 1; i < n; ++i) {
        double roll_sd = sample_moments(returns.subspan(i - (w - 1), w)).sd;
        labels[i] = roll_sd > vol_multiplier * full_sd ? 1 : 0;
    }
    for (std::size_t i = 0; i + 1 < w; ++i) labels[i] = labels[w - 1];  // backfill warmup

    auto count_label = [&](int which) {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), which));
    };
    if (count_label(0) < 2 || count_label(1) < 2) {
        // Degenerate labeling: split on the magnitude of the moves instead.
        std::vector<double> mags(returns.begin(), returns.end());
        for (double& v : mags) v = std::fabs(v);
        std::vector<double> sorted = mags;
        std::sort(sorted.begin(), sorted.end());
        double q75 = sorted[(3 * n) / 4];
        for (std::size_t i = 0; i < n; ++i) labels[i] = mags[i] > q75 ? 1 : 0;
    }

    HmmInit init;
    if (count_label(0) < 2 || count_label(1) < 2) {
        // Constant-ish series: nothing separates the states; return a generic
        // two-state seed around the global moments.
        Moments g = sample_moments(returns);
        double sd = std::max(g.sd, kSdFloor);
        init.daily_mean = {g.mean, g.mean};
        init.daily_sd = {sd, 2.0 * sd};
        init.p = 0.1;
        init.q = 0.1;
        return init;
    }

    std::size_t from0 = 0, to01 = 0, from1 = 0, to10 = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (labels[i] == 0) {
            ++from0;
            if (labels[i + 1] == 1) ++to01;
        } else {
            ++from1;
            if (labels[i + 1] == 0) ++to10;
        }
    }
    init.p = clamp_prob(static_cast<double>(to01) / static_cast<double>(from0), n);
    init.q = clamp_prob(static_cast<double>(to10) / static_cast<double>(from1), n);
    Moments m0 = labeled_moments(returns, labels, 0);
    Moments m1 = labeled_moments(returns, labels, 1);
    init.daily_mean = {m0.mean, m1.mean};
    init.daily_sd = {std::max(m0.sd, kSdFloor), std::max(m1.sd, kSdFloor)};
    if (init.daily_sd[0] > init.daily_sd[1]) {
        std::swap(init.daily_mean[0], init.daily_mean[1]);
        std::swap(init.daily_sd[0], init.daily_sd[1]);
        std::swap(init.p, init.q);
    }
    return init;
}

HmmFitResult baum_welch(std::span<const double> returns, const HmmInit& init,
                        int max_iter, double tol) {
    if (returns.size() < 50)
        throw std::invalid_argument("need at least 50 observations to fit");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");

    HmmDailyModel model = model_from_init(init);
    HmmFitResult res;
    bool retried = false;
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        HmmDailyModel candidate = model;
        double ll = em_sweep(returns, candidate);
        if (!std::isfinite(ll)) {
            if (retried) throw EstimationError("EM produced a non-finite likelihood twice");
            // Re-anchor the emission spreads on the full-sample sd so no
            // observation can underflow both states, then retry once.
            retried = true;
            double global_sd = std::max(sample_moments(returns).sd, kSdFloor);
            for (int i = 0; i < 2; ++i) model.sd[i] = std::max(model.sd[i], global_sd);
            --iter;
            continue;
        }
        model = candidate;
        res.log_likelihood_path.push_back(ll);
        res.n_iterations = iter + 1;
        if (iter > 0 && ll - prev_ll < tol) {
            res.converged = true;
            prev_ll = ll;
            break;
        }
        prev_ll = ll;
    }

    relabel_low_vol_first(model);
    res.log_likelihood = log_likelihood(returns, model);
    res.model = model;
    res.daily_means = model.mean;
    res.daily_sds = model.sd;
    res.regime = annualize(model.mean, model.sd, model.a[0][1], model.a[1][0]);
    res.decoded_states = viterbi(returns, model);
    return res;
}

double log_likelihood(std::span<const double> returns, const HmmDailyModel& model) {
    const std::size_t n = returns.size();
    if (n == 0) return 0.0;
    std::array<double, 2> alpha{};
    double ll = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        std::array<double, 2> next{};
        for (int j = 0; j < 2; ++j) {
            double pred = t == 0 ? model.pi[j]
                                 : alpha[0] * model.a[0][j] + alpha[1] * model.a[1][j];
            next[j] = pred * gauss_density(returns[t], model.mean[j], model.sd[j]);
        }
        double c = next[0] + next[1];
        if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
        alpha = {next[0] / c, next[1] / c};
        ll += std::log(c);
    }
    return ll;
}

std::vector<int> viterbi(std::span<const double> returns, const HmmDailyModel& model) {
    const std::size_t n = returns.size();
    std::vector<int> path(n);
    if (n == 0) return path;

    auto log_emit = [&](std::size_t t, int j) {
        double z = (returns[t] - model.mean[j]) / model.sd[j];
        return -0.5 * z * z - std::log(model.sd[j]);
    };
    std::array<double, 2> delta{std::log(model.pi[0]) + log_emit(0, 0),
                                std::log(model.pi[1]) + log_emit(0, 1)};
    std::vector<std::array<int, 2>> argmax(n);
    for (std::size_t t = 1; t < n; ++t) {
        std::array<double, 2> next{};
        for (int j = 0; j < 2; ++j) {
            double via0 = delta[0] + std::log(model.a[0][j]);
            double via1 = delta[1] + std::log(model.a[1][j]);
            argmax[t][j] = via0 >= via1 ? 0 : 1;  // ties resolve to the normal state
            next[j] = std::max(via0, via1) + log_emit(t, j);
        }
        delta = next;
    }
    int s = delta[0] >= delta[1] ? 0 : 1;
    for (std::size_t t = n; t-- > 0;) {
        path[t] = s + 1;
        if (t > 0) s = argmax[t][s];
    }
    return path;
}

std::vector<std::array<double, 2>> forward_filter(std::span<const double> returns,
                                                  const HmmDailyModel& model) {
    const std::size_t n = returns.size();
    std::vector<std::array<double, 2>> filt(n);
    std::array<double, 2> alpha{};
    for (std::size_t t = 0; t < n; ++t) {
        std::array<double, 2> next{};
        for (int j = 0; j < 2; ++j) {
            double pred = t == 0 ? model.pi[j]
                                 : alpha[0] * model.a[0][j] + alpha[1] * model.a[1][j];
            next[j] = pred * gauss_density(returns[t], model.mean[j], model.sd[j]);
        }
        double c = next[0] + next[1];
        if (!(c > 0.0)) {
            // Fall back to the predictive distribution under numeric underflow.
            next = t == 0 ? model.pi
                          : std::array<double, 2>{alpha[0] * model.a[0][0] + alpha[1] * model.a[1][0],
                                                  alpha[0] * model.a[0][1] + alpha[1] * model.a[1][1]};
            c = next[0] + next[1];
        }
        alpha = {next[0] / c, next[1] / c};
        filt[t] = alpha;
    }
    return filt;
}

RegimeParams annualize(const std::array<double, 2>& daily_means,
                       const std::array<double, 2>& daily_sds, double p, double q) {
    RegimeParams r;
    r.sigma1 = std::sqrt(kTradingDaysPerYear) * daily_sds[0];
    r.sigma2 = std::sqrt(kTradingDaysPerYear) * daily_sds[1];
    r.mu1 = kTradingDaysPerYear * daily_means[0] + 0.5 * r.sigma1 * r.sigma1;
    r.mu2 = kTradingDaysPerYear * daily_means[1] + 0.5 * r.sigma2 * r.sigma2;
    r.p = p;
    r.q = q;
    return r;
}

}  // namespace liqprem
