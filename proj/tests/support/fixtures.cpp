#include "support/fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <unistd.h>

namespace fixtures {

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate =
            base / ("liqprem_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
        std::error_code ec;
        if (std::filesystem::create_directory(candidate, ec)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("could not create a temp directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::vector<liqprem::Date> weekday_calendar(liqprem::Date start, std::size_t n) {
    std::vector<liqprem::Date> out;
    out.reserve(n);
    liqprem::Date d = start;
    while (out.size() < n) {
        std::chrono::weekday wd(d);
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d += std::chrono::days(1);
    }
    return out;
}

liqprem::Date make_date(int y, int m, int d) {
    return std::chrono::sys_days(std::chrono::year(y) / std::chrono::month(unsigned(m)) /
                                 std::chrono::day(unsigned(d)));
}

void write_dated_csv(const std::filesystem::path& file, const std::vector<liqprem::Date>& dates,
                     const std::vector<double>& values) {
    if (dates.size() != values.size())
        throw std::invalid_argument("date/value length mismatch in fixture");
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write fixture " + file.string());
    os << "date,value\n";
    char line[64];
    for (std::size_t i = 0; i < dates.size(); ++i) {
        std::snprintf(line, sizeof(line), "%s,%.17g\n",
                      liqprem::format_iso_date(dates[i]).c_str(), values[i]);
        os << line;
    }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write fixture " + file.string());
    os << text;
}

RegimeSample simulate_regime_sample(std::size_t n, double mean0, double sd0, double mean1,
                                    double sd1, double p, double q, std::uint64_t seed,
                                    int initial_state) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RegimeSample out;
    out.returns.reserve(n);
    out.states.reserve(n);
    int s = initial_state;
    for (std::size_t i = 0; i < n; ++i) {
        // State transition first, then the emission from the new state, so
        // the recorded state is the one that generated the observation.
        if (i > 0) {
            double u = unif(rng);
            if (s == 0 && u < p) s = 1;
            else if (s == 1 && u < q) s = 0;
        }
        double mean = s == 0 ? mean0 : mean1;
        double sd = s == 0 ? sd0 : sd1;
        out.returns.push_back(mean + sd * gauss(rng));
        out.states.push_back(s);
    }
    return out;
}

std::vector<double> smooth_levels(std::size_t n, double daily_log_drift, double wiggle,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> levels;
    levels.reserve(n);
    double log_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        levels.push_back(std::exp(log_x));
        log_x += daily_log_drift + wiggle * gauss(rng);
    }
    return levels;
}

}  // namespace fixtures
