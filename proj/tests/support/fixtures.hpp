// Synthetic data builders shared by the test suites: weekday calendars,
// temp-file CSV writers, and a regime-switching return generator whose true
// state path is known.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "liqprem/returns_io.hpp"

namespace fixtures {

// Fresh directory under the system temp root; removed when the object dies.
class TempDir {
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

// n consecutive weekdays starting at the first weekday >= start.
std::vector<liqprem::Date> weekday_calendar(liqprem::Date start, std::size_t n);

liqprem::Date make_date(int y, int m, int d);

// Writes a "date,value" CSV; dates and values must have equal length.
void write_dated_csv(const std::filesystem::path& file, const std::vector<liqprem::Date>& dates,
                     const std::vector<double>& values);

void write_text(const std::filesystem::path& file, const std::string& text);

struct RegimeSample {
    std::vector<double> returns;  // daily log-returns
    std::vector<int> states;      // true generating state per return, 0/1
};

// Two-state Gaussian switching sample with std:: RNG (independent of the
// engine's stream construction). p = P(0 -> 1), q = P(1 -> 0).
RegimeSample simulate_regime_sample(std::size_t n, double mean0, double sd0, double mean1,
                                    double sd1, double p, double q, std::uint64_t seed,
                                    int initial_state = 0);

// Deterministic low-volatility growth levels: level[k] = 1.01^k scaled so the
// daily move never approaches a 10% first-loss barrier. rate_annual shifts
// the drift.
std::vector<double> smooth_levels(std::size_t n, double daily_log_drift, double wiggle,
                                  std::uint64_t seed);

}  // namespace fixtures
