#pragma once

#include <cmath>

namespace liqprem {

inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr double kBpsPerUnit = 1e4;

// Standard normal CDF via erfc; absolute error well under 1e-12 across the
// whole real line, which the premium formulas need in the tails.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

inline double norm_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

}  // namespace liqprem
