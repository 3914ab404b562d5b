#pragma once

#include <stdexcept>

namespace liqprem {

// Input files that do not conform to the documented CSV formats.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calibration failures (EM degeneracy after the retry path).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid data that cannot support the requested computation
// (insufficient history, truncated liquidation window, out-of-range lookup).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace liqprem
