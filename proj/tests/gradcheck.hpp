#pragma once

#include <algorithm>
#include <cmath>

namespace gradcheck {

// |a - b| / max(|a|, |b|), with the denominator floored so that gradients
// that are zero up to rounding do not blow the ratio up.
inline double relative_error(double a, double b, double floor = 1e-4) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace gradcheck
