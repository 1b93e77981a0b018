#pragma once

#include <algorithm>
#include <cmath>

namespace mvqa {

// The one tie tolerance shared by optimality verification, enumeration
// pruning and counting, so the three agree by construction.
inline bool approx_equal(double a, double b) {
  return std::abs(a - b) <= std::max(1e-12, 1e-9 * std::max(std::abs(a), std::abs(b)));
}

inline bool approx_less(double a, double b) { return a < b && !approx_equal(a, b); }

}  // namespace mvqa
