#pragma once

#include <cmath>
#include <string>

#include "autowindow/errors.hpp"

namespace autowindow {

template <typename Scalar>
struct BisectionTolerance {
  Scalar value = Scalar(1e-10);  // stop once |f(x)| drops below this
  Scalar width = Scalar(1e-9);   // or once the bracket is narrower than this
  int max_iterations = 400;
};

// Root of a continuous function that changes sign over [lower, upper].
// Throws RootNotBracketed when f(lower) and f(upper) share a sign.
template <typename Scalar, typename Function>
Scalar bisect(Function&& f, Scalar lower, Scalar upper,
              const BisectionTolerance<Scalar>& tol = {}) {
  Scalar f_lower = f(lower);
  Scalar f_upper = f(upper);
  if (f_lower == Scalar(0)) return lower;
  if (f_upper == Scalar(0)) return upper;
  if (std::signbit(f_lower) == std::signbit(f_upper)) {
    throw RootNotBracketed("bisect: no sign change over [" + std::to_string(lower) + ", " +
                           std::to_string(upper) + "]");
  }
  for (int it = 0; it < tol.max_iterations; ++it) {
    const Scalar middle = lower + (upper - lower) / Scalar(2);
    // Interval has collapsed to a single ULP.
    if (middle == lower || middle == upper) return middle;
    const Scalar f_middle = f(middle);
    if (std::abs(f_middle) < tol.value || (upper - lower) < tol.width) return middle;
    if (std::signbit(f_middle) == std::signbit(f_lower)) {
      lower = middle;
      f_lower = f_middle;
    } else {
      upper = middle;
    }
  }
  return lower + (upper - lower) / Scalar(2);
}

}  // namespace autowindow
