#pragma once

// Window extractor: a tanh-shaped, learnable mapping from Hounsfield units
// to a bounded response.
//
//   tau(s)  = (tanh(g) + 1) / h * (s - m + h*d)
//   W(s)    = ((a+1) e^tau - (b+1) e^-tau) / ((a+1) e^tau + (b+1) e^-tau) + k
//
// a, b, d, g, k are learnable; m (level anchor) and h (range rectification)
// are fixed once the stack is initialised.

#include <cmath>
#include <cstddef>
#include <limits>

#include "autowindow/bisection.hpp"
#include "autowindow/errors.hpp"

namespace autowindow {

inline constexpr double kAsymmetryFloor = -1.0 + 1e-6;
inline constexpr std::size_t kLearnablePerWindow = 5;

struct HuRange {
  int lo = -1024;
  int hi = 3072;

  constexpr int span() const { return hi - lo; }
  constexpr bool valid() const { return lo < hi; }
  bool operator==(const HuRange&) const = default;
};

template <typename Scalar>
struct WindowParams {
  Scalar a = 0;  // negative-side asymmetry, > -1
  Scalar b = 0;  // positive-side asymmetry, > -1
  Scalar d = 0;  // level shift in units of h
  Scalar g = 0;  // width control through tanh(g) + 1
  Scalar k = 0;  // response offset
  Scalar m = 0;  // HU, fixed
  Scalar h = 1;  // HU, fixed, > 0

  bool operator==(const WindowParams&) const = default;

  bool valid() const {
    return a > Scalar(-1) && b > Scalar(-1) && h > Scalar(0) && std::isfinite(a) &&
           std::isfinite(b) && std::isfinite(d) && std::isfinite(g) && std::isfinite(k) &&
           std::isfinite(m) && std::isfinite(h);
  }

  // tanh(g) + 1, always in (0, 2].
  Scalar width_gain() const { return std::tanh(g) + Scalar(1); }
  // d tau / d s.
  Scalar beta() const { return width_gain() / h; }
  // HU where tau = 0.
  Scalar level() const { return m - h * d; }

  template <typename Other>
  WindowParams<Other> cast() const {
    return {Other(a), Other(b), Other(d), Other(g), Other(k), Other(m), Other(h)};
  }
};

using WindowParamsd = WindowParams<double>;

template <typename Scalar>
Scalar tau(const WindowParams<Scalar>& p, Scalar s) {
  return p.beta() * (s - p.m + p.h * p.d);
}

namespace detail {

// Core mapping (without k) and its tau-derivative 4AB/D^2, both evaluated
// through e^{-2|tau|} so that neither overflows for large |tau|.
template <typename Scalar>
struct CoreEval {
  Scalar value;
  Scalar dtau;
};

template <typename Scalar>
CoreEval<Scalar> core(Scalar A, Scalar B, Scalar t) {
  if (t >= Scalar(0)) {
    const Scalar e = std::exp(Scalar(-2) * t);
    const Scalar den = A + B * e;
    return {(A - B * e) / den, Scalar(4) * A * B * e / (den * den)};
  }
  const Scalar e = std::exp(Scalar(2) * t);
  const Scalar den = A * e + B;
  return {(A * e - B) / den, Scalar(4) * A * B * e / (den * den)};
}

}  // namespace detail

template <typename Scalar>
Scalar forward(const WindowParams<Scalar>& p, Scalar s) {
  if (!std::isfinite(s)) throw DomainError("window forward: non-finite input");
  return detail::core(p.a + Scalar(1), p.b + Scalar(1), tau(p, s)).value + p.k;
}

// Response at tau = 0, i.e. at s = m - h*d: (a - b) / (a + b + 2) + k.
template <typename Scalar>
Scalar center_response(const WindowParams<Scalar>& p) {
  return (p.a - p.b) / (p.a + p.b + Scalar(2)) + p.k;
}

// d theta / d a and d theta / d b of the center response.
template <typename Scalar>
Scalar center_response_da(const WindowParams<Scalar>& p) {
  const Scalar den = p.a + p.b + Scalar(2);
  return (Scalar(2) * p.b + Scalar(2)) / (den * den);
}

template <typename Scalar>
Scalar center_response_db(const WindowParams<Scalar>& p) {
  const Scalar den = p.a + p.b + Scalar(2);
  return (Scalar(-2) * p.a - Scalar(2)) / (den * den);
}

// dW/ds = beta * 4(a+1)(b+1) / ((a+1)e^tau + (b+1)e^-tau)^2.
template <typename Scalar>
Scalar slope(const WindowParams<Scalar>& p, Scalar s) {
  return p.beta() * detail::core(p.a + Scalar(1), p.b + Scalar(1), tau(p, s)).dtau;
}

// d2W/ds2 = -2 beta^2 (W - k) dW/dtau.
template <typename Scalar>
Scalar second_derivative(const WindowParams<Scalar>& p, Scalar s) {
  const auto c = detail::core(p.a + Scalar(1), p.b + Scalar(1), tau(p, s));
  const Scalar beta = p.beta();
  return Scalar(-2) * beta * beta * c.value * c.dtau;
}

// Function whose sign equals the sign of d2W/ds2. Strictly decreasing in s
// with a single root, which is the inflection point.
template <typename Scalar>
Scalar curvature_sign(const WindowParams<Scalar>& p, Scalar s) {
  return -detail::core(p.a + Scalar(1), p.b + Scalar(1), tau(p, s)).value;
}

// Closed-form inflection tau: (a+1) e^tau = (b+1) e^-tau.
template <typename Scalar>
Scalar inflection_tau(const WindowParams<Scalar>& p) {
  return Scalar(0.5) * std::log((p.b + Scalar(1)) / (p.a + Scalar(1)));
}

// Inflection point located by bisection over the HU range.
template <typename Scalar>
Scalar inflection_root(const WindowParams<Scalar>& p, const HuRange& range) {
  BisectionTolerance<Scalar> tol;
  tol.value = Scalar(1e-10);
  tol.width = Scalar(1e-9) * p.h;
  return bisect<Scalar>([&](Scalar s) { return curvature_sign(p, s); }, Scalar(range.lo),
                        Scalar(range.hi), tol);
}

// Full width at |W - k| = tanh(1) for the symmetric case a = b = 0.
template <typename Scalar>
Scalar effective_width(const WindowParams<Scalar>& p) {
  return Scalar(2) * p.h / p.width_gain();
}

template <typename Scalar>
constexpr std::size_t count_learnable(const WindowParams<Scalar>&) {
  return kLearnablePerWindow;
}

template <typename Scalar>
void clamp_asymmetry(WindowParams<Scalar>& p) {
  const Scalar floor = Scalar(kAsymmetryFloor);
  if (p.a < floor) p.a = floor;
  if (p.b < floor) p.b = floor;
}

}  // namespace autowindow
