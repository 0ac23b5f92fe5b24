#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "autowindow/window.hpp"

namespace autowindow {

// Partials of a single extractor response W(s).
template <typename Scalar>
struct ParamGradient {
  Scalar d_a = 0;
  Scalar d_b = 0;
  Scalar d_d = 0;
  Scalar d_g = 0;
  Scalar d_k = 0;
  Scalar d_input = 0;
  // Fixed parameters: reported for diagnostics, never applied.
  Scalar d_m = 0;
  Scalar d_h = 0;

  Eigen::Matrix<Scalar, 5, 1> learnable() const {
    Eigen::Matrix<Scalar, 5, 1> v;
    v << d_a, d_b, d_d, d_g, d_k;
    return v;
  }
};

// With A = a+1, B = b+1, D = A e^tau + B e^-tau and q = dW/dtau = 4AB/D^2:
//   dW/da = q / 2A,  dW/db = -q / 2B,  dW/dk = 1,
//   dW/dd = q (tanh g + 1),  dW/dg = q sech^2(g) (s - m + h d) / h,
//   dW/ds = q beta,  dW/dm = -q beta,  dW/dh = -q (tanh g + 1)(s - m) / h^2.
template <typename Scalar>
ParamGradient<Scalar> extractor_backward(const WindowParams<Scalar>& p, Scalar s) {
  const Scalar A = p.a + Scalar(1);
  const Scalar B = p.b + Scalar(1);
  const Scalar q = detail::core(A, B, tau(p, s)).dtau;
  const Scalar th = std::tanh(p.g);
  const Scalar gain = th + Scalar(1);
  const Scalar beta = gain / p.h;

  ParamGradient<Scalar> grad;
  grad.d_a = q / (Scalar(2) * A);
  grad.d_b = -q / (Scalar(2) * B);
  grad.d_d = q * gain;
  grad.d_g = q * (Scalar(1) - th * th) * (s - p.m + p.h * p.d) / p.h;
  grad.d_k = Scalar(1);
  grad.d_input = q * beta;
  grad.d_m = -q * beta;
  grad.d_h = -q * gain * (s - p.m) / (p.h * p.h);
  return grad;
}

// Central-difference step used by the oracle: 1e-6 * max(1, |x|).
template <typename Scalar>
Scalar fd_step(Scalar x, Scalar relative = Scalar(1e-6)) {
  return relative * std::max(Scalar(1), std::abs(x));
}

// Central-difference gradient of a scalar function of a vector. A positive
// `step` is used verbatim; otherwise each coordinate gets fd_step(x_i).
template <typename Scalar, typename Function>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> finite_difference(
    Function&& fn, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& point, Scalar step = 0) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = point;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const Scalar hstep = step > Scalar(0) ? step : fd_step(point[i]);
    const Scalar saved = x[i];
    x[i] = saved + hstep;
    const Scalar up = fn(x);
    x[i] = saved - hstep;
    const Scalar down = fn(x);
    x[i] = saved;
    grad[i] = (up - down) / (Scalar(2) * hstep);
  }
  return grad;
}

// Scalar convenience overload.
template <typename Scalar, typename Function>
Scalar finite_difference_scalar(Function&& fn, Scalar x, Scalar step = 0) {
  const Scalar hstep = step > Scalar(0) ? step : fd_step(x);
  return (fn(x + hstep) - fn(x - hstep)) / (Scalar(2) * hstep);
}

// |a - b| / max(|a|, |b|), falling back to the absolute error when both are
// below `abs_floor`.
template <typename Scalar>
Scalar relative_error(Scalar a, Scalar b, Scalar abs_floor = Scalar(1e-9)) {
  const Scalar diff = std::abs(a - b);
  const Scalar scale = std::max(std::abs(a), std::abs(b));
  if (scale < abs_floor) return diff;
  return diff / scale;
}

}  // namespace autowindow
