#include "autowindow/pipeline_gradients.hpp"

#include <string>

#include "autowindow/errors.hpp"

namespace autowindow {

Eigen::VectorXd StackGradient::packed() const {
  Eigen::Index total = static_cast<Eigen::Index>(5 * windows.size()) + fusion.size();
  for (const auto& r : rectifiers) total += r.d_offsets.size() + r.d_intensities.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& w : windows) {
    out.segment<5>(at) = w.learnable();
    at += 5;
  }
  for (const auto& r : rectifiers) {
    out.segment(at, r.d_offsets.size()) = r.d_offsets;
    at += r.d_offsets.size();
    out.segment(at, r.d_intensities.size()) = r.d_intensities;
    at += r.d_intensities.size();
  }
  for (Eigen::Index i = 0; i < fusion.rows(); ++i) {
    out.segment(at, fusion.cols()) = fusion.row(i).transpose();
    at += fusion.cols();
  }
  return out;
}

StackGradient zero_gradient(const AutoWindowStack& stack) {
  StackGradient g;
  g.windows.resize(stack.n_windows());
  for (const auto& r : stack.rectifiers) {
    g.rectifiers.push_back({Eigen::VectorXd::Zero(r.kappa()), Eigen::VectorXd::Zero(r.kappa())});
  }
  g.fusion = Eigen::MatrixXd::Zero(stack.fusion.size(), stack.fusion.size());
  return g;
}

Eigen::MatrixXd softmax_row_jacobian(const Eigen::Ref<const Eigen::VectorXd>& probs) {
  Eigen::MatrixXd jac = -probs * probs.transpose();
  jac.diagonal() += probs;
  return jac;
}

StackGradient pipeline_backward(const AutoWindowStack& stack, const Volume& vol,
                                const Volume& upstream) {
  stack.validate();
  vol.validate();
  const auto n = static_cast<Eigen::Index>(stack.n_windows());
  const Eigen::Index in_channels = vol.channels();
  const Shape4 expected{in_channels * n, vol.z, vol.y, vol.x};
  if (!(upstream.shape() == expected)) {
    throw ShapeMismatch("pipeline_backward: upstream gradient shape does not match forward output");
  }

  const Eigen::MatrixXd mixing = stack.fusion.mixing();
  StackGradient grad = zero_gradient(stack);
  // dL/dP accumulated over voxels, mapped through the softmax at the end.
  Eigen::MatrixXd d_mixing = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd extracted(n), rectified(n), d_rectified(n);
  for (Eigen::Index v = 0; v < vol.voxels(); ++v) {
    for (Eigen::Index c = 0; c < in_channels; ++c) {
      const Eigen::VectorXd g_out = upstream.data.col(v).segment(c * n, n).matrix();
      if (g_out.isZero(0.0)) continue;
      const double s = vol.data(c, v);
      for (Eigen::Index i = 0; i < n; ++i) {
        extracted[i] = forward(stack.extractors[i], s);
        rectified[i] = rectify(stack.rectifiers[i], extracted[i]);
      }
      d_mixing.noalias() += g_out * rectified.transpose();
      d_rectified.noalias() = mixing.transpose() * g_out;

      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rect = stack.rectifiers[i];
        auto& rg = grad.rectifiers[static_cast<std::size_t>(i)];
        const double w = extracted[i];
        double d_w = d_rectified[i];
        for (Eigen::Index j = 0; j < rect.kappa(); ++j) {
          const double t = std::tanh(rect.offsets[j] + w);
          const double sech2 = 1.0 - t * t;
          rg.d_intensities[j] += d_rectified[i] * t;
          rg.d_offsets[j] += d_rectified[i] * rect.intensities[j] * sech2;
          d_w += d_rectified[i] * rect.intensities[j] * sech2;
        }
        const auto local = extractor_backward(stack.extractors[i], s);
        auto& wg = grad.windows[static_cast<std::size_t>(i)];
        wg.d_a += d_w * local.d_a;
        wg.d_b += d_w * local.d_b;
        wg.d_d += d_w * local.d_d;
        wg.d_g += d_w * local.d_g;
        wg.d_k += d_w * local.d_k;
        wg.d_m += d_w * local.d_m;
        wg.d_h += d_w * local.d_h;
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    grad.fusion.row(i) =
        (softmax_row_jacobian(mixing.row(i).transpose()) * d_mixing.row(i).transpose()).transpose();
  }
  return grad;
}

}  // namespace autowindow
