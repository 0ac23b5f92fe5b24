#pragma once

#include <Eigen/Dense>
#include <vector>

#include "autowindow/gradients.hpp"
#include "autowindow/stack.hpp"
#include "autowindow/volume.hpp"

namespace autowindow {

struct RectifierGradient {
  Eigen::VectorXd d_offsets;
  Eigen::VectorXd d_intensities;
};

// Gradient of sum(upstream .* forward_volume(stack, vol)) with respect to
// every stack parameter. `windows[i].d_input` is left at zero; d_m and d_h
// are accumulated for diagnostics.
struct StackGradient {
  std::vector<ParamGradient<double>> windows;
  std::vector<RectifierGradient> rectifiers;
  Eigen::MatrixXd fusion;

  // Same layout as pack_learnable().
  Eigen::VectorXd packed() const;
};

StackGradient zero_gradient(const AutoWindowStack& stack);

// Throws ShapeMismatch when upstream's shape differs from the forward output.
StackGradient pipeline_backward(const AutoWindowStack& stack, const Volume& vol,
                                const Volume& upstream);

// Jacobian of one softmax row p with respect to its logits: diag(p) - p p^T.
Eigen::MatrixXd softmax_row_jacobian(const Eigen::Ref<const Eigen::VectorXd>& probs);

}  // namespace autowindow
