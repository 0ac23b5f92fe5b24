#pragma once

// N parallel (extractor -> rectifier) streams mixed by a row-softmax fusion
// matrix. Per input channel c and voxel s:
//
//   w_i = W_i(s)
//   r_i = w_i + sum_j K_ij tanh(R_ij + w_i)
//   o   = softmax_rows(H) * r
//
// and the N fused responses of every input channel are concatenated, giving
// N*C output channels (index c*N + i).

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "autowindow/volume.hpp"
#include "autowindow/window.hpp"

namespace autowindow {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct RectifierParams {
  VectorX<Scalar> offsets;      // R, length kappa
  VectorX<Scalar> intensities;  // K, length kappa

  RectifierParams() = default;
  explicit RectifierParams(Eigen::Index kappa)
      : offsets(VectorX<Scalar>::Zero(kappa)), intensities(VectorX<Scalar>::Zero(kappa)) {}

  Eigen::Index kappa() const { return offsets.size(); }
  bool operator==(const RectifierParams& o) const {
    return offsets.size() == o.offsets.size() && intensities.size() == o.intensities.size() &&
           offsets == o.offsets && intensities == o.intensities;
  }
};

using RectifierParamsd = RectifierParams<double>;

template <typename Scalar>
Scalar rectify(const RectifierParams<Scalar>& rect, Scalar w) {
  Scalar out = w;
  for (Eigen::Index j = 0; j < rect.kappa(); ++j) {
    out += rect.intensities[j] * std::tanh(rect.offsets[j] + w);
  }
  return out;
}

// d rectify / d w = 1 + sum_j K_j sech^2(R_j + w).
template <typename Scalar>
Scalar rectify_slope(const RectifierParams<Scalar>& rect, Scalar w) {
  Scalar out = Scalar(1);
  for (Eigen::Index j = 0; j < rect.kappa(); ++j) {
    const Scalar t = std::tanh(rect.offsets[j] + w);
    out += rect.intensities[j] * (Scalar(1) - t * t);
  }
  return out;
}

// Numerically stable softmax of each row.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> row_softmax(
    const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      (raw.colwise() - raw.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

struct FusionWeights {
  Eigen::MatrixXd raw;  // H, N x N

  Eigen::Index size() const { return raw.rows(); }
  Eigen::MatrixXd mixing() const { return row_softmax(raw); }
  bool operator==(const FusionWeights& o) const {
    return raw.rows() == o.raw.rows() && raw.cols() == o.raw.cols() && raw == o.raw;
  }
};

// out = softmax_rows(H) * channels. Throws ShapeMismatch on wrong length.
Eigen::VectorXd fuse(const FusionWeights& fusion, const Eigen::Ref<const Eigen::VectorXd>& channels);

struct AutoWindowStack {
  std::vector<WindowParamsd> extractors;
  std::vector<RectifierParamsd> rectifiers;
  FusionWeights fusion;
  HuRange hu_range;

  std::size_t n_windows() const { return extractors.size(); }
  Eigen::Index kappa() const { return rectifiers.empty() ? 0 : rectifiers.front().kappa(); }

  // Throws InvalidConfig when any member invariant is broken.
  void validate() const;

  bool operator==(const AutoWindowStack&) const = default;
};

// h = span / N, m_i = lo + (i + 1/2) span / N, everything else zero and
// H = gamma * I. Throws InvalidConfig for N < 1 or kappa < 0.
AutoWindowStack init_stack(int n_windows, int kappa, HuRange range = {}, double fusion_gamma = 1.0);

// 5N + 2 kappa N + N^2.
std::size_t count_learnable(const AutoWindowStack& stack);

// Learnable parameters flattened as: per window (a, b, d, g, k), per
// rectifier (R..., K...), then H row-major.
Eigen::VectorXd pack_learnable(const AutoWindowStack& stack);
void unpack_learnable(AutoWindowStack& stack, const Eigen::Ref<const Eigen::VectorXd>& packed);

// Per-stage responses for a single HU value.
struct StageResponses {
  Eigen::VectorXd extracted;
  Eigen::VectorXd rectified;
  Eigen::VectorXd fused;
};

StageResponses evaluate_stages(const AutoWindowStack& stack, double s);

// (C x Z x Y x X) HU -> (N*C x Z x Y x X) response. `threads` <= 0 uses the
// AUTOWINDOW_THREADS setting.
Volume forward_volume(const AutoWindowStack& stack, const Volume& vol, int threads = 0);

}  // namespace autowindow
