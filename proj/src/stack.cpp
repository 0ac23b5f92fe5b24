#include "autowindow/stack.hpp"

#include <string>

#include "autowindow/errors.hpp"
#include "autowindow/parallel.hpp"

namespace autowindow {

Eigen::VectorXd fuse(const FusionWeights& fusion, const Eigen::Ref<const Eigen::VectorXd>& channels) {
  if (channels.size() != fusion.size()) {
    throw ShapeMismatch("fuse: expected " + std::to_string(fusion.size()) + " channels, got " +
                        std::to_string(channels.size()));
  }
  return fusion.mixing() * channels;
}

void AutoWindowStack::validate() const {
  if (extractors.empty()) throw InvalidConfig("stack: need at least one window");
  if (rectifiers.size() != extractors.size()) {
    throw InvalidConfig("stack: extractor/rectifier count mismatch");
  }
  if (!hu_range.valid()) throw InvalidConfig("stack: empty HU range");
  const auto n = static_cast<Eigen::Index>(extractors.size());
  if (fusion.raw.rows() != n || fusion.raw.cols() != n) {
    throw InvalidConfig("stack: fusion matrix must be " + std::to_string(n) + "x" +
                        std::to_string(n));
  }
  if (!fusion.raw.allFinite()) throw InvalidConfig("stack: non-finite fusion weight");
  for (std::size_t i = 0; i < extractors.size(); ++i) {
    if (!extractors[i].valid()) {
      throw InvalidConfig("stack: window " + std::to_string(i) + " violates a > -1, b > -1, h > 0");
    }
    const auto& r = rectifiers[i];
    if (r.offsets.size() != kappa() || r.intensities.size() != kappa()) {
      throw InvalidConfig("stack: rectifier " + std::to_string(i) + " has inconsistent kappa");
    }
    if (!r.offsets.allFinite() || !r.intensities.allFinite()) {
      throw InvalidConfig("stack: rectifier " + std::to_string(i) + " has non-finite entries");
    }
  }
}

AutoWindowStack init_stack(int n_windows, int kappa, HuRange range, double fusion_gamma) {
  if (n_windows < 1) throw InvalidConfig("init_stack: n_windows must be >= 1");
  if (kappa < 0) throw InvalidConfig("init_stack: kappa must be >= 0");
  if (!range.valid()) throw InvalidConfig("init_stack: hu range must satisfy lo < hi");
  if (!std::isfinite(fusion_gamma)) throw InvalidConfig("init_stack: fusion gamma must be finite");

  AutoWindowStack stack;
  stack.hu_range = range;
  const double span = range.span();
  const double h = span / n_windows;
  for (int i = 0; i < n_windows; ++i) {
    WindowParamsd p;
    p.h = h;
    p.m = range.lo + (i + 0.5) * span / n_windows;
    stack.extractors.push_back(p);
    stack.rectifiers.emplace_back(kappa);
  }
  stack.fusion.raw = fusion_gamma * Eigen::MatrixXd::Identity(n_windows, n_windows);
  return stack;
}

std::size_t count_learnable(const AutoWindowStack& stack) {
  const std::size_t n = stack.n_windows();
  std::size_t total = 0;
  for (const auto& w : stack.extractors) total += count_learnable(w);
  for (const auto& r : stack.rectifiers) total += 2 * static_cast<std::size_t>(r.kappa());
  return total + n * n;
}

Eigen::VectorXd pack_learnable(const AutoWindowStack& stack) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(count_learnable(stack)));
  Eigen::Index at = 0;
  for (const auto& w : stack.extractors) {
    out.segment<5>(at) << w.a, w.b, w.d, w.g, w.k;
    at += 5;
  }
  for (const auto& r : stack.rectifiers) {
    out.segment(at, r.kappa()) = r.offsets;
    at += r.kappa();
    out.segment(at, r.kappa()) = r.intensities;
    at += r.kappa();
  }
  const auto n = stack.fusion.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.segment(at, n) = stack.fusion.raw.row(i).transpose();
    at += n;
  }
  return out;
}

void unpack_learnable(AutoWindowStack& stack, const Eigen::Ref<const Eigen::VectorXd>& packed) {
  if (static_cast<std::size_t>(packed.size()) != count_learnable(stack)) {
    throw ShapeMismatch("unpack_learnable: expected " + std::to_string(count_learnable(stack)) +
                        " values, got " + std::to_string(packed.size()));
  }
  Eigen::Index at = 0;
  for (auto& w : stack.extractors) {
    w.a = packed[at++];
    w.b = packed[at++];
    w.d = packed[at++];
    w.g = packed[at++];
    w.k = packed[at++];
  }
  for (auto& r : stack.rectifiers) {
    r.offsets = packed.segment(at, r.kappa());
    at += r.kappa();
    r.intensities = packed.segment(at, r.kappa());
    at += r.kappa();
  }
  const auto n = stack.fusion.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    stack.fusion.raw.row(i) = packed.segment(at, n).transpose();
    at += n;
  }
}

StageResponses evaluate_stages(const AutoWindowStack& stack, double s) {
  const auto n = static_cast<Eigen::Index>(stack.n_windows());
  StageResponses out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd()};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.extracted[i] = forward(stack.extractors[i], s);
    out.rectified[i] = rectify(stack.rectifiers[i], out.extracted[i]);
  }
  out.fused = fuse(stack.fusion, out.rectified);
  return out;
}

Volume forward_volume(const AutoWindowStack& stack, const Volume& vol, int threads) {
  stack.validate();
  vol.validate();
  const auto n = static_cast<Eigen::Index>(stack.n_windows());
  const Eigen::Index in_channels = vol.channels();
  const Eigen::MatrixXd mixing = stack.fusion.mixing();

  Volume out({in_channels * n, vol.z, vol.y, vol.x}, ValueKind::Response);
  out.spacing = vol.spacing;

  const std::size_t voxels = static_cast<std::size_t>(vol.voxels());
  parallel_for(voxels, threads > 0 ? threads : configured_threads(),
               [&](std::size_t begin, std::size_t end) {
                 Eigen::VectorXd rectified(n);
                 for (std::size_t v = begin; v < end; ++v) {
                   const auto col = static_cast<Eigen::Index>(v);
                   for (Eigen::Index c = 0; c < in_channels; ++c) {
                     const double s = vol.data(c, col);
                     for (Eigen::Index i = 0; i < n; ++i) {
                       rectified[i] = rectify(stack.rectifiers[i], forward(stack.extractors[i], s));
                     }
                     out.data.col(col).segment(c * n, n) = (mixing * rectified).array();
                   }
                 }
               });
  return out;
}

}  // namespace autowindow
