#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <filesystem>

namespace autowindow {

enum class ValueKind { Hu, Response };

struct Shape4 {
  Eigen::Index channels = 1;
  Eigen::Index z = 1;
  Eigen::Index y = 1;
  Eigen::Index x = 1;

  Eigen::Index voxels() const { return z * y * x; }
  Eigen::Index size() const { return channels * voxels(); }
  bool operator==(const Shape4&) const = default;
};

// C x Z x Y x X grid stored channel-major with X fastest. Each row of
// `data` is one channel; column index is the flattened (z, y, x) voxel.
struct Volume {
  using Data = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Data data;
  std::array<double, 3> spacing{1.0, 1.0, 1.0};  // (z, y, x) mm
  ValueKind kind = ValueKind::Hu;
  Eigen::Index z = 1;
  Eigen::Index y = 1;
  Eigen::Index x = 1;

  Volume() = default;
  Volume(const Shape4& s, ValueKind k = ValueKind::Hu, double fill = 0.0)
      : data(Data::Constant(s.channels, s.voxels(), fill)), kind(k), z(s.z), y(s.y), x(s.x) {}

  Shape4 shape() const { return {data.rows(), z, y, x}; }
  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index voxels() const { return data.cols(); }

  double& at(Eigen::Index c, Eigen::Index zi, Eigen::Index yi, Eigen::Index xi) {
    return data(c, (zi * y + yi) * x + xi);
  }
  double at(Eigen::Index c, Eigen::Index zi, Eigen::Index yi, Eigen::Index xi) const {
    return data(c, (zi * y + yi) * x + xi);
  }

  // Throws DomainError on non-finite voxels, ShapeMismatch on bad dims.
  void validate() const;
};

struct VolumeReadResult {
  Volume volume;
  std::size_t clamped = 0;  // HU voxels pulled into [-1024, 3072]
};

inline constexpr int kVolumeFormatVersion = 1;
inline constexpr double kHuClampLo = -1024.0;
inline constexpr double kHuClampHi = 3072.0;

// Header: `key=value` lines with keys version, dims (C Z Y X), spacing
// (z y x), dtype (int16le | float32le) and kind (hu | response). Data:
// contiguous little-endian samples, X fastest.
VolumeReadResult read_volume(const std::filesystem::path& header,
                             const std::filesystem::path& data);

// HU volumes are written as int16le (values are rounded), response volumes
// as float32le.
void write_volume(const Volume& vol, const std::filesystem::path& header,
                  const std::filesystem::path& data);

}  // namespace autowindow
