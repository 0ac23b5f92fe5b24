#include "autowindow/volume.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "autowindow/errors.hpp"
#include "autowindow/keyvalue.hpp"

namespace autowindow {

namespace {

constexpr const char* kInt16 = "int16le";
constexpr const char* kFloat32 = "float32le";

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

}  // namespace

void Volume::validate() const {
  if (z < 1 || y < 1 || x < 1 || data.rows() < 1) {
    throw ShapeMismatch("volume: all dimensions must be >= 1");
  }
  if (data.cols() != z * y * x) throw ShapeMismatch("volume: data length does not match dims");
  if (!data.allFinite()) throw DomainError("volume: non-finite voxel");
}

VolumeReadResult read_volume(const std::filesystem::path& header,
                             const std::filesystem::path& data_path) {
  kv::Document doc;
  try {
    doc = kv::Document::read_file(header.string());
  } catch (const ConfigParseError& e) {
    throw MalformedHeader(std::string("volume header: ") + e.what());
  }

  std::vector<long long> dims;
  std::vector<double> spacing;
  std::string dtype, kind;
  try {
    if (doc.get_int("version") != kVolumeFormatVersion) {
      throw MalformedHeader("volume header: unsupported version");
    }
    dims = doc.get_ints("dims");
    spacing = doc.get_doubles("spacing");
    dtype = doc.get("dtype");
    kind = doc.get("kind");
  } catch (const ConfigParseError& e) {
    throw MalformedHeader(std::string("volume header: ") + e.what());
  }
  if (dims.size() != 4) throw MalformedHeader("volume header: dims needs C Z Y X");
  for (auto d : dims) {
    if (d < 1) throw MalformedHeader("volume header: dims must be >= 1");
  }
  if (spacing.size() != 3) throw MalformedHeader("volume header: spacing needs z y x");
  if (kind != "hu" && kind != "response") throw MalformedHeader("volume header: unknown kind '" + kind + "'");

  const bool is_hu = kind == "hu";
  std::size_t sample_bytes = 0;
  if (is_hu && dtype == kInt16) {
    sample_bytes = 2;
  } else if (!is_hu && dtype == kFloat32) {
    sample_bytes = 4;
  } else {
    throw UnsupportedSampleType("volume: dtype '" + dtype + "' not supported for kind '" + kind + "'");
  }

  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw IoFailure("volume: cannot open '" + data_path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::size_t count = static_cast<std::size_t>(dims[0] * dims[1] * dims[2] * dims[3]);
  if (bytes.size() != count * sample_bytes) {
    throw LengthMismatch("volume: expected " + std::to_string(count * sample_bytes) + " bytes, found " +
                         std::to_string(bytes.size()));
  }

  VolumeReadResult result;
  Volume& vol = result.volume;
  vol = Volume({dims[0], dims[1], dims[2], dims[3]}, is_hu ? ValueKind::Hu : ValueKind::Response);
  vol.spacing = {spacing[0], spacing[1], spacing[2]};
  const Eigen::Index voxels = vol.voxels();
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = static_cast<Eigen::Index>(i) / voxels;
    const auto v = static_cast<Eigen::Index>(i) % voxels;
    double value;
    if (is_hu) {
      value = static_cast<std::int16_t>(get_u16(&bytes[2 * i]));
      if (value < kHuClampLo || value > kHuClampHi) {
        value = value < kHuClampLo ? kHuClampLo : kHuClampHi;
        ++result.clamped;
      }
    } else {
      value = std::bit_cast<float>(get_u32(&bytes[4 * i]));
    }
    vol.data(c, v) = value;
  }
  vol.validate();
  return result;
}

void write_volume(const Volume& vol, const std::filesystem::path& header,
                  const std::filesystem::path& data_path) {
  vol.validate();
  const bool is_hu = vol.kind == ValueKind::Hu;
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(vol.data.size()) * (is_hu ? 2 : 4));
  for (Eigen::Index c = 0; c < vol.channels(); ++c) {
    for (Eigen::Index v = 0; v < vol.voxels(); ++v) {
      const double value = vol.data(c, v);
      if (is_hu) {
        const double r = std::round(value);
        if (r < -32768.0 || r > 32767.0) throw DomainError("volume: HU value outside int16 range");
        put_u16(bytes, static_cast<std::uint16_t>(static_cast<std::int16_t>(r)));
      } else {
        put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
      }
    }
  }

  std::string text;
  text += "version=" + std::to_string(kVolumeFormatVersion) + "\n";
  text += "dims=" + std::to_string(vol.channels()) + " " + std::to_string(vol.z) + " " +
          std::to_string(vol.y) + " " + std::to_string(vol.x) + "\n";
  text += "spacing=" + kv::format_doubles(vol.spacing.data(), 3) + "\n";
  text += std::string("dtype=") + (is_hu ? kInt16 : kFloat32) + "\n";
  text += std::string("kind=") + (is_hu ? "hu" : "response") + "\n";

  std::ofstream h(header, std::ios::binary | std::ios::trunc);
  if (!h) throw IoFailure("volume: cannot write '" + header.string() + "'");
  h << text;
  if (!h) throw IoFailure("volume: write failed for '" + header.string() + "'");
  std::ofstream d(data_path, std::ios::binary | std::ios::trunc);
  if (!d) throw IoFailure("volume: cannot write '" + data_path.string() + "'");
  d.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!d) throw IoFailure("volume: write failed for '" + data_path.string() + "'");
}

}  // namespace autowindow
