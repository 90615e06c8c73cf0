#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tlskit/error.hpp"

namespace tlskit {

// ---------------------------------------------------------------------------
// Domain types shared by the whole pipeline.
//
// Conventions:
//   * physical nucleus positions are micrometers, origin at the slide corner
//   * pixel coordinates are (x, y) with x = column, y = row, origin top-left
//   * grid (patch) coordinates are (row i, col j), patch (i, j) covers pixels
//     [j*d, (j+1)*d) x [i*d, (i+1)*d); edge patches may be partial
//   * raster values are 32-bit floats; 8-bit quantization happens only at
//     image export (round half away from zero)
// ---------------------------------------------------------------------------

enum class NucleusLabel : std::uint8_t { Lymphocyte, NonLymphocyte, Unknown };

struct NucleusRecord {
  double x_um = 0.0;
  double y_um = 0.0;
  NucleusLabel label = NucleusLabel::Unknown;
  double confidence = 1.0;
};

// Throws InvalidValue unless coordinates are finite and non-negative and
// confidence lies in [0, 1].
void validate(const NucleusRecord& n);

// Tiling geometry of one WSI: pixel extent, physical pixel pitch, and the
// patch size d used for density gridding and coarse pooling.
struct GridSpec {
  int patch_size_px = 32;
  double pixel_pitch_um = 1.0;
  int width_px = 0;
  int height_px = 0;

  int rows() const { return int((std::int64_t(height_px) + patch_size_px - 1) / patch_size_px); }
  int cols() const { return int((std::int64_t(width_px) + patch_size_px - 1) / patch_size_px); }
  double patch_area_mm2() const {
    const double side_mm = patch_size_px * pixel_pitch_um * 1e-3;
    return side_mm * side_mm;
  }
};

// Throws InvalidSpec if d < 1, pitch <= 0, or either pixel dimension < 1.
void validate(const GridSpec& spec);

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// Row-major 2D container. at() is bounds-checked and throws OutOfBounds;
// index()/pixels() are the unchecked fast path for inner loops.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw Error(Errc::InvalidSpec, "raster dimensions must be positive, got " +
                                         std::to_string(width) + "x" + std::to_string(height));
    px_.assign(std::size_t(width) * std::size_t(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return px_.size(); }
  bool empty() const noexcept { return px_.empty(); }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t index(int x, int y) const noexcept {
    return std::size_t(y) * std::size_t(width_) + std::size_t(x);
  }

  T& at(int x, int y) {
    check(x, y);
    return px_[index(x, y)];
  }
  const T& at(int x, int y) const {
    check(x, y);
    return px_[index(x, y)];
  }

  std::span<T> pixels() noexcept { return px_; }
  std::span<const T> pixels() const noexcept { return px_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  void check(int x, int y) const {
    if (!in_bounds(x, y))
      throw Error(Errc::OutOfBounds, "pixel (" + std::to_string(x) + "," + std::to_string(y) +
                                         ") outside " + std::to_string(width_) + "x" +
                                         std::to_string(height_) + " raster");
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> px_;
};

// Per-patch lymphocyte counts N_ij. cells has width = cols, height = rows.
struct CountGrid {
  GridSpec spec;
  Raster<std::uint32_t> cells;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto v : cells.pixels()) t += v;
    return t;
  }
};

// Normalized density D_ij in [0, 255].
struct DensityMap {
  GridSpec spec;
  Raster<float> cells;
};

// Reversed density A_ij = 255 - D_ij.
struct AttentionMap {
  GridSpec spec;
  Raster<float> cells;
};

// Foreground/background raster, one byte per pixel holding 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : bits_(width, height, std::uint8_t{0}) {}

  int width() const noexcept { return bits_.width(); }
  int height() const noexcept { return bits_.height(); }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool in_bounds(int x, int y) const noexcept { return bits_.in_bounds(x, y); }

  // Unchecked; callers must stay in bounds.
  bool foreground(int x, int y) const noexcept { return bits_.pixels()[bits_.index(x, y)] != 0; }

  void set(int x, int y, bool fg) { bits_.at(x, y) = fg ? 1 : 0; }
  bool get(int x, int y) const { return bits_.at(x, y) != 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_.pixels(); }
  std::span<std::uint8_t> bits() noexcept { return bits_.pixels(); }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto b : bits_.pixels()) n += b;
    return n;
  }

  bool same_dims(const BinaryMask& o) const noexcept {
    return width() == o.width() && height() == o.height();
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Raster<std::uint8_t> bits_;
};

// Axis-aligned box with inclusive integer pixel coordinates.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  std::int64_t area() const noexcept { return std::int64_t(width()) * height(); }
  bool contains(int x, int y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws InvalidValue if min exceeds max on either axis.
void validate(const BoundingBox& b);

// Planar float image: channel-major storage, all channels share dimensions.
class MultiChannelImage {
 public:
  MultiChannelImage() = default;
  MultiChannelImage(int width, int height, std::vector<std::string> channel_names);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return int(names_.size()); }
  const std::vector<std::string>& channel_names() const noexcept { return names_; }

  float& at(int c, int x, int y);
  const float& at(int c, int x, int y) const;

  std::span<float> channel(int c);
  std::span<const float> channel(int c) const;

  std::span<const float> planes() const noexcept { return data_; }

  friend bool operator==(const MultiChannelImage&, const MultiChannelImage&) = default;

 private:
  std::size_t plane_size() const noexcept { return std::size_t(width_) * std::size_t(height_); }
  void check(int c, int x, int y) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::string> names_;
  std::vector<float> data_;
};

// Throws InvalidValue if any sample lies outside [0, 255].
void validate_range(const MultiChannelImage& img);

// Zero-initialized count grid for a validated spec.
CountGrid make_grid(const GridSpec& spec);

// Deterministic pairwise (tree) summation. The reduction order is fixed by
// the recursion alone, so results are reproducible across worker counts.
double pairwise_sum(std::span<const double> values);

}  // namespace tlskit
