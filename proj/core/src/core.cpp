#include "tlskit/core.hpp"

#include <cmath>

namespace tlskit {

void validate(const NucleusRecord& n) {
  if (!std::isfinite(n.x_um) || !std::isfinite(n.y_um))
    throw Error(Errc::InvalidValue, "nucleus coordinates must be finite");
  if (n.x_um < 0.0 || n.y_um < 0.0)
    throw Error(Errc::InvalidValue, "nucleus coordinates must be non-negative, got (" +
                                        std::to_string(n.x_um) + "," + std::to_string(n.y_um) + ")");
  if (!(n.confidence >= 0.0 && n.confidence <= 1.0))
    throw Error(Errc::InvalidValue,
                "nucleus confidence must lie in [0,1], got " + std::to_string(n.confidence));
}

void validate(const GridSpec& spec) {
  if (spec.patch_size_px < 1)
    throw Error(Errc::InvalidSpec, "patch size must be >= 1, got " + std::to_string(spec.patch_size_px));
  if (!(spec.pixel_pitch_um > 0.0) || !std::isfinite(spec.pixel_pitch_um))
    throw Error(Errc::InvalidSpec, "pixel pitch must be positive, got " + std::to_string(spec.pixel_pitch_um));
  if (spec.width_px < 1 || spec.height_px < 1)
    throw Error(Errc::InvalidSpec, "WSI extent must be positive, got " + std::to_string(spec.width_px) +
                                       "x" + std::to_string(spec.height_px));
}

void validate(const BoundingBox& b) {
  if (b.x_min > b.x_max || b.y_min > b.y_max)
    throw Error(Errc::InvalidValue, "degenerate bounding box [" + std::to_string(b.x_min) + "," +
                                        std::to_string(b.y_min) + "," + std::to_string(b.x_max) + "," +
                                        std::to_string(b.y_max) + "]");
}

MultiChannelImage::MultiChannelImage(int width, int height, std::vector<std::string> channel_names)
    : width_(width), height_(height), names_(std::move(channel_names)) {
  if (width < 1 || height < 1)
    throw Error(Errc::InvalidSpec, "image dimensions must be positive, got " + std::to_string(width) +
                                       "x" + std::to_string(height));
  if (names_.empty()) throw Error(Errc::InvalidSpec, "image needs at least one channel");
  data_.assign(plane_size() * names_.size(), 0.0f);
}

void MultiChannelImage::check(int c, int x, int y) const {
  if (c < 0 || c >= channels() || x < 0 || x >= width_ || y < 0 || y >= height_)
    throw Error(Errc::OutOfBounds, "sample (c=" + std::to_string(c) + "," + std::to_string(x) + "," +
                                       std::to_string(y) + ") outside " + std::to_string(channels()) +
                                       "x" + std::to_string(width_) + "x" + std::to_string(height_) +
                                       " image");
}

float& MultiChannelImage::at(int c, int x, int y) {
  check(c, x, y);
  return data_[plane_size() * c + std::size_t(y) * width_ + x];
}

const float& MultiChannelImage::at(int c, int x, int y) const {
  check(c, x, y);
  return data_[plane_size() * c + std::size_t(y) * width_ + x];
}

std::span<float> MultiChannelImage::channel(int c) {
  check(c, 0, 0);
  return std::span<float>(data_).subspan(plane_size() * c, plane_size());
}

std::span<const float> MultiChannelImage::channel(int c) const {
  check(c, 0, 0);
  return std::span<const float>(data_).subspan(plane_size() * c, plane_size());
}

void validate_range(const MultiChannelImage& img) {
  for (float v : img.planes())
    if (!(v >= 0.0f && v <= 255.0f))
      throw Error(Errc::InvalidValue, "image sample " + std::to_string(v) + " outside [0,255]");
}

CountGrid make_grid(const GridSpec& spec) {
  validate(spec);
  return CountGrid{spec, Raster<std::uint32_t>(spec.cols(), spec.rows(), 0u)};
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace tlskit
