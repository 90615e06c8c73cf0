#include "tlskit/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tlskit {

CountGrid count_nuclei(std::span<const NucleusRecord> nuclei, const GridSpec& spec,
                       const LabelFilter& filter) {
  CountGrid grid = make_grid(spec);
  auto cells = grid.cells.pixels();
  const int d = spec.patch_size_px;
  const int cols = spec.cols();

  std::size_t idx = 0;
  for (const NucleusRecord& n : nuclei) {
    validate(n);
    const auto px = std::int64_t(std::floor(n.x_um / spec.pixel_pitch_um));
    const auto py = std::int64_t(std::floor(n.y_um / spec.pixel_pitch_um));
    // Out-of-extent nuclei are reported even when the filter would skip them.
    if (px < 0 || py < 0 || px >= spec.width_px || py >= spec.height_px)
      throw Error(Errc::OutOfBounds,
                  "nucleus #" + std::to_string(idx) + " at (" + std::to_string(n.x_um) + "," +
                      std::to_string(n.y_um) + ") um maps to pixel (" + std::to_string(px) + "," +
                      std::to_string(py) + ") outside " + std::to_string(spec.width_px) + "x" +
                      std::to_string(spec.height_px));
    if (filter.contains(n.label)) {
      const int row = int(py / d);
      const int col = int(px / d);
      ++cells[std::size_t(row) * cols + col];
    }
    ++idx;
  }
  return grid;
}

DensityMap normalize_density(const CountGrid& counts) {
  if (counts.cells.empty()) throw Error(Errc::InvalidSpec, "empty count grid");
  const auto src = counts.cells.pixels();
  auto [mn_it, mx_it] = std::minmax_element(src.begin(), src.end());
  const std::uint32_t n_min = *mn_it;
  const std::uint32_t n_max = *mx_it;

  DensityMap out{counts.spec, Raster<float>(counts.cells.width(), counts.cells.height(), 0.0f)};
  if (n_max == n_min) return out;  // flat field -> all zero

  const double range = double(n_max) - double(n_min);
  auto dst = out.cells.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double d = 255.0 * (double(src[i]) - double(n_min)) / range;
    // Snap to the 2^-16 grid: every value v on it has 255 - v representable
    // in float32, so the attention reversal is exactly involutive.
    dst[i] = float(std::round(d * 65536.0) / 65536.0);
  }
  return out;
}

AttentionMap lda(const DensityMap& density) {
  AttentionMap out{density.spec, density.cells};
  for (float& v : out.cells.pixels()) v = 255.0f - v;
  return out;
}

MultiChannelImage mean_pool(const MultiChannelImage& image, int d) {
  if (d < 1) throw Error(Errc::InvalidSpec, "pool size must be >= 1, got " + std::to_string(d));
  const int out_w = (image.width() + d - 1) / d;
  const int out_h = (image.height() + d - 1) / d;

  MultiChannelImage out(out_w, out_h, image.channel_names());
  for (int c = 0; c < image.channels(); ++c) {
    auto src = image.channel(c);
    auto dst = out.channel(c);
    for (int oy = 0; oy < out_h; ++oy) {
      const int y0 = oy * d;
      const int y1 = std::min(y0 + d, image.height());
      for (int ox = 0; ox < out_w; ++ox) {
        const int x0 = ox * d;
        const int x1 = std::min(x0 + d, image.width());
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += src[std::size_t(y) * image.width() + x];
        dst[std::size_t(oy) * out_w + ox] = float(acc / (double(y1 - y0) * double(x1 - x0)));
      }
    }
  }
  return out;
}

MultiChannelImage assemble_input(const MultiChannelImage& pooled_rgb, const AttentionMap& attention) {
  return assemble_input(pooled_rgb, attention.cells);
}

MultiChannelImage assemble_input(const MultiChannelImage& pooled_rgb, const Raster<float>& attention) {
  if (pooled_rgb.channels() != 3)
    throw Error(Errc::DimMismatch,
                "expected a 3-channel image, got " + std::to_string(pooled_rgb.channels()));
  if (pooled_rgb.width() != attention.width() || pooled_rgb.height() != attention.height())
    throw Error(Errc::DimMismatch,
                "RGB " + std::to_string(pooled_rgb.width()) + "x" + std::to_string(pooled_rgb.height()) +
                    " vs LDA " + std::to_string(attention.width()) + "x" +
                    std::to_string(attention.height()));

  auto names = pooled_rgb.channel_names();
  names.push_back("LDA");
  MultiChannelImage out(pooled_rgb.width(), pooled_rgb.height(), std::move(names));
  for (int c = 0; c < 3; ++c) {
    auto src = pooled_rgb.channel(c);
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  auto att = attention.pixels();
  std::copy(att.begin(), att.end(), out.channel(3).begin());
  return out;
}

}  // namespace tlskit
