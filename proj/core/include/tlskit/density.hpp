#pragma once

#include <span>

#include "tlskit/core.hpp"

namespace tlskit {

// Which nucleus labels participate in density gridding.
struct LabelFilter {
  bool lymphocyte = true;
  bool non_lymphocyte = false;
  bool unknown = false;

  bool contains(NucleusLabel l) const noexcept {
    switch (l) {
      case NucleusLabel::Lymphocyte: return lymphocyte;
      case NucleusLabel::NonLymphocyte: return non_lymphocyte;
      case NucleusLabel::Unknown: return unknown;
    }
    return false;
  }

  static LabelFilter lymphocytes_only() { return {}; }
  static LabelFilter all() { return {true, true, true}; }
};

// Bins filtered nuclei into the patch grid by centroid: the nucleus at
// (x_um, y_um) lands in pixel (floor(x/pitch), floor(y/pitch)) and thus in
// patch (pixel_y / d, pixel_x / d). Throws OutOfBounds naming the first
// nucleus whose pixel falls outside the WSI extent.
CountGrid count_nuclei(std::span<const NucleusRecord> nuclei, const GridSpec& spec,
                       const LabelFilter& filter = LabelFilter::lymphocytes_only());

// D_ij = 255 * (N_ij - N_min) / (N_max - N_min), snapped to the 2^-16 value
// grid (within 2^-17 of the exact ratio) so that lda() is an exact
// involution. A flat count field carries no aggregation signal, so
// N_max == N_min maps to the all-zero map.
DensityMap normalize_density(const CountGrid& counts);

// Lymphocyte density attention: A = 255 - D, elementwise.
AttentionMap lda(const DensityMap& density);

// Per-channel arithmetic mean over non-overlapping d x d tiles. Output dims
// are the ceilings of input dims / d; partial edge tiles average over their
// actual pixel count.
MultiChannelImage mean_pool(const MultiChannelImage& image, int d);

// Stacks (R, G, B, LDA) into one four-channel image. The three input
// channels and the attention map are copied bit-for-bit; spatial dims must
// match (DimMismatch otherwise).
MultiChannelImage assemble_input(const MultiChannelImage& pooled_rgb, const AttentionMap& attention);
MultiChannelImage assemble_input(const MultiChannelImage& pooled_rgb, const Raster<float>& attention);

}  // namespace tlskit
