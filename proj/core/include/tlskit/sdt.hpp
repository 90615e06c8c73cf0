#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tlskit/core.hpp"

namespace tlskit {

// Signed Euclidean distance field of a binary mask, in pixel units.
// Negative strictly inside the object, zero exactly on the discrete
// boundary set, positive outside; |value| never exceeds sqrt(W^2 + H^2).
struct SdfField {
  Raster<float> values;

  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
};

// Inner boundary: foreground pixels with at least one 4-neighbor that is
// background or lies outside the frame. Returned in row-major order.
std::vector<PixelCoord> boundary(const BinaryMask& mask);

// Exact squared Euclidean distance to the nearest site, for every pixel of
// a width x height grid. Two-pass lower-envelope transform; all envelope
// decisions use 64-bit integer cross-multiplication, so every output equals
// the brute-force minimum exactly. Throws EmptySites when sites is empty.
Raster<std::int32_t> edt_sq(std::span<const PixelCoord> sites, int width, int height);

// Signed distance field per the three-way partition: 0 on boundary(mask),
// -sqrt(edt_sq) on interior foreground, +sqrt(edt_sq) on background.
// An empty mask has no boundary; its field is the +sqrt(W^2 + H^2) sentinel,
// the largest value the invariants admit.
SdfField sdf(const BinaryMask& mask);

}  // namespace tlskit
