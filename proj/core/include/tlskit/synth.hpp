#pragma once

#include <cstdint>
#include <vector>

#include "tlskit/core.hpp"

namespace tlskit {

// Thomas-style clustered point process: Poisson parent clusters with
// Gaussian offspring, plus uniform background clutter of both classes.
struct SceneParams {
  double extent_w_um = 0.0;
  double extent_h_um = 0.0;
  int n_clusters = 0;
  double cluster_radius_um = 0.0;
  double nuclei_per_cluster = 0.0;      // Poisson mean, truncated at >= 1
  double background_per_mm2 = 0.0;
  double non_lymphocyte_fraction = 0.0;  // of background nuclei
  std::uint64_t seed = 0;
};

void validate(const SceneParams& params);

struct Scene {
  std::vector<NucleusRecord> nuclei;     // cluster members first, then background
  std::vector<BoundingBox> gt_boxes;     // pixel coords, one per cluster
};

// Deterministic scene synthesis. Cluster centers are drawn uniformly over
// the extent and rejection-sampled to stay >= 2 * radius apart
// (InfeasiblePacking after 10^4 draws). Members are Gaussian around their
// center with sigma = radius / 2, resampled into the extent; counts are
// Poisson, redrawn on zero so every cluster (and hence every box) holds at
// least one lymphocyte. Background counts are Poisson over the extent area.
// Each ground-truth box is the pixel-space extent of its cluster's members
// padded by one density patch on every side and clamped to the frame, which
// is why the grid geometry is a parameter. Identical (params, grid) give
// bitwise-identical scenes.
Scene generate_scene(const SceneParams& params, const GridSpec& grid);

}  // namespace tlskit
