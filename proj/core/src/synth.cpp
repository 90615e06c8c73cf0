#include "tlskit/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tlskit/rng.hpp"

namespace tlskit {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

// Substream tags; part of the reproducibility contract.
enum : std::uint64_t { kCentersStream = 0, kCountsStream = 1, kMembersStream = 2, kBackgroundStream = 3 };

struct Point {
  double x, y;
};

}  // namespace

void validate(const SceneParams& p) {
  const bool ok = p.extent_w_um > 0.0 && p.extent_h_um > 0.0 && p.n_clusters >= 0 &&
                  p.cluster_radius_um >= 0.0 && p.nuclei_per_cluster >= 0.0 &&
                  p.background_per_mm2 >= 0.0 && p.non_lymphocyte_fraction >= 0.0 &&
                  p.non_lymphocyte_fraction <= 1.0;
  if (!ok) throw Error(Errc::InvalidValue, "scene parameters out of range");
  if (p.n_clusters > 0 && !(p.cluster_radius_um > 0.0))
    throw Error(Errc::InvalidValue, "clusters need a positive radius");
}

Scene generate_scene(const SceneParams& params, const GridSpec& grid) {
  validate(params);
  validate(grid);
  if (grid.width_px * grid.pixel_pitch_um < params.extent_w_um ||
      grid.height_px * grid.pixel_pitch_um < params.extent_h_um)
    throw Error(Errc::InvalidSpec, "grid extent smaller than scene extent");

  Scene scene;

  // Cluster centers, pairwise separated by >= 2 * radius.
  SplitMix64 centers_rng = SplitMix64::substream(params.seed, kCentersStream);
  std::vector<Point> centers;
  centers.reserve(params.n_clusters);
  const double min_sep_sq = 4.0 * params.cluster_radius_um * params.cluster_radius_um;
  int attempts = 0;
  while (int(centers.size()) < params.n_clusters) {
    if (++attempts > kMaxPlacementAttempts)
      throw Error(Errc::InfeasiblePacking,
                  "could not place " + std::to_string(params.n_clusters) + " cluster centers " +
                      std::to_string(2.0 * params.cluster_radius_um) + " um apart in " +
                      std::to_string(kMaxPlacementAttempts) + " attempts");
    const Point c{centers_rng.next_uniform(0.0, params.extent_w_um),
                  centers_rng.next_uniform(0.0, params.extent_h_um)};
    const bool clash = std::any_of(centers.begin(), centers.end(), [&](const Point& o) {
      const double dx = c.x - o.x;
      const double dy = c.y - o.y;
      return dx * dx + dy * dy < min_sep_sq;
    });
    if (!clash) centers.push_back(c);
  }

  // Cluster members: zero-truncated Poisson counts, Gaussian offsets with
  // sigma = radius / 2, resampled until inside the extent.
  SplitMix64 counts_rng = SplitMix64::substream(params.seed, kCountsStream);
  SplitMix64 members_rng = SplitMix64::substream(params.seed, kMembersStream);
  const double sigma = params.cluster_radius_um / 2.0;
  std::vector<std::pair<std::size_t, std::size_t>> member_ranges;  // [first, last) per cluster
  for (const Point& c : centers) {
    std::uint64_t count = counts_rng.next_poisson(params.nuclei_per_cluster);
    while (count == 0) count = counts_rng.next_poisson(params.nuclei_per_cluster);

    const std::size_t first = scene.nuclei.size();
    for (std::uint64_t i = 0; i < count; ++i) {
      Point p;
      int tries = 0;
      do {
        p.x = c.x + sigma * members_rng.next_gaussian();
        p.y = c.y + sigma * members_rng.next_gaussian();
        if (++tries > kMaxPlacementAttempts) {
          p.x = std::clamp(p.x, 0.0, std::nexttoward(params.extent_w_um, 0.0));
          p.y = std::clamp(p.y, 0.0, std::nexttoward(params.extent_h_um, 0.0));
          break;
        }
      } while (p.x < 0.0 || p.y < 0.0 || p.x >= params.extent_w_um || p.y >= params.extent_h_um);
      scene.nuclei.push_back({p.x, p.y, NucleusLabel::Lymphocyte, 1.0});
    }
    member_ranges.emplace_back(first, scene.nuclei.size());
  }

  // Background clutter over the whole extent.
  SplitMix64 background_rng = SplitMix64::substream(params.seed, kBackgroundStream);
  const double area_mm2 = params.extent_w_um * params.extent_h_um * 1e-6;
  const std::uint64_t n_background = background_rng.next_poisson(params.background_per_mm2 * area_mm2);
  for (std::uint64_t i = 0; i < n_background; ++i) {
    const double x = background_rng.next_uniform(0.0, params.extent_w_um);
    const double y = background_rng.next_uniform(0.0, params.extent_h_um);
    const bool non_lymph = background_rng.next_unit() < params.non_lymphocyte_fraction;
    scene.nuclei.push_back(
        {x, y, non_lymph ? NucleusLabel::NonLymphocyte : NucleusLabel::Lymphocyte, 1.0});
  }

  // Ground truth: pixel-space member extent padded by one density patch.
  const int pad = grid.patch_size_px;
  for (const auto& [first, last] : member_ranges) {
    int x_min = grid.width_px - 1, y_min = grid.height_px - 1, x_max = 0, y_max = 0;
    for (std::size_t i = first; i < last; ++i) {
      const int px = int(std::floor(scene.nuclei[i].x_um / grid.pixel_pitch_um));
      const int py = int(std::floor(scene.nuclei[i].y_um / grid.pixel_pitch_um));
      x_min = std::min(x_min, px);
      x_max = std::max(x_max, px);
      y_min = std::min(y_min, py);
      y_max = std::max(y_max, py);
    }
    scene.gt_boxes.push_back({std::max(0, x_min - pad), std::max(0, y_min - pad),
                              std::min(grid.width_px - 1, x_max + pad),
                              std::min(grid.height_px - 1, y_max + pad)});
  }

  return scene;
}

}  // namespace tlskit
