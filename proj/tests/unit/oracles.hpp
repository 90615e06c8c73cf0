#pragma once

// Independent reference implementations used only by tests. Each oracle is
// deliberately written along a different path than the library code it
// checks (brute force where the library uses the fast algorithm, a direct
// transliteration of the published routine where the library uses a
// restructured one).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tlskit/core.hpp"
#include "tlskit/metrics.hpp"
#include "tlskit/rng.hpp"

namespace oracles {

// O(pixels * sites) squared Euclidean distance transform.
inline std::vector<std::int64_t> brute_edt_sq(std::span<const tlskit::PixelCoord> sites, int width,
                                              int height) {
  std::vector<std::int64_t> out(std::size_t(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const tlskit::PixelCoord& s : sites) {
        const std::int64_t dx = x - s.x;
        const std::int64_t dy = y - s.y;
        best = std::min(best, dx * dx + dy * dy);
      }
      out[std::size_t(y) * width + x] = best;
    }
  }
  return out;
}

// Signed distance field in doubles, straight from the definition: zero on
// inner-boundary pixels, -min distance inside, +min distance outside.
inline std::vector<double> brute_sdf(const tlskit::BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<tlskit::PixelCoord> edge;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y)) continue;
      const bool outside_frame = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      const bool bg_neighbor = (x > 0 && !mask.get(x - 1, y)) || (x < w - 1 && !mask.get(x + 1, y)) ||
                               (y > 0 && !mask.get(x, y - 1)) || (y < h - 1 && !mask.get(x, y + 1));
      if (outside_frame || bg_neighbor) edge.push_back({x, y});
    }

  std::vector<double> out(std::size_t(w) * h);
  if (edge.empty()) {
    const double diag = std::sqrt(double(w) * w + double(h) * h);
    std::fill(out.begin(), out.end(), diag);
    return out;
  }
  const std::vector<std::int64_t> sq = brute_edt_sq(edge, w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      const double d = std::sqrt(double(sq[i]));
      out[i] = mask.get(x, y) ? (sq[i] == 0 ? 0.0 : -d) : d;
    }
  return out;
}

// Exhaustive maximum one-to-one matching between components and boxes that
// satisfy the criterion. Bitmask DP over boxes; feasible for <= ~12 boxes.
inline int optimal_tp(std::span<const tlskit::Component> comps,
                      std::span<const tlskit::BoundingBox> boxes,
                      const tlskit::MatchCriterion& criterion) {
  const int nb = int(boxes.size());
  std::vector<std::uint32_t> can(comps.size(), 0);
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    for (int bi = 0; bi < nb; ++bi) {
      std::int64_t inter = 0;
      for (const tlskit::PixelCoord& p : comps[ci].pixels)
        if (boxes[bi].contains(p.x, p.y)) ++inter;
      if (inter == 0) continue;
      bool ok = false;
      switch (criterion.mode) {
        case tlskit::MatchCriterion::Mode::AnyOverlap: ok = true; break;
        case tlskit::MatchCriterion::Mode::IoUThreshold: {
          const double uni = double(comps[ci].pixels.size()) + double(boxes[bi].area()) - double(inter);
          ok = double(inter) / uni >= criterion.threshold;
          break;
        }
        case tlskit::MatchCriterion::Mode::BoxCoverage:
          ok = double(inter) / double(boxes[bi].area()) >= criterion.threshold;
          break;
      }
      if (ok) can[ci] |= 1u << bi;
    }
  }

  // dp[mask of used boxes] = max matches using components 0..k.
  std::vector<int> dp(std::size_t(1) << nb, 0);
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    std::vector<int> next = dp;
    for (std::uint32_t used = 0; used < dp.size(); ++used) {
      for (int bi = 0; bi < nb; ++bi) {
        if ((can[ci] >> bi & 1u) == 0 || (used >> bi & 1u)) continue;
        next[used | (1u << bi)] = std::max(next[used | (1u << bi)], dp[used] + 1);
      }
    }
    dp = std::move(next);
  }
  return *std::max_element(dp.begin(), dp.end());
}

// Random binary mask with the given foreground probability.
inline tlskit::BinaryMask random_mask(tlskit::SplitMix64& rng, int width, int height,
                                      double fg_prob) {
  tlskit::BinaryMask mask(width, height);
  auto bits = mask.bits();
  for (auto& b : bits) b = rng.next_unit() < fg_prob ? 1 : 0;
  return mask;
}

}  // namespace oracles
