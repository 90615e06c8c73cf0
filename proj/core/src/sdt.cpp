// Exact 2D squared Euclidean distance transform.
//
// Column pass: per-column nearest-site row offsets by a down/up scan.
// Row pass: 1D lower envelope of parabolas after Felzenszwalb & Huttenlocher,
// "Distance Transforms of Sampled Functions", Theory of Computing 8 (2012).
// Parabola intersections are rationals num/(2*(q-p)); comparing them in
// int64 cross-multiplied form keeps every envelope decision exact, which the
// oracle-equality tests require.

#include "tlskit/sdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace tlskit {

namespace {

int worker_count() {
  if (const char* env = std::getenv("TLSKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// worker. Chunks are independent, so the result is identical for any count.
template <typename Fn>
void parallel_chunks(int n, const Fn& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(b + chunk, n);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

constexpr std::int32_t kNoSite = -1;

}  // namespace

std::vector<PixelCoord> boundary(const BinaryMask& mask) {
  std::vector<PixelCoord> out;
  const int w = mask.width();
  const int h = mask.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.foreground(x, y)) continue;
      const bool frame = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      if (frame || !mask.foreground(x - 1, y) || !mask.foreground(x + 1, y) ||
          !mask.foreground(x, y - 1) || !mask.foreground(x, y + 1))
        out.push_back({x, y});
    }
  }
  return out;
}

Raster<std::int32_t> edt_sq(std::span<const PixelCoord> sites, int width, int height) {
  if (sites.empty()) throw Error(Errc::EmptySites, "distance transform needs at least one site");
  Raster<std::int32_t> dist(width, height, kNoSite);

  // Mark sites.
  auto cells = dist.pixels();
  for (const PixelCoord& s : sites) {
    if (!dist.in_bounds(s.x, s.y))
      throw Error(Errc::OutOfBounds, "site (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                         ") outside " + std::to_string(width) + "x" +
                                         std::to_string(height) + " grid");
    cells[dist.index(s.x, s.y)] = 0;
  }

  // Column pass: squared vertical distance to the nearest site in the same
  // column, kNoSite where the column is empty.
  std::vector<std::uint8_t> col_has_site(width, 0);
  parallel_chunks(width, [&](int x_begin, int x_end) {
    for (int x = x_begin; x < x_end; ++x) {
      const int far = height + 1;
      int d = far;
      for (int y = 0; y < height; ++y) {
        auto& c = cells[dist.index(x, y)];
        d = (c == 0) ? 0 : std::min(d + 1, far);
        c = d;  // temporarily holds row offsets
      }
      d = far;
      for (int y = height - 1; y >= 0; --y) {
        auto& c = cells[dist.index(x, y)];
        d = (c == 0) ? 0 : std::min(d + 1, far);
        c = std::min(c, d);
      }
      bool any = false;
      for (int y = 0; y < height; ++y) {
        auto& c = cells[dist.index(x, y)];
        if (c > height) {
          c = kNoSite;
        } else {
          c = c * c;
          any = true;
        }
      }
      col_has_site[x] = any ? 1 : 0;
    }
  });

  std::vector<int> site_cols;
  site_cols.reserve(width);
  for (int x = 0; x < width; ++x)
    if (col_has_site[x]) site_cols.push_back(x);

  // Row pass: lower envelope over the site-bearing columns.
  parallel_chunks(height, [&](int y_begin, int y_end) {
    std::vector<std::int32_t> f(width);
    std::vector<int> v(site_cols.size());
    std::vector<std::int64_t> z_num(site_cols.size() + 1);
    std::vector<std::int64_t> z_den(site_cols.size() + 1);
    for (int y = y_begin; y < y_end; ++y) {
      const std::size_t row = dist.index(0, y);
      for (int x = 0; x < width; ++x) f[x] = cells[row + x];

      int k = 0;
      v[0] = site_cols[0];
      z_num[0] = -1;  // den 0, num < 0: the -inf sentinel
      z_den[0] = 0;
      for (std::size_t i = 1; i < site_cols.size(); ++i) {
        const int q = site_cols[i];
        const std::int64_t fq = std::int64_t(f[q]) + std::int64_t(q) * q;
        for (;;) {
          const int p = v[k];
          const std::int64_t num = fq - std::int64_t(f[p]) - std::int64_t(p) * p;
          const std::int64_t den = 2 * std::int64_t(q - p);
          const bool pop = z_den[k] != 0 && num * z_den[k] <= z_num[k] * den;
          if (pop) {
            --k;
            continue;
          }
          ++k;
          v[k] = q;
          z_num[k] = num;
          z_den[k] = den;
          break;
        }
      }

      int j = 0;
      for (int x = 0; x < width; ++x) {
        while (j < k && z_num[j + 1] < std::int64_t(x) * z_den[j + 1]) ++j;
        const int p = v[j];
        cells[row + x] = std::int32_t(std::int64_t(x - p) * (x - p) + f[p]);
      }
    }
  });

  return dist;
}

SdfField sdf(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  SdfField field{Raster<float>(w, h, 0.0f)};
  auto out = field.values.pixels();

  const std::vector<PixelCoord> edge = boundary(mask);
  if (edge.empty()) {
    // Empty mask: no boundary exists; saturate at the frame diagonal.
    const float diag = float(std::sqrt(double(w) * w + double(h) * h));
    std::fill(out.begin(), out.end(), diag);
    return field;
  }

  const Raster<std::int32_t> sq = edt_sq(edge, w, h);
  auto sq_cells = sq.pixels();
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int32_t d2 = sq_cells[i];
    if (d2 == 0) {
      out[i] = 0.0f;
    } else {
      const float d = float(std::sqrt(double(d2)));
      out[i] = bits[i] ? -d : d;
    }
  }
  return field;
}

}  // namespace tlskit
