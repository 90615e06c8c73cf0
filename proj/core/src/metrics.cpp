#include "tlskit/metrics.hpp"

#include <algorithm>
#include <limits>

namespace tlskit {

MatchCriterion MatchCriterion::iou(double t) {
  if (!(t > 0.0 && t <= 1.0))
    throw Error(Errc::InvalidValue, "IoU threshold must lie in (0,1], got " + std::to_string(t));
  return {Mode::IoUThreshold, t};
}

MatchCriterion MatchCriterion::box_coverage(double t) {
  if (!(t > 0.0 && t <= 1.0))
    throw Error(Errc::InvalidValue, "coverage threshold must lie in (0,1], got " + std::to_string(t));
  return {Mode::BoxCoverage, t};
}

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> seen(mask.pixel_count(), 0);
  std::vector<Component> out;
  std::vector<PixelCoord> stack;

  const bool diag = connectivity == Connectivity::Eight;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = std::size_t(y0) * w + x0;
      if (seen[i0] || !mask.foreground(x0, y0)) continue;

      Component comp;
      comp.extent = {x0, y0, x0, y0};
      stack.assign(1, {x0, y0});
      seen[i0] = 1;
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        comp.pixels.push_back(p);
        comp.extent.x_min = std::min(comp.extent.x_min, p.x);
        comp.extent.x_max = std::max(comp.extent.x_max, p.x);
        comp.extent.y_min = std::min(comp.extent.y_min, p.y);
        comp.extent.y_max = std::max(comp.extent.y_max, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!diag && dx != 0 && dy != 0) continue;
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t ni = std::size_t(ny) * w + nx;
            if (seen[ni] || !mask.foreground(nx, ny)) continue;
            seen[ni] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end(),
                [](const PixelCoord& a, const PixelCoord& b) {
                  return a.y != b.y ? a.y < b.y : a.x < b.x;
                });
      out.push_back(std::move(comp));
    }
  }
  return out;
}

namespace {

std::int64_t intersection_area(const Component& comp, const BoundingBox& box) {
  // Cheap reject on the cached extent first.
  if (comp.extent.x_max < box.x_min || comp.extent.x_min > box.x_max ||
      comp.extent.y_max < box.y_min || comp.extent.y_min > box.y_max)
    return 0;
  std::int64_t n = 0;
  for (const PixelCoord& p : comp.pixels)
    if (box.contains(p.x, p.y)) ++n;
  return n;
}

bool matches(const MatchCriterion& c, std::int64_t inter, std::int64_t comp_size,
             std::int64_t box_area) {
  if (inter <= 0) return false;
  switch (c.mode) {
    case MatchCriterion::Mode::AnyOverlap: return true;
    case MatchCriterion::Mode::IoUThreshold: {
      const std::int64_t uni = comp_size + box_area - inter;
      return double(inter) / double(uni) >= c.threshold;
    }
    case MatchCriterion::Mode::BoxCoverage: return double(inter) / double(box_area) >= c.threshold;
  }
  return false;
}

}  // namespace

DetectionCounts detection_counts(std::span<const Component> components,
                                 std::span<const BoundingBox> boxes,
                                 const MatchCriterion& criterion) {
  for (const BoundingBox& b : boxes) validate(b);

  struct Pair {
    std::int64_t inter;
    int comp;
    int box;
  };
  std::vector<Pair> pairs;
  std::vector<std::uint8_t> comp_hit(components.size(), 0);
  std::vector<std::uint8_t> box_hit(boxes.size(), 0);

  for (int ci = 0; ci < int(components.size()); ++ci) {
    for (int bi = 0; bi < int(boxes.size()); ++bi) {
      const std::int64_t inter = intersection_area(components[ci], boxes[bi]);
      if (!matches(criterion, inter, std::int64_t(components[ci].size()), boxes[bi].area()))
        continue;
      comp_hit[ci] = 1;
      box_hit[bi] = 1;
      pairs.push_back({inter, ci, bi});
    }
  }

  // Greedy one-to-one matching by descending intersection area; ties prefer
  // the smaller component index, then the smaller box index.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.inter != b.inter) return a.inter > b.inter;
    if (a.comp != b.comp) return a.comp < b.comp;
    return a.box < b.box;
  });
  std::vector<std::uint8_t> comp_used(components.size(), 0);
  std::vector<std::uint8_t> box_used(boxes.size(), 0);
  int tp = 0;
  for (const Pair& p : pairs) {
    if (comp_used[p.comp] || box_used[p.box]) continue;
    comp_used[p.comp] = 1;
    box_used[p.box] = 1;
    ++tp;
  }

  DetectionCounts out;
  out.n_components = int(components.size());
  out.n_boxes = int(boxes.size());
  out.tp = tp;
  out.fp = out.n_components - tp;
  out.fn = out.n_boxes - tp;
  for (auto h : comp_hit) out.tps += h;
  for (auto h : box_hit) out.tpb += h;
  return out;
}

PrecisionRecall precision_recall(const DetectionCounts& c) {
  PrecisionRecall out;
  if (c.tp + c.fp > 0) out.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tp + c.fn > 0) out.recall = double(c.tp) / double(c.tp + c.fn);
  return out;
}

std::optional<double> f_beta(std::optional<double> precision, std::optional<double> recall,
                             double beta) {
  if (!precision || !recall) return std::nullopt;
  const double p = *precision;
  const double r = *recall;
  const double den = beta * beta * p + r;
  if (den == 0.0) return std::nullopt;
  return (1.0 + beta * beta) * p * r / den;
}

SpBr sp_br(const DetectionCounts& c) {
  SpBr out;
  if (c.n_components > 0) out.sp = double(c.tps) / double(c.n_components);
  if (c.n_boxes > 0) out.br = double(c.tpb) / double(c.n_boxes);
  return out;
}

EvalReport evaluate_detection(const BinaryMask& pred, std::span<const BoundingBox> boxes,
                              const MatchCriterion& criterion, std::span<const double> betas,
                              Connectivity connectivity) {
  for (const BoundingBox& b : boxes) {
    validate(b);
    if (b.x_min < 0 || b.y_min < 0 || b.x_max >= pred.width() || b.y_max >= pred.height())
      throw Error(Errc::OutOfBounds,
                  "box [" + std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," +
                      std::to_string(b.x_max) + "," + std::to_string(b.y_max) + "] outside " +
                      std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                      " frame");
  }

  EvalReport rep;
  rep.criterion = criterion;
  rep.betas.assign(betas.begin(), betas.end());

  const std::vector<Component> comps = connected_components(pred, connectivity);
  rep.counts = detection_counts(comps, boxes, criterion);

  const PrecisionRecall pr = precision_recall(rep.counts);
  rep.precision = pr.precision;
  rep.recall = pr.recall;
  const SpBr g = sp_br(rep.counts);
  rep.sp = g.sp;
  rep.br = g.br;
  for (double beta : betas) {
    rep.f.push_back(f_beta(pr.precision, pr.recall, beta));
    rep.gf.push_back(gf_beta(g.sp, g.br, beta));
  }
  return rep;
}

}  // namespace tlskit
