#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tlskit/core.hpp"

namespace tlskit {

// One connected foreground region of a prediction mask. Pixels are kept in
// row-major order; extent is the cached bounding rectangle.
struct Component {
  std::vector<PixelCoord> pixels;
  BoundingBox extent;

  std::size_t size() const noexcept { return pixels.size(); }
};

enum class Connectivity { Four = 4, Eight = 8 };

// Maximal connected foreground regions, ordered by their first pixel in
// row-major scan order.
std::vector<Component> connected_components(const BinaryMask& mask,
                                            Connectivity connectivity = Connectivity::Eight);

// What counts as a component/box overlap.
struct MatchCriterion {
  enum class Mode { AnyOverlap, IoUThreshold, BoxCoverage };

  Mode mode = Mode::AnyOverlap;
  double threshold = 0.0;  // in (0, 1] for the thresholded modes

  static MatchCriterion any_overlap() { return {}; }
  static MatchCriterion iou(double t);
  static MatchCriterion box_coverage(double t);
};

// Raw matching tallies for one scene.
//
//   tps: components overlapping at least one box (one-to-many allowed)
//   tpb: boxes overlapped by at least one component
//   tp:  size of the greedy one-to-one matching (descending intersection
//        area, ties broken by smaller component index, then box index)
//   fp = n_components - tp, fn = n_boxes - tp
struct DetectionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tps = 0;
  int tpb = 0;
  int n_components = 0;
  int n_boxes = 0;
};

DetectionCounts detection_counts(std::span<const Component> components,
                                 std::span<const BoundingBox> boxes,
                                 const MatchCriterion& criterion = MatchCriterion::any_overlap());

// Metrics with zero denominators are reported as disengaged optionals
// ("undefined"), never silently coerced to 0 or 1.
struct PrecisionRecall {
  std::optional<double> precision;  // tp / (tp + fp)
  std::optional<double> recall;     // tp / (tp + fn)
};

PrecisionRecall precision_recall(const DetectionCounts& counts);

// (1 + beta^2) * P * R / (beta^2 * P + R); undefined when either input is
// undefined or both are zero.
std::optional<double> f_beta(std::optional<double> precision, std::optional<double> recall,
                             double beta);

struct SpBr {
  std::optional<double> sp;  // tps / n_components
  std::optional<double> br;  // tpb / n_boxes
};

SpBr sp_br(const DetectionCounts& counts);

// The generalized score is the same harmonic form applied to (SP, BR).
inline std::optional<double> gf_beta(std::optional<double> sp, std::optional<double> br,
                                     double beta) {
  return f_beta(sp, br, beta);
}

// Full per-scene evaluation: component extraction, matching, and every
// metric for the requested beta values.
struct EvalReport {
  DetectionCounts counts;
  MatchCriterion criterion;
  std::vector<double> betas;
  std::optional<double> precision, recall, sp, br;
  std::vector<std::optional<double>> f;   // aligned with betas
  std::vector<std::optional<double>> gf;  // aligned with betas
};

inline constexpr double kDefaultBetas[] = {1.0, 2.0};

EvalReport evaluate_detection(const BinaryMask& pred, std::span<const BoundingBox> boxes,
                              const MatchCriterion& criterion = MatchCriterion::any_overlap(),
                              std::span<const double> betas = kDefaultBetas,
                              Connectivity connectivity = Connectivity::Eight);

}  // namespace tlskit
