#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tlskit/metrics.hpp"
#include "tlskit/rng.hpp"

using namespace tlskit;

namespace {

BinaryMask mask_from(std::initializer_list<std::string_view> rows) {
  const int h = int(rows.size());
  const int w = int(rows.begin()->size());
  BinaryMask m(w, h);
  int y = 0;
  for (auto row : rows) {
    for (int x = 0; x < w; ++x) m.set(x, y, row[x] == '#');
    ++y;
  }
  return m;
}

// Random scene: a few rectangular blobs as components plus random boxes.
struct RandomScene {
  BinaryMask mask;
  std::vector<BoundingBox> boxes;
};

RandomScene random_scene(SplitMix64& rng, int size, int max_blobs, int max_boxes) {
  RandomScene s{BinaryMask(size, size), {}};
  const int n_blobs = 1 + int(rng.next_u64() % max_blobs);
  for (int i = 0; i < n_blobs; ++i) {
    const int w = 1 + int(rng.next_u64() % (size / 3));
    const int h = 1 + int(rng.next_u64() % (size / 3));
    const int x0 = int(rng.next_u64() % (size - w));
    const int y0 = int(rng.next_u64() % (size - h));
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) s.mask.set(x, y, true);
  }
  const int n_boxes = 1 + int(rng.next_u64() % max_boxes);
  for (int i = 0; i < n_boxes; ++i) {
    const int w = 1 + int(rng.next_u64() % (size / 3));
    const int h = 1 + int(rng.next_u64() % (size / 3));
    const int x0 = int(rng.next_u64() % (size - w));
    const int y0 = int(rng.next_u64() % (size - h));
    s.boxes.push_back({x0, y0, x0 + w - 1, y0 + h - 1});
  }
  return s;
}

}  // namespace

TEST_CASE("connected_components basics") {
  CHECK(connected_components(BinaryMask(5, 5)).empty());

  const BinaryMask diag = mask_from({"#.", ".#"});
  CHECK(connected_components(diag, Connectivity::Eight).size() == 1);
  CHECK(connected_components(diag, Connectivity::Four).size() == 2);

  const BinaryMask full = mask_from({"###", "###"});
  const auto comps = connected_components(full);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].size() == 6);
  CHECK(comps[0].extent == BoundingBox{0, 0, 2, 1});
}

TEST_CASE("connected_components order and pixel order are deterministic") {
  const BinaryMask m = mask_from({
      ".#..#",
      ".#...",
      "....#",
  });
  const auto comps = connected_components(m, Connectivity::Four);
  REQUIRE(comps.size() == 3);
  // Ordered by first pixel in row-major scan order.
  CHECK(comps[0].pixels.front() == PixelCoord{1, 0});
  CHECK(comps[1].pixels.front() == PixelCoord{4, 0});
  CHECK(comps[2].pixels.front() == PixelCoord{4, 2});
  CHECK(std::is_sorted(comps[0].pixels.begin(), comps[0].pixels.end(),
                       [](const PixelCoord& a, const PixelCoord& b) {
                         return a.y != b.y ? a.y < b.y : a.x < b.x;
                       }));
}

TEST_CASE("detection_counts: one component covering two boxes") {
  // One blob spanning both ground-truth boxes.
  const BinaryMask m = mask_from({
      "..........",
      ".########.",
      "..........",
  });
  const auto comps = connected_components(m);
  const std::vector<BoundingBox> boxes{{1, 0, 3, 2}, {6, 0, 8, 2}};
  const DetectionCounts c = detection_counts(comps, boxes);
  CHECK(c.tps == 1);
  CHECK(c.tpb == 2);
  CHECK(c.tp == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 1);
}

TEST_CASE("detection_counts: one box covered by two components") {
  const BinaryMask m = mask_from({
      "..........",
      ".##...##..",
      "..........",
  });
  const auto comps = connected_components(m);
  REQUIRE(comps.size() == 2);
  const std::vector<BoundingBox> boxes{{0, 0, 9, 2}};
  const DetectionCounts c = detection_counts(comps, boxes);
  CHECK(c.tps == 2);
  CHECK(c.tpb == 1);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 0);
}

TEST_CASE("detection_counts: empty prediction") {
  const std::vector<BoundingBox> boxes{{0, 0, 1, 1}, {3, 3, 4, 4}, {6, 6, 7, 7}};
  const DetectionCounts c = detection_counts({}, boxes);
  CHECK(c.tp == 0);
  CHECK(c.fp == 0);
  CHECK(c.tps == 0);
  CHECK(c.tpb == 0);
  CHECK(c.fn == 3);
}

TEST_CASE("match criteria thresholds") {
  const BinaryMask m = mask_from({
      "####",
      "####",
  });  // one 4x2 component
  const auto comps = connected_components(m);
  const std::vector<BoundingBox> boxes{{0, 0, 1, 1}};  // 2x2 box, intersection 2x2=4... overlap 2x2

  // AnyOverlap matches; IoU = 4 / (8 + 4 - 4) = 0.5.
  CHECK(detection_counts(comps, boxes, MatchCriterion::any_overlap()).tps == 1);
  CHECK(detection_counts(comps, boxes, MatchCriterion::iou(0.5)).tps == 1);
  CHECK(detection_counts(comps, boxes, MatchCriterion::iou(0.51)).tps == 0);
  // Box fully covered: coverage 1.0.
  CHECK(detection_counts(comps, boxes, MatchCriterion::box_coverage(1.0)).tps == 1);
  CHECK_THROWS_AS(MatchCriterion::iou(0.0), Error);
  CHECK_THROWS_AS(MatchCriterion::box_coverage(1.5), Error);
}

TEST_CASE("precision_recall and undefined handling") {
  const PrecisionRecall pr = precision_recall({1, 0, 1, 1, 2, 1, 2});
  REQUIRE(pr.precision);
  REQUIRE(pr.recall);
  CHECK(*pr.precision == 1.0);
  CHECK(*pr.recall == 0.5);

  const PrecisionRecall undef = precision_recall({0, 0, 0, 0, 0, 0, 0});
  CHECK_FALSE(undef.precision);
  CHECK_FALSE(undef.recall);

  const PrecisionRecall perfect = precision_recall({5, 0, 0, 5, 5, 5, 5});
  CHECK(*perfect.precision == 1.0);
  CHECK(*perfect.recall == 1.0);
}

TEST_CASE("f_beta reproduces the published operating point") {
  const auto f1 = f_beta(78.21, 84.34, 1.0);
  const auto f2 = f_beta(78.21, 84.34, 2.0);
  REQUIRE(f1);
  REQUIRE(f2);
  CHECK(std::abs(*f1 - 81.16) <= 0.01);
  CHECK(std::abs(*f2 - 83.04) <= 0.01);

  CHECK_FALSE(f_beta(0.0, 0.0, 1.0));
  CHECK_FALSE(f_beta(std::nullopt, 0.5, 1.0));
  for (double beta : {0.5, 1.0, 2.0})
    CHECK(*f_beta(0.37, 0.37, beta) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("sp_br and gf_beta") {
  const SpBr figure1 = sp_br({1, 0, 1, 1, 2, 1, 2});
  CHECK(*figure1.sp == 1.0);
  CHECK(*figure1.br == 1.0);

  const SpBr third = sp_br({1, 2, 0, 1, 1, 3, 1});
  CHECK(*third.sp == doctest::Approx(1.0 / 3.0));

  CHECK_FALSE(sp_br({0, 0, 0, 0, 0, 0, 0}).br);  // no boxes

  const auto gf1 = gf_beta(84.80, 87.95, 1.0);
  const auto gf2 = gf_beta(84.80, 87.95, 2.0);
  CHECK(std::abs(*gf1 - 86.34) <= 0.01);
  CHECK(std::abs(*gf2 - 87.30) <= 0.01);
}

TEST_CASE("beta=2 pulls the score toward recall") {
  SplitMix64 rng(0xF2);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = rng.next_uniform(0.01, 1.0);
    const double r = rng.next_uniform(0.01, 1.0);
    const double f1 = *f_beta(p, r, 1.0);
    const double f2 = *f_beta(p, r, 2.0);
    CHECK(std::abs(f2 - r) <= std::abs(f1 - r) + 1e-12);
  }
}

TEST_CASE("SP >= P and BR >= R on random scenes") {
  SplitMix64 rng(0x5CEE);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomScene s = random_scene(rng, 24, 4, 4);
    const auto comps = connected_components(s.mask);
    if (comps.empty()) continue;
    const DetectionCounts c = detection_counts(comps, s.boxes);

    // Structural invariants of the tallies.
    CHECK(c.tp <= std::min(c.tps, c.tpb));
    CHECK(c.tps <= c.n_components);
    CHECK(c.tpb <= c.n_boxes);
    CHECK(c.fp == c.n_components - c.tp);
    CHECK(c.fn == c.n_boxes - c.tp);

    const PrecisionRecall pr = precision_recall(c);
    const SpBr g = sp_br(c);
    REQUIRE(g.sp);
    REQUIRE(g.br);
    REQUIRE(pr.precision);
    REQUIRE(pr.recall);
    CHECK(*g.sp >= *pr.precision);
    CHECK(*g.br >= *pr.recall);
  }
}

TEST_CASE("evaluate_detection rejects boxes outside the frame") {
  const BinaryMask m(8, 8);
  const std::vector<BoundingBox> bad{{2, 2, 9, 3}};
  CHECK_THROWS_AS(evaluate_detection(m, bad), Error);
}

TEST_CASE("greedy TP is near-optimal on small scenes") {
  SplitMix64 rng(0x9EED);
  int mismatches = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const RandomScene s = random_scene(rng, 20, 4, 4);
    const auto comps = connected_components(s.mask);
    if (comps.size() > 6 || s.boxes.size() > 6) continue;
    const DetectionCounts c = detection_counts(comps, s.boxes);
    const int best = oracles::optimal_tp(comps, s.boxes, MatchCriterion::any_overlap());
    CHECK(c.tp <= best);
    if (c.tp != best) ++mismatches;
  }
  CHECK(mismatches <= 3);  // >= 99% agreement
}

TEST_CASE("metrics are translation-invariant") {
  SplitMix64 rng(0x7141);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomScene s = random_scene(rng, 16, 3, 3);
    const int dx = 5, dy = 9;
    BinaryMask shifted(s.mask.width() + dx, s.mask.height() + dy);
    for (int y = 0; y < s.mask.height(); ++y)
      for (int x = 0; x < s.mask.width(); ++x)
        if (s.mask.get(x, y)) shifted.set(x + dx, y + dy, true);
    std::vector<BoundingBox> moved;
    for (const BoundingBox& b : s.boxes)
      moved.push_back({b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy});

    const DetectionCounts a = detection_counts(connected_components(s.mask), s.boxes);
    const DetectionCounts b = detection_counts(connected_components(shifted), moved);
    CHECK(a.tp == b.tp);
    CHECK(a.tps == b.tps);
    CHECK(a.tpb == b.tpb);
    CHECK(a.fp == b.fp);
    CHECK(a.fn == b.fn);
  }
}

TEST_CASE("evaluate_detection end to end") {
  const BinaryMask m = mask_from({
      "##....",
      "##....",
      "......",
  });
  const std::vector<BoundingBox> boxes{{0, 0, 2, 2}, {4, 0, 5, 2}};
  const EvalReport rep = evaluate_detection(m, boxes);
  CHECK(rep.counts.tp == 1);
  CHECK(rep.counts.fn == 1);
  REQUIRE(rep.precision);
  CHECK(*rep.precision == 1.0);
  CHECK(*rep.recall == 0.5);
  REQUIRE(rep.f.size() == 2);
  CHECK(*rep.f[0] == doctest::Approx(2.0 / 3.0));
  CHECK(rep.betas == std::vector<double>{1.0, 2.0});
}
