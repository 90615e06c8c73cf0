#include "tlskit/losses.hpp"

#include <algorithm>
#include <cmath>

#include "tlskit/sdt.hpp"

namespace tlskit {

namespace {

constexpr double kDiceSmoothing = 1e-6;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(Errc::DimMismatch, std::string(what) + ": " + std::to_string(a) + " vs " +
                                       std::to_string(b) + " elements");
}

void require_binary(const ProbArray& g) {
  if (g.kind != ProbArray::Kind::Probability)
    throw Error(Errc::InvalidValue, "ground truth must be a probability array");
  for (double v : g.values)
    if (v != 0.0 && v != 1.0)
      throw Error(Errc::InvalidValue, "ground truth must be binary, got " + std::to_string(v));
}

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

ProbArray probabilities(std::vector<double> values) {
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(Errc::InvalidValue, "probability " + std::to_string(v) + " outside [0,1]");
  return ProbArray{std::move(values), ProbArray::Kind::Probability};
}

ProbArray logits(std::vector<double> values) {
  return ProbArray{std::move(values), ProbArray::Kind::Logit};
}

double sdf_loss(const BinaryMask& pred_mask, const BinaryMask& gt_mask) {
  if (!pred_mask.same_dims(gt_mask))
    throw Error(Errc::DimMismatch, "prediction " + std::to_string(pred_mask.width()) + "x" +
                                       std::to_string(pred_mask.height()) + " vs ground truth " +
                                       std::to_string(gt_mask.width()) + "x" +
                                       std::to_string(gt_mask.height()));
  const SdfField pred = sdf(pred_mask);
  const SdfField gt = sdf(gt_mask);
  const auto p = pred.values.pixels();
  const auto g = gt.values.pixels();
  std::vector<double> sq(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = double(p[i]) - double(g[i]);
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / double(sq.size());
}

double dice_loss(const ProbArray& s, const ProbArray& g) {
  require_same_length(s.size(), g.size(), "dice inputs");
  if (s.kind != ProbArray::Kind::Probability)
    throw Error(Errc::InvalidValue, "dice expects probabilities, got logits");
  require_binary(g);
  std::vector<double> prod(s.size()), s2(s.size()), g2(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    prod[i] = s.values[i] * g.values[i];
    s2[i] = s.values[i] * s.values[i];
    g2[i] = g.values[i] * g.values[i];
  }
  const double num = 2.0 * pairwise_sum(prod);
  const double den = pairwise_sum(s2) + pairwise_sum(g2) + kDiceSmoothing;
  return -num / den;
}

double ce_loss(const ProbArray& fg_logits, const ProbArray& bg_logits, const ProbArray& g) {
  require_same_length(fg_logits.size(), bg_logits.size(), "logit channels");
  require_same_length(fg_logits.size(), g.size(), "ce inputs");
  if (fg_logits.kind != ProbArray::Kind::Logit || bg_logits.kind != ProbArray::Kind::Logit)
    throw Error(Errc::InvalidValue, "ce expects logit channels");
  require_binary(g);
  std::vector<double> terms(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    // Stable two-class softmax: p_fg = 1 / (1 + exp(bg - fg)).
    const double p_fg = 1.0 / (1.0 + std::exp(bg_logits.values[i] - fg_logits.values[i]));
    const double p_bg = 1.0 - p_fg;
    terms[i] = -(g.values[i] * clamped_log(p_fg) + (1.0 - g.values[i]) * clamped_log(p_bg));
  }
  return pairwise_sum(terms) / double(terms.size());
}

double ce_loss_from_probabilities(const ProbArray& p_fg, const ProbArray& g) {
  require_same_length(p_fg.size(), g.size(), "ce inputs");
  if (p_fg.kind != ProbArray::Kind::Probability)
    throw Error(Errc::InvalidValue, "expected probabilities, got logits");
  require_binary(g);
  std::vector<double> terms(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    terms[i] = -(g.values[i] * clamped_log(p_fg.values[i]) +
                 (1.0 - g.values[i]) * clamped_log(1.0 - p_fg.values[i]));
  return pairwise_sum(terms) / double(terms.size());
}

LossBreakdown total_loss(const BinaryMask& pred_mask, const BinaryMask& gt_mask,
                         const ProbArray& fg_logits, const ProbArray& bg_logits,
                         const ProbArray& g) {
  std::vector<double> p_fg(fg_logits.size());
  for (std::size_t i = 0; i < p_fg.size(); ++i)
    p_fg[i] = 1.0 / (1.0 + std::exp(bg_logits.values[i] - fg_logits.values[i]));

  LossBreakdown out;
  out.dice = dice_loss(probabilities(std::move(p_fg)), g);
  out.ce = ce_loss(fg_logits, bg_logits, g);
  out.sdf = sdf_loss(pred_mask, gt_mask);
  return out;
}

double dann_cls_loss(const DannBatch& batch) {
  std::vector<double> terms;
  terms.reserve(batch.samples.size());
  bool any_labeled = false;
  for (const DannSample& s : batch.samples) {
    if (!s.class_label) continue;
    any_labeled = true;
    if (*s.class_label != 0 && *s.class_label != 1)
      throw Error(Errc::InvalidValue, "class label must be 0/1, got " + std::to_string(*s.class_label));
    terms.push_back(double(*s.class_label) * -clamped_log(s.class_prob));
  }
  if (!any_labeled) throw Error(Errc::NoLabeledSamples, "batch carries no class labels");
  return pairwise_sum(terms);
}

double dann_adv_loss(const DannBatch& batch) {
  std::vector<double> terms;
  terms.reserve(batch.samples.size());
  for (const DannSample& s : batch.samples) {
    if (s.domain_label != 0 && s.domain_label != 1)
      throw Error(Errc::InvalidValue, "domain label must be 0/1, got " + std::to_string(s.domain_label));
    terms.push_back(double(s.domain_label) * -clamped_log(s.domain_prob) +
                    (1.0 - double(s.domain_label)) * -clamped_log(1.0 - s.domain_prob));
  }
  return pairwise_sum(terms);
}

double dann_total(const DannBatch& batch) { return dann_cls_loss(batch) + dann_adv_loss(batch); }

}  // namespace tlskit
