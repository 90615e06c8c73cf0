#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tlskit/core.hpp"

namespace tlskit {

// Flat per-pixel (or per-sample) array. Probability arrays are validated to
// [0, 1]; logit arrays are unconstrained reals.
struct ProbArray {
  enum class Kind { Probability, Logit };

  std::vector<double> values;
  Kind kind = Kind::Probability;

  std::size_t size() const noexcept { return values.size(); }
};

ProbArray probabilities(std::vector<double> values);  // validates [0,1]
ProbArray logits(std::vector<double> values);

// Floor applied to every probability before a logarithm. Numerical guard
// against -inf, not a modeling choice.
inline constexpr double kProbFloor = 1e-12;

// Mean squared error between the signed distance fields of two same-sized
// masks. Zero iff the masks are identical (identical fields). DimMismatch
// when shapes differ.
double sdf_loss(const BinaryMask& pred_mask, const BinaryMask& gt_mask);

// Soft Dice loss: -2*sum(s*g) / (sum(s^2) + sum(g^2) + 1e-6). Lives in
// [-1, 0]; two empty inputs score 0 (perfect absence). Requires binary g.
double dice_loss(const ProbArray& s, const ProbArray& g);

// Two-class cross entropy over the per-pixel softmax of (fg, bg) logits,
// averaged over pixels: -mean(g*ln p_fg + (1-g)*ln p_bg).
double ce_loss(const ProbArray& fg_logits, const ProbArray& bg_logits, const ProbArray& g);

// Same loss when the foreground probability is already a softmax output;
// the background probability is its complement.
double ce_loss_from_probabilities(const ProbArray& p_fg, const ProbArray& g);

// Per-term breakdown of the combined segmentation loss.
struct LossBreakdown {
  double dice = 0.0;
  double ce = 0.0;
  double sdf = 0.0;

  double total() const noexcept { return dice + ce + sdf; }
};

// Unweighted sum of Dice + CE + SDF. The Dice term consumes the foreground
// softmax probabilities of the logits; the SDF term consumes the masks.
// Each part equals its standalone function bit-for-bit.
LossBreakdown total_loss(const BinaryMask& pred_mask, const BinaryMask& gt_mask,
                         const ProbArray& fg_logits, const ProbArray& bg_logits,
                         const ProbArray& g);

// One sample of a domain-adversarial batch. Only source-domain samples carry
// a class label; every sample carries a domain label and both probabilities.
struct DannSample {
  std::optional<int> class_label;  // 0/1 when labeled
  double class_prob = 0.0;         // classifier output for the positive class
  int domain_label = 0;            // 0/1
  double domain_prob = 0.0;        // discriminator output for domain 1
};

struct DannBatch {
  std::vector<DannSample> samples;
};

// Classification term: sum over labeled samples of y * ln(1 / p_cls).
// As formulated, unlabeled and negative samples contribute nothing.
// Throws NoLabeledSamples when no sample carries a class label.
double dann_cls_loss(const DannBatch& batch);

// Adversarial term: binary cross entropy of the domain discriminator,
// sum of d * ln(1/p_dom) + (1-d) * ln(1/(1-p_dom)).
double dann_adv_loss(const DannBatch& batch);

// Sum of the classification and adversarial terms.
double dann_total(const DannBatch& batch);

}  // namespace tlskit
