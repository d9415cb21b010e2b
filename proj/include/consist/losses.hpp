#pragma once

#include <array>
#include <span>
#include <vector>

#include "consist/autodiff.hpp"
#include "consist/constraints.hpp"
#include "consist/dataset.hpp"
#include "consist/model.hpp"

namespace consist {

// Regularization strengths, regularizer flavor, and per-label loss
// weights. Empty weight vectors mean uniform 1.
struct LossConfig {
  enum class Mode { Hard, Soft };
  double omega1 = 0.0;
  double omega2 = 0.0;
  Mode mode = Mode::Hard;
  std::vector<double> class_weights;                    // length C or empty
  std::vector<std::array<double, 2>> evidence_weights;  // {w_pos, w_neg} per k, or empty
};

// -w_y log p(y|x)
ad::Var weighted_ce_task(const PosteriorNodes& post, int y, const LossConfig& config);

// -w log p(z_k = z|x), weight picked by (k, sign)
ad::Var weighted_ce_evidence(const PosteriorNodes& post, int k, int z, const LossConfig& config);

// Incompatibility penalty anchored at the argmax task prediction; no
// gradient flows through the argmax. Zero when the predicted class
// forbids nothing.
ad::Var reg_r1_hard(const ConstraintSpec& spec, const PosteriorNodes& post);

// Same penalty averaged over classes, weighted by the task posterior;
// gradients reach both the task and evidence heads.
ad::Var reg_r1_soft(const ConstraintSpec& spec, const PosteriorNodes& post);

// Insufficiency penalty -LSE over log-probabilities of the predicted
// class's direct evidence, i.e. -log of their probability sum. Zero for
// classes with no direct evidence. May go negative when the direct
// probabilities sum past 1; this is the price of the smooth surrogate and
// is left unclamped.
ad::Var reg_r2_hard(const ConstraintSpec& spec, const PosteriorNodes& post);

ad::Var reg_r2_soft(const ConstraintSpec& spec, const PosteriorNodes& post);

// Mean classification loss over the batch (each pair carries exactly one
// label) plus omega1/omega2 times the mean regularizers, all on one tape.
ad::Var total_objective(const ConstraintSpec& spec, std::span<const LabeledPair> batch,
                        const LossConfig& config, const TapedParams& params);

}  // namespace consist
