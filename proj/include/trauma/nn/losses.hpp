#pragma once

#include <utility>
#include <vector>

#include "trauma/nn/autograd.hpp"
#include "trauma/schema.hpp"

namespace trauma::nn {

inline constexpr double kDiceEps = 1e-6;

// Soft Dice loss over the whole tensor pair:
//   1 - (2*sum(pred*truth) + eps) / (sum(pred) + sum(truth) + eps)
// truth is a constant (no gradient); pred is expected in [0,1].
VarPtr dice_loss(const VarPtr& pred, const Tensor& truth, double eps = kDiceEps);

// Sum over the leading axis of per-sample Dice losses (one term per sample,
// matching a sum-over-training-samples auxiliary loss).
VarPtr dice_per_sample_sum(const VarPtr& pred, const Tensor& truth,
                           double eps = kDiceEps);

// Sum of dice_loss over a list of (prediction, truth) pairs. Empty list is 0.
VarPtr aux_seg_loss(const std::vector<std::pair<VarPtr, Tensor>>& pairs,
                    double eps = kDiceEps);

// Per-group state span inside the concatenated class axis.
struct GroupSpan {
  int offset;
  int len;
};

std::vector<GroupSpan> spans_of(const LabelSchema& schema);

// Core cross-entropy: logits (..., C) with per-group softmax over spans;
// tau holds target probability x per-state weight at every position.
//   L = -(1/P) * sum_positions sum_c tau_c * log p_c,  P = positions
VarPtr grouped_ce_with_targets(const VarPtr& logits, const Tensor& tau,
                               const std::vector<GroupSpan>& spans);

// Weighted cross-entropy against one hard state index per group, shared by
// every position: summed across groups, averaged over leading positions.
VarPtr weighted_ce_loss(const VarPtr& logits,
                        const std::vector<int>& true_state,
                        const LabelSchema& schema);

}  // namespace trauma::nn
