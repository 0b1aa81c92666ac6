#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trauma/metric.hpp"
#include "trauma/schema.hpp"

namespace trauma::ens {

using metric::PatientProbs;

// Per-slice probabilities for one study: groups[g][slice][state].
struct SliceProbs {
  std::vector<std::vector<std::vector<double>>> groups;

  std::size_t slice_count() const {
    return groups.empty() ? 0 : groups[0].size();
  }
};

// Arithmetic mean across models, per slice/group/state.
SliceProbs slice_ensemble(const std::vector<SliceProbs>& preds);

// Per non-healthy state: max over slices. The healthy state is recomputed as
// 1 - max(non-healthy aggregates), clipped to [0,1], and the group is
// renormalized to sum 1.
PatientProbs patient_aggregate(const SliceProbs& slices,
                               const LabelSchema& schema);

// Arithmetic mean across models, per group/state.
PatientProbs final_ensemble(const std::vector<PatientProbs>& preds);

struct FoldSpec {
  bool full = false;  // single model trained on everything
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> validation;  // per-fold validation ids

  int model_count() const { return full ? 1 : k; }
  std::vector<std::string> training_ids(int fold,
                                        const std::vector<std::string>& all) const;
};

// Seeded shuffle then round-robin assignment; deterministic in (ids, k, seed).
FoldSpec make_folds(const std::vector<std::string>& study_ids, int k,
                    std::uint64_t seed);
FoldSpec full_fold();

}  // namespace trauma::ens
