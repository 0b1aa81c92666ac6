#include "trauma/ensemble.hpp"

#include <algorithm>

#include "trauma/errors.hpp"
#include "trauma/rng.hpp"

namespace trauma::ens {

SliceProbs slice_ensemble(const std::vector<SliceProbs>& preds) {
  if (preds.empty()) throw contract_error("slice_ensemble: no models");
  const auto& first = preds[0];
  for (const auto& p : preds) {
    if (p.groups.size() != first.groups.size())
      throw contract_error("slice_ensemble: group count mismatch");
    for (std::size_t g = 0; g < p.groups.size(); ++g) {
      if (p.groups[g].size() != first.groups[g].size())
        throw contract_error("slice_ensemble: slice count mismatch");
      for (std::size_t s = 0; s < p.groups[g].size(); ++s)
        if (p.groups[g][s].size() != first.groups[g][s].size())
          throw contract_error("slice_ensemble: state count mismatch");
    }
  }
  const double inv = 1.0 / static_cast<double>(preds.size());
  SliceProbs out = first;
  for (std::size_t g = 0; g < out.groups.size(); ++g)
    for (std::size_t s = 0; s < out.groups[g].size(); ++s)
      for (std::size_t c = 0; c < out.groups[g][s].size(); ++c) {
        double acc = 0.0;
        for (const auto& p : preds) acc += p.groups[g][s][c];
        out.groups[g][s][c] = acc * inv;
      }
  return out;
}

PatientProbs patient_aggregate(const SliceProbs& slices,
                               const LabelSchema& schema) {
  if (slices.groups.size() != schema.groups.size())
    throw contract_error("patient_aggregate: group count mismatch");
  PatientProbs out;
  out.groups.resize(slices.groups.size());
  for (std::size_t g = 0; g < slices.groups.size(); ++g) {
    const auto& grp = schema.groups[g];
    const auto& per_slice = slices.groups[g];
    if (per_slice.empty())
      throw contract_error("patient_aggregate: empty slice set for group " +
                           grp.name);
    std::vector<double> agg(static_cast<std::size_t>(grp.state_count), 0.0);
    for (int st = 0; st < grp.state_count; ++st) {
      if (st == grp.healthy_state) continue;
      double mx = 0.0;
      for (const auto& slice : per_slice) {
        if (static_cast<int>(slice.size()) != grp.state_count)
          throw contract_error("patient_aggregate: state count mismatch");
        mx = std::max(mx, slice[static_cast<std::size_t>(st)]);
      }
      agg[static_cast<std::size_t>(st)] = mx;
    }
    double worst = 0.0;
    for (int st = 0; st < grp.state_count; ++st)
      if (st != grp.healthy_state)
        worst = std::max(worst, agg[static_cast<std::size_t>(st)]);
    agg[static_cast<std::size_t>(grp.healthy_state)] =
        std::clamp(1.0 - worst, 0.0, 1.0);
    double sum = 0.0;
    for (double v : agg) sum += v;
    if (sum <= 0.0)
      throw contract_error("patient_aggregate: degenerate all-zero group");
    for (double& v : agg) v /= sum;
    out.groups[g] = std::move(agg);
  }
  return out;
}

PatientProbs final_ensemble(const std::vector<PatientProbs>& preds) {
  if (preds.empty()) throw contract_error("final_ensemble: no models");
  const auto& first = preds[0];
  for (const auto& p : preds) {
    if (p.groups.size() != first.groups.size())
      throw contract_error("final_ensemble: group count mismatch");
    for (std::size_t g = 0; g < p.groups.size(); ++g)
      if (p.groups[g].size() != first.groups[g].size())
        throw contract_error("final_ensemble: state count mismatch");
  }
  const double inv = 1.0 / static_cast<double>(preds.size());
  PatientProbs out = first;
  for (std::size_t g = 0; g < out.groups.size(); ++g)
    for (std::size_t c = 0; c < out.groups[g].size(); ++c) {
      double acc = 0.0;
      for (const auto& p : preds) acc += p.groups[g][c];
      out.groups[g][c] = acc * inv;
    }
  return out;
}

std::vector<std::string> FoldSpec::training_ids(
    int fold, const std::vector<std::string>& all) const {
  if (full) return all;
  if (fold < 0 || fold >= k) throw contract_error("FoldSpec: fold out of range");
  const auto& val = validation[static_cast<std::size_t>(fold)];
  std::vector<std::string> train;
  for (const auto& id : all)
    if (std::find(val.begin(), val.end(), id) == val.end()) train.push_back(id);
  if (train.empty()) throw contract_error("FoldSpec: empty training split");
  return train;
}

FoldSpec make_folds(const std::vector<std::string>& study_ids, int k,
                    std::uint64_t seed) {
  if (k < 2) throw contract_error("make_folds: k must be >= 2 (or use full)");
  if (k > static_cast<int>(study_ids.size()))
    throw contract_error("make_folds: k exceeds study count");
  std::vector<std::string> ids = study_ids;
  Rng rng(seed);
  // Fisher-Yates with the project RNG so the shuffle is identical everywhere.
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(ids[i - 1], ids[j]);
  }
  FoldSpec spec;
  spec.k = k;
  spec.seed = seed;
  spec.validation.assign(static_cast<std::size_t>(k), {});
  for (std::size_t i = 0; i < ids.size(); ++i)
    spec.validation[i % static_cast<std::size_t>(k)].push_back(ids[i]);
  return spec;
}

FoldSpec full_fold() {
  FoldSpec spec;
  spec.full = true;
  return spec;
}

}  // namespace trauma::ens
