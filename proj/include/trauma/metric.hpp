#pragma once

#include <map>
#include <string>
#include <vector>

#include "trauma/schema.hpp"

namespace trauma::metric {

// Per-patient probabilities: groups[g][s] for state s of group g. May hold
// raw (unnormalized) values; evaluate() normalizes per group.
struct PatientProbs {
  std::vector<std::vector<double>> groups;
};

struct EvalOptions {
  double clip = 1e-15;            // probability clipping before logs
  bool weight_normalized = false; // divide by sum(w) instead of N
  bool uniform_fallback = false;  // all-zero group -> uniform instead of error
};

// Divide each state by the group sum. Division goes through the group max
// first, so inputs that are exact positive rescalings of one another
// normalize to bit-identical outputs. All-zero groups raise
// degenerate_input_error unless uniform_fallback is set.
std::vector<double> normalize_probs(const std::vector<double>& p,
                                    bool uniform_fallback = false);

// Sample-weighted binary log loss, exactly as printed: divide by N with the
// weights inside the sum (or by sum(w) in weight-normalized mode). y must be
// 0/1; p is clipped to [clip, 1-clip].
double group_log_loss(const std::vector<double>& y, const std::vector<double>& p,
                      const std::vector<double>& w,
                      const EvalOptions& opt = {});

// max over groups of (1 - p(healthy)); expects normalized groups.
double any_injury(const PatientProbs& normalized, const LabelSchema& schema);

// Mean of the M group losses and the any-injury loss.
double final_score(const std::vector<double>& group_losses, double any_loss);

struct MetricReport {
  std::vector<double> group_losses;  // schema order
  double any_injury_loss = 0.0;
  double final = 0.0;
  int n_studies = 0;
  EvalOptions options;
};

// Full pipeline: normalize -> per-group losses (each study binarized to its
// true state vs rest) -> any-injury loss (truth: any group non-healthy) ->
// final score. Studies are processed in sorted id order.
MetricReport evaluate(const std::map<std::string, PatientProbs>& preds,
                      const std::map<std::string, std::vector<int>>& truth,
                      const LabelSchema& schema, const EvalOptions& opt = {});

}  // namespace trauma::metric
