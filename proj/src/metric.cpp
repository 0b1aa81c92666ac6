#include "trauma/metric.hpp"

#include <algorithm>
#include <cmath>

#include "trauma/errors.hpp"

namespace trauma::metric {

std::vector<double> normalize_probs(const std::vector<double>& p,
                                    bool uniform_fallback) {
  if (p.empty()) throw contract_error("normalize_probs: empty group");
  double mx = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw contract_error("normalize_probs: values must be finite and >= 0");
    mx = std::max(mx, v);
  }
  std::vector<double> out(p.size());
  if (mx == 0.0) {
    if (!uniform_fallback)
      throw degenerate_input_error("normalize_probs: all-zero group");
    const double u = 1.0 / static_cast<double>(p.size());
    for (auto& v : out) v = u;
    return out;
  }
  // Ratios to the max are scale-free; the subsequent sum and division then
  // see identical inputs for exactly-rescaled groups.
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] / mx;
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

double group_log_loss(const std::vector<double>& y, const std::vector<double>& p,
                      const std::vector<double>& w, const EvalOptions& opt) {
  const std::size_t n = y.size();
  if (p.size() != n || w.size() != n)
    throw contract_error("group_log_loss: y/p/w length mismatch");
  if (n == 0) throw contract_error("group_log_loss: empty sample set");
  double acc = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0)
      throw contract_error("group_log_loss: y must be 0/1");
    const double pi = std::clamp(p[i], opt.clip, 1.0 - opt.clip);
    acc += (y[i] * std::log(pi) + (1.0 - y[i]) * std::log(1.0 - pi)) * w[i];
    wsum += w[i];
  }
  const double denom = opt.weight_normalized ? wsum : static_cast<double>(n);
  return -acc / denom;
}

double any_injury(const PatientProbs& normalized, const LabelSchema& schema) {
  if (normalized.groups.size() != schema.groups.size())
    throw contract_error("any_injury: group count mismatch");
  double best = 0.0;
  for (std::size_t g = 0; g < schema.groups.size(); ++g) {
    const auto& probs = normalized.groups[g];
    if (static_cast<int>(probs.size()) != schema.groups[g].state_count)
      throw contract_error("any_injury: state count mismatch in group " +
                           schema.groups[g].name);
    const double healthy =
        probs[static_cast<std::size_t>(schema.groups[g].healthy_state)];
    best = std::max(best, 1.0 - healthy);
  }
  return best;
}

double final_score(const std::vector<double>& group_losses, double any_loss) {
  if (group_losses.empty()) throw contract_error("final_score: no group losses");
  double acc = 0.0;
  for (double v : group_losses) acc += v;
  acc += any_loss;
  return acc / static_cast<double>(group_losses.size() + 1);
}

MetricReport evaluate(const std::map<std::string, PatientProbs>& preds,
                      const std::map<std::string, std::vector<int>>& truth,
                      const LabelSchema& schema, const EvalOptions& opt) {
  schema.validate();
  for (const auto& [id, t] : truth)
    if (!preds.count(id))
      throw contract_error("evaluate: missing predictions for study " + id);
  for (const auto& [id, p] : preds)
    if (!truth.count(id))
      throw contract_error("evaluate: missing ground truth for study " + id);

  const std::size_t G = schema.groups.size();
  const int N = static_cast<int>(truth.size());

  // Normalize every study once, in sorted id order.
  std::map<std::string, PatientProbs> norm;
  for (const auto& [id, pp] : preds) {
    if (pp.groups.size() != G)
      throw contract_error("evaluate: study " + id + " has wrong group count");
    PatientProbs q;
    q.groups.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
      if (static_cast<int>(pp.groups[g].size()) != schema.groups[g].state_count)
        throw contract_error("evaluate: study " + id + " group " +
                             schema.groups[g].name + " has wrong state count");
      q.groups[g] = normalize_probs(pp.groups[g], opt.uniform_fallback);
    }
    norm.emplace(id, std::move(q));
  }

  MetricReport report;
  report.options = opt;
  report.n_studies = N;

  for (std::size_t g = 0; g < G; ++g) {
    const auto& grp = schema.groups[g];
    std::vector<double> y, p, w;
    y.reserve(truth.size());
    for (const auto& [id, states] : truth) {
      if (states.size() != G)
        throw contract_error("evaluate: truth for " + id + " has wrong group count");
      const int ts = states[g];
      if (ts < 0 || ts >= grp.state_count)
        throw contract_error("evaluate: truth state out of range for " + id);
      // Binarized to true-state-vs-rest: y=1 with p = p(true state).
      y.push_back(1.0);
      p.push_back(norm.at(id).groups[g][static_cast<std::size_t>(ts)]);
      w.push_back(grp.weights[static_cast<std::size_t>(ts)]);
    }
    report.group_losses.push_back(group_log_loss(y, p, w, opt));
  }

  {
    std::vector<double> y, p, w;
    for (const auto& [id, states] : truth) {
      bool any = false;
      for (std::size_t g = 0; g < G; ++g)
        any = any || states[g] != schema.groups[g].healthy_state;
      y.push_back(any ? 1.0 : 0.0);
      p.push_back(any_injury(norm.at(id), schema));
      w.push_back(1.0);
    }
    report.any_injury_loss = group_log_loss(y, p, w, opt);
  }

  report.final = final_score(report.group_losses, report.any_injury_loss);
  return report;
}

}  // namespace trauma::metric
