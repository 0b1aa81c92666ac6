#include "trauma/nn/losses.hpp"

#include <cmath>

#include "trauma/errors.hpp"

namespace trauma::nn {

namespace {

VarPtr make_node_scalar(double v, std::vector<VarPtr> parents,
                        std::function<void(Var&)> backprop) {
  auto leaf = make_input(Tensor::scalar(v));
  // make_input gives a leaf; attach parents/backprop manually so loss ops can
  // stay fused without exposing graph internals.
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad;
  leaf->requires_grad = needs;
  if (needs) {
    leaf->parents = std::move(parents);
    leaf->backprop = std::move(backprop);
  }
  return leaf;
}

}  // namespace

VarPtr dice_loss(const VarPtr& pred, const Tensor& truth, double eps) {
  if (!pred->value.same_shape(truth))
    throw contract_error("dice_loss: shape mismatch " + pred->value.shape_str() +
                         " vs " + truth.shape_str());
  const std::int64_t n = pred->value.numel();
  double inter = 0.0, psum = 0.0, tsum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    inter += pred->value[i] * truth[i];
    psum += pred->value[i];
    tsum += truth[i];
  }
  const double denom = psum + tsum + eps;
  const double loss = 1.0 - (2.0 * inter + eps) / denom;
  Tensor t = truth;
  return make_node_scalar(loss, {pred}, [pred, t, n, inter, denom, eps](Var& self) {
    if (!pred->requires_grad) return;
    pred->ensure_grad();
    const double g = self.grad[0];
    const double num = 2.0 * inter + eps;
    const double d2 = denom * denom;
    for (std::int64_t i = 0; i < n; ++i)
      pred->grad[i] += g * (num - 2.0 * t[i] * denom) / d2;
  });
}

VarPtr dice_per_sample_sum(const VarPtr& pred, const Tensor& truth, double eps) {
  if (!pred->value.same_shape(truth))
    throw contract_error("dice_per_sample_sum: shape mismatch");
  if (pred->value.rank() < 1)
    throw contract_error("dice_per_sample_sum: need a sample axis");
  const std::int64_t N = pred->value.dim(0);
  const std::int64_t m = N > 0 ? pred->value.numel() / N : 0;
  double total = 0.0;
  std::vector<double> inter(static_cast<std::size_t>(N)),
      denom(static_cast<std::size_t>(N));
  for (std::int64_t s = 0; s < N; ++s) {
    double in = 0.0, ps = 0.0, ts = 0.0;
    const double* p = pred->value.data() + s * m;
    const double* t = truth.data() + s * m;
    for (std::int64_t i = 0; i < m; ++i) {
      in += p[i] * t[i];
      ps += p[i];
      ts += t[i];
    }
    inter[static_cast<std::size_t>(s)] = in;
    denom[static_cast<std::size_t>(s)] = ps + ts + eps;
    total += 1.0 - (2.0 * in + eps) / (ps + ts + eps);
  }
  Tensor t = truth;
  return make_node_scalar(
      total, {pred}, [pred, t, N, m, inter, denom, eps](Var& self) {
        if (!pred->requires_grad) return;
        pred->ensure_grad();
        const double g = self.grad[0];
        for (std::int64_t s = 0; s < N; ++s) {
          const double num = 2.0 * inter[static_cast<std::size_t>(s)] + eps;
          const double d = denom[static_cast<std::size_t>(s)];
          const double* tp = t.data() + s * m;
          double* gp = pred->grad.data() + s * m;
          for (std::int64_t i = 0; i < m; ++i)
            gp[i] += g * (num - 2.0 * tp[i] * d) / (d * d);
        }
      });
}

VarPtr aux_seg_loss(const std::vector<std::pair<VarPtr, Tensor>>& pairs,
                    double eps) {
  if (pairs.empty()) return make_input(Tensor::scalar(0.0));
  VarPtr total = dice_loss(pairs[0].first, pairs[0].second, eps);
  for (std::size_t i = 1; i < pairs.size(); ++i)
    total = add(total, dice_loss(pairs[i].first, pairs[i].second, eps));
  return total;
}

std::vector<GroupSpan> spans_of(const LabelSchema& schema) {
  std::vector<GroupSpan> spans;
  int off = 0;
  for (const auto& g : schema.groups) {
    spans.push_back({off, g.state_count});
    off += g.state_count;
  }
  return spans;
}

VarPtr grouped_ce_with_targets(const VarPtr& logits, const Tensor& tau,
                               const std::vector<GroupSpan>& spans) {
  if (!logits->value.same_shape(tau))
    throw contract_error("grouped_ce: logits/target shape mismatch");
  if (logits->value.rank() < 1) throw contract_error("grouped_ce: rank 0");
  const std::int64_t C = logits->value.shape().back();
  const std::int64_t P = logits->value.numel() / C;
  if (P == 0) throw contract_error("grouped_ce: empty batch");
  int span_total = 0;
  for (const auto& sp : spans) span_total += sp.len;
  if (span_total != C) throw contract_error("grouped_ce: spans do not cover C");

  // Per position and group: stable log-softmax, loss and cached p.
  Tensor probs({P, C});
  double total = 0.0;
  for (std::int64_t pos = 0; pos < P; ++pos) {
    const double* z = logits->value.data() + pos * C;
    double* pr = probs.data() + pos * C;
    for (const auto& sp : spans) {
      double m = z[sp.offset];
      for (int j = 1; j < sp.len; ++j) m = std::max(m, z[sp.offset + j]);
      double denom = 0.0;
      for (int j = 0; j < sp.len; ++j) denom += std::exp(z[sp.offset + j] - m);
      const double lse = m + std::log(denom);
      for (int j = 0; j < sp.len; ++j) {
        const int c = sp.offset + j;
        pr[c] = std::exp(z[c] - lse);
        const double tv = tau[pos * C + c];
        if (tv != 0.0) total -= tv * (z[c] - lse);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(P);
  Tensor tau_c = tau;
  return make_node_scalar(
      total * inv, {logits}, [logits, tau_c, probs, spans, P, C, inv](Var& self) {
        if (!logits->requires_grad) return;
        logits->ensure_grad();
        const double g = self.grad[0] * inv;
        for (std::int64_t pos = 0; pos < P; ++pos) {
          const double* pr = probs.data() + pos * C;
          const double* tv = tau_c.data() + pos * C;
          double* gz = logits->grad.data() + pos * C;
          for (const auto& sp : spans) {
            double tsum = 0.0;
            for (int j = 0; j < sp.len; ++j) tsum += tv[sp.offset + j];
            for (int j = 0; j < sp.len; ++j) {
              const int c = sp.offset + j;
              gz[c] += g * (pr[c] * tsum - tv[c]);
            }
          }
        }
      });
}

VarPtr weighted_ce_loss(const VarPtr& logits,
                        const std::vector<int>& true_state,
                        const LabelSchema& schema) {
  if (true_state.size() != schema.groups.size())
    throw contract_error("weighted_ce_loss: one true state per group required");
  const std::int64_t C = logits->value.shape().back();
  if (C != schema.total_states())
    throw contract_error("weighted_ce_loss: class axis does not match schema");
  for (std::size_t g = 0; g < true_state.size(); ++g) {
    const auto& grp = schema.groups[g];
    if (true_state[g] < 0 || true_state[g] >= grp.state_count)
      throw contract_error("weighted_ce_loss: invalid state index for group '" +
                           grp.name + "'");
  }
  const std::int64_t P = logits->value.numel() / C;
  Tensor tau({P, C});
  for (std::int64_t pos = 0; pos < P; ++pos) {
    int off = 0;
    for (std::size_t g = 0; g < schema.groups.size(); ++g) {
      const auto& grp = schema.groups[g];
      const int ts = true_state[g];
      tau[pos * C + off + ts] = grp.weights[static_cast<std::size_t>(ts)];
      off += grp.state_count;
    }
  }
  return grouped_ce_with_targets(
      logits->value.rank() == 2 ? logits : reshape(logits, {P, C}), tau,
      spans_of(schema));
}

}  // namespace trauma::nn
