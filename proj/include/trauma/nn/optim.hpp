#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "trauma/errors.hpp"
#include "trauma/nn/autograd.hpp"

namespace trauma::nn {

// Named trainable leaves in registration order; that order is the documented
// update and serialization order.
struct ParamSet {
  std::vector<std::pair<std::string, VarPtr>> items;

  VarPtr add(const std::string& name, Tensor init) {
    for (const auto& [n, v] : items)
      if (n == name) throw contract_error("ParamSet: duplicate name " + name);
    VarPtr v = make_input(std::move(init), true);
    items.emplace_back(name, v);
    return v;
  }

  VarPtr find(const std::string& name) const {
    for (const auto& [n, v] : items)
      if (n == name) return v;
    throw contract_error("ParamSet: unknown name " + name);
  }

  void zero_grad() {
    for (auto& [n, v] : items) v->zero_grad();
  }

  std::vector<VarPtr> vars() const {
    std::vector<VarPtr> out;
    out.reserve(items.size());
    for (const auto& [n, v] : items) out.push_back(v);
    return out;
  }

  std::int64_t total_size() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : items) n += v->value.numel();
    return n;
  }
};

// Classical momentum: v <- momentum*v + g; p <- p - lr*v.
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {
    if (!(lr >= 0.0)) throw contract_error("sgd: lr must be >= 0");
  }

  void step(ParamSet& params) {
    if (velocity_.empty()) {
      velocity_.reserve(params.items.size());
      for (const auto& [n, v] : params.items)
        velocity_.push_back(Tensor::zeros(v->value.shape()));
    }
    if (velocity_.size() != params.items.size())
      throw contract_error("sgd: parameter set changed size");
    for (std::size_t k = 0; k < params.items.size(); ++k) {
      VarPtr& p = params.items[k].second;
      if (!p->has_grad()) continue;  // no gradient flowed this step
      if (!p->grad.same_shape(p->value))
        throw contract_error("sgd: grad shape mismatch for " + params.items[k].first);
      Tensor& vel = velocity_[k];
      const std::int64_t n = p->value.numel();
      for (std::int64_t i = 0; i < n; ++i) {
        vel[i] = momentum_ * vel[i] + p->grad[i];
        p->value[i] -= lr_ * vel[i];
      }
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

// Adam with bias correction. The per-parameter scaling is what makes the
// pure-Dice segmentation objective trainable in a small step budget; plain
// momentum SGD needs an order of magnitude more steps there.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(lr >= 0.0)) throw contract_error("adam: lr must be >= 0");
  }

  void step(ParamSet& params) {
    if (m_.empty()) {
      for (const auto& [n, v] : params.items) {
        m_.push_back(Tensor::zeros(v->value.shape()));
        v_.push_back(Tensor::zeros(v->value.shape()));
      }
    }
    if (m_.size() != params.items.size())
      throw contract_error("adam: parameter set changed size");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.items.size(); ++k) {
      VarPtr& p = params.items[k].second;
      if (!p->has_grad()) continue;
      const std::int64_t n = p->value.numel();
      for (std::int64_t i = 0; i < n; ++i) {
        const double g = p->grad[i];
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
        const double mhat = m_[k][i] / bc1;
        const double vhat = v_[k][i] / bc2;
        p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace trauma::nn
