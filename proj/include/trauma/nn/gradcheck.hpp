#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "trauma/errors.hpp"
#include "trauma/nn/autograd.hpp"
#include "trauma/rng.hpp"

namespace trauma::nn {

// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
inline double grad_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

// Central-difference check of the scalar graph built by `build` against its
// analytic backward, sweeping every coordinate of x0. Returns the max
// relative error.
inline double gradient_check(
    const std::function<VarPtr(const VarPtr&)>& build, const Tensor& x0,
    double h) {
  if (!(h > 0.0)) throw contract_error("gradient_check: h must be > 0");
  VarPtr x = make_input(x0.clone(), true);
  VarPtr loss = build(x);
  if (loss->value.numel() != 1)
    throw contract_error("gradient_check: build must return a scalar");
  backward(loss);
  Tensor analytic =
      x->has_grad() ? x->grad.clone() : Tensor::zeros(x0.shape());

  const auto eval = [&](const Tensor& xt) {
    VarPtr v = make_input(xt, false);
    const double f = build(v)->value[0];
    if (!std::isfinite(f)) throw numeric_error("gradient_check: non-finite f");
    return f;
  };

  double max_rel = 0.0;
  Tensor xt = x0.clone();
  for (std::int64_t i = 0; i < xt.numel(); ++i) {
    const double orig = xt[i];
    xt[i] = orig + h;
    const double fp = eval(xt);
    xt[i] = orig - h;
    const double fm = eval(xt);
    xt[i] = orig;
    const double numeric = (fp - fm) / (2.0 * h);
    if (!std::isfinite(numeric) || !std::isfinite(analytic[i]))
      throw numeric_error("gradient_check: non-finite gradient");
    max_rel = std::max(max_rel, grad_rel_err(analytic[i], numeric));
  }
  return max_rel;
}

// Same check against a set of shared parameter leaves, sampling
// `coords_per_tensor` coordinates of each (all when the tensor is smaller).
// `build` must construct a fresh forward graph reading the current parameter
// values every time it is called.
inline double gradient_check_params(const std::function<VarPtr()>& build,
                                    const std::vector<VarPtr>& params,
                                    double h, int coords_per_tensor,
                                    std::uint64_t seed) {
  if (!(h > 0.0)) throw contract_error("gradient_check_params: h must be > 0");
  for (const auto& p : params) p->zero_grad();
  VarPtr loss = build();
  if (loss->value.numel() != 1)
    throw contract_error("gradient_check_params: build must return a scalar");
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params)
    analytic.push_back(p->has_grad() ? p->grad.clone()
                                     : Tensor::zeros(p->value.shape()));

  const auto eval = [&]() {
    const double f = build()->value[0];
    if (!std::isfinite(f))
      throw numeric_error("gradient_check_params: non-finite f");
    return f;
  };

  Rng rng(seed);
  double max_rel = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& v = params[k]->value;
    const std::int64_t n = v.numel();
    std::vector<std::int64_t> coords;
    if (n <= coords_per_tensor) {
      for (std::int64_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < coords_per_tensor; ++i)
        coords.push_back(rng.uniform_int(0, n - 1));
    }
    for (std::int64_t i : coords) {
      const double orig = v[i];
      v[i] = orig + h;
      const double fp = eval();
      v[i] = orig - h;
      const double fm = eval();
      v[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      if (!std::isfinite(numeric) || !std::isfinite(analytic[k][i]))
        throw numeric_error("gradient_check_params: non-finite gradient");
      max_rel = std::max(max_rel, grad_rel_err(analytic[k][i], numeric));
    }
  }
  for (const auto& p : params) p->zero_grad();
  return max_rel;
}

}  // namespace trauma::nn
