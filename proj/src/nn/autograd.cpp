#include "trauma/nn/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "trauma/errors.hpp"
#include "trauma/nn/kernels.hpp"

namespace trauma::nn {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

VarPtr make_node(Tensor value, std::vector<VarPtr> parents,
                 std::function<void(Var&)> backprop) {
  auto v = std::make_shared<Var>();
  v->value = std::move(value);
  v->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad;
  v->requires_grad = needs;
  if (needs) {
    v->parents = std::move(parents);
    v->backprop = std::move(backprop);
  }
  return v;
}

void accumulate(Var& p, const double* g, std::int64_t n) {
  p.ensure_grad();
  double* gp = p.grad.data();
  for (std::int64_t i = 0; i < n; ++i) gp[i] += g[i];
}

void check_same_shape(const VarPtr& a, const VarPtr& b, const char* op) {
  if (!a->value.same_shape(b->value))
    throw contract_error(std::string(op) + ": shape mismatch " +
                         a->value.shape_str() + " vs " + b->value.shape_str());
}

}  // namespace

VarPtr make_input(Tensor value, bool requires_grad) {
  auto v = std::make_shared<Var>();
  v->value = std::move(value);
  v->requires_grad = requires_grad;
  v->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return v;
}

void backward(const VarPtr& root) {
  if (root->value.numel() != 1)
    throw contract_error("backward: root must be scalar");
  // Collect the reachable subgraph.
  std::vector<Var*> order;
  std::unordered_set<Var*> seen;
  std::vector<VarPtr> stack{root};
  seen.insert(root.get());
  while (!stack.empty()) {
    VarPtr v = stack.back();
    stack.pop_back();
    order.push_back(v.get());
    for (const auto& p : v->parents)
      if (seen.insert(p.get()).second) stack.push_back(p);
  }
  std::sort(order.begin(), order.end(),
            [](const Var* a, const Var* b) { return a->id > b->id; });
  root->ensure_grad();
  root->grad[0] = 1.0;
  for (Var* v : order)
    if (v->backprop && v->has_grad()) v->backprop(*v);
}

VarPtr add(const VarPtr& a, const VarPtr& b) {
  check_same_shape(a, b, "add");
  const std::int64_t n = a->value.numel();
  Tensor y(a->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = a->value[i] + b->value[i];
  return make_node(std::move(y), {a, b}, [a, b, n](Var& self) {
    if (a->requires_grad) accumulate(*a, self.grad.data(), n);
    if (b->requires_grad) accumulate(*b, self.grad.data(), n);
  });
}

VarPtr sub(const VarPtr& a, const VarPtr& b) {
  check_same_shape(a, b, "sub");
  const std::int64_t n = a->value.numel();
  Tensor y(a->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = a->value[i] - b->value[i];
  return make_node(std::move(y), {a, b}, [a, b, n](Var& self) {
    if (a->requires_grad) accumulate(*a, self.grad.data(), n);
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) b->grad[i] -= self.grad[i];
    }
  });
}

VarPtr mul(const VarPtr& a, const VarPtr& b) {
  check_same_shape(a, b, "mul");
  const std::int64_t n = a->value.numel();
  Tensor y(a->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = a->value[i] * b->value[i];
  return make_node(std::move(y), {a, b}, [a, b, n](Var& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) a->grad[i] += self.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) b->grad[i] += self.grad[i] * a->value[i];
    }
  });
}

VarPtr affine(const VarPtr& x, double scale, double shift) {
  const std::int64_t n = x->value.numel();
  Tensor y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = scale * x->value[i] + shift;
  return make_node(std::move(y), {x}, [x, scale, n](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i) x->grad[i] += scale * self.grad[i];
  });
}

VarPtr relu(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  Tensor y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = x->value[i] > 0.0 ? x->value[i] : 0.0;
  return make_node(std::move(y), {x}, [x, n](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      if (x->value[i] > 0.0) x->grad[i] += self.grad[i];
  });
}

VarPtr sigmoid(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  Tensor y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x->value[i]));
  Tensor yv = y;  // shares storage; closure keeps the forward result alive
  return make_node(std::move(y), {x}, [x, yv, n](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      x->grad[i] += self.grad[i] * yv[i] * (1.0 - yv[i]);
  });
}

VarPtr tanh_op(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  Tensor y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y[i] = std::tanh(x->value[i]);
  Tensor yv = y;
  return make_node(std::move(y), {x}, [x, yv, n](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      x->grad[i] += self.grad[i] * (1.0 - yv[i] * yv[i]);
  });
}

VarPtr reshape(const VarPtr& x, std::vector<std::int64_t> shape) {
  Tensor y = x->value.reshaped(std::move(shape));
  const std::int64_t n = x->value.numel();
  return make_node(std::move(y), {x}, [x, n](Var& self) {
    if (!x->requires_grad) return;
    accumulate(*x, self.grad.data(), n);
  });
}

VarPtr narrow(const VarPtr& x, std::size_t axis, std::int64_t start,
              std::int64_t len) {
  const auto& sh = x->value.shape();
  if (axis >= sh.size() || start < 0 || len < 1 || start + len > sh[axis])
    throw contract_error("narrow: slice out of range");
  std::int64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= sh[i];
  for (std::size_t i = axis + 1; i < sh.size(); ++i) inner *= sh[i];
  std::vector<std::int64_t> osh = sh;
  osh[axis] = len;
  Tensor y(osh);
  const std::int64_t ax = sh[axis];
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t j = 0; j < len; ++j) {
      const double* src = x->value.data() + (o * ax + start + j) * inner;
      double* dst = y.data() + (o * len + j) * inner;
      std::copy(src, src + inner, dst);
    }
  return make_node(std::move(y), {x},
                   [x, outer, inner, ax, start, len](Var& self) {
                     if (!x->requires_grad) return;
                     x->ensure_grad();
                     for (std::int64_t o = 0; o < outer; ++o)
                       for (std::int64_t j = 0; j < len; ++j) {
                         const double* g = self.grad.data() + (o * len + j) * inner;
                         double* dst = x->grad.data() + (o * ax + start + j) * inner;
                         for (std::int64_t i = 0; i < inner; ++i) dst[i] += g[i];
                       }
                   });
}

VarPtr concat(const std::vector<VarPtr>& xs, std::size_t axis) {
  if (xs.empty()) throw contract_error("concat: empty input list");
  const auto& sh0 = xs[0]->value.shape();
  if (axis >= sh0.size()) throw contract_error("concat: bad axis");
  std::int64_t outer = 1, inner = 1, total = 0;
  for (std::size_t i = 0; i < axis; ++i) outer *= sh0[i];
  for (std::size_t i = axis + 1; i < sh0.size(); ++i) inner *= sh0[i];
  for (const auto& x : xs) {
    const auto& sh = x->value.shape();
    if (sh.size() != sh0.size()) throw contract_error("concat: rank mismatch");
    for (std::size_t i = 0; i < sh.size(); ++i)
      if (i != axis && sh[i] != sh0[i])
        throw contract_error("concat: shape mismatch off-axis");
    total += sh[axis];
  }
  std::vector<std::int64_t> osh = sh0;
  osh[axis] = total;
  Tensor y(osh);
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const auto& x : xs) {
    offsets.push_back(off);
    const std::int64_t ax = x->value.shape()[axis];
    for (std::int64_t o = 0; o < outer; ++o) {
      const double* src = x->value.data() + o * ax * inner;
      double* dst = y.data() + (o * total + off) * inner;
      std::copy(src, src + ax * inner, dst);
    }
    off += ax;
  }
  std::vector<VarPtr> parents = xs;
  return make_node(std::move(y), parents,
                   [xs, offsets, outer, inner, total, axis](Var& self) {
                     for (std::size_t k = 0; k < xs.size(); ++k) {
                       const auto& x = xs[k];
                       if (!x->requires_grad) continue;
                       x->ensure_grad();
                       const std::int64_t ax = x->value.shape()[axis];
                       for (std::int64_t o = 0; o < outer; ++o) {
                         const double* g =
                             self.grad.data() + (o * total + offsets[k]) * inner;
                         double* dst = x->grad.data() + o * ax * inner;
                         for (std::int64_t i = 0; i < ax * inner; ++i) dst[i] += g[i];
                       }
                     }
                   });
}

VarPtr sum(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) acc += x->value[i];
  return make_node(Tensor::scalar(acc), {x}, [x, n](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const double g = self.grad[0];
    for (std::int64_t i = 0; i < n; ++i) x->grad[i] += g;
  });
}

VarPtr mean(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  if (n == 0) throw contract_error("mean: empty tensor");
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) acc += x->value[i];
  const double inv = 1.0 / static_cast<double>(n);
  return make_node(Tensor::scalar(acc * inv), {x}, [x, n, inv](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const double g = self.grad[0] * inv;
    for (std::int64_t i = 0; i < n; ++i) x->grad[i] += g;
  });
}

VarPtr max_reduce(const VarPtr& x) {
  const std::int64_t n = x->value.numel();
  if (n == 0) throw contract_error("max_reduce: empty tensor");
  std::int64_t arg = 0;
  for (std::int64_t i = 1; i < n; ++i)
    if (x->value[i] > x->value[arg]) arg = i;
  return make_node(Tensor::scalar(x->value[arg]), {x}, [x, arg](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    x->grad[arg] += self.grad[0];
  });
}

VarPtr softmax(const VarPtr& x, std::size_t axis) {
  const auto& sh = x->value.shape();
  if (axis >= sh.size()) throw contract_error("softmax: bad axis");
  std::int64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= sh[i];
  for (std::size_t i = axis + 1; i < sh.size(); ++i) inner *= sh[i];
  const std::int64_t ax = sh[axis];
  Tensor y(sh);
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t in = 0; in < inner; ++in) {
      const auto at = [&](std::int64_t j) { return (o * ax + j) * inner + in; };
      double m = x->value[at(0)];
      for (std::int64_t j = 1; j < ax; ++j) m = std::max(m, x->value[at(j)]);
      double denom = 0.0;
      for (std::int64_t j = 0; j < ax; ++j) {
        const double e = std::exp(x->value[at(j)] - m);
        y[at(j)] = e;
        denom += e;
      }
      for (std::int64_t j = 0; j < ax; ++j) y[at(j)] /= denom;
    }
  Tensor yv = y;
  return make_node(std::move(y), {x}, [x, yv, outer, inner, ax](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t o = 0; o < outer; ++o)
      for (std::int64_t in = 0; in < inner; ++in) {
        const auto at = [&](std::int64_t j) { return (o * ax + j) * inner + in; };
        double dot = 0.0;
        for (std::int64_t j = 0; j < ax; ++j) dot += self.grad[at(j)] * yv[at(j)];
        for (std::int64_t j = 0; j < ax; ++j)
          x->grad[at(j)] += yv[at(j)] * (self.grad[at(j)] - dot);
      }
  });
}

VarPtr dense(const VarPtr& x, const VarPtr& w, const VarPtr& b) {
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  if (xs.size() != 2 || ws.size() != 2 || xs[1] != ws[1])
    throw contract_error("dense: want x(B,I), w(O,I)");
  if (b->value.numel() != ws[0]) throw contract_error("dense: bias size");
  kern::DenseShape s{xs[0], xs[1], ws[0]};
  Tensor y({s.B, s.O});
  kern::dense_fwd(x->value.data(), w->value.data(), b->value.data(), y.data(), s);
  return make_node(std::move(y), {x, w, b}, [x, w, b, s](Var& self) {
    if (x->requires_grad) {
      Tensor gx({s.B, s.I});
      kern::dense_bwd_input(self.grad.data(), w->value.data(), gx.data(), s);
      accumulate(*x, gx.data(), gx.numel());
    }
    if (w->requires_grad || b->requires_grad) {
      Tensor gw({s.O, s.I}), gb({s.O});
      kern::dense_bwd_params(self.grad.data(), x->value.data(), gw.data(),
                             gb.data(), s);
      if (w->requires_grad) accumulate(*w, gw.data(), gw.numel());
      if (b->requires_grad) accumulate(*b, gb.data(), gb.numel());
    }
  });
}

VarPtr conv2d(const VarPtr& x, const VarPtr& w, const VarPtr& b,
              std::int64_t stride, std::int64_t pad) {
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  if (xs.size() != 4 || ws.size() != 4 || xs[1] != ws[1])
    throw contract_error("conv2d: want x(B,Ci,H,W), w(Co,Ci,kh,kw)");
  if (b->value.numel() != ws[0]) throw contract_error("conv2d: bias size");
  if (stride < 1 || pad < 0) throw contract_error("conv2d: bad stride/pad");
  kern::Conv2dShape s{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], ws[3], stride, pad};
  if (s.Ho() < 1 || s.Wo() < 1) throw contract_error("conv2d: output collapses");
  Tensor y({s.B, s.Co, s.Ho(), s.Wo()});
  kern::conv2d_fwd(x->value.data(), w->value.data(), b->value.data(), y.data(), s);
  return make_node(std::move(y), {x, w, b}, [x, w, b, s](Var& self) {
    if (x->requires_grad) {
      Tensor gx({s.B, s.Ci, s.H, s.W});
      kern::conv2d_bwd_input(self.grad.data(), w->value.data(), gx.data(), s);
      accumulate(*x, gx.data(), gx.numel());
    }
    if (w->requires_grad || b->requires_grad) {
      Tensor gw({s.Co, s.Ci, s.kh, s.kw}), gb({s.Co});
      kern::conv2d_bwd_params(self.grad.data(), x->value.data(), gw.data(),
                              gb.data(), s);
      if (w->requires_grad) accumulate(*w, gw.data(), gw.numel());
      if (b->requires_grad) accumulate(*b, gb.data(), gb.numel());
    }
  });
}

VarPtr conv3d(const VarPtr& x, const VarPtr& w, const VarPtr& b,
              std::int64_t stride, std::int64_t pad) {
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  if (xs.size() != 5 || ws.size() != 5 || xs[1] != ws[1])
    throw contract_error("conv3d: want x(B,Ci,D,H,W), w(Co,Ci,kd,kh,kw)");
  if (b->value.numel() != ws[0]) throw contract_error("conv3d: bias size");
  if (stride < 1 || pad < 0) throw contract_error("conv3d: bad stride/pad");
  kern::Conv3dShape s{xs[0], xs[1], xs[2], xs[3], xs[4],
                      ws[0], ws[2], ws[3], ws[4], stride, pad};
  if (s.Do() < 1 || s.Ho() < 1 || s.Wo() < 1)
    throw contract_error("conv3d: output collapses");
  Tensor y({s.B, s.Co, s.Do(), s.Ho(), s.Wo()});
  kern::conv3d_fwd(x->value.data(), w->value.data(), b->value.data(), y.data(), s);
  return make_node(std::move(y), {x, w, b}, [x, w, b, s](Var& self) {
    if (x->requires_grad) {
      Tensor gx({s.B, s.Ci, s.D, s.H, s.W});
      kern::conv3d_bwd_input(self.grad.data(), w->value.data(), gx.data(), s);
      accumulate(*x, gx.data(), gx.numel());
    }
    if (w->requires_grad || b->requires_grad) {
      Tensor gw({s.Co, s.Ci, s.kd, s.kh, s.kw}), gb({s.Co});
      kern::conv3d_bwd_params(self.grad.data(), x->value.data(), gw.data(),
                              gb.data(), s);
      if (w->requires_grad) accumulate(*w, gw.data(), gw.numel());
      if (b->requires_grad) accumulate(*b, gb.data(), gb.numel());
    }
  });
}

VarPtr maxpool2d(const VarPtr& x, std::int64_t k, std::int64_t stride) {
  const auto& xs = x->value.shape();
  if (xs.size() != 4) throw contract_error("maxpool2d: want (B,C,H,W)");
  kern::Pool2dShape s{xs[0], xs[1], xs[2], xs[3], k, stride};
  if (s.Ho() < 1 || s.Wo() < 1) throw contract_error("maxpool2d: output collapses");
  Tensor y({s.B, s.C, s.Ho(), s.Wo()});
  auto argmax = std::make_shared<std::vector<std::int64_t>>(
      static_cast<std::size_t>(y.numel()));
  kern::maxpool2d_fwd(x->value.data(), y.data(), argmax->data(), s);
  const std::int64_t nout = y.numel();
  return make_node(std::move(y), {x}, [x, argmax, nout](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    kern::maxpool_bwd_scatter(self.grad.data(), argmax->data(), nout,
                              x->grad.data());
  });
}

VarPtr maxpool3d(const VarPtr& x, std::int64_t k, std::int64_t stride) {
  const auto& xs = x->value.shape();
  if (xs.size() != 5) throw contract_error("maxpool3d: want (B,C,D,H,W)");
  kern::Pool3dShape s{xs[0], xs[1], xs[2], xs[3], xs[4], k, stride};
  if (s.Do() < 1 || s.Ho() < 1 || s.Wo() < 1)
    throw contract_error("maxpool3d: output collapses");
  Tensor y({s.B, s.C, s.Do(), s.Ho(), s.Wo()});
  auto argmax = std::make_shared<std::vector<std::int64_t>>(
      static_cast<std::size_t>(y.numel()));
  kern::maxpool3d_fwd(x->value.data(), y.data(), argmax->data(), s);
  const std::int64_t nout = y.numel();
  return make_node(std::move(y), {x}, [x, argmax, nout](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    kern::maxpool_bwd_scatter(self.grad.data(), argmax->data(), nout,
                              x->grad.data());
  });
}

VarPtr global_avgpool2d(const VarPtr& x) {
  const auto& xs = x->value.shape();
  if (xs.size() != 4) throw contract_error("global_avgpool2d: want (B,C,H,W)");
  const std::int64_t bc = xs[0] * xs[1], hw = xs[2] * xs[3];
  if (hw == 0) throw contract_error("global_avgpool2d: empty spatial extent");
  Tensor y({xs[0], xs[1]});
  const double inv = 1.0 / static_cast<double>(hw);
  for (std::int64_t p = 0; p < bc; ++p) {
    double acc = 0.0;
    const double* src = x->value.data() + p * hw;
    for (std::int64_t i = 0; i < hw; ++i) acc += src[i];
    y[p] = acc * inv;
  }
  return make_node(std::move(y), {x}, [x, bc, hw, inv](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t p = 0; p < bc; ++p) {
      const double g = self.grad[p] * inv;
      double* dst = x->grad.data() + p * hw;
      for (std::int64_t i = 0; i < hw; ++i) dst[i] += g;
    }
  });
}

VarPtr upsample2x_2d(const VarPtr& x) {
  const auto& xs = x->value.shape();
  if (xs.size() != 4) throw contract_error("upsample2x_2d: want (B,C,H,W)");
  const std::int64_t bc = xs[0] * xs[1], H = xs[2], W = xs[3];
  Tensor y({xs[0], xs[1], 2 * H, 2 * W});
  for (std::int64_t p = 0; p < bc; ++p)
    for (std::int64_t i = 0; i < H; ++i)
      for (std::int64_t j = 0; j < W; ++j) {
        const double v = x->value[(p * H + i) * W + j];
        double* base = y.data() + (p * 2 * H + 2 * i) * 2 * W + 2 * j;
        base[0] = v;
        base[1] = v;
        base[2 * W] = v;
        base[2 * W + 1] = v;
      }
  return make_node(std::move(y), {x}, [x, bc, H, W](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t p = 0; p < bc; ++p)
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j) {
          const double* g = self.grad.data() + (p * 2 * H + 2 * i) * 2 * W + 2 * j;
          x->grad[(p * H + i) * W + j] += g[0] + g[1] + g[2 * W] + g[2 * W + 1];
        }
  });
}

VarPtr upsample2x_3d(const VarPtr& x) {
  const auto& xs = x->value.shape();
  if (xs.size() != 5) throw contract_error("upsample2x_3d: want (B,C,D,H,W)");
  const std::int64_t bc = xs[0] * xs[1], D = xs[2], H = xs[3], W = xs[4];
  Tensor y({xs[0], xs[1], 2 * D, 2 * H, 2 * W});
  const std::int64_t HW = 4 * H * W;
  for (std::int64_t p = 0; p < bc; ++p)
    for (std::int64_t d = 0; d < D; ++d)
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j) {
          const double v = x->value[((p * D + d) * H + i) * W + j];
          double* base =
              y.data() + ((p * 2 * D + 2 * d) * 2 * H + 2 * i) * 2 * W + 2 * j;
          for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx)
                base[dz * HW + dy * 2 * W + dx] = v;
        }
  return make_node(std::move(y), {x}, [x, bc, D, H, W, HW](Var& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t p = 0; p < bc; ++p)
      for (std::int64_t d = 0; d < D; ++d)
        for (std::int64_t i = 0; i < H; ++i)
          for (std::int64_t j = 0; j < W; ++j) {
            const double* g = self.grad.data() +
                              ((p * 2 * D + 2 * d) * 2 * H + 2 * i) * 2 * W + 2 * j;
            double acc = 0.0;
            for (int dz = 0; dz < 2; ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                  acc += g[dz * HW + dy * 2 * W + dx];
            x->grad[((p * D + d) * H + i) * W + j] += acc;
          }
  });
}

}  // namespace trauma::nn
