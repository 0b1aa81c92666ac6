#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "trauma/nn/tensor.hpp"

namespace trauma::nn {

// Define-by-run reverse-mode graph. Creation order is a topological order,
// so backward() replays nodes by descending id; gradient accumulation order
// is therefore fixed and runs single-threaded per graph.
struct Var;
using VarPtr = std::shared_ptr<Var>;

struct Var {
  Tensor value;
  Tensor grad;  // allocated on first accumulation, same shape as value
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<VarPtr> parents;
  std::function<void(Var&)> backprop;  // reads this->grad, accumulates into parents

  bool has_grad() const { return grad.numel() == value.numel() && !grad.empty(); }
  void ensure_grad() {
    if (!has_grad()) grad = Tensor::zeros(value.shape());
  }
  void zero_grad() { grad = Tensor(); }
};

// Leaf node. Parameters pass requires_grad=true; data inputs usually false
// (the gradient checker flips it on).
VarPtr make_input(Tensor value, bool requires_grad = false);

// Scalar-valued root: seeds grad=1 and runs every reachable backprop in
// reverse creation order.
void backward(const VarPtr& root);

// --- elementwise ---
VarPtr add(const VarPtr& a, const VarPtr& b);
VarPtr sub(const VarPtr& a, const VarPtr& b);
VarPtr mul(const VarPtr& a, const VarPtr& b);
VarPtr affine(const VarPtr& x, double scale, double shift);  // scale*x + shift
VarPtr relu(const VarPtr& x);
VarPtr sigmoid(const VarPtr& x);
VarPtr tanh_op(const VarPtr& x);

// --- shape ---
VarPtr reshape(const VarPtr& x, std::vector<std::int64_t> shape);
VarPtr narrow(const VarPtr& x, std::size_t axis, std::int64_t start, std::int64_t len);
VarPtr concat(const std::vector<VarPtr>& xs, std::size_t axis);

// --- reductions (whole-tensor) ---
VarPtr sum(const VarPtr& x);
VarPtr mean(const VarPtr& x);
VarPtr max_reduce(const VarPtr& x);  // grad flows to the first-scan argmax

// softmax along `axis`; numerically stabilized per fiber.
VarPtr softmax(const VarPtr& x, std::size_t axis);

// --- dense / conv / pool / upsample ---
// x: (B, I), w: (O, I), b: (O) -> (B, O)
VarPtr dense(const VarPtr& x, const VarPtr& w, const VarPtr& b);
// x: (B, Ci, H, W), w: (Co, Ci, kh, kw), b: (Co)
VarPtr conv2d(const VarPtr& x, const VarPtr& w, const VarPtr& b,
              std::int64_t stride, std::int64_t pad);
// x: (B, Ci, D, H, W), w: (Co, Ci, kd, kh, kw), b: (Co)
VarPtr conv3d(const VarPtr& x, const VarPtr& w, const VarPtr& b,
              std::int64_t stride, std::int64_t pad);
VarPtr maxpool2d(const VarPtr& x, std::int64_t k, std::int64_t stride);
VarPtr maxpool3d(const VarPtr& x, std::int64_t k, std::int64_t stride);
VarPtr global_avgpool2d(const VarPtr& x);  // (B,C,H,W) -> (B,C), mean per map
VarPtr upsample2x_2d(const VarPtr& x);  // (B,C,H,W) -> (B,C,2H,2W), nearest
VarPtr upsample2x_3d(const VarPtr& x);  // (B,C,D,H,W) -> (B,C,2D,2H,2W)

}  // namespace trauma::nn
