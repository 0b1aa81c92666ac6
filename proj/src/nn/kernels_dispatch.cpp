#include <atomic>

#include "trauma/nn/kernels.hpp"

namespace trauma::nn::kern {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void maxpool_bwd_scatter(const double* gy, const std::int64_t* argmax,
                         std::int64_t n_out, double* gx) {
  for (std::int64_t i = 0; i < n_out; ++i) gx[argmax[i]] += gy[i];
}

#define TRAUMA_DISPATCH(fn, ...)            \
  do {                                      \
    if (parallel_enabled())                 \
      par::fn(__VA_ARGS__);                 \
    else                                    \
      serial::fn(__VA_ARGS__);              \
  } while (0)

void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                const Conv2dShape& s) {
  TRAUMA_DISPATCH(conv2d_fwd, x, w, bias, y, s);
}
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv2dShape& s) {
  TRAUMA_DISPATCH(conv2d_bwd_input, gy, w, gx, s);
}
void conv2d_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                       const Conv2dShape& s) {
  TRAUMA_DISPATCH(conv2d_bwd_params, gy, x, gw, gb, s);
}
void conv3d_fwd(const double* x, const double* w, const double* bias, double* y,
                const Conv3dShape& s) {
  TRAUMA_DISPATCH(conv3d_fwd, x, w, bias, y, s);
}
void conv3d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv3dShape& s) {
  TRAUMA_DISPATCH(conv3d_bwd_input, gy, w, gx, s);
}
void conv3d_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                       const Conv3dShape& s) {
  TRAUMA_DISPATCH(conv3d_bwd_params, gy, x, gw, gb, s);
}
void maxpool2d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool2dShape& s) {
  TRAUMA_DISPATCH(maxpool2d_fwd, x, y, argmax, s);
}
void maxpool3d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool3dShape& s) {
  TRAUMA_DISPATCH(maxpool3d_fwd, x, y, argmax, s);
}
void dense_fwd(const double* x, const double* w, const double* bias, double* y,
               const DenseShape& s) {
  TRAUMA_DISPATCH(dense_fwd, x, w, bias, y, s);
}
void dense_bwd_input(const double* gy, const double* w, double* gx,
                     const DenseShape& s) {
  TRAUMA_DISPATCH(dense_bwd_input, gy, w, gx, s);
}
void dense_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                      const DenseShape& s) {
  TRAUMA_DISPATCH(dense_bwd_params, gy, x, gw, gb, s);
}

#undef TRAUMA_DISPATCH

}  // namespace trauma::nn::kern
