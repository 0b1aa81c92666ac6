#pragma once

#include <cstdint>
#include <vector>

namespace trauma::nn::kern {

// Heavy inner loops live here in two interchangeable implementations:
// kern::serial is the reference, kern::par the OpenMP one. Both produce
// bit-identical results: the parallel versions split work only across
// independent output elements and keep every accumulation order fixed, so
// thread count never changes a single bit. Tests assert exact equality and
// tools/bench_kernels compares throughput.

struct Conv2dShape {
  std::int64_t B, Ci, H, W;   // input
  std::int64_t Co, kh, kw;    // filters
  std::int64_t stride, pad;

  std::int64_t Ho() const { return (H + 2 * pad - kh) / stride + 1; }
  std::int64_t Wo() const { return (W + 2 * pad - kw) / stride + 1; }
};

struct Conv3dShape {
  std::int64_t B, Ci, D, H, W;
  std::int64_t Co, kd, kh, kw;
  std::int64_t stride, pad;

  std::int64_t Do() const { return (D + 2 * pad - kd) / stride + 1; }
  std::int64_t Ho() const { return (H + 2 * pad - kh) / stride + 1; }
  std::int64_t Wo() const { return (W + 2 * pad - kw) / stride + 1; }
};

struct Pool2dShape {
  std::int64_t B, C, H, W;
  std::int64_t k, stride;

  std::int64_t Ho() const { return (H - k) / stride + 1; }
  std::int64_t Wo() const { return (W - k) / stride + 1; }
};

struct Pool3dShape {
  std::int64_t B, C, D, H, W;
  std::int64_t k, stride;

  std::int64_t Do() const { return (D - k) / stride + 1; }
  std::int64_t Ho() const { return (H - k) / stride + 1; }
  std::int64_t Wo() const { return (W - k) / stride + 1; }
};

struct DenseShape {
  std::int64_t B, I, O;  // x: (B,I), w: (O,I), y: (B,O)
};

#define TRAUMA_DECLARE_KERNELS                                                 \
  void conv2d_fwd(const double* x, const double* w, const double* bias,        \
                  double* y, const Conv2dShape& s);                            \
  void conv2d_bwd_input(const double* gy, const double* w, double* gx,         \
                        const Conv2dShape& s);                                 \
  void conv2d_bwd_params(const double* gy, const double* x, double* gw,        \
                         double* gb, const Conv2dShape& s);                    \
  void conv3d_fwd(const double* x, const double* w, const double* bias,        \
                  double* y, const Conv3dShape& s);                            \
  void conv3d_bwd_input(const double* gy, const double* w, double* gx,         \
                        const Conv3dShape& s);                                 \
  void conv3d_bwd_params(const double* gy, const double* x, double* gw,        \
                         double* gb, const Conv3dShape& s);                    \
  void maxpool2d_fwd(const double* x, double* y, std::int64_t* argmax,         \
                     const Pool2dShape& s);                                    \
  void maxpool3d_fwd(const double* x, double* y, std::int64_t* argmax,         \
                     const Pool3dShape& s);                                    \
  void dense_fwd(const double* x, const double* w, const double* bias,         \
                 double* y, const DenseShape& s);                              \
  void dense_bwd_input(const double* gy, const double* w, double* gx,          \
                       const DenseShape& s);                                   \
  void dense_bwd_params(const double* gy, const double* x, double* gw,         \
                        double* gb, const DenseShape& s);

namespace serial {
TRAUMA_DECLARE_KERNELS
}

namespace par {
TRAUMA_DECLARE_KERNELS
}

#undef TRAUMA_DECLARE_KERNELS

// Pool backward is a scatter of gy through the recorded argmax; it is the
// same (already deterministic) code for both lanes.
void maxpool_bwd_scatter(const double* gy, const std::int64_t* argmax,
                         std::int64_t n_out, double* gx);

// Active-lane dispatch. Defaults to the parallel lane; tests flip it to
// cross-check. Both lanes agree bit-for-bit, so this is a throughput switch.
bool parallel_enabled();
void set_parallel_enabled(bool on);

void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                const Conv2dShape& s);
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv2dShape& s);
void conv2d_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                       const Conv2dShape& s);
void conv3d_fwd(const double* x, const double* w, const double* bias, double* y,
                const Conv3dShape& s);
void conv3d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv3dShape& s);
void conv3d_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                       const Conv3dShape& s);
void maxpool2d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool2dShape& s);
void maxpool3d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool3dShape& s);
void dense_fwd(const double* x, const double* w, const double* bias, double* y,
               const DenseShape& s);
void dense_bwd_input(const double* gy, const double* w, double* gx,
                     const DenseShape& s);
void dense_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                      const DenseShape& s);

}  // namespace trauma::nn::kern
