// OpenMP lane. Work is split only across independent output elements and
// each element accumulates its terms in the same index order as the serial
// reference, so the two lanes agree bit-for-bit at any thread count.

#include <algorithm>

#include "trauma/nn/kernels.hpp"

namespace trauma::nn::kern::par {

namespace {

// Valid output range [lo, hi] such that o*stride + k - pad lands in [0, n).
inline void out_range(std::int64_t n, std::int64_t nout, std::int64_t k,
                      std::int64_t stride, std::int64_t pad, std::int64_t& lo,
                      std::int64_t& hi) {
  const std::int64_t a = pad - k;
  lo = a > 0 ? (a + stride - 1) / stride : 0;
  const std::int64_t num = n - 1 + pad - k;
  hi = num < 0 ? -1 : std::min(nout - 1, num / stride);
}

}  // namespace

void conv2d_fwd(const double* x, const double* w, const double* bias,
                double* y, const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.Co; ++bc) {
    const std::int64_t b = bc / s.Co, co = bc % s.Co;
    double* yp = y + (b * s.Co + co) * Ho * Wo;
    const double bv = bias ? bias[co] : 0.0;
    for (std::int64_t i = 0; i < Ho * Wo; ++i) yp[i] = bv;
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t ky = 0; ky < s.kh; ++ky) {
        std::int64_t oh_lo, oh_hi;
        out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
        for (std::int64_t kx = 0; kx < s.kw; ++kx) {
          std::int64_t ow_lo, ow_hi;
          out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
          const double wv = w[((co * s.Ci + ci) * s.kh + ky) * s.kw + kx];
          for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
            const std::int64_t ih = oh * s.stride + ky - s.pad;
            const double* xrow = x + ((b * s.Ci + ci) * s.H + ih) * s.W;
            double* yrow = yp + oh * Wo;
            if (s.stride == 1) {
              const double* xp = xrow + kx - s.pad;
              for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
                yrow[ow] += wv * xp[ow];
            } else {
              for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
                yrow[ow] += wv * xrow[ow * s.stride + kx - s.pad];
            }
          }
        }
      }
  }
}

void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.Ci; ++bc) {
    const std::int64_t b = bc / s.Ci, ci = bc % s.Ci;
    double* gxp = gx + (b * s.Ci + ci) * s.H * s.W;
    for (std::int64_t i = 0; i < s.H * s.W; ++i) gxp[i] = 0.0;
    for (std::int64_t co = 0; co < s.Co; ++co)
      for (std::int64_t ky = 0; ky < s.kh; ++ky)
        for (std::int64_t kx = 0; kx < s.kw; ++kx) {
          const double wv = w[((co * s.Ci + ci) * s.kh + ky) * s.kw + kx];
          std::int64_t oh_lo, oh_hi, ow_lo, ow_hi;
          out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
          out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
          for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
            const std::int64_t ih = oh * s.stride + ky - s.pad;
            const double* gyrow = gy + ((b * s.Co + co) * Ho + oh) * Wo;
            double* gxrow = gxp + ih * s.W;
            for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
              gxrow[ow * s.stride + kx - s.pad] += wv * gyrow[ow];
          }
        }
  }
}

void conv2d_bwd_params(const double* gy, const double* x, double* gw,
                       double* gb, const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
  const std::int64_t nw = s.Co * s.Ci * s.kh * s.kw;
#pragma omp parallel for schedule(static)
  for (std::int64_t wi = 0; wi < nw; ++wi) {
    const std::int64_t kx = wi % s.kw;
    const std::int64_t ky = (wi / s.kw) % s.kh;
    const std::int64_t ci = (wi / (s.kw * s.kh)) % s.Ci;
    const std::int64_t co = wi / (s.kw * s.kh * s.Ci);
    std::int64_t oh_lo, oh_hi, ow_lo, ow_hi;
    out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
    out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
    double acc = 0.0;
    for (std::int64_t b = 0; b < s.B; ++b)
      for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
        const std::int64_t ih = oh * s.stride + ky - s.pad;
        const double* gyrow = gy + ((b * s.Co + co) * Ho + oh) * Wo;
        const double* xrow = x + ((b * s.Ci + ci) * s.H + ih) * s.W;
        if (s.stride == 1) {
          const double* xp = xrow + kx - s.pad;
          for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
            acc += gyrow[ow] * xp[ow];
        } else {
          for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
            acc += gyrow[ow] * xrow[ow * s.stride + kx - s.pad];
        }
      }
    gw[wi] = acc;
  }
  if (gb) {
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < s.Co; ++co) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b) {
        const double* p = gy + (b * s.Co + co) * Ho * Wo;
        for (std::int64_t i = 0; i < Ho * Wo; ++i) acc += p[i];
      }
      gb[co] = acc;
    }
  }
}

void conv3d_fwd(const double* x, const double* w, const double* bias,
                double* y, const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.Co; ++bc) {
    const std::int64_t b = bc / s.Co, co = bc % s.Co;
    double* yp = y + (b * s.Co + co) * Do * Ho * Wo;
    const double bv = bias ? bias[co] : 0.0;
    for (std::int64_t i = 0; i < Do * Ho * Wo; ++i) yp[i] = bv;
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t kz = 0; kz < s.kd; ++kz) {
        std::int64_t od_lo, od_hi;
        out_range(s.D, Do, kz, s.stride, s.pad, od_lo, od_hi);
        for (std::int64_t ky = 0; ky < s.kh; ++ky) {
          std::int64_t oh_lo, oh_hi;
          out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
          for (std::int64_t kx = 0; kx < s.kw; ++kx) {
            std::int64_t ow_lo, ow_hi;
            out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
            const double wv =
                w[(((co * s.Ci + ci) * s.kd + kz) * s.kh + ky) * s.kw + kx];
            for (std::int64_t od = od_lo; od <= od_hi; ++od) {
              const std::int64_t id = od * s.stride + kz - s.pad;
              for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
                const std::int64_t ih = oh * s.stride + ky - s.pad;
                const double* xrow =
                    x + (((b * s.Ci + ci) * s.D + id) * s.H + ih) * s.W;
                double* yrow = yp + (od * Ho + oh) * Wo;
                if (s.stride == 1) {
                  const double* xp = xrow + kx - s.pad;
                  for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
                    yrow[ow] += wv * xp[ow];
                } else {
                  for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
                    yrow[ow] += wv * xrow[ow * s.stride + kx - s.pad];
                }
              }
            }
          }
        }
      }
  }
}

void conv3d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.Ci; ++bc) {
    const std::int64_t b = bc / s.Ci, ci = bc % s.Ci;
    double* gxp = gx + (b * s.Ci + ci) * s.D * s.H * s.W;
    for (std::int64_t i = 0; i < s.D * s.H * s.W; ++i) gxp[i] = 0.0;
    for (std::int64_t co = 0; co < s.Co; ++co)
      for (std::int64_t kz = 0; kz < s.kd; ++kz)
        for (std::int64_t ky = 0; ky < s.kh; ++ky)
          for (std::int64_t kx = 0; kx < s.kw; ++kx) {
            const double wv =
                w[(((co * s.Ci + ci) * s.kd + kz) * s.kh + ky) * s.kw + kx];
            std::int64_t od_lo, od_hi, oh_lo, oh_hi, ow_lo, ow_hi;
            out_range(s.D, Do, kz, s.stride, s.pad, od_lo, od_hi);
            out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
            out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
            for (std::int64_t od = od_lo; od <= od_hi; ++od) {
              const std::int64_t id = od * s.stride + kz - s.pad;
              for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
                const std::int64_t ih = oh * s.stride + ky - s.pad;
                const double* gyrow =
                    gy + (((b * s.Co + co) * Do + od) * Ho + oh) * Wo;
                double* gxrow = gxp + (id * s.H + ih) * s.W;
                for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
                  gxrow[ow * s.stride + kx - s.pad] += wv * gyrow[ow];
              }
            }
          }
  }
}

void conv3d_bwd_params(const double* gy, const double* x, double* gw,
                       double* gb, const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
  const std::int64_t nw = s.Co * s.Ci * s.kd * s.kh * s.kw;
#pragma omp parallel for schedule(static)
  for (std::int64_t wi = 0; wi < nw; ++wi) {
    const std::int64_t kx = wi % s.kw;
    const std::int64_t ky = (wi / s.kw) % s.kh;
    const std::int64_t kz = (wi / (s.kw * s.kh)) % s.kd;
    const std::int64_t ci = (wi / (s.kw * s.kh * s.kd)) % s.Ci;
    const std::int64_t co = wi / (s.kw * s.kh * s.kd * s.Ci);
    std::int64_t od_lo, od_hi, oh_lo, oh_hi, ow_lo, ow_hi;
    out_range(s.D, Do, kz, s.stride, s.pad, od_lo, od_hi);
    out_range(s.H, Ho, ky, s.stride, s.pad, oh_lo, oh_hi);
    out_range(s.W, Wo, kx, s.stride, s.pad, ow_lo, ow_hi);
    double acc = 0.0;
    for (std::int64_t b = 0; b < s.B; ++b)
      for (std::int64_t od = od_lo; od <= od_hi; ++od) {
        const std::int64_t id = od * s.stride + kz - s.pad;
        for (std::int64_t oh = oh_lo; oh <= oh_hi; ++oh) {
          const std::int64_t ih = oh * s.stride + ky - s.pad;
          const double* gyrow =
              gy + (((b * s.Co + co) * Do + od) * Ho + oh) * Wo;
          const double* xrow =
              x + (((b * s.Ci + ci) * s.D + id) * s.H + ih) * s.W;
          for (std::int64_t ow = ow_lo; ow <= ow_hi; ++ow)
            acc += gyrow[ow] * xrow[ow * s.stride + kx - s.pad];
        }
      }
    gw[wi] = acc;
  }
  if (gb) {
    const std::int64_t n = Do * Ho * Wo;
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < s.Co; ++co) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b) {
        const double* p = gy + (b * s.Co + co) * n;
        for (std::int64_t i = 0; i < n; ++i) acc += p[i];
      }
      gb[co] = acc;
    }
  }
}

void maxpool2d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.C; ++bc)
    for (std::int64_t oh = 0; oh < Ho; ++oh)
      for (std::int64_t ow = 0; ow < Wo; ++ow) {
        double best = 0.0;
        std::int64_t besti = -1;
        for (std::int64_t ky = 0; ky < s.k; ++ky)
          for (std::int64_t kx = 0; kx < s.k; ++kx) {
            const std::int64_t idx =
                (bc * s.H + oh * s.stride + ky) * s.W + ow * s.stride + kx;
            if (besti < 0 || x[idx] > best) {
              best = x[idx];
              besti = idx;
            }
          }
        const std::int64_t o = (bc * Ho + oh) * Wo + ow;
        y[o] = best;
        argmax[o] = besti;
      }
}

void maxpool3d_fwd(const double* x, double* y, std::int64_t* argmax,
                   const Pool3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
#pragma omp parallel for schedule(static)
  for (std::int64_t bc = 0; bc < s.B * s.C; ++bc)
    for (std::int64_t od = 0; od < Do; ++od)
      for (std::int64_t oh = 0; oh < Ho; ++oh)
        for (std::int64_t ow = 0; ow < Wo; ++ow) {
          double best = 0.0;
          std::int64_t besti = -1;
          for (std::int64_t kz = 0; kz < s.k; ++kz)
            for (std::int64_t ky = 0; ky < s.k; ++ky)
              for (std::int64_t kx = 0; kx < s.k; ++kx) {
                const std::int64_t idx =
                    ((bc * s.D + od * s.stride + kz) * s.H + oh * s.stride + ky) *
                        s.W +
                    ow * s.stride + kx;
                if (besti < 0 || x[idx] > best) {
                  best = x[idx];
                  besti = idx;
                }
              }
          const std::int64_t o = ((bc * Do + od) * Ho + oh) * Wo + ow;
          y[o] = best;
          argmax[o] = besti;
        }
}

void dense_fwd(const double* x, const double* w, const double* bias, double* y,
               const DenseShape& s) {
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t o = 0; o < s.O; ++o) {
      double acc = bias ? bias[o] : 0.0;
      const double* xp = x + b * s.I;
      const double* wp = w + o * s.I;
      for (std::int64_t i = 0; i < s.I; ++i) acc += xp[i] * wp[i];
      y[b * s.O + o] = acc;
    }
}

void dense_bwd_input(const double* gy, const double* w, double* gx,
                     const DenseShape& s) {
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < s.B; ++b) {
    double* gxp = gx + b * s.I;
    for (std::int64_t i = 0; i < s.I; ++i) gxp[i] = 0.0;
    for (std::int64_t o = 0; o < s.O; ++o) {
      const double v = gy[b * s.O + o];
      const double* wp = w + o * s.I;
      for (std::int64_t i = 0; i < s.I; ++i) gxp[i] += v * wp[i];
    }
  }
}

void dense_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                      const DenseShape& s) {
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < s.O; ++o) {
    double* gwp = gw + o * s.I;
    for (std::int64_t i = 0; i < s.I; ++i) gwp[i] = 0.0;
    for (std::int64_t b = 0; b < s.B; ++b) {
      const double v = gy[b * s.O + o];
      const double* xp = x + b * s.I;
      for (std::int64_t i = 0; i < s.I; ++i) gwp[i] += v * xp[i];
    }
    if (gb) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b) acc += gy[b * s.O + o];
      gb[o] = acc;
    }
  }
}

}  // namespace trauma::nn::kern::par
