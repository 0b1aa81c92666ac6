// Reference kernels: straight per-element gathers with bounds checks, no
// loop restructuring. The parallel lane must match these bit-for-bit; the
// shared contract is that every output element accumulates its terms in the
// same index order (ci, kz, ky, kx) / (b, o*, ...) used here.

#include "trauma/nn/kernels.hpp"

namespace trauma::nn::kern::serial {

void conv2d_fwd(const double* x, const double* w, const double* bias,
                double* y, const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t co = 0; co < s.Co; ++co)
      for (std::int64_t oh = 0; oh < Ho; ++oh)
        for (std::int64_t ow = 0; ow < Wo; ++ow) {
          double acc = bias ? bias[co] : 0.0;
          for (std::int64_t ci = 0; ci < s.Ci; ++ci)
            for (std::int64_t ky = 0; ky < s.kh; ++ky) {
              const std::int64_t ih = oh * s.stride + ky - s.pad;
              if (ih < 0 || ih >= s.H) continue;
              for (std::int64_t kx = 0; kx < s.kw; ++kx) {
                const std::int64_t iw = ow * s.stride + kx - s.pad;
                if (iw < 0 || iw >= s.W) continue;
                acc += x[((b * s.Ci + ci) * s.H + ih) * s.W + iw] *
                       w[((co * s.Ci + ci) * s.kh + ky) * s.kw + kx];
              }
            }
          y[((b * s.Co + co) * Ho + oh) * Wo + ow] = acc;
        }
}

void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t ih = 0; ih < s.H; ++ih)
        for (std::int64_t iw = 0; iw < s.W; ++iw) {
          double acc = 0.0;
          for (std::int64_t co = 0; co < s.Co; ++co)
            for (std::int64_t ky = 0; ky < s.kh; ++ky) {
              const std::int64_t tz = ih + s.pad - ky;
              if (tz < 0 || tz % s.stride != 0) continue;
              const std::int64_t oh = tz / s.stride;
              if (oh >= Ho) continue;
              for (std::int64_t kx = 0; kx < s.kw; ++kx) {
                const std::int64_t tx = iw + s.pad - kx;
                if (tx < 0 || tx % s.stride != 0) continue;
                const std::int64_t ow = tx / s.stride;
                if (ow >= Wo) continue;
                acc += gy[((b * s.Co + co) * Ho + oh) * Wo + ow] *
                       w[((co * s.Ci + ci) * s.kh + ky) * s.kw + kx];
              }
            }
          gx[((b * s.Ci + ci) * s.H + ih) * s.W + iw] = acc;
        }
}

void conv2d_bwd_params(const double* gy, const double* x, double* gw,
                       double* gb, const Conv2dShape& s) {
  const std::int64_t Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t co = 0; co < s.Co; ++co)
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t ky = 0; ky < s.kh; ++ky)
        for (std::int64_t kx = 0; kx < s.kw; ++kx) {
          double acc = 0.0;
          for (std::int64_t b = 0; b < s.B; ++b)
            for (std::int64_t oh = 0; oh < Ho; ++oh) {
              const std::int64_t ih = oh * s.stride + ky - s.pad;
              if (ih < 0 || ih >= s.H) continue;
              for (std::int64_t ow = 0; ow < Wo; ++ow) {
                const std::int64_t iw = ow * s.stride + kx - s.pad;
                if (iw < 0 || iw >= s.W) continue;
                acc += gy[((b * s.Co + co) * Ho + oh) * Wo + ow] *
                       x[((b * s.Ci + ci) * s.H + ih) * s.W + iw];
              }
            }
          gw[((co * s.Ci + ci) * s.kh + ky) * s.kw + kx] = acc;
        }
  if (gb) {
    for (std::int64_t co = 0; co < s.Co; ++co) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b)
        for (std::int64_t oh = 0; oh < Ho; ++oh)
          for (std::int64_t ow = 0; ow < Wo; ++ow)
            acc += gy[((b * s.Co + co) * Ho + oh) * Wo + ow];
      gb[co] = acc;
    }
  }
}

void conv3d_fwd(const double* x, const double* w, const double* bias,
                double* y, const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t co = 0; co < s.Co; ++co)
      for (std::int64_t od = 0; od < Do; ++od)
        for (std::int64_t oh = 0; oh < Ho; ++oh)
          for (std::int64_t ow = 0; ow < Wo; ++ow) {
            double acc = bias ? bias[co] : 0.0;
            for (std::int64_t ci = 0; ci < s.Ci; ++ci)
              for (std::int64_t kz = 0; kz < s.kd; ++kz) {
                const std::int64_t id = od * s.stride + kz - s.pad;
                if (id < 0 || id >= s.D) continue;
                for (std::int64_t ky = 0; ky < s.kh; ++ky) {
                  const std::int64_t ih = oh * s.stride + ky - s.pad;
                  if (ih < 0 || ih >= s.H) continue;
                  for (std::int64_t kx = 0; kx < s.kw; ++kx) {
                    const std::int64_t iw = ow * s.stride + kx - s.pad;
                    if (iw < 0 || iw >= s.W) continue;
                    acc += x[(((b * s.Ci + ci) * s.D + id) * s.H + ih) * s.W + iw] *
                           w[(((co * s.Ci + ci) * s.kd + kz) * s.kh + ky) * s.kw + kx];
                  }
                }
              }
            y[(((b * s.Co + co) * Do + od) * Ho + oh) * Wo + ow] = acc;
          }
}

void conv3d_bwd_input(const double* gy, const double* w, double* gx,
                      const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t id = 0; id < s.D; ++id)
        for (std::int64_t ih = 0; ih < s.H; ++ih)
          for (std::int64_t iw = 0; iw < s.W; ++iw) {
            double acc = 0.0;
            for (std::int64_t co = 0; co < s.Co; ++co)
              for (std::int64_t kz = 0; kz < s.kd; ++kz) {
                const std::int64_t td = id + s.pad - kz;
                if (td < 0 || td % s.stride != 0) continue;
                const std::int64_t od = td / s.stride;
                if (od >= Do) continue;
                for (std::int64_t ky = 0; ky < s.kh; ++ky) {
                  const std::int64_t th = ih + s.pad - ky;
                  if (th < 0 || th % s.stride != 0) continue;
                  const std::int64_t oh = th / s.stride;
                  if (oh >= Ho) continue;
                  for (std::int64_t kx = 0; kx < s.kw; ++kx) {
                    const std::int64_t tw = iw + s.pad - kx;
                    if (tw < 0 || tw % s.stride != 0) continue;
                    const std::int64_t ow = tw / s.stride;
                    if (ow >= Wo) continue;
                    acc += gy[(((b * s.Co + co) * Do + od) * Ho + oh) * Wo + ow] *
                           w[(((co * s.Ci + ci) * s.kd + kz) * s.kh + ky) * s.kw + kx];
                  }
                }
              }
            gx[(((b * s.Ci + ci) * s.D + id) * s.H + ih) * s.W + iw] = acc;
          }
}

void conv3d_bwd_params(const double* gy, const double* x, double* gw,
                       double* gb, const Conv3dShape& s) {
  const std::int64_t Do = s.Do(), Ho = s.Ho(), Wo = s.Wo();
  for (std::int64_t co = 0; co < s.Co; ++co)
    for (std::int64_t ci = 0; ci < s.Ci; ++ci)
      for (std::int64_t kz = 0; kz < s.kd; ++kz)
        for (std::int64_t ky = 0; ky < s.kh; ++ky)
          for (std::int64_t kx = 0; kx < s.kw; ++kx) {
            double acc = 0.0;
            for (std::int64_t b = 0; b < s.B; ++b)
              for (std::int64_t od = 0; od < Do; ++od) {
                const std::int64_t id = od * s.stride + kz - s.pad;
                if (id < 0 || id >= s.D) continue;
                for (std::int64_t oh = 0; oh < Ho; ++oh) {
                  const std::int64_t ih = oh * s.stride + ky - s.pad;
                  if (ih < 0 || ih >= s.H) continue;
                  for (std::int64_t ow = 0; ow < Wo; ++ow) {
                    const std::int64_t iw = ow * s.stride + kx - s.pad;
                    if (iw < 0 || iw >= s.W) continue;
                    acc += gy[(((b * s.Co + co) * Do + od) * Ho + oh) * Wo + ow] *
                           x[(((b * s.Ci + ci) * s.D + id) * s.H + ih) * s.W + iw];
                  }
                }
              }
            gw[(((co * s.Ci + ci) * s.kd + kz) * s.kh + ky) * s.kw + kx] = acc;
          }
  if (gb) {
    const std::int64_t n = Do * Ho * Wo;
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
  for (std::int64_t bc = 0; bc < s.B * s.C; ++bc)
    for (std::int64_t oh = 0; oh < Ho; ++oh)
      for (std::int64_t ow = 0; ow < Wo; ++ow) {
        double best = 0.0;
        std::int64_t besti = -1;
        for (std::int64_t ky = 0; ky < s.k; ++ky)
          for (std::int64_t kx = 0; kx < s.k; ++kx) {
            const std::int64_t ih = oh * s.stride + ky;
            const std::int64_t iw = ow * s.stride + kx;
            const std::int64_t idx = (bc * s.H + ih) * s.W + iw;
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
  for (std::int64_t bc = 0; bc < s.B * s.C; ++bc)
    for (std::int64_t od = 0; od < Do; ++od)
      for (std::int64_t oh = 0; oh < Ho; ++oh)
        for (std::int64_t ow = 0; ow < Wo; ++ow) {
          double best = 0.0;
          std::int64_t besti = -1;
          for (std::int64_t kz = 0; kz < s.k; ++kz)
            for (std::int64_t ky = 0; ky < s.k; ++ky)
              for (std::int64_t kx = 0; kx < s.k; ++kx) {
                const std::int64_t id = od * s.stride + kz;
                const std::int64_t ih = oh * s.stride + ky;
                const std::int64_t iw = ow * s.stride + kx;
                const std::int64_t idx = ((bc * s.D + id) * s.H + ih) * s.W + iw;
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
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t o = 0; o < s.O; ++o) {
      double acc = bias ? bias[o] : 0.0;
      for (std::int64_t i = 0; i < s.I; ++i)
        acc += x[b * s.I + i] * w[o * s.I + i];
      y[b * s.O + o] = acc;
    }
}

void dense_bwd_input(const double* gy, const double* w, double* gx,
                     const DenseShape& s) {
  for (std::int64_t b = 0; b < s.B; ++b)
    for (std::int64_t i = 0; i < s.I; ++i) {
      double acc = 0.0;
      for (std::int64_t o = 0; o < s.O; ++o)
        acc += gy[b * s.O + o] * w[o * s.I + i];
      gx[b * s.I + i] = acc;
    }
}

void dense_bwd_params(const double* gy, const double* x, double* gw, double* gb,
                      const DenseShape& s) {
  for (std::int64_t o = 0; o < s.O; ++o)
    for (std::int64_t i = 0; i < s.I; ++i) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b)
        acc += gy[b * s.O + o] * x[b * s.I + i];
      gw[o * s.I + i] = acc;
    }
  if (gb) {
    for (std::int64_t o = 0; o < s.O; ++o) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.B; ++b) acc += gy[b * s.O + o];
      gb[o] = acc;
    }
  }
}

}  // namespace trauma::nn::kern::serial
