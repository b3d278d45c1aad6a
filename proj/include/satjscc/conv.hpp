#pragma once

#include <algorithm>
#include <stdexcept>

#include "satjscc/tensor.hpp"

namespace satjscc::nn {

// "Same" padding geometry: output = ceil(in / stride), zero padding of
// max((out-1)*stride + kernel - in, 0) split with the smaller half at the
// top/left (the extra row/column, when odd, goes to the bottom/right). The
// transpose layer relies on this rule to invert spatial sizes exactly.
struct ConvGeometry {
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1;
  int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;

  static ConvGeometry same(int in_ch, int out_ch, int kernel, int stride, int in_h, int in_w) {
    if (stride < 1 || kernel < 1) throw std::invalid_argument("kernel and stride must be >= 1");
    ConvGeometry g;
    g.in_ch = in_ch;
    g.out_ch = out_ch;
    g.kernel = kernel;
    g.stride = stride;
    g.in_h = in_h;
    g.in_w = in_w;
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    const int pad_h = std::max((g.out_h - 1) * stride + kernel - in_h, 0);
    const int pad_w = std::max((g.out_w - 1) * stride + kernel - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
    return g;
  }
};

// Direct cross-correlation. Weights are laid out [out_ch][in_ch][kh][kw].
template <class T>
Tensor<T> conv_forward(const Tensor<T>& x, const std::vector<T>& weights, const std::vector<T>* bias,
                       const ConvGeometry& g) {
  const int batch = x.dim(0);
  Tensor<T> y({batch, g.out_ch, g.out_h, g.out_w});
  for (int b = 0; b < batch; ++b)
    for (int oc = 0; oc < g.out_ch; ++oc)
      for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
          T acc = bias ? (*bias)[oc] : T(0);
          for (int ic = 0; ic < g.in_ch; ++ic)
            for (int ky = 0; ky < g.kernel; ++ky) {
              const int iy = oy * g.stride - g.pad_top + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int ix = ox * g.stride - g.pad_left + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                acc += x.at(b, ic, iy, ix) *
                       weights[((static_cast<std::size_t>(oc) * g.in_ch + ic) * g.kernel + ky) *
                                   g.kernel + kx];
              }
            }
          y.at(b, oc, oy, ox) = acc;
        }
  return y;
}

// Adjoint of conv_forward with respect to its input.
template <class T>
Tensor<T> conv_grad_input(const Tensor<T>& gy, const std::vector<T>& weights, const ConvGeometry& g) {
  const int batch = gy.dim(0);
  Tensor<T> gx({batch, g.in_ch, g.in_h, g.in_w});
  for (int b = 0; b < batch; ++b)
    for (int oc = 0; oc < g.out_ch; ++oc)
      for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
          const T go = gy.at(b, oc, oy, ox);
          if (go == T(0)) continue;
          for (int ic = 0; ic < g.in_ch; ++ic)
            for (int ky = 0; ky < g.kernel; ++ky) {
              const int iy = oy * g.stride - g.pad_top + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int ix = ox * g.stride - g.pad_left + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                gx.at(b, ic, iy, ix) +=
                    go * weights[((static_cast<std::size_t>(oc) * g.in_ch + ic) * g.kernel + ky) *
                                     g.kernel + kx];
              }
            }
        }
  return gx;
}

// Accumulates weight and bias gradients; buffers must be pre-sized.
template <class T>
void conv_grad_params(const Tensor<T>& x, const Tensor<T>& gy, const ConvGeometry& g,
                      std::vector<T>& gweights, std::vector<T>* gbias) {
  const int batch = x.dim(0);
  for (int b = 0; b < batch; ++b)
    for (int oc = 0; oc < g.out_ch; ++oc)
      for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
          const T go = gy.at(b, oc, oy, ox);
          if (gbias) (*gbias)[oc] += go;
          if (go == T(0)) continue;
          for (int ic = 0; ic < g.in_ch; ++ic)
            for (int ky = 0; ky < g.kernel; ++ky) {
              const int iy = oy * g.stride - g.pad_top + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int ix = ox * g.stride - g.pad_left + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                gweights[((static_cast<std::size_t>(oc) * g.in_ch + ic) * g.kernel + ky) *
                             g.kernel + kx] += go * x.at(b, ic, iy, ix);
              }
            }
        }
}

}  // namespace satjscc::nn
