#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "satjscc/tensor.hpp"

namespace satjscc::harness {

// Per-pixel mean squared error (the PSNR convention; the training loss in
// loss.hpp sums per sample instead).
template <class T>
double mse_per_pixel(const nn::Tensor<T>& x, const nn::Tensor<T>& xhat) {
  if (!x.same_shape(xhat)) throw std::invalid_argument("mse: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double d = static_cast<double>(x.values[i]) - xhat.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.values.size());
}

// PSNR in dB with MAX = 1 (pixels normalized into [0,1]). A zero MSE maps to
// +infinity, written as "inf" wherever results are serialized.
inline double psnr_from_mse(double mse) {
  if (mse < 0.0) throw std::domain_error("psnr: negative mse");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

template <class T>
double psnr(const nn::Tensor<T>& x, const nn::Tensor<T>& xhat) {
  return psnr_from_mse(mse_per_pixel(x, xhat));
}

}  // namespace satjscc::harness
