#pragma once

#include <stdexcept>

#include "satjscc/tensor.hpp"

namespace satjscc::nn {

// Training loss: (1/N) sum_i ||x_i - xhat_i||^2, the squared error summed
// over each sample and averaged over the batch of N samples. (The PSNR
// metric uses the per-pixel mean instead; see metrics.hpp.)
template <class T>
class MseLoss {
 public:
  T forward(const Tensor<T>& target, const Tensor<T>& prediction) {
    if (!target.same_shape(prediction)) throw std::invalid_argument("MseLoss: shape mismatch");
    target_ = target;
    prediction_ = prediction;
    double acc = 0.0;
    for (std::size_t i = 0; i < target.values.size(); ++i) {
      const double d = static_cast<double>(prediction.values[i]) - target.values[i];
      acc += d * d;
    }
    return static_cast<T>(acc / target.dim(0));
  }

  // Gradient with respect to the prediction.
  Tensor<T> backward() const {
    Tensor<T> g = Tensor<T>::zeros_like(prediction_);
    const T scale = T(2) / static_cast<T>(target_.dim(0));
    for (std::size_t i = 0; i < g.values.size(); ++i)
      g.values[i] = scale * (prediction_.values[i] - target_.values[i]);
    return g;
  }

 private:
  Tensor<T> target_, prediction_;
};

}  // namespace satjscc::nn
