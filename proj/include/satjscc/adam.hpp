#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "satjscc/tensor.hpp"

namespace satjscc::nn {

// Bias-corrected Adam over a fixed parameter list. Moments are kept per
// parameter block in registration order; the update is fully deterministic.
template <class T>
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void attach(const std::vector<Param<T>>& params) {
    first_moment_.clear();
    second_moment_.clear();
    for (const auto& p : params) {
      first_moment_.emplace_back(p.tensor->values.size(), T(0));
      second_moment_.emplace_back(p.tensor->values.size(), T(0));
    }
    step_ = 0;
  }

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  std::int64_t step_count() const { return step_; }

  void step(std::vector<Param<T>>& params) {
    if (params.size() != first_moment_.size())
      throw std::logic_error("Adam: parameter list changed after attach");
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& t = *params[p].tensor;
      auto& m = first_moment_[p];
      auto& v = second_moment_[p];
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        const double g = t.grad[i];
        m[i] = static_cast<T>(beta1_ * m[i] + (1.0 - beta1_) * g);
        v[i] = static_cast<T>(beta2_ * v[i] + (1.0 - beta2_) * g * g);
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        t.values[i] -= static_cast<T>(lr_ * m_hat / (std::sqrt(v_hat) + eps_));
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t step_ = 0;
  std::vector<std::vector<T>> first_moment_, second_moment_;
};

}  // namespace satjscc::nn
