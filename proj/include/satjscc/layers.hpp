#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "satjscc/conv.hpp"
#include "satjscc/rng.hpp"
#include "satjscc/tensor.hpp"

namespace satjscc::nn {

// Fan-in-scaled uniform init, U(+-sqrt(3/fan_in)); biases start at zero and
// PReLU slopes at 0.25.
template <class T>
void init_uniform_fan_in(std::vector<T>& w, int fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (T& v : w) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * limit);
}

template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x) = 0;
  virtual Tensor<T> backward(const Tensor<T>& gy) = 0;
  virtual void collect_params(std::vector<Param<T>>& out, const std::string& prefix) {}
};

template <class T>
class Conv2D final : public Layer<T> {
 public:
  Conv2D(int in_ch, int out_ch, int kernel, int stride, Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride) {
    weights_ = Tensor<T>({out_ch, in_ch, kernel, kernel});
    bias_ = Tensor<T>({out_ch});
    init_uniform_fan_in(weights_.values, in_ch * kernel * kernel, rng);
    weights_.alloc_grad();
    bias_.alloc_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dim(1) != in_ch_) throw std::invalid_argument("Conv2D: channel mismatch");
    geom_ = ConvGeometry::same(in_ch_, out_ch_, kernel_, stride_, x.dim(2), x.dim(3));
    input_ = x;
    return conv_forward(x, weights_.values, &bias_.values, geom_);
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    conv_grad_params(input_, gy, geom_, weights_.grad, &bias_.grad);
    return conv_grad_input(gy, weights_.values, geom_);
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) override {
    out.push_back({&weights_, prefix + ".weight"});
    out.push_back({&bias_, prefix + ".bias"});
  }

  int out_channels() const { return out_ch_; }

 private:
  int in_ch_, out_ch_, kernel_, stride_;
  Tensor<T> weights_, bias_, input_;
  ConvGeometry geom_;
};

// Transpose convolution, implemented as the exact adjoint of a Conv2D with
// the same kernel/stride/padding rule: an input of size (h, w) maps to
// (h*stride, w*stride). Weights are laid out [in_ch][out_ch][kh][kw], i.e.
// as the weights of the underlying virtual convolution out->in.
template <class T>
class ConvTranspose2D final : public Layer<T> {
 public:
  ConvTranspose2D(int in_ch, int out_ch, int kernel, int stride, Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride) {
    weights_ = Tensor<T>({in_ch, out_ch, kernel, kernel});
    bias_ = Tensor<T>({out_ch});
    init_uniform_fan_in(weights_.values, in_ch * kernel * kernel, rng);
    weights_.alloc_grad();
    bias_.alloc_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dim(1) != in_ch_) throw std::invalid_argument("ConvTranspose2D: channel mismatch");
    const int out_h = x.dim(2) * stride_;
    const int out_w = x.dim(3) * stride_;
    geom_ = ConvGeometry::same(out_ch_, in_ch_, kernel_, stride_, out_h, out_w);
    if (geom_.out_h != x.dim(2) || geom_.out_w != x.dim(3))
      throw std::invalid_argument("ConvTranspose2D: geometry does not invert");
    input_ = x;
    Tensor<T> y = conv_grad_input(x, weights_.values, geom_);
    for (int b = 0; b < y.dim(0); ++b)
      for (int c = 0; c < out_ch_; ++c)
        for (int i = 0; i < out_h; ++i)
          for (int j = 0; j < out_w; ++j) y.at(b, c, i, j) += bias_.values[c];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    for (int b = 0; b < gy.dim(0); ++b)
      for (int c = 0; c < out_ch_; ++c)
        for (int i = 0; i < gy.dim(2); ++i)
          for (int j = 0; j < gy.dim(3); ++j) bias_.grad[c] += gy.at(b, c, i, j);
    conv_grad_params(gy, input_, geom_, weights_.grad, static_cast<std::vector<T>*>(nullptr));
    return conv_forward(gy, weights_.values, static_cast<const std::vector<T>*>(nullptr), geom_);
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) override {
    out.push_back({&weights_, prefix + ".weight"});
    out.push_back({&bias_, prefix + ".bias"});
  }

 private:
  int in_ch_, out_ch_, kernel_, stride_;
  Tensor<T> weights_, bias_, input_;
  ConvGeometry geom_;
};

template <class T>
class Dense final : public Layer<T> {
 public:
  Dense(int in_features, int out_features, Rng& rng)
      : in_(in_features), out_(out_features) {
    weights_ = Tensor<T>({out_features, in_features});
    bias_ = Tensor<T>({out_features});
    init_uniform_fan_in(weights_.values, in_features, rng);
    weights_.alloc_grad();
    bias_.alloc_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.rank() != 2 || x.dim(1) != in_) throw std::invalid_argument("Dense: shape mismatch");
    input_ = x;
    Tensor<T> y({x.dim(0), out_});
    for (int b = 0; b < x.dim(0); ++b)
      for (int o = 0; o < out_; ++o) {
        T acc = bias_.values[o];
        for (int i = 0; i < in_; ++i) acc += weights_.at2(o, i) * x.at2(b, i);
        y.at2(b, o) = acc;
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx({input_.dim(0), in_});
    for (int b = 0; b < input_.dim(0); ++b)
      for (int o = 0; o < out_; ++o) {
        const T go = gy.at2(b, o);
        bias_.grad[o] += go;
        for (int i = 0; i < in_; ++i) {
          weights_.grad[static_cast<std::size_t>(o) * in_ + i] += go * input_.at2(b, i);
          gx.at2(b, i) += go * weights_.at2(o, i);
        }
      }
    return gx;
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) override {
    out.push_back({&weights_, prefix + ".weight"});
    out.push_back({&bias_, prefix + ".bias"});
  }

 private:
  int in_, out_;
  Tensor<T> weights_, bias_, input_;
};

template <class T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    input_ = x;
    Tensor<T> y = x;
    for (T& v : y.values) v = v > T(0) ? v : T(0);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.values.size(); ++i)
      if (input_.values[i] <= T(0)) gx.values[i] = T(0);
    return gx;
  }

 private:
  Tensor<T> input_;
};

template <class T>
class Sigmoid final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    Tensor<T> y = x;
    for (T& v : y.values) v = T(1) / (T(1) + std::exp(-v));
    output_ = y;
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.values.size(); ++i) {
      const T s = output_.values[i];
      gx.values[i] *= s * (T(1) - s);
    }
    return gx;
  }

 private:
  Tensor<T> output_;
};

// PReLU with one learnable slope per channel (dim 1 for 4-d activations,
// the feature dim for 2-d ones), initialized to 0.25.
template <class T>
class PReLU final : public Layer<T> {
 public:
  explicit PReLU(int channels) : channels_(channels) {
    slopes_ = Tensor<T>({channels});
    std::fill(slopes_.values.begin(), slopes_.values.end(), T(0.25));
    slopes_.alloc_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dim(1) != channels_) throw std::invalid_argument("PReLU: channel mismatch");
    input_ = x;
    Tensor<T> y = x;
    const std::size_t plane = x.values.size() / (static_cast<std::size_t>(x.dim(0)) * channels_);
    for (std::size_t i = 0; i < y.values.size(); ++i) {
      if (y.values[i] < T(0)) y.values[i] *= slopes_.values[(i / plane) % channels_];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    const std::size_t plane =
        input_.values.size() / (static_cast<std::size_t>(input_.dim(0)) * channels_);
    for (std::size_t i = 0; i < gx.values.size(); ++i) {
      const std::size_t c = (i / plane) % channels_;
      if (input_.values[i] < T(0)) {
        slopes_.grad[c] += gy.values[i] * input_.values[i];
        gx.values[i] *= slopes_.values[c];
      }
    }
    return gx;
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) override {
    out.push_back({&slopes_, prefix + ".slope"});
  }

 private:
  int channels_;
  Tensor<T> slopes_, input_;
};

// Per-channel spatial mean, (b, c, h, w) -> (b, c).
template <class T>
class GlobalAvgPool final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x) override {
    in_shape_ = x.shape;
    Tensor<T> y({x.dim(0), x.dim(1)});
    const T inv = T(1) / static_cast<T>(x.dim(2) * x.dim(3));
    for (int b = 0; b < x.dim(0); ++b)
      for (int c = 0; c < x.dim(1); ++c) {
        T acc(0);
        for (int i = 0; i < x.dim(2); ++i)
          for (int j = 0; j < x.dim(3); ++j) acc += x.at(b, c, i, j);
        y.at2(b, c) = acc * inv;
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    const T inv = T(1) / static_cast<T>(in_shape_[2] * in_shape_[3]);
    for (int b = 0; b < gx.dim(0); ++b)
      for (int c = 0; c < gx.dim(1); ++c) {
        const T g = gy.at2(b, c) * inv;
        for (int i = 0; i < gx.dim(2); ++i)
          for (int j = 0; j < gx.dim(3); ++j) gx.at(b, c, i, j) = g;
      }
    return gx;
  }

 private:
  std::vector<int> in_shape_;
};

// Average-transmit-power constraint: the (b, c, h, w) activation is read as
// k = c/2 * h * w complex symbols per sample and rescaled per sample to
// z = sqrt(kP) x / ||x||, giving average symbol power exactly P.
template <class T>
class PowerNormalize final : public Layer<T> {
 public:
  explicit PowerNormalize(double power) : power_(power) {}

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dim(1) % 2 != 0) throw std::invalid_argument("PowerNormalize: channel count must be even");
    input_ = x;
    const std::size_t per_sample = x.values.size() / static_cast<std::size_t>(x.dim(0));
    const double k = static_cast<double>(per_sample) / 2.0;
    scale_target_ = std::sqrt(k * power_);
    norms_.assign(static_cast<std::size_t>(x.dim(0)), T(0));
    Tensor<T> y = x;
    for (int b = 0; b < x.dim(0); ++b) {
      double sq = 0.0;
      for (std::size_t i = 0; i < per_sample; ++i) {
        const double v = x.values[b * per_sample + i];
        sq += v * v;
      }
      const double norm = std::sqrt(sq);
      norms_[b] = static_cast<T>(norm);
      const double s = norm > 0.0 ? scale_target_ / norm : 0.0;
      for (std::size_t i = 0; i < per_sample; ++i)
        y.values[b * per_sample + i] = static_cast<T>(x.values[b * per_sample + i] * s);
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t per_sample = input_.values.size() / static_cast<std::size_t>(input_.dim(0));
    Tensor<T> gx = Tensor<T>::zeros_like(input_);
    for (int b = 0; b < input_.dim(0); ++b) {
      const double norm = norms_[b];
      if (norm <= 0.0) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < per_sample; ++i)
        dot += static_cast<double>(gy.values[b * per_sample + i]) * input_.values[b * per_sample + i];
      const double s = scale_target_ / norm;
      const double corr = dot / (norm * norm);
      for (std::size_t i = 0; i < per_sample; ++i)
        gx.values[b * per_sample + i] = static_cast<T>(
            s * (gy.values[b * per_sample + i] - corr * input_.values[b * per_sample + i]));
    }
    return gx;
  }

 private:
  double power_;
  double scale_target_ = 0.0;
  Tensor<T> input_;
  std::vector<T> norms_;
};

// Feature-dim concatenation of two (batch, n) tensors, and its inverse for
// the backward pass.
template <class T>
Tensor<T> concat_features(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dim(0) != b.dim(0)) throw std::invalid_argument("concat: batch mismatch");
  Tensor<T> y({a.dim(0), a.dim(1) + b.dim(1)});
  for (int r = 0; r < a.dim(0); ++r) {
    for (int c = 0; c < a.dim(1); ++c) y.at2(r, c) = a.at2(r, c);
    for (int c = 0; c < b.dim(1); ++c) y.at2(r, a.dim(1) + c) = b.at2(r, c);
  }
  return y;
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> split_features(const Tensor<T>& y, int first_width) {
  Tensor<T> a({y.dim(0), first_width});
  Tensor<T> b({y.dim(0), y.dim(1) - first_width});
  for (int r = 0; r < y.dim(0); ++r) {
    for (int c = 0; c < first_width; ++c) a.at2(r, c) = y.at2(r, c);
    for (int c = 0; c < y.dim(1) - first_width; ++c) b.at2(r, c) = y.at2(r, first_width + c);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace satjscc::nn
