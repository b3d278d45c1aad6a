#pragma once

#include <memory>
#include <optional>

#include "satjscc/layers.hpp"

namespace satjscc::codec {

using nn::Layer;
using nn::Param;
using nn::Tensor;
using satjscc::Rng;

// Residual block (f, s): conv(f, 3x3, stride s) -> PReLU -> conv(f, 3x3, 1),
// skip path through a 1x1 stride-s conv when the shape changes (identity
// otherwise), elementwise add, PReLU.
template <class T>
class ResidualBlock {
 public:
  ResidualBlock(int in_ch, int filters, int kernel, int stride, Rng& rng)
      : conv1_(in_ch, filters, kernel, stride, rng),
        prelu1_(filters),
        conv2_(filters, filters, kernel, 1, rng),
        prelu2_(filters) {
    if (stride != 1 || in_ch != filters)
      skip_ = std::make_unique<nn::Conv2D<T>>(in_ch, filters, 1, stride, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> main = conv2_.forward(prelu1_.forward(conv1_.forward(x)));
    Tensor<T> shortcut = skip_ ? skip_->forward(x) : x;
    if (!main.same_shape(shortcut))
      throw std::invalid_argument("ResidualBlock: main/skip shape mismatch");
    for (std::size_t i = 0; i < main.values.size(); ++i) main.values[i] += shortcut.values[i];
    return prelu2_.forward(main);
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    const Tensor<T> g_sum = prelu2_.backward(gy);
    Tensor<T> gx = conv1_.backward(prelu1_.backward(conv2_.backward(g_sum)));
    if (skip_) {
      const Tensor<T> g_skip = skip_->backward(g_sum);
      for (std::size_t i = 0; i < gx.values.size(); ++i) gx.values[i] += g_skip.values[i];
    } else {
      for (std::size_t i = 0; i < gx.values.size(); ++i) gx.values[i] += g_sum.values[i];
    }
    return gx;
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) {
    conv1_.collect_params(out, prefix + ".conv1");
    prelu1_.collect_params(out, prefix + ".prelu1");
    conv2_.collect_params(out, prefix + ".conv2");
    if (skip_) skip_->collect_params(out, prefix + ".skip");
    prelu2_.collect_params(out, prefix + ".prelu2");
  }

 private:
  nn::Conv2D<T> conv1_;
  nn::PReLU<T> prelu1_;
  nn::Conv2D<T> conv2_;
  std::unique_ptr<nn::Conv2D<T>> skip_;
  nn::PReLU<T> prelu2_;
};

// Mirror of ResidualBlock for the decoder: the strided convolutions become
// transpose convolutions, upsampling by the stride instead of downsampling.
template <class T>
class ResidualBlockTranspose {
 public:
  ResidualBlockTranspose(int in_ch, int filters, int kernel, int stride, Rng& rng)
      : conv1_(in_ch, filters, kernel, stride, rng),
        prelu1_(filters),
        conv2_(filters, filters, kernel, 1, rng),
        prelu2_(filters) {
    if (stride != 1 || in_ch != filters)
      skip_ = std::make_unique<nn::ConvTranspose2D<T>>(in_ch, filters, 1, stride, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> main = conv2_.forward(prelu1_.forward(conv1_.forward(x)));
    Tensor<T> shortcut = skip_ ? skip_->forward(x) : x;
    if (!main.same_shape(shortcut))
      throw std::invalid_argument("ResidualBlockTranspose: main/skip shape mismatch");
    for (std::size_t i = 0; i < main.values.size(); ++i) main.values[i] += shortcut.values[i];
    return prelu2_.forward(main);
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    const Tensor<T> g_sum = prelu2_.backward(gy);
    Tensor<T> gx = conv1_.backward(prelu1_.backward(conv2_.backward(g_sum)));
    if (skip_) {
      const Tensor<T> g_skip = skip_->backward(g_sum);
      for (std::size_t i = 0; i < gx.values.size(); ++i) gx.values[i] += g_skip.values[i];
    } else {
      for (std::size_t i = 0; i < gx.values.size(); ++i) gx.values[i] += g_sum.values[i];
    }
    return gx;
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) {
    conv1_.collect_params(out, prefix + ".conv1");
    prelu1_.collect_params(out, prefix + ".prelu1");
    conv2_.collect_params(out, prefix + ".conv2");
    if (skip_) skip_->collect_params(out, prefix + ".skip");
    prelu2_.collect_params(out, prefix + ".prelu2");
  }

 private:
  nn::ConvTranspose2D<T> conv1_;
  nn::PReLU<T> prelu1_;
  nn::Conv2D<T> conv2_;
  std::unique_ptr<nn::ConvTranspose2D<T>> skip_;
  nn::PReLU<T> prelu2_;
};

// Channel-condition attention: pooled features are concatenated with the
// normalized channel-context vector, pushed through a two-layer bottleneck
// (ReLU, then sigmoid), and the resulting per-channel factors rescale the
// block output. With sigmoid forced to 1 the module is the identity.
template <class T>
class AttentionModule {
 public:
  AttentionModule(int channels, int context_dim, int hidden_dim, Rng& rng)
      : channels_(channels),
        context_dim_(context_dim),
        dense1_(channels + context_dim, hidden_dim, rng),
        dense2_(hidden_dim, channels, rng) {}

  Tensor<T> forward(const Tensor<T>& features, const Tensor<T>& context) {
    if (context.rank() != 2 || context.dim(1) != context_dim_)
      throw std::invalid_argument("AttentionModule: context shape mismatch");
    features_ = features;
    const Tensor<T> pooled = gap_.forward(features);
    const Tensor<T> joined = nn::concat_features(pooled, context);
    scale_ = sigmoid_.forward(dense2_.forward(relu_.forward(dense1_.forward(joined))));

    Tensor<T> y = features;
    const int hw = features.dim(2) * features.dim(3);
    for (int b = 0; b < features.dim(0); ++b)
      for (int c = 0; c < channels_; ++c) {
        const T s = scale_.at2(b, c);
        T* plane = &y.values[(static_cast<std::size_t>(b) * channels_ + c) * hw];
        for (int i = 0; i < hw; ++i) plane[i] *= s;
      }
    return y;
  }

  // Returns (grad wrt features, grad wrt context).
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& gy) {
    const int hw = features_.dim(2) * features_.dim(3);
    Tensor<T> gscale({features_.dim(0), channels_});
    Tensor<T> gfeat = gy;
    for (int b = 0; b < features_.dim(0); ++b)
      for (int c = 0; c < channels_; ++c) {
        const std::size_t base = (static_cast<std::size_t>(b) * channels_ + c) * hw;
        T acc(0);
        const T s = scale_.at2(b, c);
        for (int i = 0; i < hw; ++i) {
          acc += gy.values[base + i] * features_.values[base + i];
          gfeat.values[base + i] = gy.values[base + i] * s;
        }
        gscale.at2(b, c) = acc;
      }

    const Tensor<T> gjoined =
        dense1_.backward(relu_.backward(dense2_.backward(sigmoid_.backward(gscale))));
    auto [gpooled, gcontext] = nn::split_features(gjoined, channels_);
    const Tensor<T> gfeat_pool = gap_.backward(gpooled);
    for (std::size_t i = 0; i < gfeat.values.size(); ++i)
      gfeat.values[i] += gfeat_pool.values[i];
    return {std::move(gfeat), std::move(gcontext)};
  }

  void collect_params(std::vector<Param<T>>& out, const std::string& prefix) {
    dense1_.collect_params(out, prefix + ".dense1");
    dense2_.collect_params(out, prefix + ".dense2");
  }

  // Forces the sigmoid output to ~1 (weights to zero, bias large positive);
  // test hook for the identity property.
  void force_identity() {
    std::vector<Param<T>> params;
    dense2_.collect_params(params, "d2");
    std::fill(params[0].tensor->values.begin(), params[0].tensor->values.end(), T(0));
    std::fill(params[1].tensor->values.begin(), params[1].tensor->values.end(), T(40));
  }

  const Tensor<T>& last_scale() const { return scale_; }

 private:
  int channels_, context_dim_;
  nn::GlobalAvgPool<T> gap_;
  nn::Dense<T> dense1_;
  nn::ReLU<T> relu_;
  nn::Dense<T> dense2_;
  nn::Sigmoid<T> sigmoid_;
  Tensor<T> features_, scale_;
};

}  // namespace satjscc::codec
