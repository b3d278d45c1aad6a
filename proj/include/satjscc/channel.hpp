#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "satjscc/linkbudget.hpp"
#include "satjscc/loo.hpp"
#include "satjscc/rng.hpp"
#include "satjscc/tensor.hpp"

namespace satjscc::channel {

using SymbolVector = std::vector<std::complex<double>>;

enum class FadingMode { kPerSymbol, kBlock };

struct ChannelRealization {
  std::vector<std::complex<double>> gains;  // length k, or 1 in block mode
  double noise_sigma = 0.0;
};

struct TransmitResult {
  SymbolVector received;
  ChannelRealization realization;
};

// Channel law zhat_t = z_t * h_t + n_t: h from the Loo sampler (one gain per
// symbol, or one shared gain in block mode), n = sigma (g1 + j g2) with
// per-component variance sigma^2 = P_sig / (2 * 10^(SNR/10)). Total complex
// noise power per symbol is therefore 2 sigma^2 = P_sig * 10^(-SNR/10).
// Draw order: all gains first, then the noise pairs.
inline TransmitResult transmit(const SymbolVector& z, const fading::LooParams& state_params,
                               double snr_db, FadingMode mode, Rng& rng,
                               double signal_power = 1.0) {
  if (z.empty()) throw std::invalid_argument("transmit: empty symbol vector");
  TransmitResult out;
  const double sigma2 = linkbudget::noise_sigma_squared(snr_db, signal_power);
  out.realization.noise_sigma = std::sqrt(sigma2);
  const std::size_t gain_count = mode == FadingMode::kPerSymbol ? z.size() : 1;
  out.realization.gains = fading::sample_loo(state_params, gain_count, rng);
  out.received.reserve(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) {
    const std::complex<double> h =
        mode == FadingMode::kPerSymbol ? out.realization.gains[t] : out.realization.gains[0];
    const std::complex<double> n(out.realization.noise_sigma * rng.normal(),
                                 out.realization.noise_sigma * rng.normal());
    out.received.push_back(z[t] * h + n);
  }
  return out;
}

// Non-trainable channel layer for the training graph. Operates on a
// (batch, c, h, w) tensor whose first c/2 planes are the real parts and last
// c/2 planes the imaginary parts of k = c/2*h*w symbols per sample. The
// realization (gains and drawn noise) stays fixed across forward/backward,
// so finite differences see a deterministic map; backward multiplies by
// conj(h), the adjoint of the complex gain under the real-pair view.
template <class T>
class ChannelLayer {
 public:
  // Fresh realization for a batch: per-symbol (or per-sample in block mode)
  // gains and a full noise draw.
  void draw(int batch, std::int64_t symbols_per_sample, const fading::LooParams& params,
            double snr_db, FadingMode mode, Rng& rng, double signal_power = 1.0) {
    batch_ = batch;
    k_ = symbols_per_sample;
    const double sigma = std::sqrt(linkbudget::noise_sigma_squared(snr_db, signal_power));
    gains_.clear();
    noise_.clear();
    for (int b = 0; b < batch; ++b) {
      const auto h = fading::sample_loo(
          params, mode == FadingMode::kPerSymbol ? static_cast<std::size_t>(k_) : 1, rng);
      if (mode == FadingMode::kPerSymbol) {
        gains_.insert(gains_.end(), h.begin(), h.end());
      } else {
        gains_.insert(gains_.end(), static_cast<std::size_t>(k_), h[0]);
      }
    }
    for (std::int64_t i = 0; i < batch * k_; ++i)
      noise_.emplace_back(sigma * rng.normal(), sigma * rng.normal());
  }

  // Realization drawn per sample from its own grid point (adaptive training
  // mixes channel conditions inside one batch).
  void draw_per_sample(const std::vector<fading::LooParams>& params,
                       const std::vector<double>& snr_db, std::int64_t symbols_per_sample,
                       FadingMode mode, Rng& rng, double signal_power = 1.0) {
    batch_ = static_cast<int>(params.size());
    k_ = symbols_per_sample;
    gains_.clear();
    noise_.clear();
    std::vector<double> sigma(params.size());
    for (std::size_t b = 0; b < params.size(); ++b) {
      sigma[b] = std::sqrt(linkbudget::noise_sigma_squared(snr_db[b], signal_power));
      const auto h = fading::sample_loo(
          params[b], mode == FadingMode::kPerSymbol ? static_cast<std::size_t>(k_) : 1, rng);
      if (mode == FadingMode::kPerSymbol) {
        gains_.insert(gains_.end(), h.begin(), h.end());
      } else {
        gains_.insert(gains_.end(), static_cast<std::size_t>(k_), h[0]);
      }
    }
    for (std::size_t b = 0; b < params.size(); ++b)
      for (std::int64_t i = 0; i < k_; ++i)
        noise_.emplace_back(sigma[b] * rng.normal(), sigma[b] * rng.normal());
  }

  // Identity channel (h = 1, no noise), for oracle tests and clean-channel
  // training runs.
  void set_identity(int batch, std::int64_t symbols_per_sample) {
    batch_ = batch;
    k_ = symbols_per_sample;
    gains_.assign(static_cast<std::size_t>(batch * k_), {1.0, 0.0});
    noise_.assign(static_cast<std::size_t>(batch * k_), {0.0, 0.0});
  }

  void set_realization(std::vector<std::complex<double>> gains,
                       std::vector<std::complex<double>> noise, int batch,
                       std::int64_t symbols_per_sample) {
    if (gains.size() != static_cast<std::size_t>(batch * symbols_per_sample) ||
        noise.size() != gains.size())
      throw std::invalid_argument("ChannelLayer: realization size mismatch");
    gains_ = std::move(gains);
    noise_ = std::move(noise);
    batch_ = batch;
    k_ = symbols_per_sample;
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& z) {
    check_shape(z);
    nn::Tensor<T> y = z;
    const std::int64_t half = plane_offset(z);
    for (int b = 0; b < batch_; ++b)
      for (std::int64_t i = 0; i < k_; ++i) {
        const auto& h = gains_[static_cast<std::size_t>(b) * k_ + i];
        const auto& n = noise_[static_cast<std::size_t>(b) * k_ + i];
        const std::size_t re = index_of(z, b, i, false, half);
        const std::size_t im = index_of(z, b, i, true, half);
        const double zr = z.values[re];
        const double zi = z.values[im];
        y.values[re] = static_cast<T>(zr * h.real() - zi * h.imag() + n.real());
        y.values[im] = static_cast<T>(zr * h.imag() + zi * h.real() + n.imag());
      }
    return y;
  }

  nn::Tensor<T> backward(const nn::Tensor<T>& gy) {
    check_shape(gy);
    nn::Tensor<T> gx = gy;
    const std::int64_t half = plane_offset(gy);
    for (int b = 0; b < batch_; ++b)
      for (std::int64_t i = 0; i < k_; ++i) {
        const auto& h = gains_[static_cast<std::size_t>(b) * k_ + i];
        const std::size_t re = index_of(gy, b, i, false, half);
        const std::size_t im = index_of(gy, b, i, true, half);
        const double gr = gy.values[re];
        const double gi = gy.values[im];
        gx.values[re] = static_cast<T>(gr * h.real() + gi * h.imag());
        gx.values[im] = static_cast<T>(-gr * h.imag() + gi * h.real());
      }
    return gx;
  }

  const std::vector<std::complex<double>>& gains() const { return gains_; }

 private:
  void check_shape(const nn::Tensor<T>& z) const {
    if (z.rank() != 4 || z.dim(0) != batch_ ||
        static_cast<std::int64_t>(z.dim(1) / 2) * z.dim(2) * z.dim(3) != k_ || z.dim(1) % 2 != 0)
      throw std::invalid_argument("ChannelLayer: tensor does not match realization shape");
  }

  static std::int64_t plane_offset(const nn::Tensor<T>& z) {
    return static_cast<std::int64_t>(z.dim(1) / 2) * z.dim(2) * z.dim(3);
  }

  // Symbol i of sample b lives at (plane p, spatial r) with i = p*(h*w)+r;
  // real part in plane p, imaginary part in plane c/2+p.
  static std::size_t index_of(const nn::Tensor<T>& z, int b, std::int64_t i, bool imag,
                              std::int64_t half) {
    const std::int64_t per_sample = static_cast<std::int64_t>(z.dim(1)) * z.dim(2) * z.dim(3);
    return static_cast<std::size_t>(b * per_sample + (imag ? half : 0) + i);
  }

  int batch_ = 0;
  std::int64_t k_ = 0;
  std::vector<std::complex<double>> gains_;
  std::vector<std::complex<double>> noise_;
};

}  // namespace satjscc::channel
