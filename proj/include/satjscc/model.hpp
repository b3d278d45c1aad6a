#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "satjscc/blocks.hpp"
#include "satjscc/channel.hpp"
#include "satjscc/markov.hpp"

namespace satjscc::codec {

struct ArchitectureConfig {
  int num_blocks = 4;
  int filters = 16;  // desk-scale default; 256 at full scale
  int kernel = 3;
  std::vector<int> strides = {2, 2, 1, 1};
  int channel_filters_c = 4;  // c, even: c/2 complex planes
  int input_bands = 3;
  int input_h = 16;
  int input_w = 16;
  double power = 1.0;

  void validate() const {
    if (num_blocks < 1 || filters < 1 || kernel < 1 || channel_filters_c < 2 ||
        input_bands < 1 || input_h < 1 || input_w < 1 || power <= 0.0)
      throw std::invalid_argument("architecture config: sizes must be positive");
    if (static_cast<int>(strides.size()) != num_blocks)
      throw std::invalid_argument("architecture config: one stride per block required");
    if (channel_filters_c % 2 != 0)
      throw std::invalid_argument("architecture config: channel filter count must be even");
    int h = input_h, w = input_w;
    for (int s : strides) {
      if (s < 1) throw std::invalid_argument("architecture config: strides must be >= 1");
      if (s > 1 && (h % s != 0 || w % s != 0))
        throw std::invalid_argument(
            "architecture config: stride " + std::to_string(s) + " does not divide " +
            std::to_string(h) + "x" + std::to_string(w) + " under the padding rule");
      h = (h + s - 1) / s;
      w = (w + s - 1) / s;
    }
    const double ratio = compression_ratio();
    if (!(ratio > 0.0 && ratio < 1.0))
      throw std::invalid_argument("architecture config: compression ratio k/n must be in (0,1)");
  }

  int encoded_h() const {
    int h = input_h;
    for (int s : strides) h = (h + s - 1) / s;
    return h;
  }
  int encoded_w() const {
    int w = input_w;
    for (int s : strides) w = (w + s - 1) / s;
    return w;
  }
  std::int64_t symbol_count() const {
    return static_cast<std::int64_t>(channel_filters_c / 2) * encoded_h() * encoded_w();
  }
  std::int64_t source_dim() const {
    return static_cast<std::int64_t>(input_bands) * input_h * input_w;
  }
  double compression_ratio() const {
    return static_cast<double>(symbol_count()) / static_cast<double>(source_dim());
  }
};

// Full-scale configuration, retained for parameter accounting.
inline ArchitectureConfig full_scale_config() {
  ArchitectureConfig cfg;
  cfg.num_blocks = 4;
  cfg.filters = 256;
  cfg.kernel = 3;
  cfg.strides = {2, 2, 1, 1};
  cfg.channel_filters_c = 16;
  cfg.input_bands = 12;
  cfg.input_h = 64;
  cfg.input_w = 64;
  return cfg;
}

// Smallest even c whose k/n comes closest to the requested ratio.
inline int channel_filters_for_ratio(const ArchitectureConfig& base, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("compression ratio must be in (0,1)");
  ArchitectureConfig cfg = base;
  int best_c = 2;
  double best_err = 1e300;
  for (int c = 2; c <= 4096; c += 2) {
    cfg.channel_filters_c = c;
    const double err = std::abs(cfg.compression_ratio() - ratio);
    if (err < best_err - 1e-15) {
      best_err = err;
      best_c = c;
    }
    if (cfg.compression_ratio() > ratio) break;
  }
  return best_c;
}

struct ContextRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct AttentionConfig {
  bool enabled = false;
  int hidden_dim = 0;  // 0 resolves to max(filters/16, 4)
  ContextRange snr_range{0.0, 45.0};
  bool include_loo_params = false;
  ContextRange alpha_range{-25.0, 0.0};
  ContextRange psi_range{0.0, 6.0};
  ContextRange mp_range{-30.0, -5.0};

  int context_dim() const { return include_loo_params ? 7 : 4; }
  int resolved_hidden(int filters) const {
    if (hidden_dim > 0) return hidden_dim;
    return std::max(filters / 16, 4);
  }
};

// Channel condition as seen by the attention path: expected SNR plus the
// one-hot shadowing state (optionally the raw Loo parameters as well).
struct ChannelContext {
  double snr_db = 0.0;
  std::array<double, 3> state_one_hot{1.0, 0.0, 0.0};
  std::optional<fading::LooParams> loo;

  static ChannelContext make(double snr_db, fading::ChannelState state) {
    ChannelContext ctx;
    ctx.snr_db = snr_db;
    ctx.state_one_hot = {0.0, 0.0, 0.0};
    ctx.state_one_hot[static_cast<int>(state)] = 1.0;
    return ctx;
  }

  void validate() const {
    double total = 0.0;
    for (double v : state_one_hot) {
      if (v < 0.0 || v > 1.0) throw std::invalid_argument("context one-hot entries must be in [0,1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("context one-hot must sum to 1");
  }
};

namespace detail {
inline double normalize_into_unit(double v, const ContextRange& r) {
  const double t = (v - r.lo) / (r.hi - r.lo);
  return t < 0.0 ? 0.0 : t > 1.0 ? 1.0 : t;
}
}  // namespace detail

// Context rows affinely normalized into [0,1] with the configured ranges.
template <class T>
nn::Tensor<T> context_tensor(const std::vector<ChannelContext>& contexts,
                             const AttentionConfig& cfg) {
  nn::Tensor<T> t({static_cast<int>(contexts.size()), cfg.context_dim()});
  for (std::size_t b = 0; b < contexts.size(); ++b) {
    contexts[b].validate();
    int col = 0;
    t.at2(static_cast<int>(b), col++) =
        static_cast<T>(detail::normalize_into_unit(contexts[b].snr_db, cfg.snr_range));
    for (double v : contexts[b].state_one_hot) t.at2(static_cast<int>(b), col++) = static_cast<T>(v);
    if (cfg.include_loo_params) {
      if (!contexts[b].loo)
        throw std::invalid_argument("context: Loo parameters required by this attention config");
      t.at2(static_cast<int>(b), col++) =
          static_cast<T>(detail::normalize_into_unit(contexts[b].loo->alpha_db, cfg.alpha_range));
      t.at2(static_cast<int>(b), col++) =
          static_cast<T>(detail::normalize_into_unit(contexts[b].loo->psi_db, cfg.psi_range));
      t.at2(static_cast<int>(b), col++) =
          static_cast<T>(detail::normalize_into_unit(contexts[b].loo->mp_db, cfg.mp_range));
    }
  }
  return t;
}

struct ParameterReport {
  std::int64_t total = 0;
  std::int64_t attention = 0;
  std::vector<std::pair<std::string, std::int64_t>> per_component;

  double attention_fraction() const {
    return total > 0 ? static_cast<double>(attention) / static_cast<double>(total) : 0.0;
  }
};

// Encoder-decoder pair. The encoder maps (b, bands, H, W) images to
// (b, c, H', W') power-normalized symbol tensors; the decoder inverts the
// shape. With attention enabled each residual block is followed by a
// context-conditioned attention module on both sides.
template <class T>
class JsccModel {
 public:
  JsccModel(ArchitectureConfig arch, AttentionConfig att, std::uint64_t init_seed)
      : arch_(std::move(arch)), att_(att), init_seed_(init_seed), power_norm_(arch_.power) {
    arch_.validate();
    Rng rng(init_seed, /*stream=*/0x10de1);
    const int f = arch_.filters;
    const int hidden = att_.resolved_hidden(f);

    int in_ch = arch_.input_bands;
    for (int i = 0; i < arch_.num_blocks; ++i) {
      enc_blocks_.emplace_back(in_ch, f, arch_.kernel, arch_.strides[i], rng);
      in_ch = f;
      if (att_.enabled) enc_att_.emplace_back(f, att_.context_dim(), hidden, rng);
    }
    enc_out_ = std::make_unique<nn::Conv2D<T>>(f, arch_.channel_filters_c, arch_.kernel, 1, rng);
    enc_prelu_ = std::make_unique<nn::PReLU<T>>(arch_.channel_filters_c);

    dec_in_ = std::make_unique<nn::ConvTranspose2D<T>>(arch_.channel_filters_c, f, arch_.kernel, 1, rng);
    std::vector<int> up_strides(arch_.strides.rbegin(), arch_.strides.rend());
    for (int i = 0; i < arch_.num_blocks; ++i) {
      dec_blocks_.emplace_back(f, f, arch_.kernel, up_strides[i], rng);
      if (att_.enabled) dec_att_.emplace_back(f, att_.context_dim(), hidden, rng);
    }
    dec_out_ = std::make_unique<nn::ConvTranspose2D<T>>(f, arch_.input_bands, arch_.kernel, 1, rng);
    dec_prelu_ = std::make_unique<nn::PReLU<T>>(arch_.input_bands);
  }

  const ArchitectureConfig& arch() const { return arch_; }
  const AttentionConfig& attention() const { return att_; }
  bool adaptive() const { return att_.enabled; }
  std::uint64_t init_seed() const { return init_seed_; }

  int epochs_trained = 0;
  std::string split_hash;

  // Training-path forward. ctx may be null for baseline models; adaptive
  // models require one context row per sample.
  Tensor<T> encode_forward(const Tensor<T>& x, const Tensor<T>* ctx) {
    require_context(ctx, x.dim(0));
    Tensor<T> h = x;
    for (std::size_t i = 0; i < enc_blocks_.size(); ++i) {
      h = enc_blocks_[i].forward(h);
      if (att_.enabled) h = enc_att_[i].forward(h, *ctx);
    }
    h = enc_prelu_->forward(enc_out_->forward(h));
    return power_norm_.forward(h);
  }

  Tensor<T> encode_backward(const Tensor<T>& gz) {
    Tensor<T> g = power_norm_.backward(gz);
    g = enc_out_->backward(enc_prelu_->backward(g));
    for (int i = static_cast<int>(enc_blocks_.size()) - 1; i >= 0; --i) {
      if (att_.enabled) {
        auto [gfeat, gctx] = enc_att_[i].backward(g);
        g = std::move(gfeat);
        accumulate_context_grad(gctx);
      }
      g = enc_blocks_[i].backward(g);
    }
    return g;
  }

  Tensor<T> decode_forward(const Tensor<T>& zhat, const Tensor<T>* ctx) {
    require_context(ctx, zhat.dim(0));
    Tensor<T> h = dec_in_->forward(zhat);
    for (std::size_t i = 0; i < dec_blocks_.size(); ++i) {
      h = dec_blocks_[i].forward(h);
      if (att_.enabled) h = dec_att_[i].forward(h, *ctx);
    }
    return dec_prelu_->forward(dec_out_->forward(h));
  }

  Tensor<T> decode_backward(const Tensor<T>& gxhat) {
    Tensor<T> g = dec_out_->backward(dec_prelu_->backward(gxhat));
    for (int i = static_cast<int>(dec_blocks_.size()) - 1; i >= 0; --i) {
      if (att_.enabled) {
        auto [gfeat, gctx] = dec_att_[i].backward(g);
        g = std::move(gfeat);
        accumulate_context_grad(gctx);
      }
      g = dec_blocks_[i].backward(g);
    }
    return dec_in_->backward(g);
  }

  // Gradient wrt the context rows, accumulated over all attention modules
  // since the last reset; inspected by the gradient checker.
  void reset_context_grad() { context_grad_ = Tensor<T>(); }
  const Tensor<T>& context_grad() const { return context_grad_; }

  std::vector<Param<T>> params() {
    std::vector<Param<T>> out;
    for (std::size_t i = 0; i < enc_blocks_.size(); ++i) {
      enc_blocks_[i].collect_params(out, "enc.block" + std::to_string(i));
      if (att_.enabled) enc_att_[i].collect_params(out, "enc.att" + std::to_string(i));
    }
    enc_out_->collect_params(out, "enc.out");
    enc_prelu_->collect_params(out, "enc.act");
    dec_in_->collect_params(out, "dec.in");
    for (std::size_t i = 0; i < dec_blocks_.size(); ++i) {
      dec_blocks_[i].collect_params(out, "dec.block" + std::to_string(i));
      if (att_.enabled) dec_att_[i].collect_params(out, "dec.att" + std::to_string(i));
    }
    dec_out_->collect_params(out, "dec.out");
    dec_prelu_->collect_params(out, "dec.act");
    return out;
  }

  void zero_grads() {
    for (auto& p : params()) p.tensor->zero_grad();
  }

  ParameterReport parameter_report() {
    ParameterReport report;
    for (const auto& p : params()) {
      const auto n = static_cast<std::int64_t>(p.tensor->values.size());
      report.total += n;
      if (p.name.find(".att") != std::string::npos) report.attention += n;
      report.per_component.emplace_back(p.name, n);
    }
    return report;
  }

  AttentionModule<T>& encoder_attention(int i) { return enc_att_.at(i); }
  AttentionModule<T>& decoder_attention(int i) { return dec_att_.at(i); }

 private:
  void require_context(const Tensor<T>* ctx, int batch) const {
    if (!att_.enabled) return;
    if (ctx == nullptr)
      throw std::invalid_argument("adaptive model requires a channel context");
    if (ctx->rank() != 2 || ctx->dim(0) != batch || ctx->dim(1) != att_.context_dim())
      throw std::invalid_argument("channel context tensor has the wrong shape");
  }

  void accumulate_context_grad(const Tensor<T>& gctx) {
    if (context_grad_.values.empty()) {
      context_grad_ = gctx;
    } else {
      for (std::size_t i = 0; i < gctx.values.size(); ++i)
        context_grad_.values[i] += gctx.values[i];
    }
  }

  ArchitectureConfig arch_;
  AttentionConfig att_;
  std::uint64_t init_seed_;

  std::vector<ResidualBlock<T>> enc_blocks_;
  std::vector<AttentionModule<T>> enc_att_;
  std::unique_ptr<nn::Conv2D<T>> enc_out_;
  std::unique_ptr<nn::PReLU<T>> enc_prelu_;
  nn::PowerNormalize<T> power_norm_;

  std::unique_ptr<nn::ConvTranspose2D<T>> dec_in_;
  std::vector<ResidualBlockTranspose<T>> dec_blocks_;
  std::vector<AttentionModule<T>> dec_att_;
  std::unique_ptr<nn::ConvTranspose2D<T>> dec_out_;
  std::unique_ptr<nn::PReLU<T>> dec_prelu_;

  Tensor<T> context_grad_;
};

// Symbol tensor of one sample as a complex vector (plane p real, plane
// c/2 + p imaginary).
template <class T>
channel::SymbolVector symbols_from_tensor(const Tensor<T>& z, int sample) {
  const std::int64_t half = static_cast<std::int64_t>(z.dim(1) / 2) * z.dim(2) * z.dim(3);
  const std::int64_t per_sample = static_cast<std::int64_t>(z.dim(1)) * z.dim(2) * z.dim(3);
  channel::SymbolVector out;
  out.reserve(static_cast<std::size_t>(half));
  for (std::int64_t i = 0; i < half; ++i)
    out.emplace_back(z.values[sample * per_sample + i], z.values[sample * per_sample + half + i]);
  return out;
}

template <class T>
void symbols_into_tensor(const channel::SymbolVector& symbols, Tensor<T>& z, int sample) {
  const std::int64_t half = static_cast<std::int64_t>(z.dim(1) / 2) * z.dim(2) * z.dim(3);
  const std::int64_t per_sample = static_cast<std::int64_t>(z.dim(1)) * z.dim(2) * z.dim(3);
  if (static_cast<std::int64_t>(symbols.size()) != half)
    throw std::invalid_argument("symbol count does not match tensor shape");
  for (std::int64_t i = 0; i < half; ++i) {
    z.values[sample * per_sample + i] = static_cast<T>(symbols[i].real());
    z.values[sample * per_sample + half + i] = static_cast<T>(symbols[i].imag());
  }
}

// Evaluation-path API: deterministic given model and inputs. Decode clamps
// to [0,1]; training uses the raw decoder output instead.
template <class T>
Tensor<T> encode(JsccModel<T>& model, const Tensor<T>& x,
                 const std::optional<ChannelContext>& ctx) {
  if (model.adaptive() && !ctx)
    throw std::invalid_argument("encode: adaptive model needs a channel context");
  if (!model.adaptive()) return model.encode_forward(x, nullptr);
  const auto ctx_t = context_tensor<T>(std::vector<ChannelContext>(x.dim(0), *ctx),
                                       model.attention());
  return model.encode_forward(x, &ctx_t);
}

template <class T>
Tensor<T> decode(JsccModel<T>& model, const Tensor<T>& zhat,
                 const std::optional<ChannelContext>& ctx) {
  if (model.adaptive() && !ctx)
    throw std::invalid_argument("decode: adaptive model needs a channel context");
  Tensor<T> out;
  if (!model.adaptive()) {
    out = model.decode_forward(zhat, nullptr);
  } else {
    const auto ctx_t = context_tensor<T>(std::vector<ChannelContext>(zhat.dim(0), *ctx),
                                         model.attention());
    out = model.decode_forward(zhat, &ctx_t);
  }
  for (auto& v : out.values) v = v < T(0) ? T(0) : v > T(1) ? T(1) : v;
  return out;
}

}  // namespace satjscc::codec
