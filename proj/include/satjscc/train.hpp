#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satjscc/adam.hpp"
#include "satjscc/channel.hpp"
#include "satjscc/dataset.hpp"
#include "satjscc/loss.hpp"
#include "satjscc/metrics.hpp"
#include "satjscc/model.hpp"

namespace satjscc::harness {

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// One training/evaluation channel condition: shadowing state, the elevation
// it was looked up at, the SNR the link budget predicts there, and the Loo
// statistics.
struct ChannelGridPoint {
  fading::ChannelState state = fading::ChannelState::kLos;
  double elevation_deg = 0.0;
  double snr_db = 0.0;
  fading::LooParams loo;
};

// Baseline models train against a single grid point; adaptive models draw a
// point per sample per step and receive the matching context.
struct TrainingChannel {
  std::vector<ChannelGridPoint> grid;
  channel::FadingMode mode = channel::FadingMode::kPerSymbol;
  double signal_power = 1.0;
};

struct TrainOptions {
  int epochs = 300;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double learning_rate_after_drop = 1e-4;
  int lr_drop_epoch = 0;  // 0 resolves to round(5/6 * epochs)
  int patience = 50;      // early stop on stalled validation loss
  std::uint64_t seed = 1;

  int resolved_drop_epoch() const {
    if (lr_drop_epoch > 0) return lr_drop_epoch;
    return static_cast<int>(std::lround(5.0 / 6.0 * epochs));
  }
};

struct EpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_mse = 0.0;  // per-pixel
  double val_mse = 0.0;    // per-pixel
};

struct TrainResult {
  codec::JsccModel<float> model;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

namespace detail {

inline nn::Tensor<float> gather_batch(const Dataset& ds, const std::vector<int>& idx,
                                      std::size_t begin, std::size_t end) {
  const int b = static_cast<int>(end - begin);
  nn::Tensor<float> x({b, ds.bands, ds.height, ds.width});
  const std::size_t per_sample = ds.samples[0].values.size();
  for (int i = 0; i < b; ++i)
    std::copy(ds.samples[idx[begin + i]].values.begin(), ds.samples[idx[begin + i]].values.end(),
              x.values.begin() + static_cast<std::size_t>(i) * per_sample);
  return x;
}

struct BatchDraw {
  std::vector<fading::LooParams> loo;
  std::vector<double> snr_db;
  std::vector<codec::ChannelContext> contexts;
};

inline BatchDraw draw_conditions(const TrainingChannel& chan, int batch, Rng& rng) {
  BatchDraw draw;
  for (int i = 0; i < batch; ++i) {
    const auto& point =
        chan.grid.size() == 1 ? chan.grid[0] : chan.grid[rng.index(chan.grid.size())];
    draw.loo.push_back(point.loo);
    draw.snr_db.push_back(point.snr_db);
    draw.contexts.push_back(codec::ChannelContext::make(point.snr_db, point.state));
  }
  return draw;
}

}  // namespace detail

// Minimizes the batch-mean reconstruction error through encoder -> channel ->
// decoder with a fresh channel realization per sample per step. Fully
// deterministic for a fixed seed: initialization, shuffling, condition
// draws and channel noise all run on seed-derived streams. Keeps the
// parameters of the best validation epoch; stops early after `patience`
// epochs without improvement.
inline TrainResult train(const codec::ArchitectureConfig& arch, const codec::AttentionConfig& att,
                         const TrainOptions& options, const Dataset& dataset,
                         const TrainingChannel& chan) {
  if (chan.grid.empty()) throw std::invalid_argument("train: empty channel grid");
  if (options.batch_size < 1 || options.epochs < 1)
    throw std::invalid_argument("train: batch size and epochs must be >= 1");
  dataset.validate();

  Rng root(options.seed);
  TrainResult result{codec::JsccModel<float>(arch, att, root.split(0).key()), {}, 0, 1e300};
  auto& model = result.model;
  auto params = model.params();
  nn::Adam<float> adam(options.learning_rate);
  adam.attach(params);

  const auto train_idx = dataset.indices(Split::kTrain);
  const auto val_idx = dataset.indices(Split::kVal);
  if (train_idx.empty()) throw std::invalid_argument("train: empty training split");
  const auto k = arch.symbol_count();
  const double pixels_per_sample = static_cast<double>(arch.source_dim());

  channel::ChannelLayer<float> channel_layer;
  nn::MseLoss<float> loss_fn;
  const int drop_epoch = options.resolved_drop_epoch();

  std::vector<std::vector<float>> best_params;
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    if (epoch == drop_epoch + 1) adam.set_learning_rate(options.learning_rate_after_drop);

    Rng shuffle_rng = root.split(0x100 + static_cast<std::uint64_t>(epoch));
    Rng channel_rng = root.split(0x20000 + static_cast<std::uint64_t>(epoch));
    std::vector<int> order = train_idx;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.index(i)]);

    double epoch_sq_err = 0.0;
    std::size_t epoch_samples = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(begin + options.batch_size, order.size());
      auto x = detail::gather_batch(dataset, order, begin, end);
      const int b = x.dim(0);

      const auto draw = detail::draw_conditions(chan, b, channel_rng);
      channel_layer.draw_per_sample(draw.loo, draw.snr_db, k, chan.mode, channel_rng,
                                    chan.signal_power);
      std::optional<nn::Tensor<float>> ctx;
      if (att.enabled) ctx = codec::context_tensor<float>(draw.contexts, att);

      model.zero_grads();
      auto z = model.encode_forward(x, ctx ? &*ctx : nullptr);
      auto zhat = channel_layer.forward(z);
      auto xhat = model.decode_forward(zhat, ctx ? &*ctx : nullptr);
      const float loss = loss_fn.forward(x, xhat);
      if (!std::isfinite(loss))
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
      epoch_sq_err += static_cast<double>(loss) * b;
      epoch_samples += static_cast<std::size_t>(b);

      auto gxhat = loss_fn.backward();
      auto gzhat = model.decode_backward(gxhat);
      auto gz = channel_layer.backward(gzhat);
      model.encode_backward(gz);
      adam.step(params);
    }

    // validation pass with this epoch's stream, forward only
    double val_sq_err = 0.0;
    std::size_t val_samples = 0;
    if (!val_idx.empty()) {
      Rng val_rng = root.split(0x3000000 + static_cast<std::uint64_t>(epoch));
      for (std::size_t begin = 0; begin < val_idx.size(); begin += options.batch_size) {
        const std::size_t end = std::min(begin + options.batch_size, val_idx.size());
        auto x = detail::gather_batch(dataset, val_idx, begin, end);
        const int b = x.dim(0);
        const auto draw = detail::draw_conditions(chan, b, val_rng);
        channel_layer.draw_per_sample(draw.loo, draw.snr_db, k, chan.mode, val_rng,
                                      chan.signal_power);
        std::optional<nn::Tensor<float>> ctx;
        if (att.enabled) ctx = codec::context_tensor<float>(draw.contexts, att);
        auto z = model.encode_forward(x, ctx ? &*ctx : nullptr);
        auto zhat = channel_layer.forward(z);
        auto xhat = model.decode_forward(zhat, ctx ? &*ctx : nullptr);
        val_sq_err += static_cast<double>(loss_fn.forward(x, xhat)) * b;
        val_samples += static_cast<std::size_t>(b);
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.learning_rate = adam.learning_rate();
    entry.train_mse = epoch_sq_err / (static_cast<double>(epoch_samples) * pixels_per_sample);
    entry.val_mse = val_idx.empty()
                        ? entry.train_mse
                        : val_sq_err / (static_cast<double>(val_samples) * pixels_per_sample);
    result.log.push_back(entry);

    if (entry.val_mse < result.best_val_mse) {
      result.best_val_mse = entry.val_mse;
      result.best_epoch = epoch;
      best_params.clear();
      for (const auto& p : params) best_params.push_back(p.tensor->values);
      stale_epochs = 0;
    } else if (++stale_epochs >= options.patience) {
      break;
    }
  }

  if (!best_params.empty())
    for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor->values = best_params[i];
  model.epochs_trained = static_cast<int>(result.log.size());
  model.split_hash = dataset.content_hash();
  return result;
}

// Evaluation condition: the channel that actually realizes, plus the context
// the codec assumes (matched unless running a mismatch study).
struct EvalCondition {
  ChannelGridPoint actual;
  std::optional<codec::ChannelContext> assumed_context;  // required for adaptive models
  channel::FadingMode mode = channel::FadingMode::kPerSymbol;
  double signal_power = 1.0;
  int realizations = 10;
  std::uint64_t seed = 1;
};

struct EvalResult {
  double mean_mse = 0.0;  // per-pixel, over images x realizations
  double psnr_db = 0.0;   // psnr of the mean mse
  int realizations_used = 0;
};

// Mean reconstruction quality over a dataset split with at least 10
// independent channel draws per image (more when requested). The channel
// stream depends only on the seed and the realization structure, never on
// the assumed context, so matched and mismatched evaluations with equal
// seeds see identical draws. Realizations double (up to 8x) until the PSNR
// standard error from channel sampling is below 0.1 dB.
template <class ModelT>
EvalResult evaluate(ModelT& model, const Dataset& dataset, Split split,
                    const EvalCondition& condition) {
  const auto idx = dataset.indices(split);
  if (idx.empty()) throw std::invalid_argument("evaluate: empty split");
  const auto k = model.arch().symbol_count();

  int realizations = std::max(condition.realizations, 10);
  for (int attempt = 0;; ++attempt) {
    Rng rng(condition.seed, /*stream=*/0xeba1);
    channel::ChannelLayer<float> channel_layer;
    std::vector<double> round_mse;  // one mean-mse per realization round

    for (int r = 0; r < realizations; ++r) {
      double round_sq = 0.0;
      std::size_t round_px = 0;
      for (std::size_t begin = 0; begin < idx.size(); begin += 32) {
        const std::size_t end = std::min(begin + std::size_t{32}, idx.size());
        auto x = detail::gather_batch(dataset, idx, begin, end);
        const int b = x.dim(0);
        channel_layer.draw(b, k, condition.actual.loo, condition.actual.snr_db, condition.mode,
                           rng, condition.signal_power);
        std::optional<nn::Tensor<float>> ctx;
        if (model.adaptive()) {
          if (!condition.assumed_context)
            throw std::invalid_argument("evaluate: adaptive model needs an assumed context");
          ctx = codec::context_tensor<float>(
              std::vector<codec::ChannelContext>(b, *condition.assumed_context),
              model.attention());
        }
        auto z = model.encode_forward(x, ctx ? &*ctx : nullptr);
        auto zhat = channel_layer.forward(z);
        auto xhat = model.decode_forward(zhat, ctx ? &*ctx : nullptr);
        for (auto& v : xhat.values) v = v < 0.0f ? 0.0f : v > 1.0f ? 1.0f : v;
        for (std::size_t i = 0; i < x.values.size(); ++i) {
          const double d = static_cast<double>(x.values[i]) - xhat.values[i];
          round_sq += d * d;
        }
        round_px += x.values.size();
      }
      round_mse.push_back(round_sq / static_cast<double>(round_px));
    }

    double mean = 0.0;
    for (double m : round_mse) mean += m;
    mean /= static_cast<double>(round_mse.size());
    double var = 0.0;
    for (double m : round_mse) var += (m - mean) * (m - mean);
    var = round_mse.size() > 1 ? var / (static_cast<double>(round_mse.size()) - 1.0) : 0.0;
    const double se_mse = std::sqrt(var / static_cast<double>(round_mse.size()));
    const double se_psnr = mean > 0.0 ? 10.0 / std::log(10.0) * se_mse / mean : 0.0;

    if (se_psnr <= 0.1 || attempt >= 3) {
      EvalResult result;
      result.mean_mse = mean;
      result.psnr_db = psnr_from_mse(mean);
      result.realizations_used = realizations;
      return result;
    }
    realizations *= 2;
  }
}

}  // namespace satjscc::harness
