// Acceptance suite: one pass/fail line per criterion, non-zero exit if any
// criterion fails. Criteria 1-8 are analytic/statistical checks against
// frozen oracles; 9-10 run the toy-scale experiment grid end to end; 11
// reruns an experiment from scratch and compares bytes.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "satjscc/channel.hpp"
#include "satjscc/checkpoint.hpp"
#include "satjscc/experiments.hpp"
#include "satjscc/gradcheck.hpp"
#include "satjscc/linkbudget.hpp"
#include "satjscc/loss.hpp"

using namespace satjscc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------- 1
void criterion_link_budget() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  for (double h : {150.0, 600.0, 2000.0}) {
    const double rel = std::abs(linkbudget::slant_range_km(90.0, h) - h) / h;
    if (rel > 1e-9) {
      pass = false;
      detail += fmt("slant(90,%g) off by %.2e; ", h, rel);
    }
  }
  // frozen 40-digit oracle values for the reference configuration
  const linkbudget::LinkParams params;
  const double snr40 = linkbudget::snr(params, 40.0).snr_db;
  const double snr80 = linkbudget::snr(params, 80.0).snr_db;
  const double e40 = std::abs(snr40 - 37.9059551622743643983518477763);
  const double e80 = std::abs(snr80 - 41.4763271412852970409516767897);
  if (e40 > 0.01 || e80 > 0.01) pass = false;
  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) pass = false;
  detail += fmt("snr40 err %.2e dB, snr80 err %.2e dB, %.3f s", e40, e80, elapsed);
  report(1, "link budget exactness", pass, detail);
}

// ---------------------------------------------------------------------- 2
void criterion_loo_conversions() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;

  const auto internal = fading::loo_to_internal({-8.0, 3.0, -20.0});
  const double err_mu = std::abs(internal.mu - (-0.9210340371976182736071965819));
  const double err_d0 = std::abs(internal.d0 - 0.1192927074857639552376374937);
  const double err_b0 = std::abs(internal.b0 - 0.005);
  if (err_mu > 1e-9 || err_d0 > 1e-9 || err_b0 > 1e-9) pass = false;

  double worst_round_trip = 0.0;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const fading::LooParams p{rng.normal(-8.0, 6.0), std::abs(rng.normal(0.0, 3.0)),
                              rng.normal(-15.0, 8.0)};
    const auto back = fading::internal_to_loo(fading::loo_to_internal(p));
    worst_round_trip = std::max(
        {worst_round_trip, std::abs(back.alpha_db - p.alpha_db) / std::max(1.0, std::abs(p.alpha_db)),
         std::abs(back.psi_db - p.psi_db) / std::max(1.0, p.psi_db),
         std::abs(back.mp_db - p.mp_db) / std::max(1.0, std::abs(p.mp_db))});
  }
  if (worst_round_trip > 1e-10) pass = false;
  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) pass = false;
  report(2, "Loo parameter conversions", pass,
         fmt("oracle errs (%.1e, %.1e, %.1e), worst round trip %.1e, %.3f s", err_mu, err_d0,
             err_b0, worst_round_trip, elapsed));
}

// ---------------------------------------------------------------------- 3
double ks_distance(const fading::LooParams& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  auto h = fading::sample_loo(p, n, rng);
  std::vector<double> amp(n);
  for (std::size_t i = 0; i < n; ++i) amp[i] = std::abs(h[i]);
  std::sort(amp.begin(), amp.end());

  const double cap = fading::loo_amplitude_cap(p);
  const int grid = 4096;
  std::vector<double> pdf(grid + 1), cdf(grid + 1, 0.0);
  const double dr = cap / grid;
  for (int i = 0; i <= grid; ++i) pdf[i] = fading::loo_pdf(i * dr, p);
  for (int i = 1; i <= grid; ++i)
    cdf[i] = cdf[i - 1] + dr / 6.0 * (pdf[i - 1] + 4.0 * fading::loo_pdf((i - 0.5) * dr, p) + pdf[i]);
  const auto cdf_at = [&](double r) {
    if (r <= 0.0) return 0.0;
    if (r >= cap) return cdf[grid];
    const double t = r / dr;
    const int i = static_cast<int>(t);
    return cdf[i] * (1.0 - (t - i)) + cdf[i + 1] * (t - i);
  };
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double model = cdf_at(amp[i]);
    ks = std::max({ks, std::abs(model - static_cast<double>(i + 1) / n),
                   std::abs(model - static_cast<double>(i) / n)});
  }
  return ks;
}

void criterion_loo_sampler() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  const fading::LooParams sets[3] = {{-8.0, 3.0, -20.0}, {0.0, 1.0, -10.0}, {-2.0, 0.5, -15.0}};
  for (int i = 0; i < 3; ++i) {
    const double ks = ks_distance(sets[i], 100000, 40 + i);
    detail += fmt("ks%d %.4f, ", i, ks);
    if (ks >= 0.01) pass = false;
  }

  // dB-domain direct-path statistics at 1e6 samples
  {
    Rng rng(7);
    const fading::LooParams direct_only{-8.0, 3.0, -400.0};
    const auto h = fading::sample_loo(direct_only, 1000000, rng);
    double mean = 0.0;
    for (const auto& v : h) mean += 20.0 * std::log10(std::abs(v));
    mean /= static_cast<double>(h.size());
    detail += fmt("direct mean err %.3f dB, ", std::abs(mean - (-8.0)));
    if (std::abs(mean - (-8.0)) > 0.05) pass = false;
  }
  // multipath power at 1e6 samples
  {
    Rng rng(8);
    const fading::LooParams mp_only{-400.0, 0.0, -20.0};
    const auto h = fading::sample_loo(mp_only, 1000000, rng);
    double power = 0.0;
    for (const auto& v : h) power += std::norm(v);
    power /= static_cast<double>(h.size());
    const double b0 = fading::loo_to_internal({-8.0, 3.0, -20.0}).b0;
    const double rel = std::abs(power - 2.0 * b0) / (2.0 * b0);
    detail += fmt("mp power rel err %.4f, ", rel);
    if (rel > 0.01) pass = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 120.0) pass = false;
  report(3, "Loo sampler fidelity", pass, detail + fmt("%.1f s", elapsed));
}

// ---------------------------------------------------------------------- 4
void criterion_markov() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;

  // fixed random irreducible chain
  fading::MarkovChain chain;
  Rng gen(99);
  for (int i = 0; i < 3; ++i) {
    double row[3], total = 0.0;
    for (int j = 0; j < 3; ++j) {
      row[j] = 0.05 + gen.uniform();
      total += row[j];
    }
    for (int j = 0; j < 3; ++j) chain.transition[i][j] = row[j] / total;
    chain.transition[i][2] = 1.0 - chain.transition[i][0] - chain.transition[i][1];
  }
  chain.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};

  const auto pi = fading::stationary_distribution(chain);

  // matrix-power oracle
  double power[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) power[i][j] = chain.transition[i][j];
  for (int step = 1; step < 1000; ++step) {
    double next[3][3] = {};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) next[i][j] += power[i][k] * chain.transition[k][j];
    std::copy(&next[0][0], &next[0][0] + 9, &power[0][0]);
  }
  double oracle_err = 0.0;
  for (int j = 0; j < 3; ++j) oracle_err = std::max(oracle_err, std::abs(pi[j] - power[0][j]));
  if (oracle_err > 1e-8) pass = false;

  Rng rng(123);
  const auto seq = fading::sample_state_sequence(chain, 1000000, rng);
  double counts[3] = {};
  for (auto s : seq) counts[static_cast<int>(s)] += 1.0;
  double occupancy_err = 0.0;
  for (int j = 0; j < 3; ++j)
    occupancy_err = std::max(occupancy_err, std::abs(counts[j] / seq.size() - pi[j]));
  if (occupancy_err > 0.005) pass = false;

  const double elapsed = seconds_since(start);
  if (elapsed >= 30.0) pass = false;
  report(4, "Markov chain", pass,
         fmt("stationary vs P^1000 err %.1e, occupancy err %.4f, %.2f s", oracle_err,
             occupancy_err, elapsed));
}

// ---------------------------------------------------------------------- 5
void criterion_noise_calibration() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  const channel::SymbolVector zeros(100000, {0.0, 0.0});
  const fading::LooParams unity{0.0, 0.0, -400.0};
  for (double snr_db : {0.0, 10.0, 20.0}) {
    Rng rng(60 + static_cast<std::uint64_t>(snr_db));
    const auto out = channel::transmit(zeros, unity, snr_db, channel::FadingMode::kPerSymbol, rng);
    const double sigma2 = linkbudget::noise_sigma_squared(snr_db, 1.0);
    double re = 0.0, im = 0.0;
    for (const auto& v : out.received) {
      re += v.real() * v.real();
      im += v.imag() * v.imag();
    }
    re /= static_cast<double>(zeros.size());
    im /= static_cast<double>(zeros.size());
    const double rel = std::max(std::abs(re - sigma2), std::abs(im - sigma2)) / sigma2;
    detail += fmt("%gdB rel %.4f, ", snr_db, rel);
    if (rel > 0.02) pass = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) pass = false;
  report(5, "noise calibration", pass, detail + fmt("%.2f s", elapsed));
}

// ---------------------------------------------------------------------- 6
// Weighted-probe gradient check on a layer-like fragment.
template <class Forward, class Backward>
double probe_gradient_check(nn::Tensor<double>& input,
                            std::vector<nn::GradCheckTarget<double>> targets, Forward&& forward,
                            Backward&& backward, std::uint64_t probe_seed) {
  std::vector<double> probe;
  const auto loss = [&]() -> double {
    const nn::Tensor<double> y = forward();
    if (probe.empty()) {
      Rng prng(probe_seed);
      probe.resize(y.values.size());
      for (auto& w : probe) w = prng.normal();
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i) acc += probe[i] * y.values[i];
    return acc;
  };
  input.alloc_grad();
  const auto compute = [&]() {
    loss();
    nn::Tensor<double> y = forward();
    nn::Tensor<double> gy(y.shape);
    for (std::size_t i = 0; i < gy.values.size(); ++i) gy.values[i] = probe[i];
    input.grad = backward(gy).values;
  };
  targets.push_back(nn::target_of(input, "input"));
  return nn::gradient_check<double>(loss, compute, std::move(targets)).max_rel_err;
}

template <class L>
std::vector<nn::GradCheckTarget<double>> params_of(L& layer) {
  std::vector<nn::Param<double>> params;
  layer.collect_params(params, "p");
  std::vector<nn::GradCheckTarget<double>> targets;
  for (auto& p : params) targets.push_back(nn::target_of(*p.tensor, p.name));
  return targets;
}

nn::Tensor<double> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  nn::Tensor<double> t(std::move(shape));
  for (auto& v : t.values) v = scale * rng.normal();
  return t;
}

void criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  const auto note = [&](const std::string& name, double err) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
    if (err >= 1e-5) pass = false;
  };

  Rng rng(1000);
  {
    nn::Conv2D<double> conv(2, 3, 3, 2, rng);
    auto x = random_tensor({2, 2, 6, 6}, rng);
    note("conv2d", probe_gradient_check(
                       x, params_of(conv), [&] { return conv.forward(x); },
                       [&](const nn::Tensor<double>& gy) { return conv.backward(gy); }, 1));
  }
  {
    nn::ConvTranspose2D<double> ct(3, 2, 3, 2, rng);
    auto x = random_tensor({2, 3, 4, 4}, rng);
    note("conv_transpose", probe_gradient_check(
                               x, params_of(ct), [&] { return ct.forward(x); },
                               [&](const nn::Tensor<double>& gy) { return ct.backward(gy); }, 2));
  }
  {
    nn::Dense<double> dense(5, 4, rng);
    auto x = random_tensor({3, 5}, rng);
    note("dense", probe_gradient_check(
                      x, params_of(dense), [&] { return dense.forward(x); },
                      [&](const nn::Tensor<double>& gy) { return dense.backward(gy); }, 3));
  }
  {
    nn::PReLU<double> prelu(3);
    auto x = random_tensor({2, 3, 4, 4}, rng);
    note("prelu", probe_gradient_check(
                      x, params_of(prelu), [&] { return prelu.forward(x); },
                      [&](const nn::Tensor<double>& gy) { return prelu.backward(gy); }, 4));
  }
  {
    nn::ReLU<double> relu;
    auto x = random_tensor({2, 3, 4, 4}, rng);
    note("relu", probe_gradient_check(
                     x, {}, [&] { return relu.forward(x); },
                     [&](const nn::Tensor<double>& gy) { return relu.backward(gy); }, 5));
  }
  {
    nn::Sigmoid<double> sig;
    auto x = random_tensor({2, 6}, rng);
    note("sigmoid", probe_gradient_check(
                        x, {}, [&] { return sig.forward(x); },
                        [&](const nn::Tensor<double>& gy) { return sig.backward(gy); }, 6));
  }
  {
    nn::GlobalAvgPool<double> gap;
    auto x = random_tensor({2, 3, 5, 5}, rng);
    note("gap", probe_gradient_check(
                    x, {}, [&] { return gap.forward(x); },
                    [&](const nn::Tensor<double>& gy) { return gap.backward(gy); }, 7));
  }
  {
    nn::PowerNormalize<double> norm(1.0);
    auto x = random_tensor({2, 4, 3, 3}, rng);
    note("power_normalize", probe_gradient_check(
                                x, {}, [&] { return norm.forward(x); },
                                [&](const nn::Tensor<double>& gy) { return norm.backward(gy); }, 8));
  }
  {
    channel::ChannelLayer<double> layer;
    std::vector<std::complex<double>> gains, noise;
    for (int i = 0; i < 16; ++i) {
      gains.emplace_back(rng.normal(), rng.normal());
      noise.emplace_back(0.2 * rng.normal(), 0.2 * rng.normal());
    }
    layer.set_realization(gains, noise, 2, 8);
    auto x = random_tensor({2, 4, 2, 2}, rng);
    note("channel_layer", probe_gradient_check(
                              x, {}, [&] { return layer.forward(x); },
                              [&](const nn::Tensor<double>& gy) { return layer.backward(gy); }, 9));
  }
  {
    codec::AttentionModule<double> att(4, 4, 3, rng);
    auto features = random_tensor({2, 4, 3, 3}, rng);
    auto context = random_tensor({2, 4}, rng, 0.5);
    for (auto& v : context.values) v = std::abs(v);
    context.alloc_grad();
    auto targets = params_of(att);
    targets.push_back(nn::target_of(context, "context"));
    std::vector<double> probe;
    const auto loss = [&]() -> double {
      const auto y = att.forward(features, context);
      if (probe.empty()) {
        Rng prng(10);
        probe.resize(y.values.size());
        for (auto& w : probe) w = prng.normal();
      }
      double acc = 0.0;
      for (std::size_t i = 0; i < y.values.size(); ++i) acc += probe[i] * y.values[i];
      return acc;
    };
    features.alloc_grad();
    targets.push_back(nn::target_of(features, "features"));
    const auto compute = [&]() {
      loss();
      nn::Tensor<double> gy(std::vector<int>{2, 4, 3, 3});
      for (std::size_t i = 0; i < gy.values.size(); ++i) gy.values[i] = probe[i];
      auto [gfeat, gctx] = att.backward(gy);
      features.grad = gfeat.values;
      context.grad = gctx.values;
    };
    note("attention", nn::gradient_check<double>(loss, compute, targets).max_rel_err);
  }
  {
    // composed 1-block encoder -> channel -> decoder -> loss, every
    // parameter plus input and context coordinates
    codec::ArchitectureConfig arch;
    arch.num_blocks = 1;
    arch.filters = 4;
    arch.strides = {2};
    arch.channel_filters_c = 2;
    arch.input_bands = 2;
    arch.input_h = 6;
    arch.input_w = 6;
    codec::AttentionConfig att;
    att.enabled = true;
    att.hidden_dim = 3;
    codec::JsccModel<double> model(arch, att, 77);

    auto x = random_tensor({2, 2, 6, 6}, rng, 0.3);
    for (auto& v : x.values) v = 0.5 + 0.3 * std::tanh(v);
    std::vector<codec::ChannelContext> ctx_values{
        codec::ChannelContext::make(12.0, fading::ChannelState::kLos),
        codec::ChannelContext::make(5.0, fading::ChannelState::kShadow)};
    auto ctx = codec::context_tensor<double>(ctx_values, att);
    ctx.alloc_grad();

    channel::ChannelLayer<double> chan;
    const auto k = arch.symbol_count();
    std::vector<std::complex<double>> gains, noise;
    Rng crng(11);
    for (int i = 0; i < 2 * k; ++i) {
      gains.emplace_back(1.0 + 0.3 * crng.normal(), 0.3 * crng.normal());
      noise.emplace_back(0.05 * crng.normal(), 0.05 * crng.normal());
    }
    chan.set_realization(gains, noise, 2, k);

    nn::MseLoss<double> loss_fn;
    const nn::Tensor<double> target = x;
    const auto loss = [&]() -> double {
      auto z = model.encode_forward(x, &ctx);
      auto zhat = chan.forward(z);
      auto xhat = model.decode_forward(zhat, &ctx);
      return loss_fn.forward(target, xhat);
    };
    const auto compute = [&]() {
      model.zero_grads();
      model.reset_context_grad();
      loss();
      auto gzhat = model.decode_backward(loss_fn.backward());
      x.grad = model.encode_backward(chan.backward(gzhat)).values;
      ctx.grad = model.context_grad().values;
    };
    std::vector<nn::GradCheckTarget<double>> targets;
    auto params = model.params();
    for (auto& p : params) targets.push_back(nn::target_of(*p.tensor, p.name));
    x.alloc_grad();
    targets.push_back(nn::target_of(x, "input"));
    targets.push_back(nn::target_of(ctx, "context"));
    note("composed", nn::gradient_check<double>(loss, compute, targets).max_rel_err);
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 120.0) pass = false;
  report(6, "gradient checks", pass,
         fmt("worst rel err %.2e (%s), %.1f s", worst, worst_name.c_str(), elapsed));
}

// ---------------------------------------------------------------------- 7
void criterion_power_constraint() {
  bool pass = true;
  double worst = 0.0;
  Rng rng(2000);
  for (int trial = 0; trial < 100; ++trial) {
    const int batch = 1 + static_cast<int>(rng.index(3));
    const int c = 2 * (1 + static_cast<int>(rng.index(4)));
    const int h = 1 + static_cast<int>(rng.index(4));
    const int w = 1 + static_cast<int>(rng.index(4));
    const double power = 0.25 + 2.0 * rng.uniform();
    nn::PowerNormalize<float> norm(power);
    nn::Tensor<float> x({batch, c, h, w});
    for (auto& v : x.values) v = static_cast<float>(rng.normal());
    const auto z = norm.forward(x);
    const std::size_t per_sample = z.values.size() / batch;
    const double k = static_cast<double>(per_sample) / 2.0;
    for (int b = 0; b < batch; ++b) {
      double total = 0.0;
      for (std::size_t i = 0; i < per_sample; ++i) {
        const double v = z.values[b * per_sample + i];
        total += v * v;
      }
      worst = std::max(worst, std::abs(total / k - power) / power);
    }
  }
  if (worst > 1e-6) pass = false;  // float32 layer: 1e-6 relative
  // the double-precision layer meets the 1e-9 bound directly
  double worst_double = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    nn::PowerNormalize<double> norm(1.0);
    nn::Tensor<double> x({2, 4, 3, 3});
    for (auto& v : x.values) v = rng.normal();
    const auto z = norm.forward(x);
    const std::size_t per_sample = z.values.size() / 2;
    const double k = static_cast<double>(per_sample) / 2.0;
    for (int b = 0; b < 2; ++b) {
      double total = 0.0;
      for (std::size_t i = 0; i < per_sample; ++i) {
        const double v = z.values[b * per_sample + i];
        total += v * v;
      }
      worst_double = std::max(worst_double, std::abs(total / k - 1.0));
    }
  }
  if (worst_double > 1e-9) pass = false;
  report(7, "power constraint", pass,
         fmt("float32 worst rel %.2e, float64 worst %.2e over 100 random configs", worst,
             worst_double));
}

// ---------------------------------------------------------------------- 8
void criterion_parameter_accounting() {
  bool pass = true;
  auto arch = codec::full_scale_config();
  codec::AttentionConfig att;
  att.enabled = true;
  att.hidden_dim = 16;
  codec::JsccModel<float> full(arch, att, 1);
  const auto full_report = full.parameter_report();
  if (!(full_report.attention > 0 && full_report.attention_fraction() < 0.01)) pass = false;

  codec::ArchitectureConfig toy;
  toy.num_blocks = 1;
  toy.filters = 8;
  toy.strides = {2};
  toy.channel_filters_c = 4;
  toy.input_bands = 3;
  toy.input_h = 8;
  toy.input_w = 8;
  codec::AttentionConfig toy_att;
  toy_att.enabled = true;
  toy_att.hidden_dim = 4;
  codec::JsccModel<float> small(toy, toy_att, 1);
  const auto toy_report = small.parameter_report();
  // hand-computed sums (see test_codec.cpp for the per-layer breakdown)
  const std::int64_t expected_attention = 184;
  const std::int64_t expected_total = 3110;
  if (toy_report.attention != expected_attention || toy_report.total != expected_total)
    pass = false;
  report(8, "parameter accounting", pass,
         fmt("full scale: %lld params, attention %.4f%% (< 1%%); toy: %lld/%lld vs %lld/%lld",
             static_cast<long long>(full_report.total), 100.0 * full_report.attention_fraction(),
             static_cast<long long>(toy_report.attention), static_cast<long long>(toy_report.total),
             static_cast<long long>(expected_attention), static_cast<long long>(expected_total)));
}

// ------------------------------------------------------------------- 9/10
struct TrendOutcome {
  std::vector<harness::ResultRow> sweep_rows;
  std::map<std::string, double> mean_psnr_by_state;    // adaptive, matched, ratio 0.33
  std::map<double, double> mean_psnr_by_ratio;         // baseline Shadow
  std::map<std::string, double> mismatch_mean_psnr;    // "kind|assumed|actual"
  fs::path out_dir;
};

harness::ExperimentConfig trend_config() {
  harness::ExperimentConfig cfg;
  cfg.arch.num_blocks = 2;
  cfg.arch.filters = 12;
  cfg.arch.strides = {2, 2};
  cfg.arch.input_bands = 3;
  cfg.arch.input_h = 16;
  cfg.arch.input_w = 16;
  cfg.attention.enabled = true;
  cfg.attention.hidden_dim = 4;
  cfg.environments = {"urban"};
  cfg.states = {fading::ChannelState::kLos, fading::ChannelState::kShadow,
                fading::ChannelState::kDeepShadow};
  cfg.elevations = {40.0};
  cfg.ratios = {0.33};
  cfg.kinds = {"baseline", "adaptive"};
  cfg.seeds = {1, 2, 3};
  cfg.train_options.epochs = 60;
  cfg.train_options.batch_size = 16;
  cfg.train_options.patience = 60;
  cfg.eval_realizations = 4;
  cfg.dataset_count = 96;
  cfg.dataset_bands = 3;
  cfg.dataset_size = 16;
  cfg.dataset_seed = 7;
  return cfg;
}

TrendOutcome run_trend_experiments(const fs::path& work) {
  TrendOutcome outcome;
  outcome.out_dir = work / "trend";
  const auto cfg = trend_config();
  auto envs = fading::load_environment_tables_file(std::string(SATJSCC_DATA_DIR) +
                                                   "/environments.cfg");
  harness::ExperimentRunner runner(cfg, envs, outcome.out_dir);

  // (a) + comparison grid: both kinds, three states, ratio 0.33
  outcome.sweep_rows = runner.sweep();
  std::map<std::string, double> state_mse_sum;
  std::map<std::string, int> state_count;
  for (const auto& row : outcome.sweep_rows) {
    if (row.model_kind != "adaptive") continue;
    state_mse_sum[row.state_actual] += row.mse;
    state_count[row.state_actual] += 1;
  }
  for (const auto& [state, total] : state_mse_sum)
    outcome.mean_psnr_by_state[state] = harness::psnr_from_mse(total / state_count[state]);

  // (b) additional baseline cells: Shadow at the two smaller ratios
  std::map<double, double> ratio_mse_sum;
  std::map<double, int> ratio_count;
  std::vector<harness::ResultRow> ratio_rows;
  for (double ratio : {0.04, 0.17, 0.33}) {
    for (std::uint64_t seed : cfg.seeds) {
      const auto row = runner.eval_cell("baseline", "urban", 40.0, ratio, seed,
                                        fading::ChannelState::kShadow,
                                        fading::ChannelState::kShadow);
      ratio_mse_sum[ratio] += row.mse;
      ratio_count[ratio] += 1;
      ratio_rows.push_back(row);
    }
  }
  for (const auto& [ratio, total] : ratio_mse_sum)
    outcome.mean_psnr_by_ratio[ratio] = harness::psnr_from_mse(total / ratio_count[ratio]);
  harness::write_result_csv(outcome.out_dir / "ratio_trend_results.csv", ratio_rows);

  // (c) mismatch pairs, both kinds, reusing the trained models
  std::map<std::string, double> mm_mse_sum;
  std::map<std::string, int> mm_count;
  std::vector<harness::ResultRow> mm_rows;
  using fading::ChannelState;
  const std::pair<ChannelState, ChannelState> pairs[] = {
      {ChannelState::kLos, ChannelState::kLos},
      {ChannelState::kLos, ChannelState::kDeepShadow},
      {ChannelState::kDeepShadow, ChannelState::kLos},
      {ChannelState::kDeepShadow, ChannelState::kDeepShadow}};
  for (const char* kind : {"baseline", "adaptive"}) {
    for (const auto& [assumed, actual] : pairs) {
      for (std::uint64_t seed : cfg.seeds) {
        const auto row = runner.eval_cell(kind, "urban", 40.0, 0.33, seed, assumed, actual);
        const std::string key = std::string(kind) + "|" + fading::to_string(assumed) + "|" +
                                fading::to_string(actual);
        mm_mse_sum[key] += row.mse;
        mm_count[key] += 1;
        mm_rows.push_back(row);
      }
    }
  }
  for (const auto& [key, total] : mm_mse_sum)
    outcome.mismatch_mean_psnr[key] = harness::psnr_from_mse(total / mm_count[key]);
  harness::write_result_csv(outcome.out_dir / "mismatch_results.csv", mm_rows);
  return outcome;
}

void criterion_trends(const TrendOutcome& outcome, double elapsed_s) {
  // (a) fixed adaptive model, matched contexts: PSNR ordered LOS >= Shadow >= Deep
  const double los = outcome.mean_psnr_by_state.at("LOS");
  const double shadow = outcome.mean_psnr_by_state.at("Shadow");
  const double deep = outcome.mean_psnr_by_state.at("DeepShadow");
  const bool pass_a = los >= shadow && shadow >= deep;

  // (b) baseline PSNR non-decreasing in compression ratio, 0.3 dB tolerance
  const double r004 = outcome.mean_psnr_by_ratio.at(0.04);
  const double r017 = outcome.mean_psnr_by_ratio.at(0.17);
  const double r033 = outcome.mean_psnr_by_ratio.at(0.33);
  const bool pass_b = r017 >= r004 - 0.3 && r033 >= r017 - 0.3;

  // (c) matched >= mismatched - 0.1 dB in both directions, both kinds
  bool pass_c = true;
  std::string c_detail;
  for (const char* kind : {"baseline", "adaptive"}) {
    const double matched_los = outcome.mismatch_mean_psnr.at(std::string(kind) + "|LOS|LOS");
    const double matched_deep =
        outcome.mismatch_mean_psnr.at(std::string(kind) + "|DeepShadow|DeepShadow");
    const double wrong_on_los =
        outcome.mismatch_mean_psnr.at(std::string(kind) + "|DeepShadow|LOS");
    const double wrong_on_deep =
        outcome.mismatch_mean_psnr.at(std::string(kind) + "|LOS|DeepShadow");
    if (matched_los < wrong_on_los - 0.1 || matched_deep < wrong_on_deep - 0.1) pass_c = false;
    c_detail += fmt("%s: LOS %.2f vs %.2f, Deep %.2f vs %.2f; ", kind, matched_los, wrong_on_los,
                    matched_deep, wrong_on_deep);
  }

  report(9, "qualitative trends", pass_a && pass_b && pass_c,
         fmt("(a) %.2f/%.2f/%.2f dB %s; (b) %.2f/%.2f/%.2f dB %s; (c) %s%s; %.0f s total", los,
             shadow, deep, pass_a ? "ok" : "NOT ordered", r004, r017, r033,
             pass_b ? "ok" : "NOT monotone", c_detail.c_str(), pass_c ? "ok" : "DEGRADED",
             elapsed_s));
}

void criterion_comparison_csv(const TrendOutcome& outcome) {
  bool pass = true;
  std::string detail;
  // all persisted rows satisfy the identity on re-read (read_result_csv
  // re-checks); the comparison CSV must exist with every gap populated
  try {
    const auto rows = harness::read_result_csv(outcome.out_dir / "sweep_results.csv");
    if (rows.empty()) {
      pass = false;
      detail += "sweep_results.csv empty; ";
    }
    std::ifstream in(outcome.out_dir / "sweep_comparison.csv");
    if (!in) throw std::runtime_error("sweep_comparison.csv missing");
    std::string line;
    std::getline(in, line);
    int data_rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++data_rows;
      std::vector<std::string> fields;
      std::istringstream is(line);
      std::string field;
      while (std::getline(is, field, ',')) fields.push_back(field);
      if (fields.size() != 8) throw std::runtime_error("comparison row malformed: " + line);
      const double base = harness::detail::parse_double(fields[5]);
      const double adaptive = harness::detail::parse_double(fields[6]);
      const double gap = harness::detail::parse_double(fields[7]);
      if (std::abs(gap - (adaptive - base)) > 1e-9)
        throw std::runtime_error("gap column inconsistent: " + line);
    }
    if (data_rows < 9) {
      pass = false;
      detail += fmt("only %d comparison rows; ", data_rows);
    } else {
      detail += fmt("%zu result rows, %d comparison cells with populated gaps", rows.size(),
                    data_rows);
    }
  } catch (const std::exception& e) {
    pass = false;
    detail += e.what();
  }
  report(10, "adaptive-vs-baseline comparison", pass, detail);
}

// --------------------------------------------------------------------- 11
std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_determinism(const fs::path& work) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  try {
    harness::ExperimentConfig cfg;
    cfg.arch.num_blocks = 1;
    cfg.arch.filters = 8;
    cfg.arch.strides = {2};
    cfg.arch.input_bands = 3;
    cfg.arch.input_h = 8;
    cfg.arch.input_w = 8;
    cfg.environments = {"open"};
    cfg.states = {fading::ChannelState::kShadow};
    cfg.elevations = {60.0};
    cfg.ratios = {0.33};
    cfg.kinds = {"baseline"};
    cfg.seeds = {5};
    cfg.train_options.epochs = 5;
    cfg.train_options.batch_size = 8;
    cfg.eval_realizations = 2;
    cfg.dataset_count = 24;
    cfg.dataset_bands = 3;
    cfg.dataset_size = 8;
    cfg.dataset_seed = 9;
    auto envs = fading::load_environment_tables_file(std::string(SATJSCC_DATA_DIR) +
                                                     "/environments.cfg");

    const fs::path dirs[2] = {work / "det1", work / "det2"};
    for (const auto& dir : dirs) {
      fs::remove_all(dir);
      harness::ExperimentRunner runner(cfg, envs, dir);
      runner.sweep();
    }
    const auto csv1 = file_bytes(dirs[0] / "sweep_results.csv");
    const auto csv2 = file_bytes(dirs[1] / "sweep_results.csv");
    if (csv1.empty() || csv1 != csv2) {
      pass = false;
      detail += "CSV bytes differ; ";
    }
    std::string ckpt_name;
    for (const auto& entry : fs::directory_iterator(dirs[0] / "models"))
      if (entry.path().extension() == ".ckpt") ckpt_name = entry.path().filename().string();
    if (ckpt_name.empty()) throw std::runtime_error("no checkpoint written");
    const auto ck1 = file_bytes(dirs[0] / "models" / ckpt_name);
    const auto ck2 = file_bytes(dirs[1] / "models" / ckpt_name);
    if (ck1.empty() || ck1 != ck2) {
      pass = false;
      detail += "checkpoint bytes differ; ";
    }
    detail += fmt("csv %zu bytes, checkpoint %zu bytes identical across reruns, %.1f s",
                  csv1.size(), ck1.size(), seconds_since(start));
  } catch (const std::exception& e) {
    pass = false;
    detail += e.what();
  }
  report(11, "determinism", pass, detail);
}

}  // namespace

int main() {
  const auto work = fs::path("acceptance_work");
  fs::remove_all(work);
  fs::create_directories(work);

  try {
    criterion_link_budget();
    criterion_loo_conversions();
    criterion_loo_sampler();
    criterion_markov();
    criterion_noise_calibration();
    criterion_gradients();
    criterion_power_constraint();
    criterion_parameter_accounting();

    const auto trend_start = std::chrono::steady_clock::now();
    const auto outcome = run_trend_experiments(work);
    criterion_trends(outcome, seconds_since(trend_start));
    criterion_comparison_csv(outcome);
    criterion_determinism(work);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    return 1;
  }

  std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ALL PASS" : "RESULT", g_failures);
  return g_failures == 0 ? 0 : 1;
}
