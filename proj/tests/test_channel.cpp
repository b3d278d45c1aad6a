#include <catch2/catch_amalgamated.hpp>

#include "satjscc/channel.hpp"

using namespace satjscc;
using namespace satjscc::channel;
using namespace satjscc::fading;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
SymbolVector make_symbols(std::size_t n, uint64_t seed) {
  Rng rng(seed);
  SymbolVector z;
  for (std::size_t i = 0; i < n; ++i) z.emplace_back(rng.normal(), rng.normal());
  return z;
}
}  // namespace

TEST_CASE("noiseless identity-like channel returns the input scaled by h") {
  // psi = 0 and negligible multipath make h essentially 10^(alpha/20) = 1
  const LooParams unity{0.0, 0.0, -400.0};
  Rng rng(1);
  const auto z = make_symbols(64, 2);
  // huge SNR -> sigma ~ 0
  const auto out = transmit(z, unity, 400.0, FadingMode::kPerSymbol, rng);
  REQUIRE(out.received.size() == z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    REQUIRE_THAT(out.received[i].real(), WithinAbs(z[i].real(), 1e-9));
    REQUIRE_THAT(out.received[i].imag(), WithinAbs(z[i].imag(), 1e-9));
  }
}

TEST_CASE("zero input yields pure noise with the documented variance") {
  const LooParams p{0.0, 0.0, -400.0};
  const SymbolVector z(100000, {0.0, 0.0});
  for (double snr_db : {0.0, 10.0, 20.0}) {
    Rng rng(42 + static_cast<uint64_t>(snr_db));
    const auto out = transmit(z, p, snr_db, FadingMode::kPerSymbol, rng, 1.0);
    const double sigma2 = linkbudget::noise_sigma_squared(snr_db, 1.0);
    double re_var = 0.0, im_var = 0.0;
    for (const auto& v : out.received) {
      re_var += v.real() * v.real();
      im_var += v.imag() * v.imag();
    }
    re_var /= static_cast<double>(z.size());
    im_var /= static_cast<double>(z.size());
    REQUIRE_THAT(re_var, WithinRel(sigma2, 0.02));
    REQUIRE_THAT(im_var, WithinRel(sigma2, 0.02));
  }
}

TEST_CASE("transmit is deterministic and does not mutate its input") {
  const LooParams p{-8.0, 3.0, -20.0};
  const auto z = make_symbols(256, 3);
  const auto z_copy = z;
  Rng a(9), b(9);
  const auto out_a = transmit(z, p, 15.0, FadingMode::kPerSymbol, a);
  const auto out_b = transmit(z, p, 15.0, FadingMode::kPerSymbol, b);
  REQUIRE(z == z_copy);
  REQUIRE(out_a.received == out_b.received);
  REQUIRE(out_a.realization.gains == out_b.realization.gains);
}

TEST_CASE("block mode shares one gain across the codeword") {
  const LooParams p{-8.0, 3.0, -20.0};
  const auto z = make_symbols(128, 4);
  Rng rng(5);
  const auto out = transmit(z, p, 400.0, FadingMode::kBlock, rng);
  REQUIRE(out.realization.gains.size() == 1);
  const auto h = out.realization.gains[0];
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto expected = z[i] * h;
    REQUIRE_THAT(out.received[i].real(), WithinAbs(expected.real(), 1e-9));
    REQUIRE_THAT(out.received[i].imag(), WithinAbs(expected.imag(), 1e-9));
  }
}

TEST_CASE("mean received power follows E|h|^2 + noise budget") {
  // E||zh+n - zh||^2 / k = 2 sigma^2 within 2% at 1e5 symbols
  const LooParams p{-8.0, 3.0, -20.0};
  const auto z = make_symbols(100000, 6);
  Rng rng(7);
  const double snr_db = 10.0;
  const auto out = transmit(z, p, snr_db, FadingMode::kPerSymbol, rng, 1.0);
  const double sigma2 = linkbudget::noise_sigma_squared(snr_db, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    acc += std::norm(out.received[i] - z[i] * out.realization.gains[i]);
  acc /= static_cast<double>(z.size());
  REQUIRE_THAT(acc, WithinRel(2.0 * sigma2, 0.02));
}

TEST_CASE("channel layer forward matches transmit arithmetic") {
  using nn::Tensor;
  // 1 sample, 4 channels (2 complex planes), 2x2 spatial -> k = 8
  Tensor<double> z({1, 4, 2, 2});
  Rng rng(8);
  for (auto& v : z.values) v = rng.normal();

  ChannelLayer<double> layer;
  std::vector<std::complex<double>> gains, noise;
  Rng crng(9);
  for (int i = 0; i < 8; ++i) gains.emplace_back(crng.normal(), crng.normal());
  for (int i = 0; i < 8; ++i) noise.emplace_back(0.1 * crng.normal(), 0.1 * crng.normal());
  layer.set_realization(gains, noise, 1, 8);
  const auto y = layer.forward(z);

  for (int i = 0; i < 8; ++i) {
    const std::complex<double> zi(z.values[i], z.values[8 + i]);
    const auto expected = zi * gains[i] + noise[i];
    REQUIRE_THAT(y.values[i], WithinAbs(expected.real(), 1e-12));
    REQUIRE_THAT(y.values[8 + i], WithinAbs(expected.imag(), 1e-12));
  }
}

TEST_CASE("channel layer backward is the identity for h = 1") {
  using nn::Tensor;
  Tensor<double> gy({2, 2, 3, 3});
  Rng rng(10);
  for (auto& v : gy.values) v = rng.normal();
  ChannelLayer<double> layer;
  layer.set_identity(2, 9);
  const auto gx = layer.backward(gy);
  REQUIRE(gx.values == gy.values);
}

TEST_CASE("channel layer backward rotates gradients by conj(h)") {
  using nn::Tensor;
  // h = j: forward rotates by 90 degrees, backward must rotate back
  ChannelLayer<double> layer;
  std::vector<std::complex<double>> gains(4, {0.0, 1.0});
  std::vector<std::complex<double>> noise(4, {0.0, 0.0});
  layer.set_realization(gains, noise, 1, 4);
  Tensor<double> gy({1, 2, 2, 2});
  for (std::size_t i = 0; i < gy.values.size(); ++i) gy.values[i] = static_cast<double>(i + 1);
  const auto gx = layer.backward(gy);
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> g(gy.values[i], gy.values[4 + i]);
    const std::complex<double> expected = g * std::conj(gains[i]);
    REQUIRE_THAT(gx.values[i], WithinAbs(expected.real(), 1e-12));
    REQUIRE_THAT(gx.values[4 + i], WithinAbs(expected.imag(), 1e-12));
  }
}

TEST_CASE("channel layer rejects mismatched shapes") {
  using nn::Tensor;
  ChannelLayer<double> layer;
  layer.set_identity(1, 8);
  Tensor<double> wrong({1, 4, 3, 3});  // k would be 18
  REQUIRE_THROWS_AS(layer.forward(wrong), std::invalid_argument);
}
