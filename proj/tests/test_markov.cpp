#include <catch2/catch_amalgamated.hpp>

#include "satjscc/markov.hpp"

using namespace satjscc;
using namespace satjscc::fading;
using Catch::Matchers::WithinAbs;

namespace {
MarkovChain random_irreducible_chain(uint64_t seed) {
  Rng rng(seed);
  MarkovChain c;
  for (int i = 0; i < 3; ++i) {
    double row[3], total = 0.0;
    for (int j = 0; j < 3; ++j) {
      row[j] = 0.05 + rng.uniform();  // strictly positive entries
      total += row[j];
    }
    for (int j = 0; j < 3; ++j) c.transition[i][j] = row[j] / total;
    // exact row normalization in double
    c.transition[i][2] = 1.0 - c.transition[i][0] - c.transition[i][1];
  }
  c.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  return c;
}
}  // namespace

TEST_CASE("state name round trips") {
  for (ChannelState s : kAllStates) REQUIRE(state_from_string(to_string(s)) == s);
  REQUIRE(state_from_string("deep_shadow") == ChannelState::kDeepShadow);
  REQUIRE(state_from_string("los") == ChannelState::kLos);
  REQUIRE_THROWS_AS(state_from_string("fog"), std::invalid_argument);
}

TEST_CASE("chain validation") {
  MarkovChain bad;
  bad.state_probs = {0.5, 0.5, 0.1};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  MarkovChain bad2;
  bad2.transition[0] = {0.6, 0.6, -0.2};
  REQUIRE_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("stationary distribution rejects the identity matrix") {
  MarkovChain c;  // defaults to identity transition
  REQUIRE_THROWS_AS(stationary_distribution(c), MarkovError);
}

TEST_CASE("stationary distribution rejects periodic chains") {
  MarkovChain c;
  c.transition = {{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}};  // pure 3-cycle
  c.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  REQUIRE_THROWS_AS(stationary_distribution(c), MarkovError);
}

TEST_CASE("uniform chain has uniform stationary distribution") {
  MarkovChain c;
  for (int i = 0; i < 3; ++i) c.transition[i] = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  c.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  const auto pi = stationary_distribution(c);
  for (double v : pi) REQUIRE_THAT(v, WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("stationary distribution matches the matrix-power oracle") {
  for (uint64_t seed : {1u, 2u, 3u, 17u}) {
    const MarkovChain c = random_irreducible_chain(seed);
    const auto pi = stationary_distribution(c);

    // brute force: row of P^1000
    double power[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) power[i][j] = c.transition[i][j];
    for (int step = 1; step < 1000; ++step) {
      double next[3][3] = {};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          for (int j = 0; j < 3; ++j) next[i][j] += power[i][k] * c.transition[k][j];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) power[i][j] = next[i][j];
    }
    for (int j = 0; j < 3; ++j) REQUIRE_THAT(pi[j], WithinAbs(power[0][j], 1e-8));

    // fixed point property
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) acc += pi[i] * c.transition[i][j];
      REQUIRE_THAT(acc, WithinAbs(pi[j], 1e-10));
    }
  }
}

TEST_CASE("identity transition gives a constant state sequence") {
  MarkovChain c;  // identity transition
  c.state_probs = {0.0, 1.0, 0.0};
  Rng rng(5);
  const auto seq = sample_state_sequence(c, 100, rng);
  for (auto s : seq) REQUIRE(s == ChannelState::kShadow);
}

TEST_CASE("empirical occupancy converges to the stationary distribution") {
  const MarkovChain c = random_irreducible_chain(42);
  const auto pi = stationary_distribution(c);
  Rng rng(123);
  const auto seq = sample_state_sequence(c, 1000000, rng);
  double counts[3] = {};
  for (auto s : seq) counts[static_cast<int>(s)] += 1.0;
  for (int j = 0; j < 3; ++j)
    REQUIRE_THAT(counts[j] / static_cast<double>(seq.size()), WithinAbs(pi[j], 0.005));
}

TEST_CASE("uniform transition occupancy is uniform") {
  MarkovChain c;
  for (int i = 0; i < 3; ++i) c.transition[i] = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  c.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  Rng rng(7);
  const auto seq = sample_state_sequence(c, 1000000, rng);
  double counts[3] = {};
  for (auto s : seq) counts[static_cast<int>(s)] += 1.0;
  for (int j = 0; j < 3; ++j)
    REQUIRE_THAT(counts[j] / static_cast<double>(seq.size()), WithinAbs(1.0 / 3.0, 0.005));
}

TEST_CASE("state sequences are bit-identical under a fixed seed") {
  const MarkovChain c = random_irreducible_chain(9);
  Rng a(55), b(55);
  REQUIRE(sample_state_sequence(c, 10000, a) == sample_state_sequence(c, 10000, b));
}

TEST_CASE("mixture pdf degenerate and uniform cases") {
  const std::array<LooParams, 3> per_state = {LooParams{0.0, 0.5, -22.0},
                                              LooParams{-6.0, 2.5, -14.0},
                                              LooParams{-14.0, 4.0, -10.0}};
  MarkovChain pure_los;
  pure_los.state_probs = {1.0, 0.0, 0.0};
  for (double r : {0.3, 0.8, 1.1})
    REQUIRE_THAT(mixture_pdf(r, pure_los, per_state),
                 Catch::Matchers::WithinRel(loo_pdf(r, per_state[0]), 1e-12));

  // identical params in every state: mixture equals the single-state pdf
  const std::array<LooParams, 3> same = {per_state[1], per_state[1], per_state[1]};
  MarkovChain uniform;
  uniform.state_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  for (int i = 0; i < 3; ++i) uniform.transition[i] = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
  for (double r : {0.3, 0.8})
    REQUIRE_THAT(mixture_pdf(r, uniform, same),
                 Catch::Matchers::WithinRel(loo_pdf(r, per_state[1]), 1e-9));
}

TEST_CASE("mixture pdf integrates to 1") {
  const std::array<LooParams, 3> per_state = {LooParams{0.0, 0.5, -22.0},
                                              LooParams{-6.0, 2.5, -14.0},
                                              LooParams{-14.0, 4.0, -10.0}};
  MarkovChain chain;
  chain.state_probs = {0.5, 0.3, 0.2};
  for (int i = 0; i < 3; ++i) chain.transition[i] = {0.5, 0.3, 0.2};
  double cap = 0.0;
  for (const auto& p : per_state) cap = std::max(cap, loo_amplitude_cap(p));
  const auto q = numerics::integrate_adaptive(
      [&](double r) { return mixture_pdf(r, chain, per_state); }, 0.0, cap, 1e-8, 1e-12);
  REQUIRE(q.converged);
  REQUIRE_THAT(q.value, WithinAbs(1.0, 1e-4));
}
