#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "satjscc/loo.hpp"
#include "satjscc/rng.hpp"

namespace satjscc::fading {

enum class ChannelState { kLos = 0, kShadow = 1, kDeepShadow = 2 };

inline constexpr std::array<ChannelState, 3> kAllStates = {
    ChannelState::kLos, ChannelState::kShadow, ChannelState::kDeepShadow};

inline std::string to_string(ChannelState s) {
  switch (s) {
    case ChannelState::kLos: return "LOS";
    case ChannelState::kShadow: return "Shadow";
    case ChannelState::kDeepShadow: return "DeepShadow";
  }
  return "?";
}

inline ChannelState state_from_string(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "los") return ChannelState::kLos;
  if (lower == "shadow") return ChannelState::kShadow;
  if (lower == "deepshadow" || lower == "deep_shadow" || lower == "deep shadow")
    return ChannelState::kDeepShadow;
  throw std::invalid_argument("unknown channel state: " + std::string(name));
}

class MarkovError : public std::runtime_error {
 public:
  explicit MarkovError(const std::string& msg) : std::runtime_error(msg) {}
};

// Three-state shadowing chain: occupancy probabilities plus a row-stochastic
// transition matrix over {LOS, Shadow, DeepShadow}.
struct MarkovChain {
  std::array<double, 3> state_probs{1.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> transition{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  void validate() const {
    constexpr double tol = 1e-12;
    double total = 0.0;
    for (double p : state_probs) {
      if (p < 0.0 || p > 1.0) throw std::invalid_argument("state probability outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > tol)
      throw std::invalid_argument("state probabilities must sum to 1");
    for (const auto& row : transition) {
      double row_sum = 0.0;
      for (double p : row) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("transition entry outside [0,1]");
        row_sum += p;
      }
      if (std::abs(row_sum - 1.0) > tol)
        throw std::invalid_argument("transition rows must sum to 1");
    }
  }
};

namespace detail {

// Structural checks on the positive pattern of the transition matrix.
inline bool is_irreducible(const std::array<std::array<double, 3>, 3>& t) {
  std::array<std::array<bool, 3>, 3> reach{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) reach[i][j] = t[i][j] > 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!reach[i][j]) return false;
  return true;
}

// Period of state 0 = gcd of return-walk lengths; walks up to length 12
// cover every combination of simple cycles on three states.
inline int period_of_state0(const std::array<std::array<double, 3>, 3>& t) {
  std::array<std::array<bool, 3>, 3> power{};
  std::array<std::array<bool, 3>, 3> base{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) power[i][j] = base[i][j] = t[i][j] > 0.0;
  int g = 0;
  for (int n = 1; n <= 12; ++n) {
    if (n > 1) {
      std::array<std::array<bool, 3>, 3> next{};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          if (power[i][k])
            for (int j = 0; j < 3; ++j)
              if (base[k][j]) next[i][j] = true;
      power = next;
    }
    if (power[0][0]) g = std::gcd(g, n);
  }
  return g;  // 0 means no return walk was found
}

}  // namespace detail

// Fixed point of pi = pi P, by power iteration to 1e-12. Requires an
// irreducible, aperiodic transition matrix.
inline std::array<double, 3> stationary_distribution(const MarkovChain& chain) {
  chain.validate();
  if (!detail::is_irreducible(chain.transition))
    throw MarkovError("stationary_distribution: transition matrix is not irreducible");
  const int period = detail::period_of_state0(chain.transition);
  if (period != 1)
    throw MarkovError("stationary_distribution: transition matrix is periodic");

  std::array<double, 3> pi{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (long iter = 0; iter < 1000000; ++iter) {
    std::array<double, 3> next{0.0, 0.0, 0.0};
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) next[j] += pi[i] * chain.transition[i][j];
    double diff = 0.0;
    for (int j = 0; j < 3; ++j) diff += std::abs(next[j] - pi[j]);
    pi = next;
    if (diff < 1e-12) {
      const double total = pi[0] + pi[1] + pi[2];
      for (double& v : pi) v /= total;
      return pi;
    }
  }
  throw MarkovError("stationary_distribution: no convergence after 1e6 iterations");
}

// State sequence: initial state from state_probs, then transition rows.
inline std::vector<ChannelState> sample_state_sequence(const MarkovChain& chain,
                                                       std::size_t steps, Rng& rng) {
  chain.validate();
  if (steps == 0) throw std::invalid_argument("steps must be > 0");
  const auto draw = [&rng](const std::array<double, 3>& probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<ChannelState>(i);
    }
    return ChannelState::kDeepShadow;
  };
  std::vector<ChannelState> out;
  out.reserve(steps);
  ChannelState current = draw(chain.state_probs);
  out.push_back(current);
  for (std::size_t t = 1; t < steps; ++t) {
    current = draw(chain.transition[static_cast<int>(current)]);
    out.push_back(current);
  }
  return out;
}

// Occupancy-weighted mixture of the per-state amplitude densities.
inline double mixture_pdf(double amplitude, const MarkovChain& chain,
                          const std::array<LooParams, 3>& per_state) {
  chain.validate();
  double density = 0.0;
  for (int s = 0; s < 3; ++s) {
    if (chain.state_probs[s] == 0.0) continue;
    density += chain.state_probs[s] * loo_pdf(amplitude, per_state[s]);
  }
  return density;
}

}  // namespace satjscc::fading
