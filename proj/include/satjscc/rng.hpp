#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "satjscc/units.hpp"

namespace satjscc {

// splitmix64 step; used to derive engine seeds from (seed, stream) pairs so
// that independently-keyed generators never share a state trajectory.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random source. All randomness in the project flows through
// this class: mt19937_64 for the raw stream and an explicit Box-Muller
// transform for normals, so identical seeds give identical output bytes on
// every platform (std::normal_distribution is implementation-defined and is
// deliberately not used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)), engine_(key_) {}

  // Child generator with a stream key derived from this generator's key and
  // the child id. Distinct ids give non-overlapping streams by construction.
  Rng split(std::uint64_t child_id) const { return Rng(key_, child_id + 1); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are cached, so draw order alone
  // determines the output sequence.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]: keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Index in [0, n) without modulo bias worth caring about at n << 2^64.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x165667b19e3779f9ull + (a << 6) + (a >> 2));
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace satjscc
