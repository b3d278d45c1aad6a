#pragma once

#include <cmath>
#include <stdexcept>

#include "satjscc/units.hpp"

namespace satjscc::numerics {

// ln I0(x) for x >= 0, usable far beyond the overflow point of I0 itself
// (I0(710) overflows a double; the log stays representable).
//
// x <= 30: power series I0(x) = sum_k ((x^2/4)^k / (k!)^2), summed until the
//          term falls below 1e-18 of the running sum.
// x  > 30: asymptotic expansion I0(x) ~ e^x / sqrt(2 pi x) * sum_k a_k x^-k
//          with a_k = prod_{j=1..k} (2j-1)^2 / (k! 8^k); eight terms give
//          relative error well below 1e-10 at the crossover.
inline double bessel_i0_log(double x) {
  if (x < 0.0) throw std::domain_error("bessel_i0_log requires x >= 0");
  if (x == 0.0) return 0.0;
  if (x <= 30.0) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::log(sum);
  }
  // a_k / x^k, accumulated incrementally: a_k = a_{k-1} * (2k-1)^2 / (8k).
  double coeff = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    const double odd = 2.0 * k - 1.0;
    coeff *= odd * odd / (8.0 * static_cast<double>(k));
    sum += coeff / std::pow(x, k);
  }
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
}

}  // namespace satjscc::numerics
