#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace satjscc::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Gauss-Kronrod 15(7) nodes and weights on [-1, 1]. The Gauss-7 nodes are
// the odd-indexed Kronrod abscissae.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813,  0.949107912342759, 0.864864423359769,
    0.741531185599394,  0.586087235467691, 0.405845151377397,
    0.207784955007898,  0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
inline void gauss_kronrod_15(F&& f, double a, double b, double& value, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fsum;
  }
  value = kronrod * half;
  error = std::abs((kronrod - gauss) * half);
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

// Adaptive quadrature: repeatedly bisects the interval with the largest
// Gauss-Kronrod error estimate until the summed estimate meets the tolerance.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                    double abs_tol = 1e-14, int max_subdivisions = 4000) {
  QuadratureResult result;
  if (!(a < b)) {
    result.converged = true;
    return result;
  }
  std::priority_queue<detail::Interval> queue;
  detail::Interval whole{a, b, 0.0, 0.0};
  detail::gauss_kronrod_15(f, a, b, whole.value, whole.error);
  queue.push(whole);
  double total_value = whole.value;
  double total_error = whole.error;

  while (result.subdivisions < max_subdivisions) {
    if (total_error <= std::max(abs_tol, rel_tol * std::abs(total_value))) {
      result.converged = true;
      break;
    }
    detail::Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    detail::Interval left{worst.a, mid, 0.0, 0.0};
    detail::Interval right{mid, worst.b, 0.0, 0.0};
    detail::gauss_kronrod_15(f, left.a, left.b, left.value, left.error);
    detail::gauss_kronrod_15(f, right.a, right.b, right.value, right.error);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++result.subdivisions;
  }
  if (total_error <= std::max(abs_tol, rel_tol * std::abs(total_value)))
    result.converged = true;
  result.value = total_value;
  result.error_estimate = total_error;
  return result;
}

}  // namespace satjscc::numerics
