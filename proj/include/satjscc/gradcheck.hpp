#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "satjscc/tensor.hpp"

namespace satjscc::nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_coordinate;
  double analytic = 0.0;
  double numeric = 0.0;
  bool pass = false;

  std::string summary() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "max rel err %.3e at %s (analytic %.6e, numeric %.6e)",
                  max_rel_err, worst_coordinate.c_str(), analytic, numeric);
    return buf;
  }
};

// One perturbable coordinate block: values get nudged, grads hold the
// analytic derivatives to compare against.
template <class T>
struct GradCheckTarget {
  std::vector<T>* values = nullptr;
  std::vector<T>* grads = nullptr;
  std::string name;
};

template <class T>
GradCheckTarget<T> target_of(Tensor<T>& t, std::string name) {
  return GradCheckTarget<T>{&t.values, &t.grad, std::move(name)};
}

// Central-difference gradient check. `loss` must rerun the full forward pass
// (deterministically: any stochastic layer must hold its realization fixed)
// and `compute_grads` must populate the analytic gradients for the unperturbed
// point. Relative error uses max(|analytic|, |numeric|, 1e-3) as denominator:
// coordinates whose derivative is below 1e-3 are held to an absolute bound of
// 1e-3 * tolerance instead, which keeps finite-difference noise (~1e-9 with
// step 1e-6) from flagging near-zero gradients while still catching every
// wiring error, which shows up at the gradient's own magnitude.
template <class T>
GradCheckReport gradient_check(const std::function<double()>& loss,
                               const std::function<void()>& compute_grads,
                               std::vector<GradCheckTarget<T>> targets,
                               double step = 1e-6, double tolerance = 1e-5) {
  static_assert(std::is_same_v<T, double>,
                "gradient_check needs double precision to resolve the tolerance");
  compute_grads();
  std::vector<std::vector<T>> analytic;
  analytic.reserve(targets.size());
  for (const auto& t : targets) analytic.push_back(*t.grads);

  GradCheckReport report;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    auto& values = *targets[ti].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(step);
      const double up = loss();
      values[i] = saved - static_cast<T>(step);
      const double down = loss();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double exact = analytic[ti][i];
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-3});
      const double rel = std::abs(numeric - exact) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_coordinate = targets[ti].name + "[" + std::to_string(i) + "]";
        report.analytic = exact;
        report.numeric = numeric;
      }
    }
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace satjscc::nn
