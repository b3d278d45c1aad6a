#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace satjscc::nn {

// Dense n-d array with an optional gradient buffer of the same shape.
// Activations use shape (batch, channels, height, width); vectors use
// (batch, features). Scalar type T is float for training and double for the
// finite-difference oracles.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty unless this tensor holds parameters

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    values.assign(static_cast<std::size_t>(numel()), T(0));
  }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
  int rank() const { return static_cast<int>(shape.size()); }

  void alloc_grad() { grad.assign(values.size(), T(0)); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

  // 4-d accessors (b, c, y, x)
  T& at(int b, int c, int y, int x) {
    return values[((static_cast<std::size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
  T at(int b, int c, int y, int x) const {
    return values[((static_cast<std::size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }

  // 2-d accessors (row, col)
  T& at2(int r, int c) { return values[static_cast<std::size_t>(r) * shape[1] + c]; }
  T at2(int r, int c) const { return values[static_cast<std::size_t>(r) * shape[1] + c]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape); }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
  }
};

template <class T>
void require_shape(const Tensor<T>& t, const std::vector<int>& shape, const char* what) {
  if (t.shape != shape)
    throw std::invalid_argument(std::string(what) + ": shape mismatch, got " + t.shape_string());
}

// Named view of a parameter tensor, the unit the optimizer and checkpoints
// iterate over.
template <class T>
struct Param {
  Tensor<T>* tensor = nullptr;
  std::string name;
};

}  // namespace satjscc::nn
