#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "logptr/error.hpp"

namespace logptr::num {

// Dense row-major tensor. Rank 1 or 2 is all the model needs; storage is
// 32-bit float in the real model and 64-bit in the finite-difference
// shadow path.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> dims) : shape(std::move(dims)) {
    data.assign(numel_of(shape), T(0));
  }

  TensorT(std::vector<int> dims, std::vector<T> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != numel_of(shape))
      raise(Errc::ShapeMismatch, "tensor data length does not match shape");
  }

  static size_t numel_of(const std::vector<int>& dims) {
    size_t n = 1;
    for (int d : dims) {
      if (d <= 0) raise(Errc::ShapeMismatch, "non-positive tensor dimension");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t numel() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }

  // 2-D view: rank-1 tensors read as a single row.
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const { return rank() == 2 ? shape[1] : (rank() == 1 ? shape[0] : 0); }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  const T& at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  T* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols(); }
  const T* row_ptr(int r) const { return data.data() + static_cast<size_t>(r) * cols(); }

  void fill(T v) { data.assign(data.size(), v); }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

using Tensor = TensorT<float>;

inline TensorT<double> widen(const Tensor& t) {
  TensorT<double> out(t.shape);
  for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = t.data[i];
  return out;
}

}  // namespace logptr::num
