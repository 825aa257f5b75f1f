#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hrl4in/common.hpp"

namespace hrl4in::nn {

// Dense row-major matrix. Everything in the network stack is 2D: batches are
// rows, scalars are 1x1, images are flattened per row (channel-major).
template <typename T>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, T(0)) {}
  Tensor(int r, int c, std::vector<T> data) : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != static_cast<size_t>(r) * c)
      throw UsageError("Tensor: data size does not match shape");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, T value) {
    Tensor t(r, c);
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
  }
  static Tensor scalar(T value) { return full(1, 1, value); }

  size_t size() const { return v.size(); }
  T& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  T operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  T& operator[](size_t i) { return v[i]; }
  T operator[](size_t i) const { return v[i]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const {
    return "(" + std::to_string(rows) + "," + std::to_string(cols) + ")";
  }
  bool all_finite() const {
    for (T x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.rows = rows;
    out.cols = cols;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

// Trainable tensor with a persistent gradient accumulator.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> val)
      : name(std::move(n)), value(std::move(val)), grad(value.rows, value.cols) {}

  void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), T(0)); }
};

}  // namespace hrl4in::nn
