#pragma once

#include <cmath>
#include <vector>

#include "hrl4in/nn/tensor.hpp"

namespace hrl4in::nn {

// If the global L2 norm of the gradients exceeds max_norm, scale all of them
// by max_norm / norm. Returns the pre-clip norm.
template <typename T>
double clip_grad_norm(const std::vector<Parameter<T>*>& params, double max_norm) {
  if (max_norm <= 0) throw UsageError("clip_grad_norm: max_norm must be positive");
  double sq = 0.0;
  for (const Parameter<T>* p : params)
    for (T g : p->grad.v) sq += static_cast<double>(g) * static_cast<double>(g);
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    T s = static_cast<T>(max_norm / norm);
    for (Parameter<T>* p : params)
      for (T& g : p->grad.v) g *= s;
  }
  return norm;
}

template <typename T>
class Adam {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;

  explicit Adam(const std::vector<Parameter<T>*>& params) : params_(params) {
    for (Parameter<T>* p : params_)
      slots_.push_back({Tensor<T>(p->value.rows, p->value.cols),
                        Tensor<T>(p->value.rows, p->value.cols)});
  }

  int64_t step_count() const { return t_; }

  // One update from the gradients currently held in the parameters.
  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      Parameter<T>& p = *params_[i];
      Slot& s = slots_[i];
      for (size_t j = 0; j < p.value.size(); ++j) {
        double g = static_cast<double>(p.grad[j]);
        double m = beta1 * static_cast<double>(s.m[j]) + (1.0 - beta1) * g;
        double v = beta2 * static_cast<double>(s.v[j]) + (1.0 - beta2) * g * g;
        s.m[j] = static_cast<T>(m);
        s.v[j] = static_cast<T>(v);
        double mh = m / bc1;
        double vh = v / bc2;
        p.value[j] -= static_cast<T>(lr * mh / (std::sqrt(vh) + eps));
      }
    }
  }

  // Named state arrays for checkpointing: m/v per parameter plus step count.
  struct Slot {
    Tensor<T> m, v;
  };
  std::vector<Slot>& slots() { return slots_; }
  void set_step_count(int64_t t) { t_ = t; }
  const std::vector<Parameter<T>*>& params() const { return params_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<Slot> slots_;
  int64_t t_ = 0;
};

}  // namespace hrl4in::nn
