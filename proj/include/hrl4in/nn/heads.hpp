#pragma once

#include <random>

#include "hrl4in/nn/layers.hpp"

namespace hrl4in::nn {

inline constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

// Discrete action head: logits over n classes.
template <typename T>
struct CategoricalHead {
  Dense<T> logits_layer;
  int n = 0;

  CategoricalHead() = default;
  CategoricalHead(const std::string& name, int features, int classes, std::mt19937_64& rng)
      : logits_layer(name, features, classes, 0.01, rng), n(classes) {}

  NodeId logits(Tape<T>& t, NodeId features) { return logits_layer.forward(t, features); }

  // Sampling and argmax operate on plain values (no gradient).
  static int sample_row(const Tensor<T>& logits, int row, std::mt19937_64& rng) {
    // Gumbel-max: stable for arbitrary finite logits.
    std::uniform_real_distribution<double> u(1e-12, 1.0);
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < logits.cols; ++c) {
      double g = static_cast<double>(logits(row, c)) - std::log(-std::log(u(rng)));
      if (g > best_v) {
        best_v = g;
        best = c;
      }
    }
    return best;
  }
  static int mode_row(const Tensor<T>& logits, int row) {
    int best = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (logits(row, c) > logits(row, best)) best = c;
    return best;
  }

  // (B,1) log-probability of the chosen classes.
  NodeId log_prob(Tape<T>& t, NodeId logits_node, std::vector<int> actions) {
    return t.gather_cols(t.log_softmax_rows(logits_node), std::move(actions));
  }

  // (B,1) entropy per row: -sum p log p.
  NodeId entropy(Tape<T>& t, NodeId logits_node) {
    NodeId ls = t.log_softmax_rows(logits_node);
    return t.scale(t.rowsum(t.mul(t.exp_(ls), ls)), T(-1));
  }
};

// Diagonal Gaussian head: state-dependent mean, state-independent learnable
// log-std with a per-dimension floor.
template <typename T>
struct GaussianHead {
  Dense<T> mean_layer;
  Parameter<T> log_std;  // (1, dim)
  Tensor<T> min_log_std;  // per-dimension floor, applied as clamp-min
  int dim = 0;

  GaussianHead() = default;
  GaussianHead(const std::string& name, int features, int d,
               const std::vector<double>& init_std, const std::vector<double>& min_std,
               std::mt19937_64& rng, double mean_gain = 0.01)
      : mean_layer(name + "/mean", features, d, mean_gain, rng), dim(d) {
    if (static_cast<int>(init_std.size()) != d || static_cast<int>(min_std.size()) != d)
      throw UsageError("GaussianHead: std vectors must have head dimension");
    Tensor<T> ls(1, d);
    min_log_std = Tensor<T>(1, d);
    for (int i = 0; i < d; ++i) {
      ls[i] = static_cast<T>(std::log(init_std[i]));
      min_log_std[i] = static_cast<T>(std::log(min_std[i]));
    }
    log_std = Parameter<T>(name + "/log_std", std::move(ls));
  }

  NodeId mean(Tape<T>& t, NodeId features) { return mean_layer.forward(t, features); }

  // Floored log-std node (1, dim).
  NodeId log_std_node(Tape<T>& t) {
    return t.clamp_min_coeff(t.watch(log_std), min_log_std);
  }

  // Effective std values (floored), no gradient.
  Tensor<T> std_values() const {
    Tensor<T> s(1, dim);
    for (int i = 0; i < dim; ++i)
      s[i] = std::exp(std::max(log_std.value[i], min_log_std[i]));
    return s;
  }

  static Tensor<T> sample(const Tensor<T>& mean, const Tensor<T>& std,
                          std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Tensor<T> out = mean;
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c)
        out(r, c) += std[c] * static_cast<T>(normal(rng));
    return out;
  }

  // (B,1) log-probability of `samples` under N(mean, diag(std^2)).
  NodeId log_prob(Tape<T>& t, NodeId mean_node, const Tensor<T>& samples) {
    NodeId ls = log_std_node(t);
    NodeId diff = t.sub(t.leaf(samples), mean_node);
    NodeId inv_var = t.exp_(t.scale(ls, T(-2)));  // (1, dim)
    NodeId quad = t.rowsum(t.mul_row(t.square(diff), inv_var));  // (B,1)
    NodeId logdet = t.sum_all(ls);                               // (1,1)
    NodeId per_row = t.scale(quad, T(-0.5));
    per_row = t.add_const(per_row, static_cast<T>(-dim * kHalfLog2Pi));
    // subtract sum of log-std from every row
    NodeId logdet_rows = t.broadcast_cols(t.scale(logdet, T(-1)), 1);
    // logdet_rows is (1,1); expand over batch by scale_rows trick:
    const Tensor<T>& pr = t.value(per_row);
    if (pr.rows == 1) return t.add(per_row, logdet_rows);
    // General batch: add the scalar via matmul with a ones column.
    Tensor<T> ones(pr.rows, 1);
    for (auto& x : ones.v) x = T(1);
    NodeId expanded = t.matmul(t.leaf(ones), logdet_rows);
    return t.add(per_row, expanded);
  }

  // (1,1) entropy: sum_i (0.5 + 0.5 log 2pi + log sigma_i). Identical for
  // every batch row since the std is state-independent.
  NodeId entropy(Tape<T>& t) {
    NodeId ls = log_std_node(t);
    return t.add_const(t.sum_all(ls), static_cast<T>(dim * (0.5 + kHalfLog2Pi)));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    mean_layer.collect(out);
    out.push_back(&log_std);
  }
};

}  // namespace hrl4in::nn
