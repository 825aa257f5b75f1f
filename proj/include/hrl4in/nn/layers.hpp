#pragma once

#include <random>

#include "hrl4in/nn/init.hpp"
#include "hrl4in/nn/tape.hpp"

namespace hrl4in::nn {

template <typename T>
struct Dense {
  Parameter<T> weight;  // (in, out)
  Parameter<T> bias;    // (1, out)

  Dense() = default;
  Dense(const std::string& name, int in, int out, double gain, std::mt19937_64& rng)
      : weight(name + "/w", orthogonal<T>(in, out, gain, rng)),
        bias(name + "/b", Tensor<T>(1, out)) {}

  NodeId forward(Tape<T>& t, NodeId x) {
    return t.add_row(t.matmul(x, t.watch(weight)), t.watch(bias));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

template <typename T>
struct Conv2d {
  Parameter<T> weight;  // (out_c, in_c*k*k)
  Parameter<T> bias;    // (1, out_c)
  int in_c, out_c, kernel, stride;

  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int k, int s,
         double gain, std::mt19937_64& rng)
      : weight(name + "/w", orthogonal<T>(out_channels, in_channels * k * k, gain, rng)),
        bias(name + "/b", Tensor<T>(1, out_channels)),
        in_c(in_channels),
        out_c(out_channels),
        kernel(k),
        stride(s) {}

  // x rows are (in_c, h, w) flattened; returns rows of (out_c, oh, ow).
  NodeId forward(Tape<T>& t, NodeId x, int h, int w) {
    return t.conv2d(x, t.watch(weight), t.watch(bias), in_c, h, w, kernel, stride);
  }
  int out_dim(int d) const { return (d - kernel) / stride + 1; }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

// Single GRU cell. Gates use sigmoid, the candidate uses tanh; the reset gate
// multiplies the hidden contribution of the candidate (PyTorch convention).
template <typename T>
struct GruCell {
  int input_size = 0;
  int hidden_size = 0;
  Parameter<T> w_ih;  // (input, 3*hidden): r | z | n blocks
  Parameter<T> w_hh;  // (hidden, 3*hidden)
  Parameter<T> b_ih;  // (1, 3*hidden)
  Parameter<T> b_hh;

  GruCell() = default;
  GruCell(const std::string& name, int input, int hidden, std::mt19937_64& rng)
      : input_size(input), hidden_size(hidden) {
    // Blockwise orthogonal: each gate gets its own orthogonal matrix.
    Tensor<T> ih(input, 3 * hidden), hh(hidden, 3 * hidden);
    for (int g = 0; g < 3; ++g) {
      Tensor<T> bi = orthogonal<T>(input, hidden, 1.0, rng);
      Tensor<T> bh = orthogonal<T>(hidden, hidden, 1.0, rng);
      for (int i = 0; i < input; ++i)
        for (int j = 0; j < hidden; ++j) ih(i, g * hidden + j) = bi(i, j);
      for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < hidden; ++j) hh(i, g * hidden + j) = bh(i, j);
    }
    w_ih = Parameter<T>(name + "/w_ih", std::move(ih));
    w_hh = Parameter<T>(name + "/w_hh", std::move(hh));
    b_ih = Parameter<T>(name + "/b_ih", Tensor<T>(1, 3 * hidden));
    b_hh = Parameter<T>(name + "/b_hh", Tensor<T>(1, 3 * hidden));
  }

  // One step: x (B, input), h (B, hidden) -> h' (B, hidden).
  NodeId step(Tape<T>& t, NodeId x, NodeId h) {
    const int H = hidden_size;
    NodeId pi = t.add_row(t.matmul(x, t.watch(w_ih)), t.watch(b_ih));
    NodeId ph = t.add_row(t.matmul(h, t.watch(w_hh)), t.watch(b_hh));
    NodeId r = t.sigmoid_(t.add(t.slice_cols(pi, 0, H), t.slice_cols(ph, 0, H)));
    NodeId z = t.sigmoid_(t.add(t.slice_cols(pi, H, 2 * H), t.slice_cols(ph, H, 2 * H)));
    NodeId n = t.tanh_(t.add(t.slice_cols(pi, 2 * H, 3 * H),
                             t.mul(r, t.slice_cols(ph, 2 * H, 3 * H))));
    // h' = n + z * (h - n)
    return t.add(n, t.mul(z, t.sub(h, n)));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&w_ih);
    out.push_back(&w_hh);
    out.push_back(&b_ih);
    out.push_back(&b_hh);
  }
};

}  // namespace hrl4in::nn
