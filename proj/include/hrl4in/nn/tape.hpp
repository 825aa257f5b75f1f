#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "hrl4in/nn/tensor.hpp"

namespace hrl4in::nn {

using NodeId = int;

// Reverse-mode computation tape. Nodes are created in topological order by the
// forward pass; backward() replays the recorded local-gradient closures in
// reverse, visiting each node once.
template <typename T>
class Tape {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using CMap = Eigen::Map<const Mat>;

  struct Node {
    Tensor<T> val;
    Tensor<T> grad;  // allocated lazily by backward()
    std::function<void(Tape&)> back;
  };

  // When set, every op asserts finite outputs (debug aid; off by default).
  bool check_finite = false;

  const Tensor<T>& value(NodeId id) const { return nodes_[id].val; }
  Tensor<T>& grad(NodeId id) { return nodes_[id].grad; }
  size_t num_nodes() const { return nodes_.size(); }

  NodeId leaf(Tensor<T> v) { return push(std::move(v), nullptr); }

  // Parameter leaf; memoized so repeated use (e.g. GRU weights across an
  // unrolled sequence) shares one node. Backward accumulates into p.grad.
  NodeId watch(Parameter<T>& p) {
    auto it = watched_.find(&p);
    if (it != watched_.end()) return it->second;
    Parameter<T>* pp = &p;
    NodeId id = push(p.value, [pp](Tape& t) {
      Node& n = t.nodes_[t.watched_.at(pp)];
      for (size_t i = 0; i < n.grad.size(); ++i) pp->grad[i] += n.grad[i];
    });
    watched_.emplace(pp, id);
    return id;
  }

  NodeId add(NodeId a, NodeId b) {
    check_same(a, b, "add");
    Tensor<T> out = nodes_[a].val;
    const Tensor<T>& bv = nodes_[b].val;
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return push(std::move(out), [a, b](Tape& t) {
      NodeId self = t.cursor_;
      t.accumulate(a, t.nodes_[self].grad.v);
      t.accumulate(b, t.nodes_[self].grad.v);
    });
  }

  NodeId sub(NodeId a, NodeId b) {
    check_same(a, b, "sub");
    Tensor<T> out = nodes_[a].val;
    const Tensor<T>& bv = nodes_[b].val;
    for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return push(std::move(out), [a, b](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      Tensor<T>& gb = t.nodes_[b].grad;
      for (size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] -= g[i];
      }
    });
  }

  NodeId mul(NodeId a, NodeId b) {
    check_same(a, b, "mul");
    Tensor<T> out = nodes_[a].val;
    const Tensor<T>& bv = nodes_[b].val;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return push(std::move(out), [a, b](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av = t.nodes_[a].val;
      const Tensor<T>& bv2 = t.nodes_[b].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      Tensor<T>& gb = t.nodes_[b].grad;
      for (size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * bv2[i];
        gb[i] += g[i] * av[i];
      }
    });
  }

  // C (B,N) = A (B,M) * W (M,N)
  NodeId matmul(NodeId a, NodeId w) {
    const Tensor<T>& av = nodes_[a].val;
    const Tensor<T>& wv = nodes_[w].val;
    if (av.cols != wv.rows)
      throw UsageError("matmul: shapes " + av.shape_str() + " x " + wv.shape_str());
    Tensor<T> out(av.rows, wv.cols);
    Map(out.v.data(), out.rows, out.cols) =
        CMap(av.v.data(), av.rows, av.cols) * CMap(wv.v.data(), wv.rows, wv.cols);
    return push(std::move(out), [a, w](Tape& t) {
      Node& self = t.nodes_[t.cursor_];
      const Tensor<T>& g = self.grad;
      const Tensor<T>& av2 = t.nodes_[a].val;
      const Tensor<T>& wv2 = t.nodes_[w].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      Tensor<T>& gw = t.nodes_[w].grad;
      Map(ga.v.data(), ga.rows, ga.cols).noalias() +=
          CMap(g.v.data(), g.rows, g.cols) *
          CMap(wv2.v.data(), wv2.rows, wv2.cols).transpose();
      Map(gw.v.data(), gw.rows, gw.cols).noalias() +=
          CMap(av2.v.data(), av2.rows, av2.cols).transpose() *
          CMap(g.v.data(), g.rows, g.cols);
    });
  }

  // Broadcast a (1,N) row over a (B,N) batch.
  NodeId add_row(NodeId a, NodeId row) {
    const Tensor<T>& av = nodes_[a].val;
    const Tensor<T>& rv = nodes_[row].val;
    if (rv.rows != 1 || rv.cols != av.cols) throw UsageError("add_row: shape mismatch");
    Tensor<T> out = av;
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out(r, c) += rv[c];
    return push(std::move(out), [a, row](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      t.accumulate(a, g.v);
      Tensor<T>& gr = t.nodes_[row].grad;
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) gr[c] += g(r, c);
    });
  }

  NodeId mul_row(NodeId a, NodeId row) {
    const Tensor<T>& av = nodes_[a].val;
    const Tensor<T>& rv = nodes_[row].val;
    if (rv.rows != 1 || rv.cols != av.cols) throw UsageError("mul_row: shape mismatch");
    Tensor<T> out = av;
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out(r, c) *= rv[c];
    return push(std::move(out), [a, row](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av2 = t.nodes_[a].val;
      const Tensor<T>& rv2 = t.nodes_[row].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      Tensor<T>& gr = t.nodes_[row].grad;
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
          ga(r, c) += g(r, c) * rv2[c];
          gr[c] += g(r, c) * av2(r, c);
        }
    });
  }

  NodeId scale(NodeId a, T s) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x *= s;
    return push(std::move(out), [a, s](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
    });
  }

  NodeId add_const(NodeId a, T c) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x += c;
    return push(std::move(out),
                [a](Tape& t) { t.accumulate(a, t.nodes_[t.cursor_].grad.v); });
  }

  NodeId relu(NodeId a) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x = x > T(0) ? x : T(0);
    return push(std::move(out), [a](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av = t.nodes_[a].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i)
        if (av[i] > T(0)) ga[i] += g[i];
    });
  }

  NodeId tanh_(NodeId a) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x = std::tanh(x);
    return push(std::move(out), [a](Tape& t) {
      NodeId self = t.cursor_;
      const Tensor<T>& g = t.nodes_[self].grad;
      const Tensor<T>& y = t.nodes_[self].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (T(1) - y[i] * y[i]);
    });
  }

  NodeId sigmoid_(NodeId a) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x = T(1) / (T(1) + std::exp(-x));
    return push(std::move(out), [a](Tape& t) {
      NodeId self = t.cursor_;
      const Tensor<T>& g = t.nodes_[self].grad;
      const Tensor<T>& y = t.nodes_[self].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
    });
  }

  NodeId exp_(NodeId a) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x = std::exp(x);
    return push(std::move(out), [a](Tape& t) {
      NodeId self = t.cursor_;
      const Tensor<T>& g = t.nodes_[self].grad;
      const Tensor<T>& y = t.nodes_[self].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    });
  }

  NodeId square(NodeId a) {
    Tensor<T> out = nodes_[a].val;
    for (T& x : out.v) x = x * x;
    return push(std::move(out), [a](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av = t.nodes_[a].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * T(2) * av[i];
    });
  }

  // Elementwise min; gradient follows the selected branch (ties go to a).
  NodeId min_(NodeId a, NodeId b) {
    check_same(a, b, "min");
    const Tensor<T>& av = nodes_[a].val;
    const Tensor<T>& bv = nodes_[b].val;
    Tensor<T> out = av;
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(av[i], bv[i]);
    return push(std::move(out), [a, b](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av2 = t.nodes_[a].val;
      const Tensor<T>& bv2 = t.nodes_[b].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      Tensor<T>& gb = t.nodes_[b].grad;
      for (size_t i = 0; i < g.size(); ++i) {
        if (av2[i] <= bv2[i]) ga[i] += g[i];
        else gb[i] += g[i];
      }
    });
  }

  // Clamp to [lo, hi]; zero gradient outside the interval.
  NodeId clamp_const(NodeId a, T lo, T hi) {
    const Tensor<T>& av = nodes_[a].val;
    Tensor<T> out = av;
    for (T& x : out.v) x = std::clamp(x, lo, hi);
    return push(std::move(out), [a, lo, hi](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av2 = t.nodes_[a].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i)
        if (av2[i] >= lo && av2[i] <= hi) ga[i] += g[i];
    });
  }

  // max(a, floor) with per-coefficient floors; subgradient passes where a wins.
  NodeId clamp_min_coeff(NodeId a, Tensor<T> floor) {
    const Tensor<T>& av = nodes_[a].val;
    if (!av.same_shape(floor)) throw UsageError("clamp_min_coeff: shape mismatch");
    Tensor<T> out = av;
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], floor[i]);
    auto fl = std::make_shared<Tensor<T>>(std::move(floor));
    return push(std::move(out), [a, fl](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      const Tensor<T>& av2 = t.nodes_[a].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < g.size(); ++i)
        if (av2[i] >= (*fl)[i]) ga[i] += g[i];
    });
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw UsageError("concat_cols: empty");
    int rows = nodes_[parts[0]].val.rows;
    int cols = 0;
    for (NodeId p : parts) {
      if (nodes_[p].val.rows != rows) throw UsageError("concat_cols: row mismatch");
      cols += nodes_[p].val.cols;
    }
    Tensor<T> out(rows, cols);
    int off = 0;
    for (NodeId p : parts) {
      const Tensor<T>& pv = nodes_[p].val;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < pv.cols; ++c) out(r, off + c) = pv(r, c);
      off += pv.cols;
    }
    auto ps = std::make_shared<std::vector<NodeId>>(parts);
    return push(std::move(out), [ps](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      int off2 = 0;
      for (NodeId p : *ps) {
        Tensor<T>& gp = t.nodes_[p].grad;
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < gp.cols; ++c) gp(r, c) += g(r, off2 + c);
        off2 += gp.cols;
      }
    });
  }

  NodeId slice_cols(NodeId a, int lo, int hi) {
    const Tensor<T>& av = nodes_[a].val;
    if (lo < 0 || hi > av.cols || lo >= hi) throw UsageError("slice_cols: bad range");
    Tensor<T> out(av.rows, hi - lo);
    for (int r = 0; r < av.rows; ++r)
      for (int c = lo; c < hi; ++c) out(r, c - lo) = av(r, c);
    return push(std::move(out), [a, lo](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) ga(r, lo + c) += g(r, c);
    });
  }

  // (B,N) -> (B,1)
  NodeId rowsum(NodeId a) {
    const Tensor<T>& av = nodes_[a].val;
    Tensor<T> out(av.rows, 1);
    for (int r = 0; r < av.rows; ++r) {
      T s = 0;
      for (int c = 0; c < av.cols; ++c) s += av(r, c);
      out(r, 0) = s;
    }
    return push(std::move(out), [a](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < ga.rows; ++r)
        for (int c = 0; c < ga.cols; ++c) ga(r, c) += g(r, 0);
    });
  }

  // (B,1) -> (B,N), copies the column.
  NodeId broadcast_cols(NodeId a, int n) {
    const Tensor<T>& av = nodes_[a].val;
    if (av.cols != 1) throw UsageError("broadcast_cols: input must be (B,1)");
    Tensor<T> out(av.rows, n);
    for (int r = 0; r < av.rows; ++r)
      for (int c = 0; c < n; ++c) out(r, c) = av(r, 0);
    return push(std::move(out), [a](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) ga(r, 0) += g(r, c);
    });
  }

  NodeId sum_all(NodeId a) {
    const Tensor<T>& av = nodes_[a].val;
    T s = 0;
    for (T x : av.v) s += x;
    return push(Tensor<T>::scalar(s), [a](Tape& t) {
      T g = t.nodes_[t.cursor_].grad[0];
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }

  // Scalar = sum_i a_i * w_i with constant weights (masked/weighted means).
  NodeId weighted_sum(NodeId a, Tensor<T> weights) {
    const Tensor<T>& av = nodes_[a].val;
    if (!av.same_shape(weights)) throw UsageError("weighted_sum: shape mismatch");
    T s = 0;
    for (size_t i = 0; i < av.size(); ++i) s += av[i] * weights[i];
    auto w = std::make_shared<Tensor<T>>(std::move(weights));
    return push(Tensor<T>::scalar(s), [a, w](Tape& t) {
      T g = t.nodes_[t.cursor_].grad[0];
      Tensor<T>& ga = t.nodes_[a].grad;
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g * (*w)[i];
    });
  }

  // Multiply each row by a constant per-row factor (done masks, validity).
  NodeId scale_rows(NodeId a, Tensor<T> factors) {
    const Tensor<T>& av = nodes_[a].val;
    if (factors.rows != av.rows || factors.cols != 1)
      throw UsageError("scale_rows: factors must be (B,1)");
    Tensor<T> out = av;
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out(r, c) *= factors(r, 0);
    auto f = std::make_shared<Tensor<T>>(std::move(factors));
    return push(std::move(out), [a, f](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) ga(r, c) += g(r, c) * (*f)(r, 0);
    });
  }

  // Row-wise log-softmax, stabilized by max subtraction.
  NodeId log_softmax_rows(NodeId a) {
    const Tensor<T>& av = nodes_[a].val;
    Tensor<T> out = av;
    for (int r = 0; r < av.rows; ++r) {
      T mx = av(r, 0);
      for (int c = 1; c < av.cols; ++c) mx = std::max(mx, av(r, c));
      T lse = 0;
      for (int c = 0; c < av.cols; ++c) lse += std::exp(av(r, c) - mx);
      lse = mx + std::log(lse);
      for (int c = 0; c < av.cols; ++c) out(r, c) = av(r, c) - lse;
    }
    return push(std::move(out), [a](Tape& t) {
      NodeId self = t.cursor_;
      const Tensor<T>& g = t.nodes_[self].grad;
      const Tensor<T>& y = t.nodes_[self].val;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < g.rows; ++r) {
        T gsum = 0;
        for (int c = 0; c < g.cols; ++c) gsum += g(r, c);
        for (int c = 0; c < g.cols; ++c)
          ga(r, c) += g(r, c) - std::exp(y(r, c)) * gsum;
      }
    });
  }

  // Pick one column per row: (B,N) -> (B,1).
  NodeId gather_cols(NodeId a, std::vector<int> idx) {
    const Tensor<T>& av = nodes_[a].val;
    if (static_cast<int>(idx.size()) != av.rows)
      throw UsageError("gather_cols: index count != rows");
    Tensor<T> out(av.rows, 1);
    for (int r = 0; r < av.rows; ++r) {
      if (idx[r] < 0 || idx[r] >= av.cols) throw UsageError("gather_cols: index range");
      out(r, 0) = av(r, idx[r]);
    }
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    return push(std::move(out), [a, ix](Tape& t) {
      const Tensor<T>& g = t.nodes_[t.cursor_].grad;
      Tensor<T>& ga = t.nodes_[a].grad;
      for (int r = 0; r < g.rows; ++r) ga(r, (*ix)[r]) += g(r, 0);
    });
  }

  // 2D convolution, VALID padding. x rows are (C,H,W) flattened channel-major,
  // w is (OC, C*K*K), bias (1,OC). Output rows are (OC,OH,OW) flattened.
  NodeId conv2d(NodeId x, NodeId w, NodeId bias, int C, int H, int W, int K, int stride) {
    const Tensor<T>& xv = nodes_[x].val;
    const Tensor<T>& wv = nodes_[w].val;
    const Tensor<T>& bv = nodes_[bias].val;
    if (xv.cols != C * H * W) throw UsageError("conv2d: input cols != C*H*W");
    if (H < K || W < K) throw UsageError("conv2d: spatial size smaller than kernel");
    const int OC = wv.rows;
    if (wv.cols != C * K * K) throw UsageError("conv2d: weight cols != C*K*K");
    if (bv.rows != 1 || bv.cols != OC) throw UsageError("conv2d: bias shape");
    const int OH = (H - K) / stride + 1;
    const int OW = (W - K) / stride + 1;
    const int P = OH * OW;
    const int CKK = C * K * K;

    Tensor<T> out(xv.rows, OC * P);
    Mat col(CKK, P);
    for (int b = 0; b < xv.rows; ++b) {
      im2col(&xv.v[static_cast<size_t>(b) * xv.cols], col, C, H, W, K, stride, OH, OW);
      Map y(&out.v[static_cast<size_t>(b) * out.cols], OC, P);
      y.noalias() = CMap(wv.v.data(), OC, CKK) * col;
      for (int oc = 0; oc < OC; ++oc) y.row(oc).array() += bv[oc];
    }
    auto dims = std::make_shared<std::array<int, 7>>(
        std::array<int, 7>{C, H, W, K, stride, OH, OW});
    return push(std::move(out), [x, w, bias, dims](Tape& t) {
      auto [C2, H2, W2, K2, st, OH2, OW2] = *dims;
      const int P2 = OH2 * OW2;
      const int CKK2 = C2 * K2 * K2;
      NodeId self = t.cursor_;
      const Tensor<T>& g = t.nodes_[self].grad;
      const Tensor<T>& xv2 = t.nodes_[x].val;
      const Tensor<T>& wv2 = t.nodes_[w].val;
      Tensor<T>& gx = t.nodes_[x].grad;
      Tensor<T>& gw = t.nodes_[w].grad;
      Tensor<T>& gb = t.nodes_[bias].grad;
      const int OC2 = wv2.rows;
      Mat col(CKK2, P2), dcol(CKK2, P2);
      for (int b = 0; b < xv2.rows; ++b) {
        im2col(&xv2.v[static_cast<size_t>(b) * xv2.cols], col, C2, H2, W2, K2, st, OH2, OW2);
        CMap dy(&g.v[static_cast<size_t>(b) * g.cols], OC2, P2);
        Map(gw.v.data(), OC2, CKK2).noalias() += dy * col.transpose();
        for (int oc = 0; oc < OC2; ++oc) gb[oc] += dy.row(oc).sum();
        dcol.noalias() = CMap(wv2.v.data(), OC2, CKK2).transpose() * dy;
        col2im(dcol, &gx.v[static_cast<size_t>(b) * gx.cols], C2, H2, W2, K2, st, OH2, OW2);
      }
    });
  }

  // Seeds d(loss)=1 and runs every recorded closure in reverse order.
  void backward(NodeId loss) {
    const Tensor<T>& lv = nodes_[loss].val;
    if (lv.rows != 1 || lv.cols != 1) throw UsageError("backward: loss must be scalar");
    for (Node& n : nodes_) {
      n.grad = Tensor<T>(n.val.rows, n.val.cols);
    }
    nodes_[loss].grad[0] = T(1);
    for (cursor_ = loss; cursor_ >= 0; --cursor_) {
      if (nodes_[cursor_].back) nodes_[cursor_].back(*this);
    }
  }

 private:
  std::vector<Node> nodes_;
  std::unordered_map<const void*, NodeId> watched_;
  NodeId cursor_ = -1;  // node whose closure is currently running

  NodeId push(Tensor<T> val, std::function<void(Tape&)> back) {
    if (check_finite && !val.all_finite())
      throw UsageError("tape: non-finite value produced at node " +
                       std::to_string(nodes_.size()));
    nodes_.push_back(Node{std::move(val), Tensor<T>(), std::move(back)});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void check_same(NodeId a, NodeId b, const char* op) const {
    if (!nodes_[a].val.same_shape(nodes_[b].val))
      throw UsageError(std::string(op) + ": shape mismatch " +
                       nodes_[a].val.shape_str() + " vs " + nodes_[b].val.shape_str());
  }

  void accumulate(NodeId a, const std::vector<T>& g) {
    Tensor<T>& ga = nodes_[a].grad;
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  }

  static void im2col(const T* x, Mat& col, int C, int H, int W, int K, int stride,
                     int OH, int OW) {
    for (int c = 0; c < C; ++c)
      for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) {
          int row = (c * K + ky) * K + kx;
          for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
              col(row, oy * OW + ox) =
                  x[(c * H + oy * stride + ky) * W + ox * stride + kx];
        }
  }

  static void col2im(const Mat& dcol, T* dx, int C, int H, int W, int K, int stride,
                     int OH, int OW) {
    for (int c = 0; c < C; ++c)
      for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) {
          int row = (c * K + ky) * K + kx;
          for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
              dx[(c * H + oy * stride + ky) * W + ox * stride + kx] +=
                  dcol(row, oy * OW + ox);
        }
  }
};

}  // namespace hrl4in::nn
