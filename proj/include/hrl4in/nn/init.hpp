#pragma once

#include <Eigen/Dense>
#include <random>

#include "hrl4in/nn/tensor.hpp"

namespace hrl4in::nn {

// Orthogonal initialization: QR of a Gaussian matrix, sign-fixed by the
// diagonal of R, scaled by `gain`.
template <typename T>
Tensor<T> orthogonal(int rows, int cols, double gain, std::mt19937_64& rng) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;
  Mat a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(r, c);
  Mat rmat = qr.matrixQR().topRows(c).template triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rmat(j, j) < 0) q.col(j) = -q.col(j);
  if (transpose) q = q.transpose().eval();

  Tensor<T> out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = static_cast<T>(gain * q(i, j));
  return out;
}

}  // namespace hrl4in::nn
