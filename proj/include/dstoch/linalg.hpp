#pragma once

#include "dstoch/types.hpp"

#include <vector>

namespace dstoch {

// W (x) I_d as a dense Nd x Nd matrix.
inline Matrix kron_with_identity(const Ref<const Matrix>& w, int d) {
  const int n = static_cast<int>(w.rows());
  Matrix out = Matrix::Zero(static_cast<long>(n) * d, static_cast<long>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0)
        out.block(static_cast<long>(i) * d, static_cast<long>(j) * d, d, d) =
            w(i, j) * Matrix::Identity(d, d);
  return out;
}

inline Matrix block_diag(const std::vector<Matrix>& blocks) {
  long total = 0;
  for (const auto& b : blocks) total += b.rows();
  Matrix out = Matrix::Zero(total, total);
  long at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

// (W (x) I_d) x without forming the Kronecker product.
inline Vector apply_mixing(const Ref<const Matrix>& w, int d,
                           const Ref<const Vector>& x) {
  const int n = static_cast<int>(w.rows());
  Vector out(x.size());
  Eigen::Map<const Matrix> xm(x.data(), d, n);
  Eigen::Map<Matrix> om(out.data(), d, n);
  om.noalias() = xm * w;
  return out;
}

}  // namespace dstoch
