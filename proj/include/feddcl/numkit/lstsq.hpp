/*
 * Copyright 2026 The FedDCL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/qr.hpp"

namespace feddcl::numkit {

struct LstsqResult {
  Mat solution;          // p x q
  double residual = 0.0;  // ||a * solution - b||_F
  std::size_t rank = 0;
  bool rank_deficient = false;
};

/// Minimum-norm solution of min_G ||a G - b||_F for every column of b.
///
/// Uses a column-pivoted QR followed by a complete orthogonal decomposition
/// of the leading rank rows, so rank-deficient systems return the
/// pseudoinverse solution instead of failing.
inline LstsqResult lstsq_multi(const Mat& a, const Mat& b) {
  require_valid(a, "lstsq_multi(a)");
  require_valid(b, "lstsq_multi(b)");
  if (a.rows() != b.rows())
    throw ParameterError("lstsq_multi: a is " + shape_str(a) + " but b is " + shape_str(b));
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();

  HouseholderQr qr = qr_decompose(a, true);
  const double rel_tol = static_cast<double>(std::max(n, p)) * DBL_EPSILON;
  const std::size_t rank = qr.numerical_rank(rel_tol);

  LstsqResult res;
  res.rank = rank;
  res.rank_deficient = rank < p;
  Mat x_perm(p, q);
  if (rank > 0) {
    Mat qtb = apply_qt(qr, b).row_block(0, rank);  // rank x q
    // R_top = [R11 R12] (rank x p). R_top^T = Z T with Z p x rank orthonormal,
    // T upper triangular, so x = Z T^{-T} c is the minimum-norm solution.
    Mat rtop_t = qr.r.row_block(0, rank).transpose();
    HouseholderQr cod = qr_decompose(rtop_t, false);
    Mat z = thin_q(cod);
    const Mat& t = cod.r;  // rank x rank
    Mat y(rank, q);
    for (std::size_t c = 0; c < q; ++c) {
      for (std::size_t i = 0; i < rank; ++i) {
        double s = qtb(i, c);
        for (std::size_t j = 0; j < i; ++j) s -= t(j, i) * y(j, c);
        y(i, c) = s / t(i, i);
      }
    }
    x_perm = matmul(z, y);
  }
  res.solution = Mat(p, q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t c = 0; c < q; ++c) res.solution(qr.perm[i], c) = x_perm(i, c);
  res.residual = frobenius_norm(matmul(a, res.solution) - b);
  return res;
}

}  // namespace feddcl::numkit
