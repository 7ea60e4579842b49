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

#include <vector>

#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/svd.hpp"

namespace feddcl::numkit {

struct PcaBasis {
  std::vector<double> mean;  // zeros when not centered
  Mat w;                     // m x k, orthonormal columns
  std::vector<double> sigma;
  /// Some requested component carries (numerically) zero variance; the
  /// corresponding columns of w are an arbitrary orthonormal completion.
  bool degenerate = false;
};

/// Top-k principal directions of x (rows are samples).
inline PcaBasis pca_basis(const Mat& x, std::size_t k, bool center) {
  require_valid(x, "pca_basis(x)");
  const std::size_t n = x.rows(), m = x.cols();
  if (k < 1 || k > std::min(n, m))
    throw ParameterError("pca_basis: k=" + std::to_string(k) + " must be in [1, " +
                         std::to_string(std::min(n, m)) + "]");
  if (center && n < 2) throw ParameterError("pca_basis: centering needs at least 2 rows");

  PcaBasis out;
  out.mean = center ? column_means(x) : std::vector<double>(m, 0.0);
  Mat xc = center ? subtract_row_vector(x, out.mean) : x;
  SvdFactors f = truncated_svd(xc, k, "pca data");
  out.w = std::move(f.v);
  out.sigma = std::move(f.sigma);
  const double scale = std::max(max_abs(x), 1.0);
  out.degenerate = out.sigma.back() <= 1e-12 * scale * std::sqrt(static_cast<double>(n));
  return out;
}

}  // namespace feddcl::numkit
