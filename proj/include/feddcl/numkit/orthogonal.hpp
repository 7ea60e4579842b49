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

#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/qr.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::numkit {

/// Haar-distributed k x k orthogonal matrix.
///
/// A k x k standard-Gaussian draw (row-major fill order) is QR-factored and
/// Q's columns are sign-corrected so that diag(R) > 0.
inline Mat random_orthogonal(std::size_t k, RngStream& rng) {
  if (k == 0) throw ParameterError("random_orthogonal: k must be at least 1");
  Mat g(k, k);
  for (double& x : g.data()) x = rng.normal();
  HouseholderQr qr = qr_decompose(g, false);
  Mat q = thin_q(qr);
  for (std::size_t j = 0; j < k; ++j) {
    if (qr.r(j, j) < 0.0)
      for (std::size_t i = 0; i < k; ++i) q(i, j) = -q(i, j);
  }
  return q;
}

}  // namespace feddcl::numkit
