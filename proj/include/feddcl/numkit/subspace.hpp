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
#include <cmath>
#include <vector>

#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/qr.hpp"
#include "feddcl/numkit/svd.hpp"

namespace feddcl::numkit {

/// Principal angles (radians, ascending) between range(a) and range(b).
///
/// Both inputs must have full column rank and the same column count. The
/// angles come from the sines, i.e. singular values of (I - Qa Qa^T) Qb,
/// which keeps tiny angles accurate where an arccos of cosines would not.
inline std::vector<double> principal_angles(const Mat& a, const Mat& b) {
  require_valid(a, "principal_angles(a)");
  require_valid(b, "principal_angles(b)");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ParameterError("principal_angles: shapes " + shape_str(a) + " and " + shape_str(b));
  Mat qa = orthonormal_basis(a);
  Mat qb = orthonormal_basis(b);
  Mat r = qb - matmul(qa, matmul_tn(qa, qb));
  std::vector<double> sines = singular_values(r, "principal angles");
  std::vector<double> angles;
  angles.reserve(sines.size());
  for (double s : sines) angles.push_back(std::asin(std::min(1.0, s)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

inline double max_principal_angle(const Mat& a, const Mat& b) {
  auto ang = principal_angles(a, b);
  return ang.empty() ? 0.0 : ang.back();
}

}  // namespace feddcl::numkit
