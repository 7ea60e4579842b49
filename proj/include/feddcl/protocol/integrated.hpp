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

#include "feddcl/nnet.hpp"
#include "feddcl/protocol/steps.hpp"

namespace feddcl::protocol {

/// t(X) = h(((X - 1 mean^T) f_mat) g), held by user (group, institution).
struct IntegratedModel {
  std::size_t group = 0;
  std::size_t institution = 0;
  std::vector<double> mean;
  Mat f_mat;
  Mat g;
  nnet::MlpModel h;

  Mat collaboration(const Mat& x) const {
    return numkit::matmul(numkit::matmul(numkit::subtract_row_vector(x, mean), f_mat), g);
  }
  Mat predict(const Mat& x) const { return nnet::forward(h, collaboration(x)); }
};

}  // namespace feddcl::protocol
