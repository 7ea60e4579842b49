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

// Small partitioned datasets shared by the protocol tests.
#pragma once

#include <cmath>

#include "feddcl/datahub.hpp"
#include "oracles.hpp"

namespace fixture {

namespace dh = feddcl::datahub;
using feddcl::numkit::Mat;

/// Gaussian features, y = tanh(x . theta) (or the linear score when
/// `linear_target`), split IID into `groups` x `per_group` blocks.
inline dh::PartitionedDataset regression_parts(std::size_t groups, std::size_t per_group, std::size_t rows,
                                               std::size_t m, std::uint64_t seed, bool linear_target = false,
                                               std::size_t holdout = 200) {
  const std::size_t n = groups * per_group * rows + holdout;
  Mat x = oracle::gaussian(n, m, seed);
  Mat theta = oracle::gaussian(m, 1, seed + 1);
  Mat y = oracle::naive_matmul(x, theta);
  for (double& v : y.data()) v = linear_target ? v / std::sqrt(static_cast<double>(m)) : std::tanh(v / 2.0);
  dh::LabeledTable t{x, y, dh::Task::regression(), {}, {}};
  dh::PartitionSpec spec{std::vector<std::size_t>(groups, per_group), rows, {}, 0};
  return dh::partition_iid(t, spec, seed + 2);
}

}  // namespace fixture
