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

#include <cstdint>
#include <vector>

#include "feddcl/datahub/partition.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::datahub {

inline constexpr std::size_t kDefaultAnchorRows = 2000;

/// Shared pseudo-data. Every party regenerates the identical matrix from
/// (ranges, rows, seed), so no party has to transmit it.
struct AnchorSet {
  Mat a;  // r x m
  std::vector<FeatureRange> ranges;
  std::uint64_t seed = 0;

  std::size_t rows() const noexcept { return a.rows(); }
};

/// Entry (s, t) ~ Uniform[min_t, max_t], filled feature by feature.
inline AnchorSet generate_anchor(const std::vector<FeatureRange>& ranges, std::size_t r,
                                 std::uint64_t seed) {
  if (r == 0) throw ParameterError("generate_anchor: r must be at least 1");
  if (ranges.empty()) throw ParameterError("generate_anchor: no feature ranges");
  for (std::size_t t = 0; t < ranges.size(); ++t)
    if (!(ranges[t].min <= ranges[t].max))
      throw ParameterError("generate_anchor: feature " + std::to_string(t) + " has min > max");
  AnchorSet out{Mat(r, ranges.size()), ranges, seed};
  numkit::RngStream rng(seed);
  for (std::size_t t = 0; t < ranges.size(); ++t)
    for (std::size_t s = 0; s < r; ++s) out.a(s, t) = rng.uniform(ranges[t].min, ranges[t].max);
  return out;
}

}  // namespace feddcl::datahub
