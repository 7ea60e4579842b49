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
#include <numeric>
#include <string>
#include <vector>

#include "feddcl/datahub/table.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::datahub {

/// Rows held by institution (i, j).
struct InstitutionBlock {
  Mat x;
  Mat y;
  std::vector<std::size_t> source_rows;

  std::size_t rows() const noexcept { return x.rows(); }
};

/// Groups of institution blocks plus the shared holdout (test) pool.
struct PartitionedDataset {
  std::vector<std::vector<InstitutionBlock>> groups;
  LabeledTable holdout;
  Task task;
  std::uint64_t partition_seed = 0;
  std::size_t source_rows = 0;

  std::size_t num_groups() const noexcept { return groups.size(); }
  std::size_t num_institutions() const {
    std::size_t c = 0;
    for (const auto& g : groups) c += g.size();
    return c;
  }
  std::size_t num_features() const { return groups.at(0).at(0).x.cols(); }
  std::size_t target_dim() const { return groups.at(0).at(0).y.cols(); }
  std::size_t group_rows(std::size_t i) const {
    std::size_t n = 0;
    for (const auto& b : groups.at(i)) n += b.rows();
    return n;
  }

  /// All training blocks stacked in (group, institution) order.
  LabeledTable pooled_training() const {
    std::vector<Mat> xs, ys;
    for (const auto& g : groups)
      for (const auto& b : g) {
        xs.push_back(b.x);
        ys.push_back(b.y);
      }
    return {numkit::vcat(xs), numkit::vcat(ys), task, holdout.feature_names, holdout.class_labels};
  }

  /// FNV-1a over seed, block memberships and holdout membership. Used to
  /// assert that every method of a run consumed the same split.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xff;
        h *= 1099511628211ULL;
      }
    };
    mix(partition_seed);
    for (const auto& g : groups) {
      mix(0xabcdef);
      for (const auto& b : g) {
        mix(b.rows());
        for (std::size_t r : b.source_rows) mix(r);
      }
    }
    mix(holdout.rows());
    return h;
  }
};

/// Shape of an IID split: d groups, groups[i] institutions each, with
/// rows[i][j] samples (or `rows_per_institution` for all when rows is empty).
struct PartitionSpec {
  std::vector<std::size_t> institutions_per_group;
  std::size_t rows_per_institution = 0;
  std::vector<std::vector<std::size_t>> rows;
  /// Cap on the holdout size; 0 keeps every leftover row.
  std::size_t holdout_limit = 0;

  std::size_t block_rows(std::size_t i, std::size_t j) const {
    return rows.empty() ? rows_per_institution : rows.at(i).at(j);
  }
};

/// Uniform shuffle by seed, then contiguous assignment in (group,
/// institution) order. Leftover rows form the holdout pool.
inline PartitionedDataset partition_iid(const LabeledTable& table, const PartitionSpec& spec,
                                        std::uint64_t seed) {
  table.validate();
  const std::size_t d = spec.institutions_per_group.size();
  if (d == 0) throw ParameterError("partition_iid: need at least one group");
  if (!spec.rows.empty() && spec.rows.size() != d)
    throw ParameterError("partition_iid: per-block row table does not match group count");
  std::size_t required = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t c = spec.institutions_per_group[i];
    if (c == 0) throw ParameterError("partition_iid: group " + std::to_string(i) + " is empty");
    if (!spec.rows.empty() && spec.rows[i].size() != c)
      throw ParameterError("partition_iid: row table for group " + std::to_string(i) +
                           " has wrong length");
    for (std::size_t j = 0; j < c; ++j) {
      if (spec.block_rows(i, j) == 0)
        throw ParameterError("partition_iid: institution block with zero rows");
      required += spec.block_rows(i, j);
    }
  }
  if (required > table.rows())
    throw ParameterError("partition_iid: blocks need " + std::to_string(required) +
                         " rows but the table has " + std::to_string(table.rows()));

  std::vector<std::size_t> perm(table.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  numkit::RngStream rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));

  PartitionedDataset out;
  out.task = table.task;
  out.partition_seed = seed;
  out.source_rows = table.rows();
  std::size_t cursor = 0;
  out.groups.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < spec.institutions_per_group[i]; ++j) {
      const std::size_t nij = spec.block_rows(i, j);
      std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(cursor),
                                   perm.begin() + static_cast<std::ptrdiff_t>(cursor + nij));
      cursor += nij;
      out.groups[i].push_back({table.x.select_rows(idx), table.y.select_rows(idx), std::move(idx)});
    }
  }
  std::size_t left = table.rows() - cursor;
  if (spec.holdout_limit > 0) left = std::min(left, spec.holdout_limit);
  std::vector<std::size_t> hold(perm.begin() + static_cast<std::ptrdiff_t>(cursor),
                                perm.begin() + static_cast<std::ptrdiff_t>(cursor + left));
  out.holdout = table.select_rows(hold);
  return out;
}

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const FeatureRange&) const = default;
};

/// Global per-feature (min, max) over every training block.
inline std::vector<FeatureRange> feature_ranges(const PartitionedDataset& parts) {
  if (parts.groups.empty() || parts.groups.front().empty())
    throw ParameterError("feature_ranges: no institution blocks");
  const std::size_t m = parts.num_features();
  std::vector<FeatureRange> r(m, {INFINITY, -INFINITY});
  for (const auto& g : parts.groups)
    for (const auto& b : g)
      for (std::size_t i = 0; i < b.rows(); ++i) {
        auto row = b.x.row(i);
        for (std::size_t t = 0; t < m; ++t) {
          r[t].min = std::min(r[t].min, row[t]);
          r[t].max = std::max(r[t].max, row[t]);
        }
      }
  return r;
}

}  // namespace feddcl::datahub
