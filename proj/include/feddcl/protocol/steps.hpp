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
#include <span>
#include <string>
#include <vector>

#include "feddcl/datahub/anchor.hpp"
#include "feddcl/numkit.hpp"

namespace feddcl::protocol {

using numkit::Mat;

/// Masks whose condition number exceeds this are redrawn.
inline constexpr double kMaxMaskCondition = 1e12;
/// Redraws after the first mask draw.
inline constexpr int kMaskRetries = 3;

/// One institution's private reducer f(X) = (X - 1 mean^T) f_mat and its
/// outputs. mean and f_mat stay with the user.
struct UserMapping {
  std::size_t group = 0;
  std::size_t institution = 0;
  std::vector<double> mean;
  Mat f_mat;  // m x m_tilde
  Mat x_tilde;
  Mat a_tilde;
  std::uint64_t map_seed = 0;
  bool pca_degenerate = false;

  std::size_t width() const noexcept { return f_mat.cols(); }

  Mat apply(const Mat& x) const { return numkit::matmul(numkit::subtract_row_vector(x, mean), f_mat); }
};

/// Mapping from an explicit affine reducer; used for linear (mean-free) maps.
inline UserMapping make_mapping(std::size_t i, std::size_t j, const Mat& x, const Mat& anchor,
                                std::vector<double> mean, Mat f_mat, std::uint64_t seed) {
  if (x.cols() != anchor.cols() || f_mat.rows() != x.cols() || mean.size() != x.cols())
    throw ParameterError("make_mapping: feature counts of data, anchor and map differ");
  UserMapping u{i, j, std::move(mean), std::move(f_mat), {}, {}, seed, false};
  u.x_tilde = u.apply(x);
  u.a_tilde = u.apply(anchor);
  return u;
}

/// PCA basis of the local block times a random orthogonal rotation.
inline UserMapping user_build_intermediate(std::size_t i, std::size_t j, const Mat& x,
                                           const datahub::AnchorSet& anchor, std::size_t m_tilde,
                                           std::uint64_t seed) {
  if (anchor.a.cols() != x.cols())
    throw ParameterError("user_build_intermediate: anchor has " + std::to_string(anchor.a.cols()) +
                         " features, data has " + std::to_string(x.cols()));
  if (m_tilde < 1 || m_tilde > std::min(x.rows(), x.cols()))
    throw ParameterError("user_build_intermediate: m_tilde=" + std::to_string(m_tilde) + " exceeds min(n_ij, m) = " +
                         std::to_string(std::min(x.rows(), x.cols())));
  auto pca = numkit::pca_basis(x, m_tilde, true);
  numkit::RngStream rng(seed);
  Mat rot = numkit::random_orthogonal(m_tilde, rng);
  auto u = make_mapping(i, j, x, anchor.a, pca.mean, numkit::matmul(pca.w, rot), seed);
  u.pca_degenerate = pca.degenerate;
  return u;
}

/// Index of a uniformly chosen entry of `widths` equal to `target`.
inline std::size_t choose_donor(std::span<const std::size_t> widths, std::size_t target, std::uint64_t seed,
                                const std::string& field) {
  std::vector<std::size_t> ok;
  for (std::size_t k = 0; k < widths.size(); ++k)
    if (widths[k] == target) ok.push_back(k);
  if (ok.empty())
    throw ConfigError(field, "no donor with width " + std::to_string(target) +
                                 " (the mask must be square, so some block must have exactly that many columns)");
  numkit::RngStream rng(seed);
  return ok[rng.below(ok.size())];
}

namespace detail {

struct Mask {
  Mat c;
  Mat e;
  std::uint64_t seed = 0;
  int attempts = 0;
  double condition = 0.0;
};

// c = diag(sigma) * (v rows [off, off + w))^T * E, E random orthogonal,
// redrawn with seed + 1, seed + 2, ... while ill-conditioned.
inline Mask draw_mask(const numkit::SvdFactors& f, std::size_t off, std::size_t w, std::uint64_t seed,
                      const std::string& role) {
  const std::size_t k = f.sigma.size();
  Mat sv(k, w);  // diag(sigma) * V_block^T
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < w; ++b) sv(a, b) = f.sigma[a] * f.v(off + b, a);
  Mask m;
  for (int attempt = 0; attempt <= kMaskRetries; ++attempt) {
    numkit::RngStream rng(seed + static_cast<std::uint64_t>(attempt));
    m.e = numkit::random_orthogonal(w, rng);
    m.c = numkit::matmul(sv, m.e);
    m.seed = seed + static_cast<std::uint64_t>(attempt);
    m.attempts = attempt + 1;
    m.condition = numkit::condition_number(m.c);
    if (m.condition <= kMaxMaskCondition) return m;
  }
  throw NumericError(role + ": mask condition number " + std::to_string(m.condition) + " above limit after " +
                     std::to_string(kMaskRetries) + " redraws");
}

inline std::vector<std::size_t> column_offsets(std::span<const Mat> blocks) {
  std::vector<std::size_t> off{0};
  for (const auto& b : blocks) off.push_back(off.back() + b.cols());
  return off;
}

}  // namespace detail

/// Result of a group server's truncated SVD of its concatenated anchor
/// representations, and the masked basis it shares.
struct GroupBasis {
  std::size_t group = 0;
  Mat u;
  std::vector<double> sigma;
  Mat v;
  std::vector<std::size_t> block_offsets;  // column split of v's rows by institution
  Mat c1;
  Mat b_tilde;
  std::size_t donor = 0;
  std::uint64_t e1_seed = 0;
  int mask_attempts = 0;
  double mask_condition = 0.0;
  std::vector<std::string> warnings;
};

/// Relative threshold under which a singular value counts as zero for the
/// rank warnings.
inline constexpr double kRankTolerance = 1e-10;

inline GroupBasis group_build_basis(std::size_t group, std::span<const Mat> a_tildes, std::size_t m_hat_i,
                                    std::uint64_t e1_seed, std::size_t donor) {
  if (a_tildes.empty()) throw ParameterError("group_build_basis: no institutions");
  if (donor >= a_tildes.size()) throw ParameterError("group_build_basis: donor index out of range");
  const std::string role = "group " + std::to_string(group + 1) + " anchor block";
  Mat cat = numkit::hcat(a_tildes);
  if (m_hat_i < 1 || m_hat_i > std::min(cat.rows(), cat.cols()))
    throw ConfigError("alignment.m_hat_group", "rank " + std::to_string(m_hat_i) + " outside [1, " +
                                                   std::to_string(std::min(cat.rows(), cat.cols())) + "] for " + role);
  if (a_tildes[donor].cols() != m_hat_i)
    throw ConfigError("alignment.m_hat_group", "donor institution " + std::to_string(donor + 1) + " of group " +
                                                   std::to_string(group + 1) + " has width " +
                                                   std::to_string(a_tildes[donor].cols()) + ", need " +
                                                   std::to_string(m_hat_i));
  auto f = numkit::truncated_svd(cat, m_hat_i, role);
  GroupBasis gb;
  gb.group = group;
  gb.block_offsets = detail::column_offsets(a_tildes);
  if (f.sigma.back() <= kRankTolerance * f.sigma.front())
    gb.warnings.push_back(role + " has numerical rank below " + std::to_string(m_hat_i));
  auto mask = detail::draw_mask(f, gb.block_offsets[donor], m_hat_i, e1_seed, role);
  gb.b_tilde = numkit::matmul(f.u, mask.c);
  gb.c1 = std::move(mask.c);
  gb.e1_seed = mask.seed;
  gb.mask_attempts = mask.attempts;
  gb.mask_condition = mask.condition;
  gb.donor = donor;
  gb.u = std::move(f.u);
  gb.sigma = std::move(f.sigma);
  gb.v = std::move(f.v);
  return gb;
}

/// The central server's fusion of the group bases into the target Z.
struct CentralTarget {
  Mat p;
  std::vector<double> d;
  Mat q;
  std::vector<std::size_t> block_offsets;
  Mat c2;
  Mat z;
  std::size_t donor = 0;
  std::uint64_t e2_seed = 0;
  int mask_attempts = 0;
  double mask_condition = 0.0;
  std::vector<std::string> warnings;
};

inline CentralTarget central_build_target(std::span<const Mat> b_tildes, std::size_t m_hat, std::uint64_t e2_seed,
                                          std::size_t donor, const std::string& role = "stacked group bases") {
  if (b_tildes.empty()) throw ParameterError("central_build_target: no group bases");
  if (donor >= b_tildes.size()) throw ParameterError("central_build_target: donor index out of range");
  Mat cat = numkit::hcat(b_tildes);
  if (m_hat < 1 || m_hat > std::min(cat.rows(), cat.cols()))
    throw ConfigError("alignment.m_hat", "rank " + std::to_string(m_hat) + " outside [1, " +
                                             std::to_string(std::min(cat.rows(), cat.cols())) + "]");
  if (b_tildes[donor].cols() != m_hat)
    throw ConfigError("alignment.m_hat", "donor block " + std::to_string(donor + 1) + " has width " +
                                             std::to_string(b_tildes[donor].cols()) + ", need " +
                                             std::to_string(m_hat));
  auto f = numkit::truncated_svd(cat, m_hat, role);
  CentralTarget ct;
  ct.block_offsets = detail::column_offsets(b_tildes);
  if (f.sigma.back() <= kRankTolerance * f.sigma.front())
    ct.warnings.push_back(role + " has numerical rank below " + std::to_string(m_hat));
  auto mask = detail::draw_mask(f, ct.block_offsets[donor], m_hat, e2_seed, role);
  ct.z = numkit::matmul(f.u, mask.c);
  ct.c2 = std::move(mask.c);
  ct.e2_seed = mask.seed;
  ct.mask_attempts = mask.attempts;
  ct.mask_condition = mask.condition;
  ct.donor = donor;
  ct.p = std::move(f.u);
  ct.d = std::move(f.sigma);
  ct.q = std::move(f.v);
  return ct;
}

struct InstitutionAlignment {
  Mat g;
  double residual = 0.0;
  bool rank_deficient = false;
  Mat x_hat;
};

/// Per-institution G = argmin ||A_tilde G - Z|| and X_hat = X_tilde G, plus
/// the group's stacked X_hat in ascending institution order.
struct AlignmentBundle {
  std::vector<InstitutionAlignment> institutions;
  Mat x_hat;

  double max_residual() const {
    double r = 0.0;
    for (const auto& a : institutions) r = std::max(r, a.residual);
    return r;
  }
};

inline AlignmentBundle group_compute_alignment(std::span<const Mat> a_tildes, const Mat& z,
                                               std::span<const Mat> x_tildes) {
  if (a_tildes.size() != x_tildes.size())
    throw ParameterError("group_compute_alignment: anchor and data block counts differ");
  AlignmentBundle out;
  std::vector<Mat> blocks;
  for (std::size_t j = 0; j < a_tildes.size(); ++j) {
    if (a_tildes[j].rows() != z.rows())
      throw ParameterError("group_compute_alignment: target has " + std::to_string(z.rows()) + " rows, anchor " +
                           std::to_string(a_tildes[j].rows()));
    auto ls = numkit::lstsq_multi(a_tildes[j], z);
    InstitutionAlignment ia{ls.solution, ls.residual, ls.rank_deficient, numkit::matmul(x_tildes[j], ls.solution)};
    blocks.push_back(ia.x_hat);
    out.institutions.push_back(std::move(ia));
  }
  out.x_hat = numkit::vcat(blocks);
  return out;
}

}  // namespace feddcl::protocol
