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
#include <numeric>
#include <string>
#include <vector>

#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/qr.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::numkit {

/// Rank-k factors u (n x k), sigma (k, non-increasing), v (p x k).
struct SvdFactors {
  Mat u;
  std::vector<double> sigma;
  Mat v;
  std::size_t rank_requested = 0;

  /// u * diag(sigma) * v^T
  Mat reconstruct() const { return matmul_nt(scale_columns(u, sigma), v); }
};

/// Smaller dimension up to kJacobiDimLimit: one-sided Jacobi on the matrix
/// itself. Up to kDenseDimLimit: Householder QR, then one-sided Jacobi on
/// the square triangular factor. Beyond that: blocked subspace iteration.
inline constexpr std::size_t kJacobiDimLimit = 64;
inline constexpr std::size_t kDenseDimLimit = 512;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Extends `basis` (orthonormal vectors of length n) with unit vectors
// orthogonal to it, until it holds `target` vectors.
inline void complete_orthonormal(std::vector<std::vector<double>>& basis, std::size_t n,
                                 std::size_t target) {
  for (std::size_t cand = 0; basis.size() < target && cand < n; ++cand) {
    std::vector<double> e(n, 0.0);
    e[cand] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double s = dot(b, e);
        for (std::size_t i = 0; i < n; ++i) e[i] -= s * b[i];
      }
    const double nrm = norm2(e);
    if (nrm < 1e-8) continue;
    for (double& x : e) x /= nrm;
    basis.push_back(std::move(e));
  }
}

// One-sided (Hestenes) Jacobi on an n x p matrix with n >= p. Returns the
// full thin SVD, sigma sorted non-increasing.
inline SvdFactors one_sided_jacobi(const Mat& m, const std::string& role) {
  const std::size_t n = m.rows(), p = m.cols();
  auto w = to_columns(m);
  std::vector<std::vector<double>> v(p, std::vector<double>(p, 0.0));
  for (std::size_t j = 0; j < p; ++j) v[j][j] = 1.0;

  const double tol = static_cast<double>(std::max<std::size_t>(n, 8)) * DBL_EPSILON;
  constexpr int kMaxSweeps = 100;
  std::vector<double> sq(p);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    // Squared norms are refreshed each sweep and updated in closed form
    // after every rotation within it.
    for (std::size_t j = 0; j < p; ++j) sq[j] = dot(w[j], w[j]);
    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double alpha = sq[i];
        const double beta = sq[j];
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = dot(w[i], w[j]);
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        double* wi = w[i].data();
        double* wj = w[j].data();
        for (std::size_t r = 0; r < n; ++r) {
          const double a = wi[r], b = wj[r];
          wi[r] = c * a - s * b;
          wj[r] = s * a + c * b;
        }
        double* vi = v[i].data();
        double* vj = v[j].data();
        for (std::size_t r = 0; r < p; ++r) {
          const double a = vi[r], b = vj[r];
          vi[r] = c * a - s * b;
          vj[r] = s * a + c * b;
        }
        sq[i] = std::max(0.0, alpha - t * gamma);
        sq[j] = beta + t * gamma;
      }
    }
  }
  if (!converged)
    throw NumericError("truncated_svd(" + role + "): Jacobi sweeps did not converge");

  std::vector<double> norms(p);
  for (std::size_t j = 0; j < p; ++j) norms[j] = norm2(w[j]);
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  const double smax = norms[order[0]];
  const double zero_tol = smax * static_cast<double>(n) * DBL_EPSILON;
  std::vector<std::vector<double>> ucols;
  std::vector<std::size_t> missing;
  SvdFactors f;
  f.sigma.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t j = order[k];
    f.sigma[k] = norms[j];
    if (norms[j] > zero_tol && norms[j] > 0.0) {
      std::vector<double> u = w[j];
      for (double& x : u) x /= norms[j];
      ucols.push_back(std::move(u));
    } else {
      missing.push_back(k);
    }
  }
  // Null directions: keep the positional slots, fill with an orthonormal
  // completion of the non-null left vectors.
  const std::size_t nonnull = ucols.size();
  complete_orthonormal(ucols, n, p);
  f.u = Mat(n, p);
  f.v = Mat(p, p);
  std::size_t next_fill = nonnull;
  std::size_t next_real = 0;
  for (std::size_t k = 0; k < p; ++k) {
    const bool is_missing = std::find(missing.begin(), missing.end(), k) != missing.end();
    const auto& u = is_missing ? ucols[next_fill++] : ucols[next_real++];
    f.u.set_column(k, u);
    f.v.set_column(k, v[order[k]]);
    if (is_missing) f.sigma[k] = 0.0;
  }
  f.rank_requested = p;
  return f;
}

inline SvdFactors transpose_factors(SvdFactors f) {
  std::swap(f.u, f.v);
  return f;
}

inline SvdFactors truncate(SvdFactors f, std::size_t k) {
  if (f.sigma.size() > k) {
    f.u = f.u.col_block(0, k);
    f.v = f.v.col_block(0, k);
    f.sigma.resize(k);
  }
  f.rank_requested = k;
  return f;
}

// Full thin SVD for any shape via Jacobi on the taller orientation.
inline SvdFactors dense_svd(const Mat& m, const std::string& role) {
  if (m.rows() >= m.cols()) return one_sided_jacobi(m, role);
  return transpose_factors(one_sided_jacobi(m.transpose(), role));
}

// Tall m (n >= p): M = Q R, R^T = U_r S V_r^T, so M = (Q V_r) S U_r^T.
inline SvdFactors qr_jacobi(const Mat& m, std::size_t k, const std::string& role) {
  HouseholderQr qr = qr_decompose(m, false);
  SvdFactors small = one_sided_jacobi(qr.r.transpose(), role);
  SvdFactors f;
  f.u = apply_q(qr, small.v.col_block(0, k));
  f.v = small.u.col_block(0, k);
  f.sigma.assign(small.sigma.begin(), small.sigma.begin() + static_cast<std::ptrdiff_t>(k));
  f.rank_requested = k;
  return f;
}

// Blocked subspace iteration with Rayleigh-Ritz extraction. Converged when
// every requested triplet satisfies ||M v - sigma u|| <= tol * sigma_1.
inline SvdFactors subspace_iteration(const Mat& m, std::size_t k, const std::string& role) {
  const std::size_t n = m.rows(), p = m.cols();
  const std::size_t block = std::min(std::min(n, p), std::max(2 * k, k + 16));
  RngStream rng(derive_seed(0x73766473ULL, {n, p, k}));
  Mat omega(p, block);
  for (double& x : omega.data()) x = rng.normal();
  Mat q = orthonormal_basis(matmul(m, omega));

  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-11;
  for (int it = 0; it < kMaxIter; ++it) {
    if (it > 0) {
      Mat w = orthonormal_basis(matmul_tn(m, q));
      q = orthonormal_basis(matmul(m, w));
    }
    Mat b = matmul_tn(q, m);  // block x p
    SvdFactors small = one_sided_jacobi(b.transpose(), role);  // B^T = V S U_b^T
    SvdFactors f;
    f.u = matmul(q, small.v);
    f.v = std::move(small.u);
    f.sigma = std::move(small.sigma);
    f = truncate(std::move(f), k);

    if (block == std::min(n, p)) return f;  // full basis: Rayleigh-Ritz is exact
    const double s1 = f.sigma.empty() ? 0.0 : f.sigma[0];
    if (s1 == 0.0) return f;
    Mat resid = matmul(m, f.v) - scale_columns(f.u, f.sigma);
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += resid(i, j) * resid(i, j);
      worst = std::max(worst, std::sqrt(s));
    }
    if (worst <= kTol * s1) return f;
  }
  throw NumericError("truncated_svd(" + role + "): subspace iteration did not converge in " +
                     std::to_string(kMaxIter) + " iterations");
}

}  // namespace detail

/// Best rank-k approximation factors of m (Eckart-Young).
///
/// `role` names the matrix in error messages (e.g. "group 2 anchor block").
inline SvdFactors truncated_svd(const Mat& m, std::size_t k, const std::string& role = "matrix") {
  require_valid(m, "truncated_svd(" + role + ")");
  const std::size_t mn = std::min(m.rows(), m.cols());
  if (k < 1 || k > mn)
    throw ParameterError("truncated_svd(" + role + "): rank " + std::to_string(k) +
                         " outside [1, " + std::to_string(mn) + "]");
  if (mn <= kJacobiDimLimit) return detail::truncate(detail::dense_svd(m, role), k);
  if (mn <= kDenseDimLimit) {
    if (m.rows() >= m.cols()) return detail::qr_jacobi(m, k, role);
    return detail::transpose_factors(detail::qr_jacobi(m.transpose(), k, role));
  }
  return detail::subspace_iteration(m, k, role);
}

/// All singular values, non-increasing.
inline std::vector<double> singular_values(const Mat& m, const std::string& role = "matrix") {
  require_valid(m, "singular_values(" + role + ")");
  return detail::dense_svd(m, role).sigma;
}

/// 2-norm condition number of a square matrix; +inf when singular.
inline double condition_number(const Mat& m) {
  auto s = singular_values(m, "condition number");
  if (s.back() == 0.0) return INFINITY;
  return s.front() / s.back();
}

}  // namespace feddcl::numkit
