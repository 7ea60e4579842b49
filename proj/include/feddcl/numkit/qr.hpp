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
#include <numeric>
#include <vector>

#include "feddcl/numkit/matrix.hpp"

namespace feddcl::numkit {

/// Householder QR factorization, optionally with column pivoting.
///
/// Reflectors are kept in compact form; R is min(n,p) x p upper trapezoidal.
/// With pivoting, a(:, perm) = Q R and |R(k,k)| is non-increasing.
struct HouseholderQr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> reflectors;  // v_k, length rows - k, v_k[0] = 1
  std::vector<double> tau;
  Mat r;
  std::vector<std::size_t> perm;

  std::size_t steps() const noexcept { return tau.size(); }

  /// Numerical rank from the diagonal of R (meaningful when pivoted).
  std::size_t numerical_rank(double rel_tol) const {
    if (r.empty()) return 0;
    const double r00 = std::abs(r(0, 0));
    if (r00 == 0.0) return 0;
    std::size_t k = 0;
    while (k < steps() && std::abs(r(k, k)) > rel_tol * r00) ++k;
    return k;
  }
};

namespace detail {

// Column-major scratch copy: cols[j][i] = a(i, j).
inline std::vector<std::vector<double>> to_columns(const Mat& a) {
  std::vector<std::vector<double>> c(a.cols(), std::vector<double>(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c[j][i] = a(i, j);
  return c;
}

inline double tail_norm(const std::vector<double>& x, std::size_t from) {
  double scale = 0.0, ssq = 1.0;
  for (std::size_t i = from; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    const double a = std::abs(x[i]);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

// y[k:] -= tau * v * (v . y[k:])
inline void apply_reflector(const std::vector<double>& v, double tau,
                            std::vector<double>& y, std::size_t k) {
  if (tau == 0.0) return;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * y[k + i];
  s *= tau;
  for (std::size_t i = 0; i < v.size(); ++i) y[k + i] -= s * v[i];
}

}  // namespace detail

inline HouseholderQr qr_decompose(const Mat& a, bool pivot) {
  const std::size_t n = a.rows(), p = a.cols();
  HouseholderQr qr;
  qr.rows = n;
  qr.cols = p;
  qr.perm.resize(p);
  std::iota(qr.perm.begin(), qr.perm.end(), std::size_t{0});
  auto cols = detail::to_columns(a);
  const std::size_t steps = std::min(n, p);

  for (std::size_t k = 0; k < steps; ++k) {
    if (pivot) {
      std::size_t best = k;
      double best_norm = -1.0;
      for (std::size_t j = k; j < p; ++j) {
        const double nj = detail::tail_norm(cols[j], k);
        if (nj > best_norm) {
          best_norm = nj;
          best = j;
        }
      }
      if (best != k) {
        std::swap(cols[k], cols[best]);
        std::swap(qr.perm[k], qr.perm[best]);
      }
    }

    std::vector<double>& x = cols[k];
    const double alpha = x[k];
    const double xnorm = detail::tail_norm(x, k + 1);
    std::vector<double> v(n - k, 0.0);
    v[0] = 1.0;
    double tau = 0.0;
    if (xnorm != 0.0) {
      const double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
      tau = (beta - alpha) / beta;
      const double inv = 1.0 / (alpha - beta);
      for (std::size_t i = 1; i < v.size(); ++i) v[i] = x[k + i] * inv;
      x[k] = beta;
      for (std::size_t i = k + 1; i < n; ++i) x[i] = 0.0;
    }
    for (std::size_t j = k + 1; j < p; ++j) detail::apply_reflector(v, tau, cols[j], k);
    qr.reflectors.push_back(std::move(v));
    qr.tau.push_back(tau);
  }

  qr.r = Mat(steps, p);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t j = i; j < p; ++j) qr.r(i, j) = cols[j][i];
  return qr;
}

/// Q^T b for the factorization's Q (n x n implicitly).
inline Mat apply_qt(const HouseholderQr& qr, const Mat& b) {
  if (b.rows() != qr.rows) throw ParameterError("apply_qt: row mismatch");
  auto cols = detail::to_columns(b);
  for (auto& c : cols)
    for (std::size_t k = 0; k < qr.steps(); ++k)
      detail::apply_reflector(qr.reflectors[k], qr.tau[k], c, k);
  Mat out(b.rows(), b.cols());
  for (std::size_t j = 0; j < cols.size(); ++j) out.set_column(j, cols[j]);
  return out;
}

/// Q * [x; 0] for x with at most min(n,p) rows (zero-padded to n rows).
inline Mat apply_q(const HouseholderQr& qr, const Mat& x) {
  if (x.rows() > qr.steps()) throw ParameterError("apply_q: too many rows");
  Mat out(qr.rows, x.cols());
  std::vector<double> e(qr.rows);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) e[i] = x(i, j);
    for (std::size_t s = qr.steps(); s-- > 0;)
      detail::apply_reflector(qr.reflectors[s], qr.tau[s], e, s);
    out.set_column(j, e);
  }
  return out;
}

/// First min(n,p) columns of Q.
inline Mat thin_q(const HouseholderQr& qr) {
  const std::size_t k = qr.steps();
  Mat q(qr.rows, k);
  std::vector<double> e(qr.rows);
  for (std::size_t j = 0; j < k; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    for (std::size_t s = k; s-- > 0;)
      detail::apply_reflector(qr.reflectors[s], qr.tau[s], e, s);
    q.set_column(j, e);
  }
  return q;
}

/// Orthonormal n x min(n,p) matrix whose leading columns span range(a) when
/// a has full column rank. Always orthonormal, even for deficient input.
inline Mat orthonormal_basis(const Mat& a) { return thin_q(qr_decompose(a, false)); }

}  // namespace feddcl::numkit
