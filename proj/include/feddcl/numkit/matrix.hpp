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
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "feddcl/error.hpp"

#if defined(FEDDCL_HAVE_CBLAS)
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace feddcl::numkit {

/// Dense row-major matrix of doubles.
///
/// A default-constructed Mat is 0x0 and acts as "unset"; every kernel that
/// consumes a Mat rejects empty shapes.
class Mat {
 public:
  Mat() = default;

  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ParameterError("Mat: data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ParameterError("Mat: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Columns [first, first + count).
  Mat col_block(std::size_t first, std::size_t count) const {
    if (first + count > cols_) throw ParameterError("Mat::col_block out of range");
    Mat b(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_ + first),
                  count, b.data_.begin() + static_cast<std::ptrdiff_t>(i * count));
    return b;
  }

  /// Rows [first, first + count).
  Mat row_block(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw ParameterError("Mat::row_block out of range");
    Mat b(count, cols_);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                count * cols_, b.data_.begin());
    return b;
  }

  Mat select_rows(std::span<const std::size_t> idx) const {
    Mat b(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      auto src = row(idx[r]);
      std::copy(src.begin(), src.end(), b.row(r).begin());
    }
    return b;
  }

  Mat& operator+=(const Mat& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Mat& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  bool operator==(const Mat& o) const = default;

 private:
  void require_same_shape(const Mat& o, const char* op) const {
    if (o.rows_ != rows_ || o.cols_ != cols_)
      throw ParameterError(std::string("Mat ") + op + ": shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(Mat a, double s) { return a *= s; }

inline std::string shape_str(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

namespace detail {

#if defined(FEDDCL_HAVE_CBLAS)
// Products below this many multiply-adds stay on the portable loops.
inline constexpr std::size_t kBlasMinWork = 1u << 15;

// Single-threaded gemm keeps every reduction in one fixed order.
inline void blas_gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k,
                      const double* a, std::size_t lda, const double* b, std::size_t ldb,
                      double* c, std::size_t ldc) {
  static const bool once = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)once;
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), 0.0, c, static_cast<int>(ldc));
}
#endif

}  // namespace detail

/// c = a * b
inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw ParameterError("matmul: " + shape_str(a) + " * " + shape_str(b));
  Mat c(a.rows(), b.cols());
  const std::size_t n = b.cols();
#if defined(FEDDCL_HAVE_CBLAS)
  if (a.rows() * a.cols() * n >= detail::kBlasMinWork) {
    detail::blas_gemm(false, false, a.rows(), n, a.cols(), a.data().data(), a.cols(), b.data().data(),
                      n, c.data().data(), n);
    return c;
  }
#endif
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    const double* ai = a.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// c = a^T * b
inline Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows())
    throw ParameterError("matmul_tn: " + shape_str(a) + "^T * " + shape_str(b));
  Mat c(a.cols(), b.cols());
  const std::size_t n = b.cols();
#if defined(FEDDCL_HAVE_CBLAS)
  if (a.rows() * a.cols() * n >= detail::kBlasMinWork) {
    detail::blas_gemm(true, false, a.cols(), n, a.rows(), a.data().data(), a.cols(), b.data().data(),
                      n, c.data().data(), n);
    return c;
  }
#endif
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row(k).data();
    const double* bk = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

/// c = a * b^T
inline Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols())
    throw ParameterError("matmul_nt: " + shape_str(a) + " * " + shape_str(b) + "^T");
  Mat c(a.rows(), b.rows());
#if defined(FEDDCL_HAVE_CBLAS)
  if (a.rows() * a.cols() * b.rows() >= detail::kBlasMinWork) {
    detail::blas_gemm(false, true, a.rows(), b.rows(), a.cols(), a.data().data(), a.cols(),
                      b.data().data(), b.cols(), c.data().data(), b.rows());
    return c;
  }
#endif
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

inline Mat hcat(std::span<const Mat> blocks) {
  if (blocks.empty()) throw ParameterError("hcat: no blocks");
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const Mat& b : blocks) {
    if (b.rows() != rows) throw ParameterError("hcat: row count mismatch");
    cols += b.cols();
  }
  Mat out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double* dst = out.row(i).data();
    for (const Mat& b : blocks) {
      auto src = b.row(i);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

inline Mat vcat(std::span<const Mat> blocks) {
  if (blocks.empty()) throw ParameterError("vcat: no blocks");
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const Mat& b : blocks) {
    if (b.cols() != cols) throw ParameterError("vcat: column count mismatch");
    rows += b.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const Mat& b : blocks) data.insert(data.end(), b.data().begin(), b.data().end());
  return Mat(rows, cols, std::move(data));
}

inline double frobenius_norm(const Mat& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Mat& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ParameterError("max_abs_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s = std::max(s, std::abs(a.data()[i] - b.data()[i]));
  return s;
}

/// || m^T m - I ||_F
inline double orthonormality_residual(const Mat& m) {
  Mat g = matmul_tn(m, m);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

/// m * diag(d)
inline Mat scale_columns(Mat m, std::span<const double> d) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= d[j];
  return m;
}

/// diag(d) * m
inline Mat scale_rows(Mat m, std::span<const double> d) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double& v : m.row(i)) v *= d[i];
  return m;
}

/// m - 1 * mean^T
inline Mat subtract_row_vector(Mat m, std::span<const double> v) {
  if (v.size() != m.cols()) throw ParameterError("subtract_row_vector: length mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= v[j];
  }
  return m;
}

inline std::vector<double> column_means(const Mat& m) {
  std::vector<double> mean(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
  }
  for (double& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

inline bool all_finite(const Mat& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double v) { return std::isfinite(v); });
}

/// Rejects empty or non-finite matrices. `role` names the matrix in errors.
inline void require_valid(const Mat& m, const std::string& role) {
  if (m.rows() == 0 || m.cols() == 0)
    throw ParameterError(role + ": empty matrix " + shape_str(m));
  if (!all_finite(m)) throw DataError(role + ": non-finite entry");
}

}  // namespace feddcl::numkit
