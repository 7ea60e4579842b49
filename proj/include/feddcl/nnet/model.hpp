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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "feddcl/datahub/table.hpp"
#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::nnet {

using numkit::Mat;

/// Output head. Linear pairs with MSE, softmax with cross-entropy.
enum class Head : std::uint8_t { kLinear = 0, kSoftmax = 1 };

inline Head head_for(const datahub::Task& task) {
  return task.is_classification() ? Head::kSoftmax : Head::kLinear;
}

inline std::string to_string(Head h) { return h == Head::kSoftmax ? "softmax" : "linear"; }

/// Dense feed-forward network with ReLU hidden layers.
///
/// weights[l] is fan_in x fan_out, so a layer computes z = a * W + b.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;
  Head head = Head::kLinear;
  std::uint64_t init_seed = 0;

  std::size_t num_layers() const noexcept { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool aggregable_with(const MlpModel& o) const noexcept {
    return layer_sizes == o.layer_sizes && head == o.head;
  }

  bool operator==(const MlpModel&) const = default;

  /// Throws ParameterError on inconsistent shapes, DataError on non-finite values.
  void validate() const {
    if (layer_sizes.size() < 2) throw ParameterError("MlpModel: need at least 2 layer sizes");
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
      throw ParameterError("MlpModel: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != layer_sizes[l] || weights[l].cols() != layer_sizes[l + 1] ||
          biases[l].size() != layer_sizes[l + 1])
        throw ParameterError("MlpModel: layer " + std::to_string(l) + " has wrong shape");
      if (!numkit::all_finite(weights[l]))
        throw DataError("MlpModel: non-finite weight in layer " + std::to_string(l));
      for (double b : biases[l])
        if (!std::isfinite(b)) throw DataError("MlpModel: non-finite bias in layer " + std::to_string(l));
    }
  }
};

/// Glorot-uniform weights, zero biases. Weights are drawn layer by layer in
/// row-major order from one stream.
inline MlpModel init_model(const std::vector<std::size_t>& layer_sizes, Head head, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ParameterError("init_model: need input and output sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw ParameterError("init_model: layer sizes must be positive");
  MlpModel m;
  m.layer_sizes = layer_sizes;
  m.head = head;
  m.init_seed = seed;
  numkit::RngStream rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fi = layer_sizes[l], fo = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fi + fo));
    Mat w(fi, fo);
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fo, 0.0);
  }
  return m;
}

namespace detail {

// z = a * W + 1 b^T
inline Mat affine(const Mat& a, const Mat& w, const std::vector<double>& b) {
  Mat z = numkit::matmul(a, w);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return z;
}

inline void relu_inplace(Mat& z) {
  for (double& v : z.data())
    if (v < 0.0) v = 0.0;
}

inline void softmax_rows(Mat& z) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    double mx = r[0];
    for (double v : r) mx = std::max(mx, v);
    double s = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      s += v;
    }
    for (double& v : r) v /= s;
  }
}

// Pre-activations of every layer; the last entry holds the output logits
// (or raw regression outputs).
struct ForwardTrace {
  std::vector<Mat> pre;   // z_l
  std::vector<Mat> post;  // a_l, post[0] = input
};

inline ForwardTrace trace_forward(const MlpModel& m, const Mat& x) {
  ForwardTrace t;
  t.post.push_back(x);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    Mat z = affine(t.post.back(), m.weights[l], m.biases[l]);
    t.pre.push_back(z);
    if (l + 1 < m.num_layers()) {
      relu_inplace(z);
      t.post.push_back(std::move(z));
    }
  }
  return t;
}

}  // namespace detail

/// Predictions: raw affine output (linear head) or softmax probabilities.
inline Mat forward(const MlpModel& m, const Mat& x) {
  if (m.num_layers() == 0) throw ParameterError("forward: model has no layers");
  if (x.cols() != m.input_size())
    throw ParameterError("forward: input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(m.input_size()));
  Mat a = x;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    a = detail::affine(a, m.weights[l], m.biases[l]);
    if (l + 1 < m.num_layers()) detail::relu_inplace(a);
  }
  if (m.head == Head::kSoftmax) detail::softmax_rows(a);
  return a;
}

}  // namespace feddcl::nnet
