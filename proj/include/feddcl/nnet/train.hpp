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
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "feddcl/nnet/model.hpp"

namespace feddcl::nnet {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 40;
  double learning_rate = 0.01;
  std::uint64_t shuffle_seed = 0;

  void validate() const {
    if (batch_size == 0) throw ParameterError("TrainConfig: batch_size must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ParameterError("TrainConfig: learning_rate must be finite and non-negative");
  }
};

/// Mean training loss of every completed epoch.
struct TrainStats {
  std::vector<double> epoch_loss;
};

/// Called after each epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const MlpModel&)>;

struct Gradients {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;
};

namespace detail {

// Loss of a batch and dL/d(output logits). Regression: mean over entries of
// the squared error. Classification: mean cross-entropy, computed from the
// logits via log-sum-exp.
inline double loss_and_delta(Head head, const Mat& out, const Mat& y, Mat* delta) {
  const double b = static_cast<double>(out.rows());
  double loss = 0.0;
  if (delta) *delta = Mat(out.rows(), out.cols());
  if (head == Head::kLinear) {
    const double scale = 1.0 / (b * static_cast<double>(out.cols()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double e = out.data()[i] - y.data()[i];
      loss += e * e;
      if (delta) delta->data()[i] = 2.0 * e * scale;
    }
    return loss * scale;
  }
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto z = out.row(i);
    auto t = y.row(i);
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (std::size_t k = 0; k < z.size(); ++k) {
      loss += t[k] * (lse - z[k]);
      if (delta) (*delta)(i, k) = (std::exp(z[k] - lse) - t[k]) / b;
    }
  }
  return loss / b;
}

}  // namespace detail

/// Training loss of the model on (x, y), the quantity SGD minimizes.
inline double loss(const MlpModel& m, const Mat& x, const Mat& y) {
  if (y.rows() != x.rows() || y.cols() != m.output_size())
    throw ParameterError("loss: target shape " + numkit::shape_str(y) + " does not fit model");
  auto tr = detail::trace_forward(m, x);
  return detail::loss_and_delta(m.head, tr.pre.back(), y, nullptr);
}

/// Backpropagation over one batch. Returns the batch loss.
inline double backprop(const MlpModel& m, const Mat& x, const Mat& y, Gradients& g) {
  auto tr = detail::trace_forward(m, x);
  Mat delta;
  const double l = detail::loss_and_delta(m.head, tr.pre.back(), y, &delta);
  const std::size_t layers = m.num_layers();
  g.weights.assign(layers, Mat());
  g.biases.assign(layers, {});
  for (std::size_t l_ = layers; l_-- > 0;) {
    g.weights[l_] = numkit::matmul_tn(tr.post[l_], delta);
    std::vector<double> gb(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
    }
    g.biases[l_] = std::move(gb);
    if (l_ == 0) break;
    Mat next = numkit::matmul_nt(delta, m.weights[l_]);
    const Mat& z = tr.pre[l_ - 1];
    for (std::size_t i = 0; i < next.size(); ++i)
      if (!(z.data()[i] > 0.0)) next.data()[i] = 0.0;
    delta = std::move(next);
  }
  return l;
}

/// Mini-batch SGD. Each epoch reshuffles the rows with the config's stream;
/// the last, possibly short, batch is kept.
inline MlpModel train_local(MlpModel m, const Mat& x, const Mat& y, const TrainConfig& cfg,
                            TrainStats* stats = nullptr, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (x.rows() == 0) throw ParameterError("train_local: no training rows");
  if (x.cols() != m.input_size())
    throw ParameterError("train_local: input has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(m.input_size()));
  if (y.rows() != x.rows() || y.cols() != m.output_size())
    throw ParameterError("train_local: target shape " + numkit::shape_str(y) + " does not fit model");

  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  numkit::RngStream rng(cfg.shuffle_seed);
  Gradients g;
  const double lr = cfg.learning_rate;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      std::span<const std::size_t> idx(order.data() + start, len);
      const double bl = backprop(m, x.select_rows(idx), y.select_rows(idx), g);
      if (!std::isfinite(bl))
        throw NumericError("train_local: non-finite loss at epoch " + std::to_string(epoch + 1) +
                           ", batch " + std::to_string(batch + 1));
      epoch_loss += bl * static_cast<double>(len);
      for (std::size_t l = 0; l < m.num_layers(); ++l) {
        auto& w = m.weights[l];
        const auto& gw = g.weights[l];
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= lr * gw.data()[i];
        for (std::size_t j = 0; j < m.biases[l].size(); ++j) m.biases[l][j] -= lr * g.biases[l][j];
      }
    }
    if (stats) stats->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch + 1, m);
  }
  return m;
}

/// Largest relative disagreement between backprop and central finite
/// differences (step 1e-5) over all parameters. The relative error of a
/// parameter is |g_bp - g_fd| / max(|g_bp| + |g_fd|, floor); the floor keeps
/// gradients that are zero up to rounding from dominating.
inline double grad_check(const MlpModel& model, const Mat& x, const Mat& y, double floor = 1e-7) {
  constexpr double kStep = 1e-5;
  if (model.num_parameters() > 100000)
    throw ParameterError("grad_check: model too large for finite differences");
  Gradients g;
  backprop(model, x, y, g);
  MlpModel probe = model;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + kStep;
    const double up = loss(probe, x, y);
    param = saved - kStep;
    const double down = loss(probe, x, y);
    param = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double denom = std::max(std::abs(analytic) + std::abs(numeric), floor);
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.num_layers(); ++l) {
    for (std::size_t i = 0; i < probe.weights[l].size(); ++i)
      check(probe.weights[l].data()[i], g.weights[l].data()[i]);
    for (std::size_t j = 0; j < probe.biases[l].size(); ++j) check(probe.biases[l][j], g.biases[l][j]);
  }
  return worst;
}

}  // namespace feddcl::nnet
