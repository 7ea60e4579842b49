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
#include <span>

#include "feddcl/nnet/model.hpp"

namespace feddcl::nnet {

/// Weighted parameter average sum_k w_k theta_k / sum_k w_k, accumulated in
/// ascending participant order.
inline MlpModel fedavg_aggregate(std::span<const MlpModel> models, std::span<const double> weights) {
  if (models.empty()) throw ParameterError("fedavg_aggregate: no models");
  if (models.size() != weights.size())
    throw ParameterError("fedavg_aggregate: " + std::to_string(models.size()) + " models but " +
                         std::to_string(weights.size()) + " weights");
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
      throw AggregationError(k, "weight must be positive and finite");
    if (!models[k].aggregable_with(models[0]))
      throw AggregationError(k, "layer sizes or head differ from participant 0");
    total += weights[k];
  }
  MlpModel out = models[0];
  for (std::size_t l = 0; l < out.num_layers(); ++l) {
    auto& w = out.weights[l];
    auto& b = out.biases[l];
    std::fill(w.data().begin(), w.data().end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t k = 0; k < models.size(); ++k) {
      const double c = weights[k] / total;
      const auto& src = models[k].weights[l];
      for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] += c * src.data()[i];
      for (std::size_t j = 0; j < b.size(); ++j) b[j] += c * models[k].biases[l][j];
    }
  }
  return out;
}

}  // namespace feddcl::nnet
