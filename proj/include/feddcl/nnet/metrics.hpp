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
#include <string>

#include "feddcl/nnet/model.hpp"

namespace feddcl::nnet {

enum class MetricKind { kRmse, kAccuracy };

inline std::string to_string(MetricKind k) { return k == MetricKind::kRmse ? "rmse" : "accuracy"; }

inline MetricKind metric_for(const datahub::Task& task) {
  return task.is_classification() ? MetricKind::kAccuracy : MetricKind::kRmse;
}

struct EvalReport {
  MetricKind kind = MetricKind::kRmse;
  double value = 0.0;
  std::size_t n_eval = 0;
};

/// RMSE over all entries, or argmax accuracy with ties going to the lowest index.
inline EvalReport score_predictions(const Mat& pred, const Mat& y, const datahub::Task& task) {
  if (pred.rows() == 0) throw ParameterError("evaluate: empty evaluation set");
  if (pred.rows() != y.rows() || pred.cols() != y.cols())
    throw ParameterError("evaluate: predictions " + numkit::shape_str(pred) + " vs targets " +
                         numkit::shape_str(y));
  EvalReport r;
  r.kind = metric_for(task);
  r.n_eval = pred.rows();
  if (r.kind == MetricKind::kRmse) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double e = pred.data()[i] - y.data()[i];
      s += e * e;
    }
    r.value = std::sqrt(s / static_cast<double>(pred.size()));
    return r;
  }
  auto argmax = [](std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[best]) best = k;
    return best;
  };
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.rows(); ++i)
    if (argmax(pred.row(i)) == argmax(y.row(i))) ++hit;
  r.value = static_cast<double>(hit) / static_cast<double>(pred.rows());
  return r;
}

inline EvalReport evaluate(const MlpModel& m, const Mat& x, const Mat& y, const datahub::Task& task) {
  if (x.rows() == 0) throw ParameterError("evaluate: empty evaluation set");
  return score_predictions(forward(m, x), y, task);
}

}  // namespace feddcl::nnet
