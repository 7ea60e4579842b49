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

#include <string>
#include <vector>

#include "feddcl/error.hpp"
#include "feddcl/numkit/matrix.hpp"

namespace feddcl::datahub {

using numkit::Mat;

enum class TaskKind { kRegression, kClassification };

struct Task {
  TaskKind kind = TaskKind::kRegression;
  std::size_t num_classes = 0;  // classification only

  static Task regression() { return {TaskKind::kRegression, 0}; }
  static Task classification(std::size_t classes) { return {TaskKind::kClassification, classes}; }

  bool is_classification() const noexcept { return kind == TaskKind::kClassification; }
  bool operator==(const Task&) const = default;
};

inline std::string to_string(const Task& t) {
  return t.is_classification() ? "classification(" + std::to_string(t.num_classes) + ")"
                               : "regression";
}

/// Features x (n x m) and targets y (n x l). Classification targets are
/// one-hot rows with l = num_classes.
struct LabeledTable {
  Mat x;
  Mat y;
  Task task;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_labels;

  std::size_t rows() const noexcept { return x.rows(); }
  std::size_t features() const noexcept { return x.cols(); }

  void validate() const {
    if (x.rows() != y.rows())
      throw DataError("LabeledTable: " + std::to_string(x.rows()) + " feature rows but " +
                      std::to_string(y.rows()) + " target rows");
    if (!task.is_classification()) return;
    if (y.cols() != task.num_classes)
      throw DataError("LabeledTable: target width does not match class count");
    for (std::size_t i = 0; i < y.rows(); ++i) {
      std::size_t ones = 0;
      for (double v : y.row(i)) {
        if (v == 1.0) ++ones;
        else if (v != 0.0) throw DataError("LabeledTable: non one-hot target row " + std::to_string(i));
      }
      if (ones != 1) throw DataError("LabeledTable: row " + std::to_string(i) + " is not one-hot");
    }
  }

  LabeledTable select_rows(std::span<const std::size_t> idx) const {
    LabeledTable t{x.select_rows(idx), y.select_rows(idx), task, feature_names, class_labels};
    return t;
  }
};

/// One-hot encoding of integer labels in [0, classes).
inline Mat one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  Mat y(labels.size(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw DataError("one_hot: label out of range");
    y(i, labels[i]) = 1.0;
  }
  return y;
}

}  // namespace feddcl::datahub
