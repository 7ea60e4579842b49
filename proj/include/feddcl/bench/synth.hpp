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
#include <cstdint>
#include <string>
#include <vector>

#include "feddcl/datahub/table.hpp"
#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/rng.hpp"

namespace feddcl::bench {

using numkit::Mat;

enum class Link { kIdentity, kTanh };

inline std::string to_string(Link l) { return l == Link::kIdentity ? "identity" : "tanh"; }

/// Stand-in for tabular datasets that cannot be redistributed.
///
/// Features lie in (-1/2, 1/2). With latent = 0 they are independent
/// uniforms; otherwise x = sigmoid(z W + 0.1 e) - 1/2 with z ~ N(0, I_latent),
/// which gives correlated columns like sensor channels driven by a few sources.
/// Regression: y = link(x theta) + noise * e with theta ~ N(0, scale^2 / m).
/// Classification: labels argmax(x Theta), then each label is replaced by a
/// different class with probability flip.
struct SynthSpec {
  std::size_t n = 1400;
  std::size_t m = 5;
  datahub::Task task = datahub::Task::regression();
  std::size_t latent = 0;
  Link link = Link::kTanh;
  double scale = 3.0;
  double noise = 0.0;
  double flip = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || m < 1) throw ParameterError("synth_dataset: n and m must be at least 1");
    if (task.is_classification() && task.num_classes < 2)
      throw ParameterError("synth_dataset: classification needs at least 2 classes");
    if (!(noise >= 0.0) || !(flip >= 0.0 && flip <= 1.0) || !std::isfinite(scale))
      throw ParameterError("synth_dataset: noise must be >= 0, flip in [0, 1], scale finite");
  }
};

/// `theta`, when given, receives the coefficient matrix (m x outputs).
inline datahub::LabeledTable synth_dataset(const SynthSpec& s, Mat* theta_out = nullptr) {
  s.validate();
  numkit::RngStream rng(s.seed);
  Mat x(s.n, s.m);
  if (s.latent == 0) {
    for (double& v : x.data()) v = rng.uniform01() - 0.5;
  } else {
    Mat w(s.latent, s.m);
    for (double& v : w.data()) v = rng.normal() * 1.5 / std::sqrt(static_cast<double>(s.latent));
    Mat z(s.n, s.latent);
    for (double& v : z.data()) v = rng.normal();
    x = numkit::matmul(z, w);
    for (double& v : x.data()) v = 1.0 / (1.0 + std::exp(-(v + 0.1 * rng.normal()))) - 0.5;
  }

  datahub::LabeledTable t;
  t.task = s.task;
  for (std::size_t k = 0; k < s.m; ++k) t.feature_names.push_back("x" + std::to_string(k + 1));
  const double sd = s.scale / std::sqrt(static_cast<double>(s.m));
  if (!s.task.is_classification()) {
    Mat theta(s.m, 1);
    for (double& v : theta.data()) v = rng.normal() * sd;
    t.y = numkit::matmul(x, theta);
    if (theta_out) *theta_out = theta;
    for (double& v : t.y.data()) {
      if (s.link == Link::kTanh) v = std::tanh(v);
      v += s.noise * rng.normal();
    }
  } else {
    const std::size_t l = s.task.num_classes;
    Mat theta(s.m, l);
    for (double& v : theta.data()) v = rng.normal() * sd;
    Mat score = numkit::matmul(x, theta);
    if (theta_out) *theta_out = theta;
    std::vector<std::size_t> labels(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
      auto row = score.row(i);
      labels[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (s.flip > 0.0 && rng.uniform01() < s.flip)
        labels[i] = (labels[i] + 1 + rng.below(l - 1)) % l;
    }
    t.y = datahub::one_hot(labels, l);
    for (std::size_t c = 0; c < l; ++c) t.class_labels.push_back(std::to_string(c));
  }
  t.x = std::move(x);
  t.validate();
  return t;
}

}  // namespace feddcl::bench
