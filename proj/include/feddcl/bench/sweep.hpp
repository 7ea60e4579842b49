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

#include <vector>

#include "feddcl/bench/emit.hpp"

namespace feddcl::bench {

struct SweepPoint {
  std::size_t groups = 0;
  Method method = Method::kFedDcl;
  double value = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool ok = true;
};

/// Copy of `c` with d groups of c_1 institutions each.
inline RunConfig with_groups(RunConfig c, std::size_t d) {
  const std::size_t ci = c.partition.institutions.at(0);
  c.partition.institutions.assign(d, ci);
  return c;
}

/// Re-runs the experiment for each group count. Every run loads the
/// dataset afresh from the config, so points are independent.
/// When `out` is non-empty, each run's artifacts go to out/d<k> and the
/// points to out/sweep.csv.
inline std::vector<SweepPoint> sweep_groups(const RunConfig& c, const std::vector<std::size_t>& ds,
                                            const fs::path& out = {}) {
  const auto table = load_table(c.dataset);
  std::vector<SweepPoint> pts;
  for (std::size_t d : ds) {
    auto cd = with_groups(c, d);
    auto res = run_experiment(cd, make_partition(cd, table));
    if (!out.empty()) emit_artifacts(res, out / ("d" + std::to_string(d)), c.checkpoints);
    for (const auto& m : res.methods) {
      SweepPoint p{d, m.method, m.final_value(), NAN, NAN, m.ok()};
      if (const auto* s = m.last()) {
        p.min = s->min;
        p.max = s->max;
      }
      pts.push_back(p);
    }
  }
  if (!out.empty()) {
    ensure_dir(out);
    auto f = open_out(out / "sweep.csv", std::ios::binary);
    f << "groups,method," << nnet::to_string(nnet::metric_for(table.task)) << ",min,max,status\n";
    for (const auto& p : pts)
      f << p.groups << ',' << to_string(p.method) << ',' << format_double(p.value) << ',' << format_double(p.min)
        << ',' << format_double(p.max) << ',' << (p.ok ? "ok" : "failed") << '\n';
  }
  return pts;
}

}  // namespace feddcl::bench
