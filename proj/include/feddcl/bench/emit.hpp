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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "feddcl/bench/experiment.hpp"

namespace feddcl::bench {

namespace fs = std::filesystem;

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void write_history_csv(const protocol::History& h, const fs::path& path) {
  auto out = open_out(path, std::ios::binary);
  out << "snapshot_index,epoch_equivalent," << nnet::to_string(h.kind) << ",min,max\n";
  for (const auto& s : h.points)
    out << s.index << ',' << format_double(s.epoch_equivalent) << ',' << format_double(s.value) << ','
        << format_double(s.min) << ',' << format_double(s.max) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string history_file(Method m) { return "history_" + to_string(m) + ".csv"; }

inline nlohmann::ordered_json summary_json(const ExperimentResult& r) {
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const auto& m : r.methods) {
    nlohmann::ordered_json e;
    e["method"] = to_string(m.method);
    e["status"] = m.ok() ? "ok" : "failed";
    if (!m.ok()) e["error"] = m.error;
    e["snapshots"] = m.history.points.size();
    if (const auto* s = m.last()) {
      e["final"] = s->value;
      e["final_min"] = s->min;
      e["final_max"] = s->max;
    } else {
      e["final"] = nullptr;
    }
    e["wall_seconds"] = m.wall_seconds;
    methods.push_back(std::move(e));
  }
  return {{"name", r.name},
          {"seed", r.seed},
          {"task", datahub::to_string(r.task)},
          {"metric", nnet::to_string(nnet::metric_for(r.task))},
          {"partition_fingerprint", r.partition_fingerprint},
          {"train_rows", r.train_rows},
          {"holdout_rows", r.holdout_rows},
          {"methods", methods}};
}

/// One history CSV per method (plus one per institution for Local) and
/// summary.json.
inline void emit_history(const ExperimentResult& r, const fs::path& dir) {
  ensure_dir(dir);
  for (const auto& m : r.methods) {
    write_history_csv(m.history, dir / history_file(m.method));
    for (const auto& [name, h] : m.members) write_history_csv(h, dir / ("history_" + name + ".csv"));
  }
  auto out = open_out(dir / "summary.json");
  out << summary_json(r).dump(2) << '\n';
}

/// Histories, summary, ledgers, protocol report and checkpoints.
inline void emit_artifacts(const ExperimentResult& r, const fs::path& dir, bool checkpoints = true) {
  emit_history(r, dir);
  for (const auto& m : r.methods) {
    if (m.ledger) m.ledger->write_csv((dir / ("ledger_" + to_string(m.method) + ".csv")).string());
    if (!m.report.is_null()) {
      auto out = open_out(dir / ("report_" + to_string(m.method) + ".json"));
      out << m.report.dump(2) << '\n';
    }
    if (!checkpoints) continue;
    if (!m.models.empty()) ensure_dir(dir / "checkpoints");
    for (const auto& [name, model] : m.models) nnet::save_checkpoint(model, (dir / "checkpoints" / (name + ".bin")).string());
  }
}

}  // namespace feddcl::bench
