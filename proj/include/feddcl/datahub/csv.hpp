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
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "feddcl/datahub/table.hpp"

namespace feddcl::datahub {

/// Column roles for load_csv. Every column that is neither a target nor
/// ignored is a feature, in file order.
struct CsvSchema {
  std::vector<std::string> targets;
  std::vector<std::string> ignore;
  TaskKind task = TaskKind::kRegression;
  /// Label vocabulary fixed by an earlier (training) load. Labels outside it
  /// are a DataError; when empty the vocabulary is built from the file.
  std::vector<std::string> known_labels;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto pos = rest.find(',');
    cells.emplace_back(trim(rest.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Sorted distinct label order: numeric order when every label is a number,
// lexicographic otherwise.
inline std::vector<std::string> sorted_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(),
                                   [](const std::string& l) { return parse_double(l).has_value(); });
  if (numeric)
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return *parse_double(a) < *parse_double(b);
    });
  return labels;
}

}  // namespace detail

/// Reads a comma-separated file with a header row.
inline LabeledTable load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("load_csv: '" + path + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = detail::split_row(line);

  auto find_col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("load_csv: column '" + name + "' not in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> target_cols;
  for (const auto& t : schema.targets) target_cols.push_back(find_col(t));
  if (target_cols.empty()) throw ParameterError("load_csv: schema names no target column");
  std::vector<bool> skip(header.size(), false);
  for (std::size_t c : target_cols) skip[c] = true;
  for (const auto& name : schema.ignore) skip[find_col(name)] = true;

  const bool classify = schema.task == TaskKind::kClassification;
  if (classify && target_cols.size() != 1)
    throw ParameterError("load_csv: classification needs exactly one target column");

  LabeledTable table;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!skip[c]) table.feature_names.push_back(header[c]);
  const std::size_t m = table.feature_names.size();
  if (m == 0) throw DataError("load_csv: no feature columns");

  std::vector<double> xs, ys;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1, n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_row(line);
    if (cells.size() != header.size())
      throw ParseError("load_csv: expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no, cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (skip[c]) continue;
      auto v = detail::parse_double(cells[c]);
      if (!v) throw ParseError("load_csv: non-numeric cell '" + cells[c] + "'", line_no, c + 1);
      xs.push_back(*v);
    }
    if (classify) {
      raw_labels.push_back(cells[target_cols[0]]);
    } else {
      for (std::size_t c : target_cols) {
        auto v = detail::parse_double(cells[c]);
        if (!v) throw ParseError("load_csv: non-numeric target '" + cells[c] + "'", line_no, c + 1);
        ys.push_back(*v);
      }
    }
    ++n;
  }
  if (n == 0) throw DataError("load_csv: '" + path + "' has no data rows");

  table.x = Mat(n, m, std::move(xs));
  if (classify) {
    table.class_labels =
        schema.known_labels.empty() ? detail::sorted_labels(raw_labels) : schema.known_labels;
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < table.class_labels.size(); ++k) index[table.class_labels[k]] = k;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = index.find(raw_labels[i]);
      if (it == index.end())
        throw DataError("load_csv: unknown label '" + raw_labels[i] + "' at data row " +
                        std::to_string(i + 1));
      ids.push_back(it->second);
    }
    table.task = Task::classification(table.class_labels.size());
    table.y = one_hot(ids, table.class_labels.size());
  } else {
    table.task = Task::regression();
    table.y = Mat(n, target_cols.size(), std::move(ys));
  }
  if (!numkit::all_finite(table.x) || !numkit::all_finite(table.y))
    throw DataError("load_csv: non-finite value in '" + path + "'");
  return table;
}

/// Writes features then targets (regression) or a "label" column (classification).
inline void save_csv(const LabeledTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot write '" + path + "'");
  out.precision(17);
  for (std::size_t j = 0; j < t.features(); ++j)
    out << (t.feature_names.size() == t.features() ? t.feature_names[j] : "x" + std::to_string(j))
        << ',';
  if (t.task.is_classification()) {
    out << "label\n";
  } else {
    for (std::size_t j = 0; j < t.y.cols(); ++j)
      out << "y" << j << (j + 1 < t.y.cols() ? "," : "\n");
  }
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (double v : t.x.row(i)) out << v << ',';
    if (t.task.is_classification()) {
      auto r = t.y.row(i);
      const auto k = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
      out << (t.class_labels.size() > k ? t.class_labels[k] : std::to_string(k)) << '\n';
    } else {
      for (std::size_t j = 0; j < t.y.cols(); ++j)
        out << t.y(i, j) << (j + 1 < t.y.cols() ? "," : "\n");
    }
  }
  if (!out) throw IoError("save_csv: write to '" + path + "' failed");
}

}  // namespace feddcl::datahub
