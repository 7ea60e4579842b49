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

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "feddcl/bench/synth.hpp"
#include "feddcl/datahub/csv.hpp"
#include "feddcl/error.hpp"
#include "feddcl/protocol/runner.hpp"

namespace feddcl::bench {

enum class Method { kCentralized, kLocal, kFedAvg, kDc, kFedDcl };

inline constexpr Method kAllMethods[] = {Method::kCentralized, Method::kLocal, Method::kFedAvg, Method::kDc,
                                         Method::kFedDcl};

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kCentralized: return "centralized";
    case Method::kLocal: return "local";
    case Method::kFedAvg: return "fedavg";
    case Method::kDc: return "dc";
    case Method::kFedDcl: return "feddcl";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct DatasetSpec {
  enum class Kind { kSynthetic, kCsv, kIdx };
  Kind kind = Kind::kSynthetic;
  SynthSpec synth;
  std::string csv_path;
  datahub::CsvSchema csv;
  std::string images;
  std::string labels;
  /// Keep only the first max_rows rows of the file (0: all).
  std::size_t max_rows = 0;
};

struct PartitionConfig {
  std::vector<std::size_t> institutions{2, 2};  // c_i per group
  std::size_t rows_per_institution = 100;
  std::size_t holdout = 1000;
  std::optional<std::uint64_t> seed;
};

struct TrainingConfig {
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  std::map<Method, double> method_learning_rate;
  std::size_t epochs = 40;           // centralized, local, dc
  std::size_t rounds = 20;           // fedavg, feddcl
  std::size_t epochs_per_round = 4;

  double lr(Method m) const {
    auto it = method_learning_rate.find(m);
    return it == method_learning_rate.end() ? learning_rate : it->second;
  }
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  PartitionConfig partition;
  std::size_t anchor_rows = datahub::kDefaultAnchorRows;
  std::optional<std::uint64_t> anchor_seed;
  std::size_t m_tilde = 4;
  std::optional<std::uint64_t> mapping_seed;
  std::size_t m_hat = 4;
  std::optional<std::uint64_t> mask_seed;
  std::optional<std::uint64_t> donor_seed;
  std::vector<std::size_t> hidden{20};
  TrainingConfig training;
  std::vector<Method> methods{kAllMethods, kAllMethods + 5};
  std::string out_dir = "out";
  bool checkpoints = true;

  std::uint64_t partition_seed() const {
    return partition.seed ? *partition.seed : numkit::derive_seed(seed, {7});
  }

  protocol::SeedPlan seed_plan() const {
    auto s = protocol::SeedPlan::from_master(seed);
    if (anchor_seed) s.anchor = *anchor_seed;
    if (mapping_seed) s.mapping = *mapping_seed;
    if (mask_seed) s.mask = *mask_seed;
    if (donor_seed) s.donor = *donor_seed;
    return s;
  }

  /// Layers for a model whose input has `in` columns.
  std::vector<std::size_t> layers(std::size_t in, std::size_t out) const {
    std::vector<std::size_t> l{in};
    l.insert(l.end(), hidden.begin(), hidden.end());
    l.push_back(out);
    return l;
  }

  protocol::ProtocolConfig protocol_config(std::size_t target_dim) const {
    protocol::ProtocolConfig p;
    p.anchor_rows = anchor_rows;
    p.m_tilde = m_tilde;
    p.m_hat = m_hat;
    p.layers = layers(m_hat, target_dim);
    p.rounds = training.rounds;
    p.train = {training.batch_size, training.epochs_per_round, training.lr(Method::kFedDcl), 0};
    p.central_epochs = training.epochs;
    p.seeds = seed_plan();
    return p;
  }
};

namespace detail {

// Walks a JSON object, tracking the dotted path for error messages and
// rejecting keys that were never read.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), at(key));
  }

  template <typename T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "required");
    return as<T>(raw(key), at(key));
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key) || j_.at(key).is_null()) {
      if (has(key)) seen_.insert(key);
      return std::nullopt;
    }
    return as<T>(raw(key), at(key));
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.at(key), at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
  }

  template <typename T>
  static T as(const nlohmann::json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where, "expected a non-negative integer");
      return v.get<T>();
    } else {
      if (!v.is_array()) throw ConfigError(where, "expected an array");
      T out;
      for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(as<typename T::value_type>(v[k], where + "[" + std::to_string(k) + "]"));
      return out;
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline datahub::Task parse_task(Reader& r, const std::string& key) {
  const auto s = r.get<std::string>(key, "regression");
  if (s == "regression") return datahub::Task::regression();
  if (s == "classification") {
    const auto c = r.required<std::size_t>("classes");
    if (c < 2) throw ConfigError(r.at("classes"), "needs at least 2 classes");
    return datahub::Task::classification(c);
  }
  throw ConfigError(r.at(key), "expected \"regression\" or \"classification\"");
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path q(p);
  return (q.is_absolute() || base.empty() ? q : base / q).lexically_normal().string();
}

inline DatasetSpec parse_dataset(Reader r, const std::filesystem::path& base, std::uint64_t master) {
  DatasetSpec d;
  const auto kind = r.required<std::string>("kind");
  if (kind == "synthetic") {
    d.kind = DatasetSpec::Kind::kSynthetic;
    auto& s = d.synth;
    s.n = r.get<std::size_t>("n", s.n);
    s.m = r.get<std::size_t>("m", s.m);
    s.task = parse_task(r, "task");
    s.latent = r.get<std::size_t>("latent", s.latent);
    const auto link = r.get<std::string>("link", "tanh");
    if (link != "tanh" && link != "identity") throw ConfigError(r.at("link"), "expected \"tanh\" or \"identity\"");
    s.link = link == "tanh" ? Link::kTanh : Link::kIdentity;
    s.scale = r.get<double>("scale", s.scale);
    s.noise = r.get<double>("noise", s.noise);
    s.flip = r.get<double>("flip", s.flip);
    s.seed = r.optional<std::uint64_t>("seed").value_or(numkit::derive_seed(master, {8}));
    if (s.n < 1) throw ConfigError(r.at("n"), "must be at least 1");
    if (s.m < 1) throw ConfigError(r.at("m"), "must be at least 1");
    if (s.noise < 0) throw ConfigError(r.at("noise"), "must be non-negative");
    if (s.flip < 0 || s.flip > 1) throw ConfigError(r.at("flip"), "must lie in [0, 1]");
  } else if (kind == "csv") {
    d.kind = DatasetSpec::Kind::kCsv;
    d.csv_path = resolve(base, r.required<std::string>("path"));
    d.csv.targets = r.required<std::vector<std::string>>("targets");
    d.csv.ignore = r.get<std::vector<std::string>>("ignore", {});
    const auto task = r.get<std::string>("task", "regression");
    if (task != "regression" && task != "classification")
      throw ConfigError(r.at("task"), "expected \"regression\" or \"classification\"");
    d.csv.task = task == "regression" ? datahub::TaskKind::kRegression : datahub::TaskKind::kClassification;
    if (d.csv.targets.empty()) throw ConfigError(r.at("targets"), "needs at least one column");
  } else if (kind == "idx") {
    d.kind = DatasetSpec::Kind::kIdx;
    d.images = resolve(base, r.required<std::string>("images"));
    d.labels = resolve(base, r.required<std::string>("labels"));
  } else {
    throw ConfigError(r.at("kind"), "expected \"synthetic\", \"csv\" or \"idx\"");
  }
  d.max_rows = r.get<std::size_t>("max_rows", 0);
  r.finish();
  return d;
}

inline void require_positive(std::size_t v, const std::string& where) {
  if (v < 1) throw ConfigError(where, "must be at least 1");
}

}  // namespace detail

/// Parses a run config. Relative dataset paths are taken relative to
/// `base_dir` (normally the config file's directory).
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  detail::Reader r(j, "");
  RunConfig c;
  c.name = r.get<std::string>("name", c.name);
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  if (!r.has("dataset")) throw ConfigError("dataset", "required");
  c.dataset = detail::parse_dataset(r.child("dataset"), base_dir, c.seed);

  if (r.has("partition")) {
    auto p = r.child("partition");
    const auto groups = p.get<std::size_t>("groups", 2);
    detail::require_positive(groups, p.at("groups"));
    if (p.has("institutions_per_group") && p.raw("institutions_per_group").is_array()) {
      c.partition.institutions = p.required<std::vector<std::size_t>>("institutions_per_group");
      if (c.partition.institutions.size() != groups)
        throw ConfigError(p.at("institutions_per_group"), "length must equal groups");
    } else {
      c.partition.institutions.assign(groups, p.get<std::size_t>("institutions_per_group", 2));
    }
    for (std::size_t i = 0; i < c.partition.institutions.size(); ++i)
      detail::require_positive(c.partition.institutions[i], p.at("institutions_per_group"));
    c.partition.rows_per_institution = p.get<std::size_t>("rows_per_institution", 100);
    detail::require_positive(c.partition.rows_per_institution, p.at("rows_per_institution"));
    c.partition.holdout = p.get<std::size_t>("holdout", c.partition.holdout);
    detail::require_positive(c.partition.holdout, p.at("holdout"));
    c.partition.seed = p.optional<std::uint64_t>("seed");
    p.finish();
  }
  if (r.has("anchor")) {
    auto a = r.child("anchor");
    c.anchor_rows = a.get<std::size_t>("rows", c.anchor_rows);
    detail::require_positive(c.anchor_rows, a.at("rows"));
    c.anchor_seed = a.optional<std::uint64_t>("seed");
    a.finish();
  }
  if (r.has("mapping")) {
    auto m = r.child("mapping");
    c.m_tilde = m.get<std::size_t>("m_tilde", c.m_tilde);
    detail::require_positive(c.m_tilde, m.at("m_tilde"));
    c.mapping_seed = m.optional<std::uint64_t>("seed");
    m.finish();
  }
  c.m_hat = c.m_tilde;
  if (r.has("alignment")) {
    auto a = r.child("alignment");
    c.m_hat = a.get<std::size_t>("m_hat", c.m_hat);
    detail::require_positive(c.m_hat, a.at("m_hat"));
    c.mask_seed = a.optional<std::uint64_t>("mask_seed");
    c.donor_seed = a.optional<std::uint64_t>("donor_seed");
    a.finish();
  }
  if (r.has("network")) {
    auto n = r.child("network");
    c.hidden = n.get<std::vector<std::size_t>>("hidden", c.hidden);
    for (std::size_t k = 0; k < c.hidden.size(); ++k)
      detail::require_positive(c.hidden[k], n.at("hidden") + "[" + std::to_string(k) + "]");
    n.finish();
  }
  if (r.has("training")) {
    auto t = r.child("training");
    auto& tc = c.training;
    tc.batch_size = t.get<std::size_t>("batch_size", tc.batch_size);
    detail::require_positive(tc.batch_size, t.at("batch_size"));
    tc.learning_rate = t.get<double>("learning_rate", tc.learning_rate);
    if (!(tc.learning_rate > 0)) throw ConfigError(t.at("learning_rate"), "must be positive");
    if (t.has("method_learning_rate")) {
      auto ml = t.child("method_learning_rate");
      for (Method m : kAllMethods)
        if (auto v = ml.optional<double>(to_string(m))) {
          if (!(*v > 0)) throw ConfigError(ml.at(to_string(m)), "must be positive");
          tc.method_learning_rate[m] = *v;
        }
      ml.finish();
    }
    tc.epochs = t.get<std::size_t>("epochs", tc.epochs);
    detail::require_positive(tc.epochs, t.at("epochs"));
    tc.rounds = t.get<std::size_t>("rounds", tc.rounds);
    detail::require_positive(tc.rounds, t.at("rounds"));
    tc.epochs_per_round = t.get<std::size_t>("epochs_per_round", tc.epochs_per_round);
    detail::require_positive(tc.epochs_per_round, t.at("epochs_per_round"));
    t.finish();
  }
  if (r.has("methods")) {
    auto names = r.required<std::vector<std::string>>("methods");
    c.methods.clear();
    for (std::size_t k = 0; k < names.size(); ++k) {
      auto m = parse_method(names[k]);
      if (!m) throw ConfigError("methods[" + std::to_string(k) + "]", "unknown method '" + names[k] + "'");
      if (std::find(c.methods.begin(), c.methods.end(), *m) != c.methods.end())
        throw ConfigError("methods[" + std::to_string(k) + "]", "listed twice");
      c.methods.push_back(*m);
    }
  }
  if (r.has("output")) {
    auto o = r.child("output");
    c.out_dir = o.get<std::string>("dir", c.out_dir);
    c.checkpoints = o.get<bool>("checkpoints", c.checkpoints);
    o.finish();
  }
  r.finish();

  if (c.m_hat > c.m_tilde) throw ConfigError("alignment.m_hat", "must not exceed mapping.m_tilde");
  if (c.dataset.kind == DatasetSpec::Kind::kSynthetic && c.m_tilde > c.dataset.synth.m)
    throw ConfigError("mapping.m_tilde", "must not exceed the feature count");
  if (c.m_tilde > c.partition.rows_per_institution)
    throw ConfigError("mapping.m_tilde", "must not exceed partition.rows_per_institution");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", path + ": " + e.what());
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path());
}

}  // namespace feddcl::bench
