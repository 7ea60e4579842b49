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

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "feddcl/bench/config.hpp"
#include "feddcl/datahub.hpp"
#include "feddcl/nnet.hpp"
#include "feddcl/protocol.hpp"

namespace feddcl::bench {

struct MethodResult {
  Method method = Method::kFedDcl;
  protocol::History history;
  /// Local only: one curve per institution, named like the checkpoints.
  std::vector<std::pair<std::string, protocol::History>> members;
  double wall_seconds = 0.0;
  std::string error;  // empty when the method completed
  /// Checkpoint name -> trained model.
  std::vector<std::pair<std::string, nnet::MlpModel>> models;
  std::optional<protocol::CommLedger> ledger;
  nlohmann::ordered_json report;
  std::uint64_t partition_fingerprint = 0;

  bool ok() const noexcept { return error.empty(); }
  const protocol::Snapshot* last() const { return history.points.empty() ? nullptr : &history.points.back(); }
  double final_value() const { return last() ? last()->value : NAN; }
};

struct ExperimentResult {
  std::string name;
  std::uint64_t seed = 0;
  datahub::Task task;
  std::uint64_t partition_fingerprint = 0;
  std::size_t train_rows = 0;
  std::size_t holdout_rows = 0;
  std::vector<MethodResult> methods;

  bool ok() const {
    for (const auto& m : methods)
      if (!m.ok()) return false;
    return true;
  }
  const MethodResult* find(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return &r;
    return nullptr;
  }
};

inline datahub::LabeledTable load_table(const DatasetSpec& d) {
  datahub::LabeledTable t;
  switch (d.kind) {
    case DatasetSpec::Kind::kSynthetic: t = synth_dataset(d.synth); break;
    case DatasetSpec::Kind::kCsv: t = datahub::load_csv(d.csv_path, d.csv); break;
    case DatasetSpec::Kind::kIdx: t = datahub::load_idx_images(d.images, d.labels); break;
  }
  if (d.max_rows > 0 && d.max_rows < t.rows()) {
    std::vector<std::size_t> keep(d.max_rows);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    t = t.select_rows(keep);
  }
  return t;
}

inline datahub::PartitionedDataset make_partition(const RunConfig& c, const datahub::LabeledTable& t) {
  datahub::PartitionSpec spec;
  spec.institutions_per_group = c.partition.institutions;
  spec.rows_per_institution = c.partition.rows_per_institution;
  spec.holdout_limit = c.partition.holdout;
  std::size_t need = 0;
  for (std::size_t ci : c.partition.institutions) need += ci * c.partition.rows_per_institution;
  if (t.rows() <= need)
    throw ConfigError("partition", std::to_string(need) + " training rows requested but the dataset has " +
                                       std::to_string(t.rows()) + " (at least one holdout row is needed)");
  return datahub::partition_iid(t, spec, c.partition_seed());
}

namespace detail {

inline protocol::Snapshot spread(std::size_t index, double epochs, const std::vector<double>& v) {
  protocol::Snapshot s{index, epochs, 0.0, INFINITY, -INFINITY};
  for (double x : v) {
    s.value += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.value /= static_cast<double>(v.size());
  return s;
}

inline double holdout_score(const nnet::MlpModel& m, const datahub::PartitionedDataset& p) {
  return nnet::evaluate(m, p.holdout.x, p.holdout.y, p.task).value;
}

inline std::uint64_t method_seed(const RunConfig& c, Method m, std::initializer_list<std::uint64_t> more = {}) {
  std::uint64_t s = numkit::derive_seed(c.seed_plan().model, {static_cast<std::uint64_t>(m) + 100});
  for (auto t : more) s = numkit::derive_seed(s, {t});
  return s;
}

inline std::uint64_t shuffle_seed(const RunConfig& c, Method m, std::initializer_list<std::uint64_t> more = {}) {
  std::uint64_t s = numkit::derive_seed(c.seed_plan().shuffle, {static_cast<std::uint64_t>(m) + 100});
  for (auto t : more) s = numkit::derive_seed(s, {t});
  return s;
}

inline void run_centralized(const RunConfig& c, const datahub::PartitionedDataset& p, MethodResult& r) {
  const auto pooled = p.pooled_training();
  const auto head = nnet::head_for(p.task);
  auto init = nnet::init_model(c.layers(p.num_features(), p.target_dim()), head, method_seed(c, r.method));
  nnet::TrainConfig tc{c.training.batch_size, c.training.epochs, c.training.lr(r.method), shuffle_seed(c, r.method)};
  nnet::EpochCallback cb;
  if (p.holdout.rows() > 0)
    cb = [&](std::size_t e, const nnet::MlpModel& m) {
      const double v = holdout_score(m, p);
      r.history.points.push_back({e, static_cast<double>(e), v, v, v});
    };
  r.models.emplace_back("centralized", nnet::train_local(init, pooled.x, pooled.y, tc, nullptr, cb));
}

inline void run_local(const RunConfig& c, const datahub::PartitionedDataset& p, MethodResult& r) {
  const auto head = nnet::head_for(p.task);
  const std::size_t epochs = c.training.epochs;
  std::vector<std::vector<double>> per_epoch(epochs);
  for (std::size_t i = 0; i < p.num_groups(); ++i)
    for (std::size_t j = 0; j < p.groups[i].size(); ++j) {
      const auto& b = p.groups[i][j];
      const std::string name = "local_g" + std::to_string(i + 1) + "_u" + std::to_string(j + 1);
      protocol::History own{r.history.kind, {}};
      auto init = nnet::init_model(c.layers(p.num_features(), p.target_dim()), head, method_seed(c, r.method, {i, j}));
      nnet::TrainConfig tc{c.training.batch_size, epochs, c.training.lr(r.method), shuffle_seed(c, r.method, {i, j})};
      nnet::EpochCallback cb;
      if (p.holdout.rows() > 0)
        cb = [&](std::size_t e, const nnet::MlpModel& m) {
          const double v = holdout_score(m, p);
          per_epoch[e - 1].push_back(v);
          own.points.push_back({e, static_cast<double>(e), v, v, v});
        };
      r.models.emplace_back(name, nnet::train_local(init, b.x, b.y, tc, nullptr, cb));
      r.members.emplace_back(name, std::move(own));
    }
  if (p.holdout.rows() > 0)
    for (std::size_t e = 0; e < epochs; ++e)
      r.history.points.push_back(spread(e + 1, static_cast<double>(e + 1), per_epoch[e]));
}

inline void run_fedavg(const RunConfig& c, const datahub::PartitionedDataset& p, MethodResult& r) {
  std::vector<Mat> xs, ys;
  for (const auto& g : p.groups)
    for (const auto& b : g) {
      xs.push_back(b.x);
      ys.push_back(b.y);
    }
  auto init = nnet::init_model(c.layers(p.num_features(), p.target_dim()), nnet::head_for(p.task),
                               method_seed(c, r.method));
  nnet::TrainConfig tc{c.training.batch_size, c.training.epochs_per_round, c.training.lr(r.method), 0};
  protocol::RoundHook hook;
  if (p.holdout.rows() > 0)
    hook = [&](std::size_t t, const nnet::MlpModel& m) {
      const double v = holdout_score(m, p);
      r.history.points.push_back({t, static_cast<double>(t * tc.epochs), v, v, v});
    };
  r.models.emplace_back("fedavg",
                        protocol::run_federated(xs, ys, init, c.training.rounds, tc, shuffle_seed(c, r.method), hook));
}

inline void run_dc(const RunConfig& c, const datahub::PartitionedDataset& p, MethodResult& r) {
  auto pc = c.protocol_config(p.target_dim());
  pc.train.learning_rate = c.training.lr(Method::kDc);
  auto dc = protocol::run_dc_baseline(p, pc);
  r.history = std::move(dc.history);
  r.ledger = std::move(dc.ledger);
  r.partition_fingerprint = dc.partition_fingerprint;
  r.models.emplace_back("dc", std::move(dc.h));
}

inline void run_feddcl(const RunConfig& c, const datahub::PartitionedDataset& p, MethodResult& r) {
  const auto pc = c.protocol_config(p.target_dim());
  r.ledger.emplace();
  auto res = protocol::run_feddcl(p, pc, &*r.ledger);
  r.history = res.history;
  r.report = protocol::run_report_json(res, pc);
  r.partition_fingerprint = res.partition_fingerprint;
  r.models.emplace_back("feddcl", std::move(res.h));
}

}  // namespace detail

inline MethodResult run_method(const RunConfig& c, const datahub::PartitionedDataset& p, Method m) {
  MethodResult r;
  r.method = m;
  r.history.kind = nnet::metric_for(p.task);
  r.partition_fingerprint = p.fingerprint();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (m) {
      case Method::kCentralized: detail::run_centralized(c, p, r); break;
      case Method::kLocal: detail::run_local(c, p, r); break;
      case Method::kFedAvg: detail::run_fedavg(c, p, r); break;
      case Method::kDc: detail::run_dc(c, p, r); break;
      case Method::kFedDcl: detail::run_feddcl(c, p, r); break;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Runs every configured method on one shared partition and holdout.
inline ExperimentResult run_experiment(const RunConfig& c, const datahub::PartitionedDataset& p) {
  ExperimentResult out;
  out.name = c.name;
  out.seed = c.seed;
  out.task = p.task;
  out.partition_fingerprint = p.fingerprint();
  out.train_rows = p.pooled_training().rows();
  out.holdout_rows = p.holdout.rows();
  for (Method m : c.methods) {
    out.methods.push_back(run_method(c, p, m));
    if (out.methods.back().partition_fingerprint != out.partition_fingerprint)
      throw Error("run_experiment: " + to_string(m) + " ran on a different partition");
  }
  return out;
}

inline ExperimentResult run_experiment(const RunConfig& c) {
  const auto table = load_table(c.dataset);
  return run_experiment(c, make_partition(c, table));
}

}  // namespace feddcl::bench
