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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "feddcl/datahub.hpp"
#include "feddcl/nnet.hpp"
#include "feddcl/protocol/bus.hpp"
#include "feddcl/protocol/federated.hpp"
#include "feddcl/protocol/integrated.hpp"
#include "feddcl/protocol/steps.hpp"

namespace feddcl::protocol {

/// Independent streams for each random choice of a run, all derived from
/// one master seed unless set explicitly.
struct SeedPlan {
  std::uint64_t anchor = 0;
  std::uint64_t mapping = 0;
  std::uint64_t mask = 0;
  std::uint64_t donor = 0;
  std::uint64_t model = 0;
  std::uint64_t shuffle = 0;

  static SeedPlan from_master(std::uint64_t s) {
    using numkit::derive_seed;
    return {derive_seed(s, {1}), derive_seed(s, {2}), derive_seed(s, {3}),
            derive_seed(s, {4}), derive_seed(s, {5}), derive_seed(s, {6})};
  }
  bool operator==(const SeedPlan&) const = default;
};

struct ProtocolConfig {
  std::size_t anchor_rows = datahub::kDefaultAnchorRows;
  std::size_t m_tilde = 4;
  /// Optional per-(group, institution) widths; overrides m_tilde.
  std::vector<std::vector<std::size_t>> m_tilde_table;
  std::size_t m_hat = 4;
  /// Optional per-group intra-group ranks; defaults to m_hat.
  std::vector<std::size_t> m_hat_group;
  /// Full layer list; the first entry must equal m_hat.
  std::vector<std::size_t> layers{4, 20, 1};
  std::size_t rounds = 20;
  nnet::TrainConfig train{32, 4, 0.01, 0};
  /// Epochs of the DC baseline's central training.
  std::size_t central_epochs = 40;
  SeedPlan seeds = SeedPlan::from_master(0);

  std::size_t width(std::size_t i, std::size_t j) const {
    return m_tilde_table.empty() ? m_tilde : m_tilde_table.at(i).at(j);
  }
  std::size_t group_rank(std::size_t i) const { return m_hat_group.empty() ? m_hat : m_hat_group.at(i); }
};

/// Field-path checks against the partition; throws ConfigError.
inline void validate_config(const datahub::PartitionedDataset& parts, const ProtocolConfig& cfg, bool training) {
  if (parts.num_groups() == 0) throw ConfigError("partition.groups", "no groups");
  if (cfg.anchor_rows == 0) throw ConfigError("anchor.r", "must be at least 1");
  if (!cfg.m_tilde_table.empty()) {
    if (cfg.m_tilde_table.size() != parts.num_groups())
      throw ConfigError("mapping.m_tilde_table", "needs one row per group");
    for (std::size_t i = 0; i < parts.num_groups(); ++i)
      if (cfg.m_tilde_table[i].size() != parts.groups[i].size())
        throw ConfigError("mapping.m_tilde_table[" + std::to_string(i) + "]", "needs one entry per institution");
  }
  for (std::size_t i = 0; i < parts.num_groups(); ++i)
    for (std::size_t j = 0; j < parts.groups[i].size(); ++j) {
      const auto w = cfg.width(i, j);
      const auto lim = std::min(parts.groups[i][j].rows(), parts.num_features());
      if (w < 1 || w > lim)
        throw ConfigError("mapping.m_tilde", "width " + std::to_string(w) + " for user (" + std::to_string(i + 1) +
                                                 "," + std::to_string(j + 1) + ") must be in [1, " +
                                                 std::to_string(lim) + "]");
    }
  if (!cfg.m_hat_group.empty() && cfg.m_hat_group.size() != parts.num_groups())
    throw ConfigError("alignment.m_hat_group", "needs one entry per group");
  if (cfg.m_hat < 1) throw ConfigError("alignment.m_hat", "must be at least 1");
  if (!training) return;
  if (cfg.layers.size() < 2) throw ConfigError("network.layers", "needs at least input and output sizes");
  if (cfg.layers.front() != cfg.m_hat)
    throw ConfigError("network.layers", "input size " + std::to_string(cfg.layers.front()) + " must equal m_hat " +
                                            std::to_string(cfg.m_hat));
  if (cfg.layers.back() != parts.target_dim())
    throw ConfigError("network.layers", "output size " + std::to_string(cfg.layers.back()) +
                                            " must equal target width " + std::to_string(parts.target_dim()));
  try {
    cfg.train.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("training", e.what());
  }
}

inline constexpr const char* kStepUpload = "line4:upload";
inline constexpr const char* kStepGroupBasis = "line7:group-basis";
inline constexpr const char* kStepTarget = "line10:target";
inline constexpr const char* kStepDownload = "line15:download";

/// Evaluates every user's integrated model on the holdout; value is the
/// mean, min/max the spread across users.
class UserEvaluator {
 public:
  UserEvaluator(const std::vector<IntegratedModel>& users, const datahub::LabeledTable& holdout)
      : holdout_(holdout) {
    if (holdout.rows() == 0) return;
    for (const auto& u : users) reps_.push_back(u.collaboration(holdout.x));
  }

  bool enabled() const noexcept { return !reps_.empty(); }

  Snapshot operator()(std::size_t index, double epochs, const nnet::MlpModel& h) const {
    Snapshot s{index, epochs, 0.0, INFINITY, -INFINITY};
    for (const auto& rep : reps_) {
      const double v = nnet::score_predictions(nnet::forward(h, rep), holdout_.y, holdout_.task).value;
      s.value += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    s.value /= static_cast<double>(reps_.size());
    return s;
  }

 private:
  const datahub::LabeledTable& holdout_;
  std::vector<Mat> reps_;
};

// ---- roles ----------------------------------------------------------------

class UserNode {
 public:
  UserNode(std::size_t i, std::size_t j, const datahub::InstitutionBlock& block)
      : id_(Party::user(i, j)), block_(block) {}

  const Party& id() const noexcept { return id_; }
  const UserMapping& mapping() const noexcept { return mapping_; }
  const IntegratedModel& model() const noexcept { return model_; }

  /// Lines 2-3 with the PCA x rotation reducer.
  void build(const datahub::AnchorSet& anchor, std::size_t m_tilde, std::uint64_t seed) {
    mapping_ = user_build_intermediate(id_.group, id_.institution, block_.x, anchor, m_tilde, seed);
  }
  /// Lines 2-3 with a caller-chosen linear reducer (no centering).
  void build_linear(const datahub::AnchorSet& anchor, Mat f_mat, std::uint64_t seed) {
    mapping_ = make_mapping(id_.group, id_.institution, block_.x, anchor.a,
                            std::vector<double>(block_.x.cols(), 0.0), std::move(f_mat), seed);
  }

  /// Line 4.
  void upload(MessageBus& bus) const {
    bus.send({kStepUpload, id_, Party::group_server(id_.group),
              {mat_payload(PayloadKind::kXTilde, mapping_.x_tilde), mat_payload(PayloadKind::kATilde, mapping_.a_tilde),
               mat_payload(PayloadKind::kTargets, block_.y)}});
  }

  /// Lines 15-16.
  void receive_download(MessageBus& bus) {
    auto m = bus.receive(id_, kStepDownload);
    model_ = {id_.group, id_.institution, mapping_.mean, mapping_.f_mat, m.mat(PayloadKind::kAlignment), m.model()};
  }

 private:
  Party id_;
  const datahub::InstitutionBlock& block_;
  UserMapping mapping_;
  IntegratedModel model_;
};

class GroupServer {
 public:
  GroupServer(std::size_t i, std::size_t users) : id_(Party::group_server(i)), users_(users) {}

  const Party& id() const noexcept { return id_; }
  const GroupBasis& basis() const noexcept { return basis_; }
  const AlignmentBundle& alignment() const noexcept { return align_; }
  const Mat& x_hat() const noexcept { return align_.x_hat; }
  const Mat& y() const noexcept { return y_; }
  const std::vector<Mat>& a_tildes() const noexcept { return a_; }
  std::size_t rows() const noexcept { return y_.rows(); }

  void collect_uploads(MessageBus& bus) {
    std::vector<Mat> ys;
    for (std::size_t j = 0; j < users_; ++j) {
      auto m = bus.receive(id_, kStepUpload);
      if (m.sender != Party::user(id_.group, j))
        throw PreconditionError(to_string(id_) + ": upload out of order from " + to_string(m.sender));
      x_.push_back(m.mat(PayloadKind::kXTilde));
      a_.push_back(m.mat(PayloadKind::kATilde));
      ys.push_back(m.mat(PayloadKind::kTargets));
    }
    y_ = numkit::vcat(ys);
  }

  /// Lines 5-7.
  void share_basis(MessageBus& bus, std::size_t m_hat_i, std::uint64_t e1_seed, std::uint64_t donor_seed) {
    std::vector<std::size_t> widths;
    for (const auto& a : a_) widths.push_back(a.cols());
    const auto donor = choose_donor(widths, m_hat_i, donor_seed,
                                    "alignment.m_hat_group[" + std::to_string(id_.group) + "]");
    basis_ = group_build_basis(id_.group, a_, m_hat_i, e1_seed, donor);
    bus.send({kStepGroupBasis, id_, Party::central(), {mat_payload(PayloadKind::kGroupBasis, basis_.b_tilde)}});
  }

  /// Lines 10-14.
  void align(MessageBus& bus) {
    auto m = bus.receive(id_, kStepTarget);
    align_ = group_compute_alignment(a_, m.mat(PayloadKind::kCollabTarget), x_);
  }

  /// Line 15 for every user of the group.
  void send_downloads(MessageBus& bus, const nnet::MlpModel& h) const {
    for (std::size_t j = 0; j < users_; ++j)
      bus.send({kStepDownload, id_, Party::user(id_.group, j),
                {mat_payload(PayloadKind::kAlignment, align_.institutions[j].g), model_payload(h)}});
  }

 private:
  Party id_;
  std::size_t users_;
  std::vector<Mat> x_, a_;
  Mat y_;
  GroupBasis basis_;
  AlignmentBundle align_;
};

class CentralServer {
 public:
  explicit CentralServer(std::size_t groups) : groups_(groups) {}

  const CentralTarget& target() const noexcept { return target_; }

  /// Lines 8-10.
  void build_target(MessageBus& bus, std::span<const std::size_t> group_ranks, std::size_t m_hat, std::uint64_t e2_seed,
                    std::uint64_t donor_seed) {
    std::vector<Mat> b;
    for (std::size_t i = 0; i < groups_; ++i) {
      auto m = bus.receive(Party::central(), kStepGroupBasis);
      if (m.sender != Party::group_server(i))
        throw PreconditionError("central: group basis out of order from " + to_string(m.sender));
      b.push_back(m.mat(PayloadKind::kGroupBasis));
    }
    const auto donor = choose_donor(group_ranks, m_hat, donor_seed, "alignment.m_hat");
    target_ = central_build_target(b, m_hat, e2_seed, donor);
    for (std::size_t i = 0; i < groups_; ++i)
      bus.send({kStepTarget, Party::central(), Party::group_server(i),
                {mat_payload(PayloadKind::kCollabTarget, target_.z)}});
  }

 private:
  std::size_t groups_;
  CentralTarget target_;
};

// ---- orchestration --------------------------------------------------------

struct FedDclResult {
  std::vector<IntegratedModel> users;  // ascending (i, j)
  nnet::MlpModel h;
  History history;
  CommLedger ledger;
  datahub::AnchorSet anchor;
  std::vector<UserMapping> mappings;  // user-private; kept for inspection only
  std::vector<GroupBasis> groups;
  CentralTarget target;
  std::vector<AlignmentBundle> alignment;
  std::uint64_t partition_fingerprint = 0;

  double max_residual() const {
    double r = 0.0;
    for (const auto& a : alignment) r = std::max(r, a.max_residual());
    return r;
  }
  /// Collaboration representation of every training row, groups stacked.
  Mat stacked_x_hat() const {
    std::vector<Mat> b;
    for (const auto& a : alignment) b.push_back(a.x_hat);
    return numkit::vcat(b);
  }
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    for (const auto& g : groups) w.insert(w.end(), g.warnings.begin(), g.warnings.end());
    w.insert(w.end(), target.warnings.begin(), target.warnings.end());
    return w;
  }
};

/// Per-user linear reducer override, used by the exact-recovery checks.
using LinearMapFactory = std::function<Mat(std::size_t i, std::size_t j, std::uint64_t seed)>;

namespace detail {

template <typename F>
auto stage(const char* label, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(label, e.what());
  }
}

inline FedDclResult run_pipeline(const datahub::PartitionedDataset& parts, const ProtocolConfig& cfg, bool training,
                                 const LinearMapFactory& linear, CommLedger* ledger_out) {
  validate_config(parts, cfg, training);
  FedDclResult res;
  res.partition_fingerprint = parts.fingerprint();
  CommLedger local_ledger;
  CommLedger& ledger = ledger_out ? *ledger_out : local_ledger;
  MessageBus bus(ledger);
  const std::size_t d = parts.num_groups();

  // Line 1: the anchor is regenerated identically by every user.
  res.anchor = stage("anchor", [&] {
    return datahub::generate_anchor(datahub::feature_ranges(parts), cfg.anchor_rows, cfg.seeds.anchor);
  });

  std::vector<UserNode> users;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < parts.groups[i].size(); ++j) users.emplace_back(i, j, parts.groups[i][j]);
  std::vector<GroupServer> servers;
  for (std::size_t i = 0; i < d; ++i) servers.emplace_back(i, parts.groups[i].size());
  CentralServer central(d);

  stage("intermediate", [&] {
    for (auto& u : users) {
      const auto& p = u.id();
      const auto seed = numkit::derive_seed(cfg.seeds.mapping, {p.group, p.institution});
      if (linear)
        u.build_linear(res.anchor, linear(p.group, p.institution, seed), seed);
      else
        u.build(res.anchor, cfg.width(p.group, p.institution), seed);
      u.upload(bus);
    }
    for (auto& s : servers) s.collect_uploads(bus);
  });

  stage("group-basis", [&] {
    for (std::size_t i = 0; i < d; ++i)
      servers[i].share_basis(bus, cfg.group_rank(i), numkit::derive_seed(cfg.seeds.mask, {1, i}),
                             numkit::derive_seed(cfg.seeds.donor, {1, i}));
  });

  stage("central-target", [&] {
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < d; ++i) ranks.push_back(cfg.group_rank(i));
    central.build_target(bus, ranks, cfg.m_hat, numkit::derive_seed(cfg.seeds.mask, {2}),
                         numkit::derive_seed(cfg.seeds.donor, {2}));
  });

  stage("alignment", [&] {
    for (auto& s : servers) s.align(bus);
  });

  // Users' integrated models share the mapping part before training ends,
  // which lets the history evaluate them round by round.
  std::vector<IntegratedModel> preview;
  for (std::size_t k = 0, i = 0; i < d; ++i)
    for (std::size_t j = 0; j < parts.groups[i].size(); ++j, ++k)
      preview.push_back({i, j, users[k].mapping().mean, users[k].mapping().f_mat,
                         servers[i].alignment().institutions[j].g, {}});

  const auto head = nnet::head_for(parts.task);
  res.history.kind = nnet::metric_for(parts.task);
  res.h = training ? nnet::init_model(cfg.layers, head, cfg.seeds.model)
                   : nnet::init_model({cfg.m_hat, parts.target_dim()}, head, cfg.seeds.model);
  if (training) {
    stage("federated-training", [&] {
      UserEvaluator eval(preview, parts.holdout);
      std::vector<Mat> xs, ys;
      FederatedTransport tr{&bus, Party::central(), {}};
      for (const auto& s : servers) {
        xs.push_back(s.x_hat());
        ys.push_back(s.y());
        tr.participants.push_back(s.id());
      }
      RoundHook hook;
      if (eval.enabled())
        hook = [&](std::size_t t, const nnet::MlpModel& h) {
          res.history.points.push_back(eval(t, static_cast<double>(t * cfg.train.epochs), h));
        };
      res.h = run_federated(xs, ys, res.h, cfg.rounds, cfg.train, cfg.seeds.shuffle, hook, &tr);
    });
  }

  stage("download", [&] {
    for (const auto& s : servers) s.send_downloads(bus, res.h);
    for (auto& u : users) u.receive_download(bus);
  });

  for (const auto& u : users) {
    res.users.push_back(u.model());
    res.mappings.push_back(u.mapping());
  }
  for (const auto& s : servers) {
    res.groups.push_back(s.basis());
    res.alignment.push_back(s.alignment());
  }
  res.target = central.target();
  res.ledger = ledger;
  return res;
}

}  // namespace detail

/// Full FedDCL run. When `ledger` is given, it receives every
/// message as it is sent, so it survives a StageError.
inline FedDclResult run_feddcl(const datahub::PartitionedDataset& parts, const ProtocolConfig& cfg,
                               CommLedger* ledger = nullptr, const LinearMapFactory& linear = {}) {
  return detail::run_pipeline(parts, cfg, true, linear, ledger);
}

/// Steps 1-3 and the download of G only (h stays at its initial value).
inline FedDclResult build_collaboration(const datahub::PartitionedDataset& parts, const ProtocolConfig& cfg,
                                        const LinearMapFactory& linear = {}) {
  return detail::run_pipeline(parts, cfg, false, linear, nullptr);
}

// ---- DC baseline ----------------------------------------------------------

struct DcResult {
  std::vector<IntegratedModel> users;
  nnet::MlpModel h;
  History history;
  CommLedger ledger;
  numkit::SvdFactors svd;
  Mat c;
  Mat z;
  std::size_t donor = 0;  // flat user index
  std::vector<InstitutionAlignment> alignment;
  std::uint64_t partition_fingerprint = 0;

  Mat stacked_x_hat() const {
    std::vector<Mat> b;
    for (const auto& a : alignment) b.push_back(a.x_hat);
    return numkit::vcat(b);
  }
};

inline constexpr const char* kStepDcUpload = "dc:upload";
inline constexpr const char* kStepDcDownload = "dc:download";

/// Conventional DC analysis: one server receives every user's
/// intermediate representations, builds Z from the SVD of all anchor
/// blocks, and trains h centrally on the stacked collaboration data.
inline DcResult run_dc_baseline(const datahub::PartitionedDataset& parts, const ProtocolConfig& cfg,
                                bool training = true, const LinearMapFactory& linear = {}) {
  validate_config(parts, cfg, training);
  DcResult res;
  res.partition_fingerprint = parts.fingerprint();
  MessageBus bus(res.ledger);
  const Party server = Party::central();
  auto anchor = detail::stage("anchor", [&] {
    return datahub::generate_anchor(datahub::feature_ranges(parts), cfg.anchor_rows, cfg.seeds.anchor);
  });

  std::vector<UserMapping> maps;
  detail::stage("intermediate", [&] {
    for (std::size_t i = 0; i < parts.num_groups(); ++i)
      for (std::size_t j = 0; j < parts.groups[i].size(); ++j) {
        const auto seed = numkit::derive_seed(cfg.seeds.mapping, {i, j});
        const auto& x = parts.groups[i][j].x;
        if (linear)
          maps.push_back(make_mapping(i, j, x, anchor.a, std::vector<double>(x.cols(), 0.0), linear(i, j, seed), seed));
        else
          maps.push_back(user_build_intermediate(i, j, x, anchor, cfg.width(i, j), seed));
        bus.send({kStepDcUpload, Party::user(i, j), server,
                  {mat_payload(PayloadKind::kXTilde, maps.back().x_tilde),
                   mat_payload(PayloadKind::kATilde, maps.back().a_tilde),
                   mat_payload(PayloadKind::kTargets, parts.groups[i][j].y)}});
      }
  });

  std::vector<Mat> a, x, y;
  detail::stage("collaboration", [&] {
    for (std::size_t k = 0; k < maps.size(); ++k) {
      auto m = bus.receive(server, kStepDcUpload);
      x.push_back(m.mat(PayloadKind::kXTilde));
      a.push_back(m.mat(PayloadKind::kATilde));
      y.push_back(m.mat(PayloadKind::kTargets));
    }
    Mat cat = numkit::hcat(a);
    if (cfg.m_hat > std::min(cat.rows(), cat.cols()))
      throw ConfigError("alignment.m_hat", "rank exceeds the stacked anchor block");
    std::vector<std::size_t> widths;
    for (const auto& b : a) widths.push_back(b.cols());
    res.donor = choose_donor(widths, cfg.m_hat, numkit::derive_seed(cfg.seeds.donor, {3}), "alignment.m_hat");
    res.svd = numkit::truncated_svd(cat, cfg.m_hat, "stacked anchor blocks");
    auto off = detail::column_offsets(a);
    auto mask = detail::draw_mask(res.svd, off[res.donor], cfg.m_hat, numkit::derive_seed(cfg.seeds.mask, {3}),
                                  "stacked anchor blocks");
    res.c = mask.c;
    res.z = numkit::matmul(res.svd.u, res.c);
    for (std::size_t k = 0; k < a.size(); ++k) {
      auto ls = numkit::lstsq_multi(a[k], res.z);
      res.alignment.push_back({ls.solution, ls.residual, ls.rank_deficient, numkit::matmul(x[k], ls.solution)});
    }
  });

  std::vector<IntegratedModel> preview;
  for (std::size_t k = 0; k < maps.size(); ++k)
    preview.push_back({maps[k].group, maps[k].institution, maps[k].mean, maps[k].f_mat, res.alignment[k].g, {}});

  const auto head = nnet::head_for(parts.task);
  res.history.kind = nnet::metric_for(parts.task);
  res.h = training ? nnet::init_model(cfg.layers, head, cfg.seeds.model)
                   : nnet::init_model({cfg.m_hat, parts.target_dim()}, head, cfg.seeds.model);
  if (training) {
    detail::stage("central-training", [&] {
      UserEvaluator eval(preview, parts.holdout);
      nnet::TrainConfig tc = cfg.train;
      tc.epochs = cfg.central_epochs;
      tc.shuffle_seed = numkit::derive_seed(cfg.seeds.shuffle, {3});
      nnet::EpochCallback hook;
      if (eval.enabled())
        hook = [&](std::size_t e, const nnet::MlpModel& h) {
          res.history.points.push_back(eval(e, static_cast<double>(e), h));
        };
      res.h = nnet::train_local(res.h, res.stacked_x_hat(), numkit::vcat(y), tc, nullptr, hook);
    });
  }

  detail::stage("download", [&] {
    for (std::size_t k = 0; k < maps.size(); ++k) {
      const Party u = Party::user(maps[k].group, maps[k].institution);
      bus.send({kStepDcDownload, server, u, {mat_payload(PayloadKind::kAlignment, res.alignment[k].g), model_payload(res.h)}});
      auto m = bus.receive(u, kStepDcDownload);
      res.users.push_back({maps[k].group, maps[k].institution, maps[k].mean, maps[k].f_mat,
                           m.mat(PayloadKind::kAlignment), m.model()});
    }
  });
  return res;
}

// ---- Exact recovery --------------------------------------------------------------

struct Theorem1Report {
  double max_residual = 0.0;
  std::vector<double> residuals;  // per user, ascending (i, j)
  Mat recovered_f;                // m x m_hat
  double fit_error = 0.0;         // ||X F - X_hat||_F / ||X_hat||_F
  std::vector<double> principal_angles;
  double max_angle = 0.0;
  std::size_t users = 0;
};

/// Runs the collaboration steps with F_ij = F0 E_ij (E_ij random orthogonal,
/// no centering) and checks that the stacked collaboration data equals X F
/// for one F whose range is range(F0).
inline Theorem1Report verify_theorem1(const datahub::PartitionedDataset& parts, const Mat& f0, ProtocolConfig cfg) {
  if (f0.rows() != parts.num_features())
    throw ParameterError("verify_theorem1: F0 has " + std::to_string(f0.rows()) + " rows, data has " +
                         std::to_string(parts.num_features()) + " features");
  if (numkit::lstsq_multi(f0, f0).rank != f0.cols())
    throw PreconditionError("verify_theorem1: F0 must have full column rank");
  const std::size_t mt = f0.cols();
  cfg.m_tilde = mt;
  cfg.m_tilde_table.clear();
  auto anchor = datahub::generate_anchor(datahub::feature_ranges(parts), cfg.anchor_rows, cfg.seeds.anchor);
  auto af0 = numkit::singular_values(numkit::matmul(anchor.a, f0), "anchor times F0");
  if (af0.back() <= kRankTolerance * af0.front())
    throw PreconditionError("verify_theorem1: rank(A F) < m_tilde; the anchor does not see every direction of F0");

  auto res = build_collaboration(parts, cfg, [&](std::size_t, std::size_t, std::uint64_t seed) {
    numkit::RngStream rng(seed);
    return numkit::matmul(f0, numkit::random_orthogonal(mt, rng));
  });

  Theorem1Report rep;
  for (const auto& a : res.alignment)
    for (const auto& ia : a.institutions) rep.residuals.push_back(ia.residual);
  rep.max_residual = *std::max_element(rep.residuals.begin(), rep.residuals.end());
  rep.users = rep.residuals.size();
  Mat x_hat = res.stacked_x_hat();
  Mat x = parts.pooled_training().x;
  auto fit = numkit::lstsq_multi(x, x_hat);
  rep.recovered_f = fit.solution;
  rep.fit_error = fit.residual / std::max(numkit::frobenius_norm(x_hat), 1e-300);
  if (rep.recovered_f.cols() == f0.cols()) {
    rep.principal_angles = numkit::principal_angles(rep.recovered_f, f0);
    rep.max_angle = rep.principal_angles.empty() ? 0.0 : rep.principal_angles.back();
  } else {
    rep.max_angle = NAN;
  }
  return rep;
}

}  // namespace feddcl::protocol
