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

#include <json.hpp>

#include "feddcl/protocol/runner.hpp"

namespace feddcl::protocol {

inline nlohmann::ordered_json history_json(const History& h) {
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& s : h.points)
    pts.push_back({{"index", s.index}, {"epoch_equivalent", s.epoch_equivalent}, {"value", s.value},
                   {"min", s.min}, {"max", s.max}});
  return {{"metric", nnet::to_string(h.kind)}, {"points", pts}};
}

inline nlohmann::ordered_json ledger_summary_json(const CommLedger& l) {
  nlohmann::ordered_json j;
  for (const auto& [edge, s] : l.summary()) j[to_string(edge)] = {{"messages", s.messages}, {"bytes", s.bytes}};
  return j;
}

inline nlohmann::ordered_json seeds_json(const SeedPlan& s) {
  return {{"anchor", s.anchor}, {"mapping", s.mapping}, {"mask", s.mask},
          {"donor", s.donor},   {"model", s.model},     {"shuffle", s.shuffle}};
}

inline nlohmann::ordered_json config_json(const ProtocolConfig& c) {
  return {{"anchor_rows", c.anchor_rows},
          {"m_tilde", c.m_tilde},
          {"m_tilde_table", c.m_tilde_table},
          {"m_hat", c.m_hat},
          {"m_hat_group", c.m_hat_group},
          {"layers", c.layers},
          {"rounds", c.rounds},
          {"epochs_per_round", c.train.epochs},
          {"central_epochs", c.central_epochs},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.learning_rate},
          {"seeds", seeds_json(c.seeds)}};
}

/// Protocol run report: config echo, donors, masks, residuals, per-round
/// metrics and the ledger summary. Mapping parameters are never included.
inline nlohmann::ordered_json run_report_json(const FedDclResult& r, const ProtocolConfig& c) {
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.groups.size(); ++i) {
    const auto& g = r.groups[i];
    nlohmann::ordered_json res = nlohmann::ordered_json::array();
    for (const auto& ia : r.alignment[i].institutions) res.push_back(ia.residual);
    groups.push_back({{"group", i + 1},
                      {"donor_institution", g.donor + 1},
                      {"e1_seed", g.e1_seed},
                      {"mask_attempts", g.mask_attempts},
                      {"mask_condition", g.mask_condition},
                      {"singular_values", g.sigma},
                      {"alignment_residuals", res}});
  }
  return {{"config", config_json(c)},
          {"partition_fingerprint", r.partition_fingerprint},
          {"groups", groups},
          {"central",
           {{"donor_group", r.target.donor + 1},
            {"e2_seed", r.target.e2_seed},
            {"mask_attempts", r.target.mask_attempts},
            {"mask_condition", r.target.mask_condition},
            {"singular_values", r.target.d}}},
          {"max_alignment_residual", r.max_residual()},
          {"warnings", r.warnings()},
          {"history", history_json(r.history)},
          {"ledger", ledger_summary_json(r.ledger)}};
}

inline nlohmann::ordered_json theorem1_json(const Theorem1Report& r) {
  return {{"users", r.users},
          {"max_residual", r.max_residual},
          {"residuals", r.residuals},
          {"fit_error", r.fit_error},
          {"principal_angles", r.principal_angles},
          {"max_angle", r.max_angle}};
}

}  // namespace feddcl::protocol
