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

#include <functional>
#include <span>
#include <vector>

#include "feddcl/nnet.hpp"
#include "feddcl/protocol/bus.hpp"

namespace feddcl::protocol {

/// One point of a convergence curve. For curves that average several
/// models (users, institutions) `min` and `max` give the spread.
struct Snapshot {
  std::size_t index = 0;       // 1-based
  double epoch_equivalent = 0;
  double value = 0;
  double min = 0;
  double max = 0;
};

struct History {
  nnet::MetricKind kind = nnet::MetricKind::kRmse;
  std::vector<Snapshot> points;
};

/// Called after every aggregation with the 1-based round number.
using RoundHook = std::function<void(std::size_t round, const nnet::MlpModel&)>;

/// Routes the per-round broadcast and update messages over a bus.
struct FederatedTransport {
  MessageBus* bus = nullptr;
  Party server;
  std::vector<Party> participants;
};

inline constexpr const char* kStepBroadcast = "fedavg:broadcast";
inline constexpr const char* kStepUpdate = "fedavg:update";

/// FedAvg: every round the shared model is sent to each participant, trained
/// there for cfg.epochs on its own rows, and averaged with weights n_k.
/// Participant k in round t shuffles with derive_seed(shuffle_seed, {t, k}).
inline nnet::MlpModel run_federated(std::span<const Mat> xs, std::span<const Mat> ys, nnet::MlpModel global,
                                    std::size_t rounds, nnet::TrainConfig cfg, std::uint64_t shuffle_seed,
                                    const RoundHook& on_round = {}, const FederatedTransport* transport = nullptr) {
  if (xs.empty() || xs.size() != ys.size())
    throw ParameterError("run_federated: need matching, non-empty participant data");
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k].cols() != global.input_size() || ys[k].cols() != global.output_size() || xs[k].rows() != ys[k].rows())
      throw AggregationError(k, "data shape " + numkit::shape_str(xs[k]) + " / " + numkit::shape_str(ys[k]) +
                                    " does not fit model layers");
  if (transport && transport->participants.size() != xs.size())
    throw ParameterError("run_federated: transport participant count mismatch");
  std::vector<nnet::MlpModel> local(xs.size());
  std::vector<double> weights(xs.size());
  for (std::size_t t = 1; t <= rounds; ++t) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      nnet::MlpModel start;
      if (transport) {
        const Party& who = transport->participants[k];
        transport->bus->send({kStepBroadcast, transport->server, who, {model_payload(global)}});
        start = transport->bus->receive(who, kStepBroadcast).model();
      } else {
        start = global;
      }
      cfg.shuffle_seed = numkit::derive_seed(shuffle_seed, {t, k});
      local[k] = nnet::train_local(std::move(start), xs[k], ys[k], cfg);
      weights[k] = static_cast<double>(xs[k].rows());
      if (transport) {
        const Party& who = transport->participants[k];
        transport->bus->send({kStepUpdate, who, transport->server, {model_payload(local[k]), count_payload(xs[k].rows())}});
        auto msg = transport->bus->receive(transport->server, kStepUpdate);
        local[k] = msg.model();
        weights[k] = msg.mat(PayloadKind::kSampleCount)(0, 0);
      }
    }
    global = nnet::fedavg_aggregate(local, weights);
    if (on_round) on_round(t, global);
  }
  return global;
}

inline nnet::MlpModel run_federated(std::span<const Mat> xs, std::span<const Mat> ys,
                                    const std::vector<std::size_t>& layers, nnet::Head head, std::size_t rounds,
                                    const nnet::TrainConfig& cfg, std::uint64_t seed, const RoundHook& on_round = {}) {
  return run_federated(xs, ys, nnet::init_model(layers, head, numkit::derive_seed(seed, {0x696e6974})), rounds, cfg,
                       numkit::derive_seed(seed, {0x73687566}), on_round);
}

}  // namespace feddcl::protocol
