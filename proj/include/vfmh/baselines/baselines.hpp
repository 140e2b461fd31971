// Copyright 2026 The vfmh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VFMH_BASELINES_BASELINES_HPP_
#define VFMH_BASELINES_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/metrics/ledger.hpp"
#include "vfmh/metrics/records.hpp"
#include "vfmh/protocol/party.hpp"
#include "vfmh/protocol/session.hpp"
#include "vfmh/transport/endpoint.hpp"

namespace vfmh::baselines {

enum class BaselineKind { kLocal, kAggVfl };

std::string_view baseline_name(BaselineKind kind);

struct LocalResult {
  NetworkState model;
  metrics::RunTracker tracker;  // party 0 only, zero messages
};

// Supervised training of the active party's full network on its own
// columns. Batches follow the session's shared shuffle.
LocalResult run_local(const protocol::PartyData& active,
                      const protocol::PartyConfig& party, std::size_t epochs,
                      std::size_t batch_size, std::uint64_t seed);

struct AveragedLoss {
  double loss = 0.0;
  // d(loss)/d(R_k) = (1/C) d(loss)/d(mean R), shared by every party.
  Tensor grad_per_party;
  Tensor mean_logits;
};

// Loss on the average of all parties' logits.
AveragedLoss averaged_logit_loss(const std::map<protocol::PartyIndex, Tensor>& predictions,
                                 std::span<const int> labels);

struct AggVflActiveResult {
  NetworkState model;
  metrics::RunTracker tracker;    // test_acc is each party's own-logit accuracy
  metrics::RoundLedger ledger;
  std::vector<double> joint_accuracy;  // per epoch, on averaged logits
};

AggVflActiveResult run_aggvfl_active(transport::Endpoint& endpoint,
                                     const protocol::SessionConfig& config,
                                     const protocol::PartyData& data);
NetworkState run_aggvfl_passive(transport::Endpoint& endpoint,
                                const protocol::SessionConfig& config,
                                const protocol::PartyData& data);

struct AggVflResult {
  std::vector<NetworkState> models;
  metrics::RunTracker tracker;
  metrics::RoundLedger ledger;
  std::vector<double> joint_accuracy;
};

// Every party in this process over the in-memory network.
AggVflResult run_aggvfl(const protocol::SessionConfig& config,
                        const std::vector<protocol::PartyData>& data);

}  // namespace vfmh::baselines

#endif  // VFMH_BASELINES_BASELINES_HPP_
