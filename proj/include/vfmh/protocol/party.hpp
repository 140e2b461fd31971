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

#ifndef VFMH_PROTOCOL_PARTY_HPP_
#define VFMH_PROTOCOL_PARTY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/core/tensor.hpp"
#include "vfmh/optim/optimizer.hpp"
#include "vfmh/transport/message.hpp"

namespace vfmh::protocol {

using transport::PartyIndex;

struct PartyConfig {
  NetworkSpec spec;
  optim::OptimizerConfig optimizer;
  std::uint64_t init_seed = 0;
};

// One participant's model pair, optimizer state, and the traces of the
// round in flight.
struct Party {
  PartyIndex id = 0;
  NetworkSpec spec;
  optim::OptimizerConfig optimizer;
  NetworkState model;
  optim::OptimizerState opt_state;
  std::optional<ForwardTrace> embedding_trace;
  std::optional<ForwardTrace> decision_trace;

  static Party create(PartyIndex id, const PartyConfig& config);
};

// Embedding of a local feature batch; caches the trace for local_update.
Tensor local_embedding(Party& party, const Tensor& batch);
// Logits of the decision net on the global embedding; caches the trace.
Tensor local_prediction(Party& party, const Tensor& global_embedding);

struct LocalGradients {
  std::vector<Tensor> embedding;  // params of the embedding net
  std::vector<Tensor> decision;   // params of the decision net
};

// Gradients for one round: the decision net from grad_logits, the
// embedding net through the party's own 1/C share of the global embedding.
LocalGradients local_gradients(const Party& party, const Tensor& grad_logits,
                               std::size_t num_parties);

// local_gradients followed by one optimizer step over both nets. Consumes
// the cached traces.
LocalGradients local_update(Party& party, const Tensor& grad_logits,
                            std::size_t num_parties);

struct AssistReply {
  double loss = 0.0;
  Tensor grad_logits;
};

// Loss and logit gradient for every party's prediction. Throws
// ProtocolError if a party in 0..num_parties-1 is missing, NumericError
// on a non-finite loss.
std::map<PartyIndex, AssistReply> active_assist_loss(
    const std::map<PartyIndex, Tensor>& predictions, std::span<const int> labels,
    std::size_t num_parties);

}  // namespace vfmh::protocol

#endif  // VFMH_PROTOCOL_PARTY_HPP_
