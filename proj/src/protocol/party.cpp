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

#include "vfmh/protocol/party.hpp"

#include <cmath>
#include <string>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/loss.hpp"

namespace vfmh::protocol {

Party Party::create(PartyIndex id, const PartyConfig& config) {
  config.spec.validate();
  config.optimizer.validate();
  Party p;
  p.id = id;
  p.spec = config.spec;
  p.optimizer = config.optimizer;
  p.model = init_network(config.spec, config.init_seed);
  p.opt_state = optim::init_state(config.optimizer, p.model.params);
  return p;
}

Tensor local_embedding(Party& party, const Tensor& batch) {
  ForwardResult r = forward_embedding(party.model, party.spec, batch);
  party.embedding_trace = std::move(r.trace);
  return std::move(r.output);
}

Tensor local_prediction(Party& party, const Tensor& global_embedding) {
  ForwardResult r = forward_decision(party.model, party.spec, global_embedding);
  party.decision_trace = std::move(r.trace);
  return std::move(r.output);
}

LocalGradients local_gradients(const Party& party, const Tensor& grad_logits,
                               std::size_t num_parties) {
  if (!party.embedding_trace || !party.decision_trace) {
    throw ProtocolError("party " + std::to_string(party.id) +
                        " has no cached forward pass for this round");
  }
  if (num_parties == 0) throw ProtocolError("num_parties must be positive");
  BackwardResult dec = backward_decision(party.model, party.spec,
                                         *party.decision_trace, grad_logits);
  Tensor grad_self = std::move(dec.grad_input);
  const double share = 1.0 / static_cast<double>(num_parties);
  for (double& v : grad_self.storage()) v *= share;
  LocalGradients out;
  out.embedding = backward_embedding(party.model, party.spec,
                                     *party.embedding_trace, grad_self);
  out.decision = std::move(dec.param_grads);
  return out;
}

LocalGradients local_update(Party& party, const Tensor& grad_logits,
                            std::size_t num_parties) {
  LocalGradients g = local_gradients(party, grad_logits, num_parties);
  std::vector<Tensor> all;
  all.reserve(party.model.params.size());
  for (const Tensor& t : g.embedding) all.push_back(t);
  for (const Tensor& t : g.decision) all.push_back(t);
  optim::step(party.optimizer, party.opt_state, party.model.params, all);
  party.embedding_trace.reset();
  party.decision_trace.reset();
  return g;
}

std::map<PartyIndex, AssistReply> active_assist_loss(
    const std::map<PartyIndex, Tensor>& predictions, std::span<const int> labels,
    std::size_t num_parties) {
  std::map<PartyIndex, AssistReply> out;
  for (std::size_t k = 0; k < num_parties; ++k) {
    auto it = predictions.find(static_cast<PartyIndex>(k));
    if (it == predictions.end()) {
      throw ProtocolError("missing prediction from party " + std::to_string(k));
    }
    LossResult r = softmax_cross_entropy(it->second, labels);
    if (!std::isfinite(r.loss)) {
      throw NumericError("non-finite loss for party " + std::to_string(k));
    }
    out.emplace(it->first, AssistReply{r.loss, std::move(r.grad_logits)});
  }
  return out;
}

}  // namespace vfmh::protocol
