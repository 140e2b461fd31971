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

#include "vfmh/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/loss.hpp"
#include "vfmh/data/dataset.hpp"
#include "vfmh/optim/optimizer.hpp"
#include "vfmh/protocol/channel.hpp"

namespace vfmh::baselines {
namespace {

using metrics::Direction;
using metrics::Phase;
using protocol::Channel;
using protocol::PartyIndex;
using transport::LossAndGradMsg;
using transport::Message;
using transport::MsgType;
using transport::PredictionMsg;
using transport::RoundNonce;

// A party's whole network trained as one piece.
struct FullModel {
  NetworkSpec spec;
  optim::OptimizerConfig optimizer;
  NetworkState model;
  optim::OptimizerState opt_state;
  std::optional<ForwardTrace> trace;

  explicit FullModel(const protocol::PartyConfig& cfg)
      : spec(cfg.spec),
        optimizer(cfg.optimizer),
        model(init_network(cfg.spec, cfg.init_seed)),
        opt_state(optim::init_state(cfg.optimizer, model.params)) {
    optimizer.validate();
  }

  Tensor predict(const Tensor& x) {
    ForwardResult r = forward(model, spec, Segment::kFull, x);
    trace = std::move(r.trace);
    return std::move(r.output);
  }

  void update(const Tensor& grad_logits) {
    if (!trace) throw ProtocolError("no cached forward pass");
    BackwardResult g = backward(model, spec, *trace, grad_logits);
    optim::step(optimizer, opt_state, model.params, g.param_grads);
    trace.reset();
  }
};

std::vector<int> gather_labels(std::span<const int> labels,
                               std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

std::vector<std::vector<std::size_t>> eval_batches(std::size_t rows,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t lo = 0; lo < rows; lo += batch_size) {
    std::vector<std::size_t> b;
    for (std::size_t i = lo; i < std::min(rows, lo + batch_size); ++i) {
      b.push_back(i);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (argmax_row(logits.row(r)) == static_cast<std::size_t>(labels[r])) {
      ++correct;
    }
  }
  return correct;
}

RoundNonce make_nonce(std::size_t epoch, std::size_t batch) {
  return RoundNonce{static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(batch)};
}

bool runs_eval(const protocol::SessionConfig& config,
               const protocol::PartyData& data) {
  return config.evaluate && data.test.rank() == 2 && data.test.rows() > 0;
}

void validate_aggvfl(const protocol::SessionConfig& config) {
  if (config.num_passive < 1) {
    throw ConfigError("need at least one passive party");
  }
  if (config.parties.size() != config.num_parties()) {
    throw ConfigError("expected " + std::to_string(config.num_parties()) +
                      " party configurations");
  }
  if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

}  // namespace

std::string_view baseline_name(BaselineKind kind) {
  return kind == BaselineKind::kLocal ? "local" : "aggvfl";
}

LocalResult run_local(const protocol::PartyData& active,
                      const protocol::PartyConfig& party, std::size_t epochs,
                      std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  const std::size_t n = active.train.rows();
  if (active.train_labels.size() != n) {
    throw DataError("local training needs one label per row");
  }
  FullModel m(party);
  LocalResult result;
  const bool eval = active.test.rank() == 2 && active.test.rows() > 0;
  const auto test_batches =
      eval ? eval_batches(active.test.rows(), batch_size)
           : std::vector<std::vector<std::size_t>>{};
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& idx : data::batch_iter(n, batch_size, epoch, seed)) {
      const Tensor logits = m.predict(gather_rows(active.train, idx));
      const auto y = gather_labels(active.train_labels, idx);
      LossResult r = softmax_cross_entropy(logits, y);
      if (!std::isfinite(r.loss)) throw NumericError("non-finite local loss");
      m.update(r.grad_logits);
      loss_sum += r.loss * static_cast<double>(idx.size());
    }
    double acc = 0.0;
    if (eval) {
      std::size_t correct = 0;
      for (const auto& idx : test_batches) {
        correct += count_correct(
            forward(m.model, m.spec, Segment::kFull, gather_rows(active.test, idx))
                .output,
            gather_labels(active.test_labels, idx));
      }
      acc = static_cast<double>(correct) / static_cast<double>(active.test.rows());
    }
    result.tracker.append({0, epoch + 1,
                           n == 0 ? 0.0 : loss_sum / static_cast<double>(n),
                           acc, 0, 0, 0});
  }
  result.model = std::move(m.model);
  return result;
}

AveragedLoss averaged_logit_loss(
    const std::map<PartyIndex, Tensor>& predictions, std::span<const int> labels) {
  if (predictions.empty()) throw ProtocolError("no predictions to average");
  const auto shape = predictions.begin()->second.shape();
  Tensor mean(shape);
  for (const auto& [k, logits] : predictions) {
    if (logits.shape() != shape) {
      throw ShapeError("party " + std::to_string(k) + " logits have shape " +
                       shape_string(logits.shape()));
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += logits[i];
  }
  const double c = static_cast<double>(predictions.size());
  for (double& v : mean.storage()) v /= c;
  LossResult r = softmax_cross_entropy(mean, labels);
  if (!std::isfinite(r.loss)) throw NumericError("non-finite averaged loss");
  for (double& v : r.grad_logits.storage()) v /= c;
  return {r.loss, std::move(r.grad_logits), std::move(mean)};
}

AggVflActiveResult run_aggvfl_active(transport::Endpoint& endpoint,
                                     const protocol::SessionConfig& config,
                                     const protocol::PartyData& data) {
  validate_aggvfl(config);
  const std::size_t c = config.num_parties();
  const std::size_t n = data.train.rows();
  if (data.train_labels.size() != n) {
    throw DataError("active party needs one label per row");
  }
  AggVflActiveResult result;
  result.ledger = metrics::RoundLedger(config.num_passive, 2);
  Channel channel(endpoint, config.num_passive, config.timeout, &result.ledger);
  FullModel me(config.parties[0]);
  const bool eval = runs_eval(config, data);
  const std::size_t nb = data::num_batches(n, config.batch_size);
  const auto test_batches =
      eval ? eval_batches(data.test.rows(), config.batch_size)
           : std::vector<std::vector<std::size_t>>{};

  const auto collect = [&](Tensor own, RoundNonce nonce) {
    std::map<PartyIndex, Tensor> preds;
    const auto shape = own.shape();
    preds.emplace(transport::kActiveParty, std::move(own));
    for (std::size_t i = 0; i < config.num_passive; ++i) {
      Message msg = channel.expect(MsgType::kPrediction, nonce);
      auto& pr = std::get<PredictionMsg>(msg.payload);
      if (pr.logits.shape() != shape) {
        throw ProtocolError("party " + std::to_string(msg.sender) +
                            " sent logits of shape " +
                            shape_string(pr.logits.shape()));
      }
      preds.emplace(msg.sender, std::move(pr.logits));
    }
    return preds;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    channel.set_phase(Phase::kTrain, epoch);
    double loss_sum = 0.0;
    const auto batches =
        data::batch_iter(n, config.batch_size, epoch, config.seed);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const RoundNonce nonce = make_nonce(epoch, b);
      const auto y = gather_labels(data.train_labels, batches[b]);
      auto preds =
          collect(me.predict(gather_rows(data.train, batches[b])), nonce);
      AveragedLoss avg = averaged_logit_loss(preds, y);
      for (std::size_t k = 1; k < c; ++k) {
        channel.send(static_cast<PartyIndex>(k),
                     LossAndGradMsg{nonce, static_cast<PartyIndex>(k), avg.loss,
                                    avg.grad_per_party});
      }
      me.update(avg.grad_per_party);
      loss_sum += avg.loss * static_cast<double>(batches[b].size());
      result.ledger.end_round(epoch);
    }
    std::vector<double> accs(c, 0.0);
    double joint = 0.0;
    if (eval) {
      channel.set_phase(Phase::kEval, epoch);
      std::vector<std::size_t> correct(c, 0);
      std::size_t joint_correct = 0;
      for (std::size_t j = 0; j < test_batches.size(); ++j) {
        const RoundNonce nonce = make_nonce(epoch, nb + j);
        const auto y = gather_labels(data.test_labels, test_batches[j]);
        auto preds = collect(
            forward(me.model, me.spec, Segment::kFull,
                    gather_rows(data.test, test_batches[j]))
                .output,
            nonce);
        for (const auto& [k, logits] : preds) correct[k] += count_correct(logits, y);
        joint_correct += count_correct(averaged_logit_loss(preds, y).mean_logits, y);
      }
      const double rows = static_cast<double>(data.test.rows());
      for (std::size_t k = 0; k < c; ++k) {
        accs[k] = static_cast<double>(correct[k]) / rows;
      }
      joint = static_cast<double>(joint_correct) / rows;
    }
    result.joint_accuracy.push_back(joint);
    const double loss = n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
    metrics::EpochRecord active{0, epoch + 1, loss, accs[0], 0, 0, 0};
    std::vector<metrics::EpochRecord> passive;
    for (std::size_t k = 1; k < c; ++k) {
      const auto up = result.ledger.tally(Phase::kTrain, epoch, k, Direction::kUp);
      const auto down =
          result.ledger.tally(Phase::kTrain, epoch, k, Direction::kDown);
      active.msgs_up += up.messages;
      active.msgs_down += down.messages;
      active.bytes += up.bytes + down.bytes;
      passive.push_back({k, epoch + 1, loss, accs[k], up.messages,
                         down.messages, up.bytes + down.bytes});
    }
    result.tracker.append(active);
    for (const auto& r : passive) result.tracker.append(r);
  }
  result.model = std::move(me.model);
  return result;
}

NetworkState run_aggvfl_passive(transport::Endpoint& endpoint,
                                const protocol::SessionConfig& config,
                                const protocol::PartyData& data) {
  validate_aggvfl(config);
  const PartyIndex self = endpoint.id();
  if (self == transport::kActiveParty || self > config.num_passive) {
    throw ProtocolError("party index " + std::to_string(self) +
                        " is not a passive party");
  }
  const std::size_t n = data.train.rows();
  Channel channel(endpoint, config.num_passive, config.timeout);
  FullModel me(config.parties[self]);
  const bool eval = runs_eval(config, data);
  const std::size_t nb = data::num_batches(n, config.batch_size);
  const auto test_batches =
      eval ? eval_batches(data.test.rows(), config.batch_size)
           : std::vector<std::vector<std::size_t>>{};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches =
        data::batch_iter(n, config.batch_size, epoch, config.seed);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const RoundNonce nonce = make_nonce(epoch, b);
      channel.send(transport::kActiveParty,
                   PredictionMsg{nonce, me.predict(gather_rows(data.train, batches[b]))});
      Message msg = channel.expect(MsgType::kLossAndGrad, nonce);
      const auto& reply = std::get<LossAndGradMsg>(msg.payload);
      if (reply.party != self) {
        throw ProtocolError("received the gradient of party " +
                            std::to_string(reply.party));
      }
      me.update(reply.grad_logits);
    }
    for (std::size_t j = 0; j < test_batches.size(); ++j) {
      channel.send(transport::kActiveParty,
                   PredictionMsg{make_nonce(epoch, nb + j),
                                 forward(me.model, me.spec, Segment::kFull,
                                         gather_rows(data.test, test_batches[j]))
                                     .output});
    }
  }
  return std::move(me.model);
}

AggVflResult run_aggvfl(const protocol::SessionConfig& config,
                        const std::vector<protocol::PartyData>& data) {
  validate_aggvfl(config);
  if (data.size() != config.num_parties()) {
    throw ConfigError("expected data for " +
                      std::to_string(config.num_parties()) + " parties");
  }
  AggVflResult result;
  result.models.resize(config.num_parties());
  protocol::run_inmem(config.num_parties(), [&](transport::Endpoint& ep) {
    const PartyIndex k = ep.id();
    if (k == transport::kActiveParty) {
      AggVflActiveResult r = run_aggvfl_active(ep, config, data[0]);
      result.models[0] = std::move(r.model);
      result.tracker = std::move(r.tracker);
      result.ledger = std::move(r.ledger);
      result.joint_accuracy = std::move(r.joint_accuracy);
    } else {
      result.models[k] = run_aggvfl_passive(ep, config, data[k]);
    }
  });
  return result;
}

}  // namespace vfmh::baselines
