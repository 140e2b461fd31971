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

#include "vfmh/protocol/session.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/loss.hpp"
#include "vfmh/core/random.hpp"
#include "vfmh/secagg/masking.hpp"

namespace vfmh::protocol {
namespace {

using metrics::Direction;
using metrics::Phase;
using transport::GlobalEmbeddingMsg;
using transport::LossAndGradMsg;
using transport::MaskedEmbeddingMsg;
using transport::PredictionMsg;
using transport::PublicKeyMsg;

constexpr std::uint64_t kKeyStream = 0x6b65792d73656564ull;

std::vector<int> gather_labels(std::span<const int> labels,
                               std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

std::vector<std::size_t> range_indices(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out[i - lo] = i;
  return out;
}

// Test rows in fixed order, cut into batch-sized chunks.
std::vector<std::vector<std::size_t>> eval_batches(std::size_t rows,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t lo = 0; lo < rows; lo += batch_size) {
    out.push_back(range_indices(lo, std::min(rows, lo + batch_size)));
  }
  return out;
}

bool runs_eval(const SessionConfig& config, const PartyData& data) {
  return config.evaluate && data.test.rank() == 2 && data.test.rows() > 0;
}

RoundNonce make_nonce(std::size_t epoch, std::size_t batch) {
  return RoundNonce{static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(batch)};
}

// Active side of the embedding exchange for one batch: collects K masked
// embeddings, aggregates with the active embedding, broadcasts E.
Tensor aggregate_round(Channel& channel, const SessionConfig& config,
                       const secagg::FixedPointCodec& codec,
                       const Tensor& active_embedding, RoundNonce nonce) {
  const std::size_t k_total = config.num_passive;
  std::vector<secagg::MaskedEmbedding> masked(k_total);
  for (std::size_t i = 0; i < k_total; ++i) {
    Message msg = channel.expect(MsgType::kMaskedEmbedding, nonce);
    auto& me = std::get<MaskedEmbeddingMsg>(msg.payload);
    if (me.embedding.rows != active_embedding.rows() ||
        me.embedding.cols != active_embedding.cols()) {
      throw ProtocolError(
          "party " + std::to_string(msg.sender) + " sent a " +
          std::to_string(me.embedding.rows) + "x" +
          std::to_string(me.embedding.cols) + " embedding, expected " +
          shape_string(active_embedding.shape()));
    }
    masked[msg.sender - 1] = std::move(me.embedding);
  }
  Tensor global = secagg::aggregate(active_embedding, masked, codec);
  for (std::size_t k = 1; k <= k_total; ++k) {
    channel.send(static_cast<PartyIndex>(k), GlobalEmbeddingMsg{nonce, global});
  }
  return global;
}

// Active side: own prediction plus K uploaded ones, keyed by party.
std::map<PartyIndex, Tensor> collect_predictions(Channel& channel,
                                                 const SessionConfig& config,
                                                 Tensor own, RoundNonce nonce) {
  std::map<PartyIndex, Tensor> preds;
  const auto expected = own.shape();
  preds.emplace(transport::kActiveParty, std::move(own));
  for (std::size_t i = 0; i < config.num_passive; ++i) {
    Message msg = channel.expect(MsgType::kPrediction, nonce);
    auto& pr = std::get<PredictionMsg>(msg.payload);
    if (pr.logits.shape() != expected) {
      throw ProtocolError("party " + std::to_string(msg.sender) +
                          " sent logits of shape " +
                          shape_string(pr.logits.shape()) + ", expected " +
                          shape_string(expected));
    }
    preds.emplace(msg.sender, std::move(pr.logits));
  }
  return preds;
}

// Passive side of the embedding exchange: mask, upload, await E.
Tensor passive_exchange(Channel& channel, const SessionConfig& config,
                        const secagg::FixedPointCodec& codec,
                        const std::map<std::size_t, secagg::SharedSecret>& secrets,
                        const Tensor& embedding, RoundNonce nonce) {
  const std::size_t k = channel.id();
  secagg::BlindingMask mask;
  if (config.masking) {
    mask = secagg::blinding_mask(k, config.num_passive, secrets,
                                 embedding.size(), nonce.value());
  } else {
    mask.values.assign(embedding.size(), 0);
    mask.nonce = nonce.value();
  }
  channel.send(transport::kActiveParty,
               MaskedEmbeddingMsg{nonce, secagg::mask_embedding(
                                             embedding, mask, codec,
                                             config.num_passive)});
  Message msg = channel.expect(MsgType::kGlobalEmbedding, nonce);
  Tensor global = std::move(std::get<GlobalEmbeddingMsg>(msg.payload).embedding);
  if (global.rank() != 2 || global.rows() != embedding.rows() ||
      global.cols() != embedding.cols()) {
    throw ProtocolError("global embedding of shape " +
                        shape_string(global.shape()) + ", expected " +
                        shape_string(embedding.shape()));
  }
  return global;
}

void append_epoch_records(metrics::RunTracker& tracker,
                          const metrics::RoundLedger& ledger,
                          std::size_t epoch, std::size_t num_passive,
                          const std::vector<double>& losses,
                          const std::vector<double>& accs) {
  metrics::EpochRecord active{0, epoch + 1, losses[0], accs[0], 0, 0, 0};
  for (std::size_t k = 1; k <= num_passive; ++k) {
    const auto up = ledger.tally(Phase::kTrain, epoch, k, Direction::kUp);
    const auto down = ledger.tally(Phase::kTrain, epoch, k, Direction::kDown);
    active.msgs_up += up.messages;
    active.msgs_down += down.messages;
    active.bytes += up.bytes + down.bytes;
  }
  tracker.append(active);
  for (std::size_t k = 1; k <= num_passive; ++k) {
    const auto up = ledger.tally(Phase::kTrain, epoch, k, Direction::kUp);
    const auto down = ledger.tally(Phase::kTrain, epoch, k, Direction::kDown);
    tracker.append({k, epoch + 1, losses[k], accs[k], up.messages,
                    down.messages, up.bytes + down.bytes});
  }
}

}  // namespace

void SessionConfig::validate() const {
  if (num_passive < 1) throw ConfigError("need at least one passive party");
  if (epochs > UINT32_MAX) throw ConfigError("too many epochs");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (parties.size() != num_parties()) {
    throw ConfigError("expected " + std::to_string(num_parties()) +
                      " party configurations, got " +
                      std::to_string(parties.size()));
  }
  if (num_passive > UINT16_MAX - 1) throw ConfigError("too many parties");
  const std::size_t d_emb = parties[0].spec.embedding_dim;
  const std::size_t classes = parties[0].spec.num_classes;
  for (std::size_t k = 0; k < parties.size(); ++k) {
    parties[k].spec.validate();
    parties[k].optimizer.validate();
    if (parties[k].spec.embedding_dim != d_emb) {
      throw ConfigError("party " + std::to_string(k) +
                        " has a different embedding width");
    }
    if (parties[k].spec.num_classes != classes) {
      throw ConfigError("party " + std::to_string(k) +
                        " has a different class count");
    }
  }
  if (scale_bits < 1 || scale_bits > 40) {
    throw ConfigError("scale_bits must lie in [1, 40]");
  }
  if (!masking && !test_mode) {
    throw ConfigError("masking can only be disabled in test mode");
  }
  try {
    group.validate(test_mode);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<PartyData> partition(const data::Dataset& train,
                                 const data::Dataset& test,
                                 std::size_t parties) {
  const data::VerticalSplit tr = data::vertical_split(train, parties);
  const bool has_test = test.size() > 0;
  data::VerticalSplit te;
  if (has_test) {
    if (test.num_features() != train.num_features()) {
      throw DataError("train and test feature widths differ");
    }
    te = data::vertical_split(test, parties);
  }
  std::vector<PartyData> out(parties);
  for (std::size_t k = 0; k < parties; ++k) {
    out[k].train = tr.shards[k].features;
    out[k].image = tr.shards[k].image;
    out[k].test = has_test ? te.shards[k].features
                           : Tensor::matrix(0, tr.shards[k].hi - tr.shards[k].lo);
  }
  out[0].train_labels = train.labels;
  out[0].test_labels = test.labels;
  return out;
}

std::uint64_t key_seed(const SessionConfig& config, std::size_t party) {
  return mix_seed(mix_seed(config.seed, kKeyStream), party);
}

void setup_keys_active(Channel& channel, std::size_t num_passive) {
  channel.set_phase(Phase::kSetup, 0);
  std::map<PartyIndex, std::vector<std::uint8_t>> keys;
  for (std::size_t i = 0; i < num_passive; ++i) {
    Message msg = channel.expect(MsgType::kPublicKey, std::nullopt);
    auto& pk = std::get<PublicKeyMsg>(msg.payload);
    if (pk.subject != msg.sender) {
      throw ProtocolError("party " + std::to_string(msg.sender) +
                          " announced a key for party " +
                          std::to_string(pk.subject));
    }
    if (!keys.emplace(msg.sender, std::move(pk.element)).second) {
      throw ProtocolError("duplicate public key from party " +
                          std::to_string(msg.sender));
    }
  }
  for (std::size_t k = 1; k <= num_passive; ++k) {
    for (const auto& [subject, element] : keys) {
      if (subject == k) continue;
      channel.send(static_cast<PartyIndex>(k), PublicKeyMsg{subject, element});
    }
  }
}

std::map<std::size_t, secagg::SharedSecret> setup_keys_passive(
    Channel& channel, const secagg::KeyPair& keys,
    const secagg::GroupParams& group, std::size_t num_passive) {
  channel.send(transport::kActiveParty,
               PublicKeyMsg{channel.id(), secagg::to_bytes(keys.public_key)});
  std::map<std::size_t, secagg::SharedSecret> secrets;
  for (std::size_t i = 0; i + 1 < num_passive; ++i) {
    Message msg = channel.expect(MsgType::kPublicKey, std::nullopt);
    const auto& pk = std::get<PublicKeyMsg>(msg.payload);
    if (pk.subject == 0 || pk.subject > num_passive ||
        pk.subject == channel.id()) {
      throw ProtocolError("relayed key for unexpected party " +
                          std::to_string(pk.subject));
    }
    const mpz_class peer = secagg::from_bytes(pk.element);
    if (!secrets.emplace(pk.subject,
                         secagg::derive_shared(keys.secret, peer, group))
             .second) {
      throw ProtocolError("duplicate relayed key for party " +
                          std::to_string(pk.subject));
    }
  }
  return secrets;
}

ActiveResult run_active(transport::Endpoint& endpoint,
                        const SessionConfig& config, const PartyData& data) {
  config.validate();
  const std::size_t c = config.num_parties();
  const std::size_t n = data.train.rows();
  if (data.train_labels.size() != n) {
    throw DataError("active party holds " +
                    std::to_string(data.train_labels.size()) +
                    " labels for " + std::to_string(n) + " rows");
  }
  const bool eval = runs_eval(config, data);
  if (eval && data.test_labels.size() != data.test.rows()) {
    throw DataError("test labels do not match test rows");
  }
  ActiveResult result;
  result.ledger = metrics::RoundLedger(config.num_passive, 4);
  Channel channel(endpoint, config.num_passive, config.timeout, &result.ledger);
  const secagg::FixedPointCodec codec(config.scale_bits);
  Party me = Party::create(transport::kActiveParty, config.parties[0]);

  setup_keys_active(channel, config.num_passive);

  const std::size_t nb = data::num_batches(n, config.batch_size);
  const auto test_batches =
      eval ? eval_batches(data.test.rows(), config.batch_size)
           : std::vector<std::vector<std::size_t>>{};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    channel.set_phase(Phase::kTrain, epoch);
    std::vector<double> loss_sum(c, 0.0);
    const auto batches =
        data::batch_iter(n, config.batch_size, epoch, config.seed);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const RoundNonce nonce = make_nonce(epoch, b);
      const Tensor x = gather_rows(data.train, batches[b]);
      const std::vector<int> y = gather_labels(data.train_labels, batches[b]);
      const Tensor e_active = local_embedding(me, x);
      const Tensor global =
          aggregate_round(channel, config, codec, e_active, nonce);
      auto preds = collect_predictions(channel, config,
                                       local_prediction(me, global), nonce);
      auto replies = active_assist_loss(preds, y, c);
      for (std::size_t k = 1; k < c; ++k) {
        auto& r = replies.at(static_cast<PartyIndex>(k));
        channel.send(static_cast<PartyIndex>(k),
                     LossAndGradMsg{nonce, static_cast<PartyIndex>(k), r.loss,
                                    std::move(r.grad_logits)});
      }
      local_update(me, replies.at(0).grad_logits, c);
      for (std::size_t k = 0; k < c; ++k) {
        loss_sum[k] += replies.at(static_cast<PartyIndex>(k)).loss *
                       static_cast<double>(batches[b].size());
      }
      result.ledger.end_round(epoch);
    }
    std::vector<double> losses(c), accs(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      losses[k] = n == 0 ? 0.0 : loss_sum[k] / static_cast<double>(n);
    }
    if (eval) {
      channel.set_phase(Phase::kEval, epoch);
      std::vector<std::size_t> correct(c, 0);
      for (std::size_t j = 0; j < test_batches.size(); ++j) {
        const RoundNonce nonce = make_nonce(epoch, nb + j);
        const Tensor x = gather_rows(data.test, test_batches[j]);
        const std::vector<int> y =
            gather_labels(data.test_labels, test_batches[j]);
        const Tensor global = aggregate_round(channel, config, codec,
                                              local_embedding(me, x), nonce);
        const auto preds = collect_predictions(
            channel, config, local_prediction(me, global), nonce);
        for (const auto& [k, logits] : preds) {
          for (std::size_t r = 0; r < logits.rows(); ++r) {
            if (argmax_row(logits.row(r)) == static_cast<std::size_t>(y[r])) {
              ++correct[k];
            }
          }
        }
      }
      me.embedding_trace.reset();
      me.decision_trace.reset();
      for (std::size_t k = 0; k < c; ++k) {
        accs[k] = static_cast<double>(correct[k]) /
                  static_cast<double>(data.test.rows());
      }
    }
    append_epoch_records(result.tracker, result.ledger, epoch,
                         config.num_passive, losses, accs);
  }
  result.model = std::move(me.model);
  return result;
}

NetworkState run_passive(transport::Endpoint& endpoint,
                         const SessionConfig& config, const PartyData& data) {
  config.validate();
  const PartyIndex self = endpoint.id();
  if (self == transport::kActiveParty || self > config.num_passive) {
    throw ProtocolError("party index " + std::to_string(self) +
                        " is not a passive party");
  }
  const std::size_t c = config.num_parties();
  const std::size_t n = data.train.rows();
  Channel channel(endpoint, config.num_passive, config.timeout);
  const secagg::FixedPointCodec codec(config.scale_bits);
  Party me = Party::create(self, config.parties[self]);
  const secagg::KeyPair keys =
      secagg::keygen(config.group, key_seed(config, self));
  const auto secrets =
      setup_keys_passive(channel, keys, config.group, config.num_passive);

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
      const Tensor x = gather_rows(data.train, batches[b]);
      const Tensor global = passive_exchange(channel, config, codec, secrets,
                                             local_embedding(me, x), nonce);
      channel.send(transport::kActiveParty,
                   PredictionMsg{nonce, local_prediction(me, global)});
      Message msg = channel.expect(MsgType::kLossAndGrad, nonce);
      const auto& reply = std::get<LossAndGradMsg>(msg.payload);
      if (reply.party != self) {
        throw ProtocolError("received the loss of party " +
                            std::to_string(reply.party));
      }
      local_update(me, reply.grad_logits, c);
    }
    for (std::size_t j = 0; j < test_batches.size(); ++j) {
      const RoundNonce nonce = make_nonce(epoch, nb + j);
      const Tensor x = gather_rows(data.test, test_batches[j]);
      const Tensor global = passive_exchange(channel, config, codec, secrets,
                                             local_embedding(me, x), nonce);
      channel.send(transport::kActiveParty,
                   PredictionMsg{nonce, local_prediction(me, global)});
    }
    me.embedding_trace.reset();
    me.decision_trace.reset();
  }
  return std::move(me.model);
}

void run_inmem(std::size_t parties, const PartyBody& body) {
  transport::InMemoryNetwork net(parties);
  std::vector<std::unique_ptr<transport::Endpoint>> endpoints;
  for (std::size_t k = 0; k < parties; ++k) {
    endpoints.push_back(net.endpoint(static_cast<PartyIndex>(k)));
  }
  std::mutex mu;
  std::exception_ptr first;
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < parties; ++k) {
    threads.emplace_back([&, k] {
      try {
        body(*endpoints[k]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) {
          first = std::current_exception();
          net.shutdown("party " + std::to_string(k) + " failed: " + e.what());
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

void run_tcp_loopback(std::size_t parties, const transport::TcpOptions& options,
                      std::chrono::milliseconds accept_timeout,
                      const PartyBody& body) {
  if (parties < 2) throw ConfigError("TCP sessions need a passive party");
  auto hub = std::make_unique<transport::TcpHub>(parties - 1, options);
  transport::TcpOptions dial = options;
  dial.port = hub->port();
  std::mutex mu;
  std::exception_ptr first;
  const auto fail = [&] {
    std::lock_guard<std::mutex> lock(mu);
    if (!first) first = std::current_exception();
  };
  std::vector<std::thread> threads;
  threads.emplace_back([&, hub = std::move(hub)]() mutable {
    try {
      hub->accept_all(accept_timeout);
      body(*hub);
    } catch (const std::exception&) {
      fail();
    }
    hub.reset();
  });
  for (std::size_t k = 1; k < parties; ++k) {
    threads.emplace_back([&, k] {
      try {
        transport::TcpClient client(static_cast<PartyIndex>(k), dial);
        body(client);
      } catch (const std::exception&) {
        fail();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

SessionResult run_session(
    const SessionConfig& config, const std::vector<PartyData>& data,
    const std::function<void(std::size_t, const PartyBody&)>& runner) {
  config.validate();
  if (data.size() != config.num_parties()) {
    throw ConfigError("expected data for " +
                      std::to_string(config.num_parties()) + " parties");
  }
  SessionResult result;
  result.models.resize(config.num_parties());
  runner(config.num_parties(), [&](transport::Endpoint& ep) {
    const PartyIndex k = ep.id();
    if (k == transport::kActiveParty) {
      ActiveResult r = run_active(ep, config, data[0]);
      result.models[0] = std::move(r.model);
      result.tracker = std::move(r.tracker);
      result.ledger = std::move(r.ledger);
    } else {
      result.models[k] = run_passive(ep, config, data[k]);
    }
  });
  return result;
}

}  // namespace

SessionResult run_training(const SessionConfig& config,
                           const std::vector<PartyData>& data) {
  return run_session(config, data, [](std::size_t c, const PartyBody& body) {
    run_inmem(c, body);
  });
}

SessionResult run_training_tcp(const SessionConfig& config,
                               const std::vector<PartyData>& data,
                               const transport::TcpOptions& options) {
  return run_session(config, data,
                     [&](std::size_t c, const PartyBody& body) {
                       run_tcp_loopback(c, options, config.timeout, body);
                     });
}

Tensor initial_global_embedding(const SessionConfig& config,
                                const std::vector<PartyData>& data) {
  config.validate();
  const std::size_t k_total = config.num_passive;
  std::vector<secagg::KeyPair> keys;
  for (std::size_t k = 1; k <= k_total; ++k) {
    keys.push_back(secagg::keygen(config.group, key_seed(config, k)));
  }
  const secagg::FixedPointCodec codec(config.scale_bits);
  Tensor active;
  std::vector<secagg::MaskedEmbedding> masked;
  for (std::size_t k = 0; k <= k_total; ++k) {
    Party p = Party::create(static_cast<PartyIndex>(k), config.parties[k]);
    Tensor e = local_embedding(p, data[k].train);
    if (k == 0) {
      active = std::move(e);
      continue;
    }
    std::map<std::size_t, secagg::SharedSecret> secrets;
    for (std::size_t j = 1; j <= k_total; ++j) {
      if (j == k) continue;
      secrets.emplace(j, secagg::derive_shared(keys[k - 1].secret,
                                               keys[j - 1].public_key,
                                               config.group));
    }
    const auto mask = config.masking
                          ? secagg::blinding_mask(k, k_total, secrets, e.size(), 0)
                          : secagg::BlindingMask{secagg::RingVector(e.size(), 0), 0};
    masked.push_back(secagg::mask_embedding(e, mask, codec, k_total));
  }
  return secagg::aggregate(active, masked, codec);
}

}  // namespace vfmh::protocol
