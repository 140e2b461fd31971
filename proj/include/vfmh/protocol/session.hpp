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

#ifndef VFMH_PROTOCOL_SESSION_HPP_
#define VFMH_PROTOCOL_SESSION_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/core/tensor.hpp"
#include "vfmh/data/dataset.hpp"
#include "vfmh/metrics/ledger.hpp"
#include "vfmh/metrics/records.hpp"
#include "vfmh/protocol/channel.hpp"
#include "vfmh/protocol/party.hpp"
#include "vfmh/secagg/group.hpp"
#include "vfmh/transport/endpoint.hpp"

namespace vfmh::protocol {

struct SessionConfig {
  std::size_t num_passive = 3;  // K
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  // Shared shuffle seed; also seeds the parties' key generation.
  std::uint64_t seed = 1;
  std::vector<PartyConfig> parties;  // C = K + 1 entries, index 0 active
  secagg::GroupParams group = secagg::default_group();
  int scale_bits = 16;
  bool masking = true;
  // Permits sub-256-bit groups and disabling the masks.
  bool test_mode = false;
  // Per-epoch test-set rounds after training rounds.
  bool evaluate = true;
  std::chrono::milliseconds timeout{120000};

  std::size_t num_parties() const { return num_passive + 1; }
  // Throws ConfigError.
  void validate() const;
};

// What one party holds: its feature columns and, on the active party only,
// the labels.
struct PartyData {
  Tensor train;
  Tensor test;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  ImageShape image;
};

// Splits aligned train/test sets vertically over `parties`; labels go to
// party 0 only.
std::vector<PartyData> partition(const data::Dataset& train,
                                 const data::Dataset& test,
                                 std::size_t parties);

// Collects every passive key and relays each one to all other passive
// parties. The active party derives nothing.
void setup_keys_active(Channel& channel, std::size_t num_passive);

// Sends the party's public key and derives CK with every other passive
// party from the relayed keys.
std::map<std::size_t, secagg::SharedSecret> setup_keys_passive(
    Channel& channel, const secagg::KeyPair& keys,
    const secagg::GroupParams& group, std::size_t num_passive);

// Key seed of passive party k for a session.
std::uint64_t key_seed(const SessionConfig& config, std::size_t party);

struct ActiveResult {
  NetworkState model;
  metrics::RunTracker tracker;
  metrics::RoundLedger ledger;
};

ActiveResult run_active(transport::Endpoint& endpoint,
                        const SessionConfig& config, const PartyData& data);
NetworkState run_passive(transport::Endpoint& endpoint,
                         const SessionConfig& config, const PartyData& data);

struct SessionResult {
  std::vector<NetworkState> models;  // C models, party order
  metrics::RunTracker tracker;
  metrics::RoundLedger ledger;
};

using PartyBody = std::function<void(transport::Endpoint&)>;

// One thread per party over an in-memory network. The first failure shuts
// the network down and is rethrown after every thread has exited.
void run_inmem(std::size_t parties, const PartyBody& body);
// Same over loopback TCP: party 0 hosts the hub.
void run_tcp_loopback(std::size_t parties, const transport::TcpOptions& options,
                      std::chrono::milliseconds accept_timeout,
                      const PartyBody& body);

// Full session with every party in this process.
SessionResult run_training(const SessionConfig& config,
                           const std::vector<PartyData>& data);
SessionResult run_training_tcp(const SessionConfig& config,
                               const std::vector<PartyData>& data,
                               const transport::TcpOptions& options);

// Global embedding of every training row under the parties' freshly
// initialized embedding nets, aggregated in process with real masks.
Tensor initial_global_embedding(const SessionConfig& config,
                                const std::vector<PartyData>& data);

}  // namespace vfmh::protocol

#endif  // VFMH_PROTOCOL_SESSION_HPP_
