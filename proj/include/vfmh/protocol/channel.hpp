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

#ifndef VFMH_PROTOCOL_CHANNEL_HPP_
#define VFMH_PROTOCOL_CHANNEL_HPP_

#include <chrono>
#include <deque>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>

#include "vfmh/metrics/ledger.hpp"
#include "vfmh/transport/endpoint.hpp"

namespace vfmh::protocol {

using transport::Message;
using transport::MsgType;
using transport::PartyIndex;
using transport::RoundNonce;

// Protocol view of an endpoint. Enforces strictly increasing round nonces
// per (sender, type), checks that each message belongs to the expected
// round, and, on the active party, tallies traffic into a ledger.
class Channel {
 public:
  Channel(transport::Endpoint& endpoint, std::size_t num_passive,
          std::chrono::milliseconds timeout,
          metrics::RoundLedger* ledger = nullptr);

  PartyIndex id() const { return endpoint_.id(); }
  void set_phase(metrics::Phase phase, std::size_t epoch);

  void send(PartyIndex dest, transport::Payload payload);

  // Next message of type `type` (and round `nonce`, if given). A nonce not
  // above the last one seen from the same sender and type is rejected as a
  // replay; an older round of the wanted type is a desync. Messages for
  // later rounds or of other types (parties running ahead) are held back.
  Message expect(MsgType type, std::optional<RoundNonce> nonce);

 private:
  static constexpr std::size_t kMaxHeld = 4096;

  void check_sender(const Message& msg) const;
  void check_fresh(const Message& msg);

  transport::Endpoint& endpoint_;
  std::size_t num_passive_;
  std::chrono::milliseconds timeout_;
  metrics::RoundLedger* ledger_;
  metrics::Phase phase_ = metrics::Phase::kSetup;
  std::size_t epoch_ = 0;
  std::map<std::pair<PartyIndex, MsgType>, RoundNonce> last_seen_;
  std::deque<Message> held_;
};

// Round nonce carried by a message, if its type has one.
std::optional<RoundNonce> nonce_of(const Message& msg);

}  // namespace vfmh::protocol

#endif  // VFMH_PROTOCOL_CHANNEL_HPP_
