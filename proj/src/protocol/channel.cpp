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

#include "vfmh/protocol/channel.hpp"

#include <algorithm>
#include <string>

#include "vfmh/core/errors.hpp"

namespace vfmh::protocol {
namespace {

std::string round_text(const RoundNonce& n) {
  return "(" + std::to_string(n.epoch) + ", " + std::to_string(n.batch) + ")";
}

}  // namespace

std::optional<RoundNonce> nonce_of(const Message& msg) {
  return std::visit(
      [](const auto& p) -> std::optional<RoundNonce> {
        if constexpr (requires { p.nonce; }) {
          return p.nonce;
        } else {
          return std::nullopt;
        }
      },
      msg.payload);
}

Channel::Channel(transport::Endpoint& endpoint, std::size_t num_passive,
                 std::chrono::milliseconds timeout,
                 metrics::RoundLedger* ledger)
    : endpoint_(endpoint),
      num_passive_(num_passive),
      timeout_(timeout),
      ledger_(ledger) {}

void Channel::set_phase(metrics::Phase phase, std::size_t epoch) {
  phase_ = phase;
  epoch_ = epoch;
}

void Channel::send(PartyIndex dest, transport::Payload payload) {
  Message msg{id(), std::move(payload)};
  const std::size_t bytes = endpoint_.send(dest, msg);
  if (ledger_ != nullptr && id() == transport::kActiveParty) {
    ledger_->record(phase_, epoch_, dest, metrics::Direction::kDown,
                    msg.type(), bytes);
  }
}

Message Channel::expect(MsgType type, std::optional<RoundNonce> nonce) {
  const auto wanted = [&](const Message& m) {
    return m.type() == type && (!nonce || nonce_of(m) == nonce);
  };
  std::optional<Message> found;
  for (auto it = held_.begin(); it != held_.end(); ++it) {
    if (wanted(*it)) {
      found = std::move(*it);
      held_.erase(it);
      break;
    }
  }
  while (!found) {
    Message next;
    try {
      next = endpoint_.recv(timeout_);
    } catch (const transport::TimeoutError&) {
      for (const Message& h : held_) {
        if (h.type() == type && nonce) {
          throw ProtocolError("desynchronized: expected round " +
                              round_text(*nonce) + ", party " +
                              std::to_string(h.sender) + " sent " +
                              round_text(*nonce_of(h)));
        }
      }
      throw;
    }
    if (wanted(next)) {
      found = std::move(next);
      break;
    }
    const auto got = nonce_of(next);
    if (next.type() == type && nonce && got && *got < *nonce) {
      check_fresh(next);
      throw ProtocolError("desynchronized: expected round " +
                          round_text(*nonce) + ", party " +
                          std::to_string(next.sender) + " sent " +
                          round_text(*got));
    }
    if (held_.size() >= kMaxHeld) {
      throw ProtocolError("too many out-of-order messages; last was " +
                          std::string(transport::type_name(next.type())) +
                          " from party " + std::to_string(next.sender));
    }
    held_.push_back(std::move(next));
  }
  Message msg = std::move(*found);
  check_sender(msg);
  check_fresh(msg);
  if (ledger_ != nullptr && id() == transport::kActiveParty) {
    ledger_->record(phase_, epoch_, msg.sender, metrics::Direction::kUp, type,
                    transport::frame_size(msg));
  }
  return msg;
}

void Channel::check_sender(const Message& msg) const {
  const bool from_active = msg.sender == transport::kActiveParty;
  if (id() == transport::kActiveParty) {
    if (from_active || msg.sender > num_passive_) {
      throw ProtocolError("message from unknown party " +
                          std::to_string(msg.sender));
    }
  } else if (!from_active) {
    throw ProtocolError("passive party received a message from party " +
                        std::to_string(msg.sender));
  }
}

void Channel::check_fresh(const Message& msg) {
  const auto got = nonce_of(msg);
  if (!got) return;
  const auto key = std::make_pair(msg.sender, msg.type());
  auto it = last_seen_.find(key);
  if (it != last_seen_.end() && *got <= it->second) {
    throw ProtocolError("replayed round " + round_text(*got) + " from party " +
                        std::to_string(msg.sender));
  }
  last_seen_[key] = *got;
}

}  // namespace vfmh::protocol
