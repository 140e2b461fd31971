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

#ifndef VFMH_TRANSPORT_MESSAGE_HPP_
#define VFMH_TRANSPORT_MESSAGE_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/tensor.hpp"
#include "vfmh/secagg/masking.hpp"

namespace vfmh::transport {

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedFrameError : public TransportError {
 public:
  using TransportError::TransportError;
};

class ConnectionError : public TransportError {
 public:
  using TransportError::TransportError;
};

using PartyIndex = std::uint16_t;
inline constexpr PartyIndex kActiveParty = 0;

// (epoch, batch) counter. Ordered lexicographically; packed into the
// 64-bit mask-derivation nonce as epoch << 32 | batch.
struct RoundNonce {
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;

  std::uint64_t value() const {
    return (static_cast<std::uint64_t>(epoch) << 32) | batch;
  }
  friend auto operator<=>(const RoundNonce&, const RoundNonce&) = default;
};

// A party's public key, or one relayed by the active party (`subject` is
// the key owner, the frame sender is the relayer).
struct PublicKeyMsg {
  PartyIndex subject = 0;
  std::vector<std::uint8_t> element;  // big-endian magnitude

  friend bool operator==(const PublicKeyMsg&, const PublicKeyMsg&) = default;
};

struct MaskedEmbeddingMsg {
  RoundNonce nonce;
  secagg::MaskedEmbedding embedding;

  friend bool operator==(const MaskedEmbeddingMsg&,
                         const MaskedEmbeddingMsg&) = default;
};

struct GlobalEmbeddingMsg {
  RoundNonce nonce;
  Tensor embedding;

  friend bool operator==(const GlobalEmbeddingMsg&,
                         const GlobalEmbeddingMsg&) = default;
};

struct PredictionMsg {
  RoundNonce nonce;
  Tensor logits;

  friend bool operator==(const PredictionMsg&, const PredictionMsg&) = default;
};

struct LossAndGradMsg {
  RoundNonce nonce;
  PartyIndex party = 0;
  double loss = 0.0;
  Tensor grad_logits;

  friend bool operator==(const LossAndGradMsg&,
                         const LossAndGradMsg&) = default;
};

using Payload = std::variant<PublicKeyMsg, MaskedEmbeddingMsg,
                             GlobalEmbeddingMsg, PredictionMsg, LossAndGradMsg>;

enum class MsgType : std::uint8_t {
  kPublicKey = 1,
  kMaskedEmbedding = 2,
  kGlobalEmbedding = 3,
  kPrediction = 4,
  kLossAndGrad = 5,
};

std::string_view type_name(MsgType type);

struct Message {
  PartyIndex sender = 0;
  Payload payload;

  MsgType type() const {
    return static_cast<MsgType>(payload.index() + 1);
  }
  friend bool operator==(const Message&, const Message&) = default;
};

// Wire layout, all integers little-endian:
//   magic "VFMH" | version u8 = 1 | type u8 | sender u16 | payload_len u32
//   | payload
inline constexpr std::size_t kHeaderSize = 12;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

struct FrameHeader {
  MsgType type;
  PartyIndex sender;
  std::uint32_t payload_len;
};

FrameHeader parse_header(std::span<const std::uint8_t> header);
std::vector<std::uint8_t> encode_payload(const Payload& payload);
Payload decode_payload(MsgType type, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_frame(const Message& msg);
// Size of encode_frame(msg) without encoding it.
std::size_t frame_size(const Message& msg);
// Throws MalformedFrameError on bad magic, version, type, length or
// payload layout.
Message decode_frame(std::span<const std::uint8_t> frame);

}  // namespace vfmh::transport

#endif  // VFMH_TRANSPORT_MESSAGE_HPP_
