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

#include "vfmh/transport/message.hpp"

#include <bit>
#include <cstring>
#include <string>

namespace vfmh::transport {
namespace {

constexpr std::uint8_t kMagic[4] = {0x56, 0x46, 0x4D, 0x48};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  void nonce(const RoundNonce& n) {
    u32(n.epoch);
    u32(n.batch);
  }
  void tensor(const Tensor& t) {
    if (t.rank() > 255) throw MalformedFrameError("tensor rank exceeds 255");
    u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) u32(checked32(d));
    for (double v : t.values()) f64(v);
  }
  static std::uint32_t checked32(std::size_t v) {
    if (v > UINT32_MAX) throw MalformedFrameError("dimension exceeds u32");
    return static_cast<std::uint32_t>(v);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  RoundNonce nonce() {
    RoundNonce n;
    n.epoch = u32();
    n.batch = u32();
    return n;
  }
  Tensor tensor() {
    const std::uint8_t rank = u8();
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = u32();
      count *= d;
      if (count > remaining() / 8 + 1) {
        throw MalformedFrameError("tensor larger than its payload");
      }
    }
    need(count * 8);
    std::vector<double> data(count);
    for (auto& v : data) v = f64();
    return Tensor(std::move(shape), std::move(data));
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void finish() const {
    if (pos_ != in_.size()) {
      throw MalformedFrameError(std::to_string(remaining()) +
                                " trailing payload bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw MalformedFrameError("payload truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view type_name(MsgType type) {
  switch (type) {
    case MsgType::kPublicKey:
      return "PublicKey";
    case MsgType::kMaskedEmbedding:
      return "MaskedEmbedding";
    case MsgType::kGlobalEmbedding:
      return "GlobalEmbedding";
    case MsgType::kPrediction:
      return "Prediction";
    case MsgType::kLossAndGrad:
      return "LossAndGrad";
  }
  return "Unknown";
}

FrameHeader parse_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) throw MalformedFrameError("short header");
  if (std::memcmp(header.data(), kMagic, 4) != 0) {
    throw MalformedFrameError("bad frame magic");
  }
  if (header[4] != kVersion) {
    throw MalformedFrameError("unsupported frame version " +
                              std::to_string(header[4]));
  }
  const std::uint8_t type = header[5];
  if (type < 1 || type > 5) {
    throw MalformedFrameError("unknown message type " + std::to_string(type));
  }
  FrameHeader h;
  h.type = static_cast<MsgType>(type);
  h.sender = static_cast<PartyIndex>(header[6] | (header[7] << 8));
  h.payload_len = static_cast<std::uint32_t>(header[8]) |
                  (static_cast<std::uint32_t>(header[9]) << 8) |
                  (static_cast<std::uint32_t>(header[10]) << 16) |
                  (static_cast<std::uint32_t>(header[11]) << 24);
  if (h.payload_len > kMaxPayload) {
    throw MalformedFrameError("payload of " + std::to_string(h.payload_len) +
                              " bytes exceeds the 64 MiB limit");
  }
  return h;
}

std::vector<std::uint8_t> encode_payload(const Payload& payload) {
  Writer w;
  if (const auto* pk = std::get_if<PublicKeyMsg>(&payload)) {
    if (pk->element.size() > UINT16_MAX) {
      throw MalformedFrameError("group element too long");
    }
    w.u16(pk->subject);
    w.u16(static_cast<std::uint16_t>(pk->element.size()));
    w.bytes(pk->element);
  } else if (const auto* me = std::get_if<MaskedEmbeddingMsg>(&payload)) {
    const auto& e = me->embedding;
    if (e.values.size() != e.rows * e.cols) {
      throw MalformedFrameError("masked embedding length mismatch");
    }
    w.nonce(me->nonce);
    w.u32(Writer::checked32(e.rows));
    w.u32(Writer::checked32(e.cols));
    for (std::uint64_t v : e.values) w.u64(v);
  } else if (const auto* ge = std::get_if<GlobalEmbeddingMsg>(&payload)) {
    w.nonce(ge->nonce);
    w.tensor(ge->embedding);
  } else if (const auto* pr = std::get_if<PredictionMsg>(&payload)) {
    w.nonce(pr->nonce);
    w.tensor(pr->logits);
  } else {
    const auto& lg = std::get<LossAndGradMsg>(payload);
    w.nonce(lg.nonce);
    w.u16(lg.party);
    w.f64(lg.loss);
    w.tensor(lg.grad_logits);
  }
  return w.take();
}

Payload decode_payload(MsgType type, std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Payload out;
  switch (type) {
    case MsgType::kPublicKey: {
      PublicKeyMsg pk;
      pk.subject = r.u16();
      const std::uint16_t len = r.u16();
      auto b = r.bytes(len);
      pk.element.assign(b.begin(), b.end());
      out = std::move(pk);
      break;
    }
    case MsgType::kMaskedEmbedding: {
      MaskedEmbeddingMsg me;
      me.nonce = r.nonce();
      me.embedding.rows = r.u32();
      me.embedding.cols = r.u32();
      const std::size_t n = me.embedding.rows * me.embedding.cols;
      if (n > r.remaining() / 8) {
        throw MalformedFrameError("masked embedding larger than its payload");
      }
      me.embedding.values.resize(n);
      for (auto& v : me.embedding.values) v = r.u64();
      out = std::move(me);
      break;
    }
    case MsgType::kGlobalEmbedding: {
      GlobalEmbeddingMsg ge;
      ge.nonce = r.nonce();
      ge.embedding = r.tensor();
      out = std::move(ge);
      break;
    }
    case MsgType::kPrediction: {
      PredictionMsg pr;
      pr.nonce = r.nonce();
      pr.logits = r.tensor();
      out = std::move(pr);
      break;
    }
    case MsgType::kLossAndGrad: {
      LossAndGradMsg lg;
      lg.nonce = r.nonce();
      lg.party = r.u16();
      lg.loss = r.f64();
      lg.grad_logits = r.tensor();
      out = std::move(lg);
      break;
    }
    default:
      throw MalformedFrameError("unknown message type");
  }
  r.finish();
  return out;
}

std::size_t frame_size(const Message& msg) {
  const auto tensor_bytes = [](const Tensor& t) {
    return 1 + 4 * t.rank() + 8 * t.size();
  };
  std::size_t payload = 0;
  if (const auto* pk = std::get_if<PublicKeyMsg>(&msg.payload)) {
    payload = 4 + pk->element.size();
  } else if (const auto* me = std::get_if<MaskedEmbeddingMsg>(&msg.payload)) {
    payload = 16 + 8 * me->embedding.values.size();
  } else if (const auto* ge = std::get_if<GlobalEmbeddingMsg>(&msg.payload)) {
    payload = 8 + tensor_bytes(ge->embedding);
  } else if (const auto* pr = std::get_if<PredictionMsg>(&msg.payload)) {
    payload = 8 + tensor_bytes(pr->logits);
  } else {
    const auto& lg = std::get<LossAndGradMsg>(msg.payload);
    payload = 18 + tensor_bytes(lg.grad_logits);
  }
  return kHeaderSize + payload;
}

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  const std::vector<std::uint8_t> payload = encode_payload(msg.payload);
  if (payload.size() > kMaxPayload) {
    throw MalformedFrameError("frame of " + std::to_string(payload.size()) +
                              " bytes exceeds the 64 MiB limit");
  }
  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderSize + payload.size());
  frame.insert(frame.end(), kMagic, kMagic + 4);
  frame.push_back(kVersion);
  frame.push_back(static_cast<std::uint8_t>(msg.type()));
  frame.push_back(static_cast<std::uint8_t>(msg.sender));
  frame.push_back(static_cast<std::uint8_t>(msg.sender >> 8));
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) {
    frame.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  }
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

Message decode_frame(std::span<const std::uint8_t> frame) {
  const FrameHeader h = parse_header(frame);
  if (frame.size() - kHeaderSize != h.payload_len) {
    throw MalformedFrameError("payload_len " + std::to_string(h.payload_len) +
                              " does not match " +
                              std::to_string(frame.size() - kHeaderSize) +
                              " payload bytes");
  }
  Message m;
  m.sender = h.sender;
  m.payload = decode_payload(h.type, frame.subspan(kHeaderSize));
  return m;
}

}  // namespace vfmh::transport
