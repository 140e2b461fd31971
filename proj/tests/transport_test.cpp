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

#include <gtest/gtest.h>

#include <thread>

#include "support/messages.hpp"
#include "support/tcp.hpp"
#include "vfmh/core/errors.hpp"
#include "vfmh/transport/endpoint.hpp"
#include "vfmh/transport/message.hpp"

namespace vfmh::transport {
namespace {

using namespace std::chrono_literals;

TEST(Frame, RoundTripsEveryVariant) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    Message m = testing::random_message(rng, static_cast<MsgType>(1 + i % 5));
    m.sender = static_cast<PartyIndex>(rng.below(5));
    const auto frame = encode_frame(m);
    EXPECT_EQ(frame.size(), frame_size(m));
    const Message back = decode_frame(frame);
    EXPECT_EQ(back.type(), m.type());
    EXPECT_EQ(back.sender, m.sender);
    EXPECT_EQ(encode_frame(back), frame);
  }
}

TEST(Frame, HeaderLayout) {
  Message m;
  m.sender = 0x0203;
  m.payload = PublicKeyMsg{7, {0xaa, 0xbb}};
  const auto f = encode_frame(m);
  ASSERT_EQ(f.size(), kHeaderSize + 6);
  EXPECT_EQ(std::string(f.begin(), f.begin() + 4), "VFMH");
  EXPECT_EQ(f[4], kVersion);
  EXPECT_EQ(f[5], 1);
  EXPECT_EQ(f[6], 0x03);
  EXPECT_EQ(f[7], 0x02);
  EXPECT_EQ(f[8], 6);
  EXPECT_EQ(f[9] | f[10] | f[11], 0);
  // subject u16, length u16, element.
  EXPECT_EQ(std::vector<std::uint8_t>(f.begin() + 12, f.end()),
            (std::vector<std::uint8_t>{7, 0, 2, 0, 0xaa, 0xbb}));
}

std::vector<std::uint8_t> sample_frame() {
  Message m;
  m.sender = 1;
  m.payload = PredictionMsg{{1, 2}, Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0})};
  return encode_frame(m);
}

TEST(Frame, RejectsMalformedHeaders) {
  auto f = sample_frame();
  auto bad = f;
  bad[0] = 'X';
  EXPECT_THROW(decode_frame(bad), MalformedFrameError);
  bad = f;
  bad[4] = 2;
  EXPECT_THROW(decode_frame(bad), MalformedFrameError);
  bad = f;
  bad[5] = 0;
  EXPECT_THROW(decode_frame(bad), MalformedFrameError);
  bad = f;
  bad[5] = 6;
  EXPECT_THROW(decode_frame(bad), MalformedFrameError);
  EXPECT_THROW(decode_frame(std::span(f).first(5)), MalformedFrameError);
}

TEST(Frame, RejectsLengthMismatches) {
  auto f = sample_frame();
  auto truncated = f;
  truncated.pop_back();
  EXPECT_THROW(decode_frame(truncated), MalformedFrameError);
  auto trailing = f;
  trailing.push_back(0);
  EXPECT_THROW(decode_frame(trailing), MalformedFrameError);
  // Header claims one byte fewer than the tensor needs.
  auto shortened = f;
  shortened.pop_back();
  shortened[8] -= 1;
  EXPECT_THROW(decode_frame(shortened), MalformedFrameError);
  auto huge = f;
  huge[11] = 0x7f;
  EXPECT_THROW(decode_frame(huge), MalformedFrameError);
}

TEST(Frame, RejectsOversizedTensorShape) {
  auto f = sample_frame();
  // Tensor dims start after nonce (8) and rank (1).
  f[kHeaderSize + 9 + 3] = 0x40;
  EXPECT_THROW(decode_frame(f), MalformedFrameError);
}

TEST(Frame, MutatedFramesNeverEscapeAsOtherErrors) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    Message m = testing::random_message(rng);
    auto f = encode_frame(m);
    const std::size_t flips = 1 + rng.below(4);
    for (std::size_t j = 0; j < flips; ++j) {
      f[rng.below(f.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    }
    if (rng.below(3) == 0) f.resize(rng.below(f.size() + 1));
    try {
      const Message back = decode_frame(f);
      EXPECT_EQ(encode_frame(back), f);
    } catch (const MalformedFrameError&) {
    }
  }
}

TEST(InMemory, DeliversFramesInOrder) {
  InMemoryNetwork net(3);
  auto a = net.endpoint(0);
  auto b = net.endpoint(1);
  Rng rng(5);
  std::vector<Message> sent;
  for (int i = 0; i < 20; ++i) {
    Message m = testing::random_message(rng);
    m.sender = 1;
    sent.push_back(m);
    EXPECT_EQ(b->send(0, m), frame_size(m));
  }
  for (const auto& m : sent) {
    EXPECT_EQ(encode_frame(a->recv(1s)), encode_frame(m));
  }
}

TEST(InMemory, PassivePartiesOnlyReachTheActiveParty) {
  InMemoryNetwork net(3);
  auto b = net.endpoint(1);
  Message m;
  m.sender = 1;
  m.payload = PublicKeyMsg{1, {5}};
  EXPECT_THROW(b->send(2, m), Error);
  m.sender = 2;
  EXPECT_THROW(b->send(0, m), Error);
}

TEST(InMemory, TimeoutAndShutdown) {
  InMemoryNetwork net(2);
  auto a = net.endpoint(0);
  EXPECT_THROW(a->recv(20ms), TimeoutError);
  net.shutdown("test over");
  EXPECT_THROW(a->recv(1s), ConnectionError);
}

TEST(InMemory, InjectedGarbageIsMalformed) {
  InMemoryNetwork net(2);
  auto a = net.endpoint(0);
  net.inject_raw(0, {1, 2, 3});
  EXPECT_THROW(a->recv(1s), MalformedFrameError);
}

TEST(Tcp, RoundTripsBothDirections) {
  testing::TcpSession s(2);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Message up = testing::random_message(rng);
    up.sender = 2;
    s.clients[1]->send(0, up);
    EXPECT_EQ(encode_frame(s.hub->recv(2s)), encode_frame(up));
    Message down = testing::random_message(rng);
    down.sender = 0;
    s.hub->send(1, down);
    EXPECT_EQ(encode_frame(s.clients[0]->recv(2s)), encode_frame(down));
  }
}

TEST(Tcp, GarbageOnTheWireIsMalformed) {
  testing::TcpSession s(1);
  const std::vector<std::uint8_t> junk = {'N', 'O', 'P', 'E', 1, 1, 1, 0, 0, 0, 0, 0};
  s.clients[0]->send_raw(junk);
  EXPECT_THROW(s.hub->recv(2s), MalformedFrameError);
}

TEST(Tcp, SpoofedSenderIsMalformed) {
  testing::TcpSession s(2);
  Message m;
  m.sender = 2;  // connection belongs to party 1
  m.payload = PublicKeyMsg{2, {9}};
  s.clients[0]->send_raw(encode_frame(m));
  EXPECT_THROW(s.hub->recv(2s), MalformedFrameError);
}

TEST(Tcp, RecvTimesOut) {
  testing::TcpSession s(1);
  EXPECT_THROW(s.hub->recv(30ms), TimeoutError);
  EXPECT_THROW(s.clients[0]->recv(30ms), TimeoutError);
}

TEST(Tcp, ClosedHubSurfacesOnClient) {
  testing::TcpSession s(1);
  s.hub.reset();
  EXPECT_THROW(s.clients[0]->recv(2s), ConnectionError);
}

TEST(Tcp, AcceptTimesOutWithoutPeers) {
  TcpHub hub(1, TcpOptions{});
  EXPECT_THROW(hub.accept_all(50ms), ConnectionError);
}

}  // namespace
}  // namespace vfmh::transport
