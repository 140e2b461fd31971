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

#ifndef VFMH_TRANSPORT_ENDPOINT_HPP_
#define VFMH_TRANSPORT_ENDPOINT_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "vfmh/transport/message.hpp"

namespace vfmh::transport {

// A party's handle on the star network. Passive endpoints can only address
// the active party; the active party can address everyone.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  virtual PartyIndex id() const = 0;
  // Returns the number of bytes put on the wire (full frame).
  virtual std::size_t send(PartyIndex dest, const Message& msg) = 0;
  // Next message from any sender. FIFO per sender. Throws TimeoutError or
  // MalformedFrameError.
  virtual Message recv(std::chrono::milliseconds timeout) = 0;
};

// Thread-safe FIFO of raw frames. A poisoned entry carries a transport
// error that recv() rethrows.
class Inbox {
 public:
  void push_frame(std::vector<std::uint8_t> frame);
  // `malformed` selects MalformedFrameError over ConnectionError.
  void push_error(std::string what, bool malformed = true);
  void close(std::string why);
  Message pop(std::chrono::milliseconds timeout);

 private:
  struct Entry {
    std::vector<std::uint8_t> frame;
    std::string error;
    bool malformed = true;
  };
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Entry> queue_;
  std::string closed_;
};

// Single-process network of C endpoints. Frames are fully encoded and
// decoded so the in-memory path exercises the wire format.
class InMemoryNetwork {
 public:
  explicit InMemoryNetwork(std::size_t num_parties);
  ~InMemoryNetwork();

  std::size_t size() const { return inboxes_.size(); }
  // Each endpoint must be used from one thread only.
  std::unique_ptr<Endpoint> endpoint(PartyIndex party);

  // Test hook: deliver raw bytes into a party's inbox.
  void inject_raw(PartyIndex dest, std::vector<std::uint8_t> bytes);
  // Closes every inbox; pending and future recv() calls throw
  // ConnectionError once queued frames are drained.
  void shutdown(const std::string& why);

 private:
  class MemEndpoint;
  std::vector<std::unique_ptr<Inbox>> inboxes_;
};

struct TcpOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::chrono::milliseconds connect_timeout{10000};
};

// Active-party side: listens, accepts one connection per passive party.
// Each connection starts with a 2-byte little-endian party id preamble,
// followed by frames.
class TcpHub : public Endpoint {
 public:
  TcpHub(std::size_t num_passive, const TcpOptions& options);
  ~TcpHub() override;

  // Port actually bound (useful when options.port == 0).
  std::uint16_t port() const { return port_; }
  // Blocks until all passive parties have connected. Throws ConnectionError
  // on timeout or duplicate/out-of-range party ids.
  void accept_all(std::chrono::milliseconds timeout);

  PartyIndex id() const override { return kActiveParty; }
  std::size_t send(PartyIndex dest, const Message& msg) override;
  Message recv(std::chrono::milliseconds timeout) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

// Passive-party side: dials the hub.
class TcpClient : public Endpoint {
 public:
  TcpClient(PartyIndex self, const TcpOptions& options);
  ~TcpClient() override;

  PartyIndex id() const override { return self_; }
  std::size_t send(PartyIndex dest, const Message& msg) override;
  Message recv(std::chrono::milliseconds timeout) override;

  // Test hook: write raw bytes on the connection.
  void send_raw(std::span<const std::uint8_t> bytes);

 private:
  struct Impl;
  PartyIndex self_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vfmh::transport

#endif  // VFMH_TRANSPORT_ENDPOINT_HPP_
