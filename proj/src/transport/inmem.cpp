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

#include "vfmh/transport/endpoint.hpp"

#include <string>

namespace vfmh::transport {

void Inbox::push_frame(std::vector<std::uint8_t> frame) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back({std::move(frame), {}});
  }
  cv_.notify_all();
}

void Inbox::push_error(std::string what, bool malformed) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back({{}, std::move(what), malformed});
  }
  cv_.notify_all();
}

void Inbox::close(std::string why) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = std::move(why);
  }
  cv_.notify_all();
}

Message Inbox::pop(std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  if (!cv_.wait_for(lock, timeout,
                    [&] { return !queue_.empty() || !closed_.empty(); })) {
    throw TimeoutError("no message within " + std::to_string(timeout.count()) +
                       " ms");
  }
  if (queue_.empty()) throw ConnectionError(closed_);
  Entry e = std::move(queue_.front());
  queue_.pop_front();
  lock.unlock();
  if (!e.error.empty()) {
    if (e.malformed) throw MalformedFrameError(e.error);
    throw ConnectionError(e.error);
  }
  return decode_frame(e.frame);
}

class InMemoryNetwork::MemEndpoint : public Endpoint {
 public:
  MemEndpoint(InMemoryNetwork& net, PartyIndex self) : net_(net), self_(self) {}

  PartyIndex id() const override { return self_; }

  std::size_t send(PartyIndex dest, const Message& msg) override {
    if (dest >= net_.size()) {
      throw ConnectionError("no party " + std::to_string(dest));
    }
    if (self_ != kActiveParty && dest != kActiveParty) {
      throw ConnectionError("passive parties may only address the active party");
    }
    if (msg.sender != self_) {
      throw ConnectionError("sender field does not match the endpoint");
    }
    std::vector<std::uint8_t> frame = encode_frame(msg);
    const std::size_t bytes = frame.size();
    net_.inboxes_[dest]->push_frame(std::move(frame));
    return bytes;
  }

  Message recv(std::chrono::milliseconds timeout) override {
    return net_.inboxes_[self_]->pop(timeout);
  }

 private:
  InMemoryNetwork& net_;
  PartyIndex self_;
};

InMemoryNetwork::InMemoryNetwork(std::size_t num_parties) {
  for (std::size_t i = 0; i < num_parties; ++i) {
    inboxes_.push_back(std::make_unique<Inbox>());
  }
}

InMemoryNetwork::~InMemoryNetwork() = default;

std::unique_ptr<Endpoint> InMemoryNetwork::endpoint(PartyIndex party) {
  if (party >= size()) throw ConnectionError("no party " + std::to_string(party));
  return std::make_unique<MemEndpoint>(*this, party);
}

void InMemoryNetwork::inject_raw(PartyIndex dest,
                                 std::vector<std::uint8_t> bytes) {
  inboxes_.at(dest)->push_frame(std::move(bytes));
}

void InMemoryNetwork::shutdown(const std::string& why) {
  for (auto& inbox : inboxes_) inbox->close(why);
}

}  // namespace vfmh::transport
