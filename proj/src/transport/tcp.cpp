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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <string>
#include <thread>

#include "vfmh/transport/endpoint.hpp"

namespace vfmh::transport {
namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(std::string_view what) {
  return std::string(what) + ": " + std::strerror(errno);
}

void write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n =
        ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

// Returns false on orderly EOF before the first byte.
bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw ConnectionError("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(errno_text("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  pollfd p{fd, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  } while (rc < 0 && errno == EINTR);
  return rc > 0;
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw ConnectionError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

// One framed socket feeding an inbox from a background reader.
class Connection {
 public:
  // Frames must name `peer` as their sender. With `open_peers`, a clean
  // close only poisons the inbox once every sharing connection has closed;
  // later writes to the closed peer still fail.
  Connection(int fd, Inbox& inbox, PartyIndex peer,
             std::atomic<std::size_t>* open_peers = nullptr)
      : fd_(fd), inbox_(inbox), peer_(peer), open_peers_(open_peers) {
    reader_ = std::thread([this] { read_loop(); });
  }

  ~Connection() {
    stopping_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void write(std::span<const std::uint8_t> bytes) {
    std::lock_guard<std::mutex> lock(write_mu_);
    if (broken_) throw ConnectionError("connection is closed");
    write_all(fd_, bytes);
  }

 private:
  void read_loop() {
    try {
      while (true) {
        std::vector<std::uint8_t> frame(kHeaderSize);
        if (!read_exact(fd_, frame.data(), kHeaderSize)) {
          if (!stopping_) {
            if (open_peers_ == nullptr) {
              inbox_.push_error("peer closed the connection", false);
            } else if (open_peers_->fetch_sub(1) == 1) {
              inbox_.push_error("every peer closed its connection", false);
            }
          }
          break;
        }
        FrameHeader h;
        try {
          h = parse_header(frame);
          if (h.sender != peer_) {
            throw MalformedFrameError(
                "frame claims sender " + std::to_string(h.sender) +
                " on the connection of party " + std::to_string(peer_));
          }
        } catch (const MalformedFrameError& e) {
          broken_ = true;
          inbox_.push_error(e.what());
          ::shutdown(fd_, SHUT_RDWR);
          return;
        }
        frame.resize(kHeaderSize + h.payload_len);
        if (h.payload_len > 0 &&
            !read_exact(fd_, frame.data() + kHeaderSize, h.payload_len)) {
          throw ConnectionError("connection closed mid-frame");
        }
        inbox_.push_frame(std::move(frame));
      }
    } catch (const TransportError& e) {
      if (!stopping_) inbox_.push_error(e.what(), false);
    }
    broken_ = true;
  }

  int fd_;
  Inbox& inbox_;
  PartyIndex peer_;
  std::atomic<std::size_t>* open_peers_;
  std::mutex write_mu_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> broken_{false};
  std::thread reader_;
};

}  // namespace

struct TcpHub::Impl {
  std::size_t num_passive = 0;
  int listen_fd = -1;
  Inbox inbox;
  std::atomic<std::size_t> open_peers{0};
  std::map<PartyIndex, std::unique_ptr<Connection>> peers;

  ~Impl() {
    peers.clear();
    if (listen_fd >= 0) ::close(listen_fd);
  }
};

TcpHub::TcpHub(std::size_t num_passive, const TcpOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->num_passive = num_passive;
  impl_->open_peers = num_passive;
  impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl_->listen_fd < 0) throw ConnectionError(errno_text("socket"));
  int one = 1;
  ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(options.host, options.port);
  if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr),
             sizeof(addr)) != 0) {
    throw ConnectionError(errno_text("bind " + options.host + ":" +
                                     std::to_string(options.port)));
  }
  if (::listen(impl_->listen_fd, static_cast<int>(num_passive) + 4) != 0) {
    throw ConnectionError(errno_text("listen"));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpHub::~TcpHub() = default;

void TcpHub::accept_all(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (impl_->peers.size() < impl_->num_passive) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0 || !wait_readable(impl_->listen_fd, left)) {
      throw ConnectionError(
          "timed out waiting for passive parties: " +
          std::to_string(impl_->peers.size()) + " of " +
          std::to_string(impl_->num_passive) + " connected");
    }
    const int fd = ::accept(impl_->listen_fd, nullptr, nullptr);
    if (fd < 0) throw ConnectionError(errno_text("accept"));
    set_nodelay(fd);
    std::uint8_t preamble[2];
    if (!wait_readable(fd, std::chrono::milliseconds(5000)) ||
        !read_exact(fd, preamble, 2)) {
      ::close(fd);
      throw ConnectionError("peer sent no party id");
    }
    const auto party = static_cast<PartyIndex>(preamble[0] | (preamble[1] << 8));
    if (party == kActiveParty || party > impl_->num_passive) {
      ::close(fd);
      throw ConnectionError("party id " + std::to_string(party) +
                            " out of range");
    }
    if (impl_->peers.count(party)) {
      ::close(fd);
      throw ConnectionError("duplicate party id " + std::to_string(party));
    }
    impl_->peers.emplace(party, std::make_unique<Connection>(fd, impl_->inbox, party,
                                                             &impl_->open_peers));
  }
}

std::size_t TcpHub::send(PartyIndex dest, const Message& msg) {
  auto it = impl_->peers.find(dest);
  if (it == impl_->peers.end()) {
    throw ConnectionError("party " + std::to_string(dest) + " not connected");
  }
  if (msg.sender != kActiveParty) {
    throw ConnectionError("sender field does not match the endpoint");
  }
  const std::vector<std::uint8_t> frame = encode_frame(msg);
  it->second->write(frame);
  return frame.size();
}

Message TcpHub::recv(std::chrono::milliseconds timeout) {
  return impl_->inbox.pop(timeout);
}

struct TcpClient::Impl {
  Inbox inbox;
  std::unique_ptr<Connection> conn;
};

TcpClient::TcpClient(PartyIndex self, const TcpOptions& options)
    : self_(self), impl_(std::make_unique<Impl>()) {
  const sockaddr_in addr = resolve(options.host, options.port);
  const auto deadline = Clock::now() + options.connect_timeout;
  int fd = -1;
  while (true) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ConnectionError(errno_text("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr),
                  sizeof(addr)) == 0) {
      break;
    }
    ::close(fd);
    if (Clock::now() >= deadline) {
      throw ConnectionError("cannot connect to " + options.host + ":" +
                            std::to_string(options.port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  set_nodelay(fd);
  const std::uint8_t preamble[2] = {static_cast<std::uint8_t>(self),
                                    static_cast<std::uint8_t>(self >> 8)};
  try {
    write_all(fd, preamble);
  } catch (...) {
    ::close(fd);
    throw;
  }
  impl_->conn = std::make_unique<Connection>(fd, impl_->inbox, kActiveParty);
}

TcpClient::~TcpClient() = default;

std::size_t TcpClient::send(PartyIndex dest, const Message& msg) {
  if (dest != kActiveParty) {
    throw ConnectionError("passive parties may only address the active party");
  }
  if (msg.sender != self_) {
    throw ConnectionError("sender field does not match the endpoint");
  }
  const std::vector<std::uint8_t> frame = encode_frame(msg);
  impl_->conn->write(frame);
  return frame.size();
}

Message TcpClient::recv(std::chrono::milliseconds timeout) {
  return impl_->inbox.pop(timeout);
}

void TcpClient::send_raw(std::span<const std::uint8_t> bytes) {
  impl_->conn->write(bytes);
}

}  // namespace vfmh::transport
