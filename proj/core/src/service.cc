// SPDX-License-Identifier: Apache-2.0

#include "wsc/service.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <iostream>

#include "wsc/errors.h"

namespace wsc {

namespace pr = protocol;

namespace {

Session::Output Reply(pr::Frame f, bool close = false) {
  Session::Output out;
  out.replies.push_back(std::move(f));
  out.close = close;
  return out;
}

Session::Output ErrorReply(const char* code, std::string message,
                           bool close = false) {
  return Reply(pr::ErrorFrame{code, std::move(message)}, close);
}

bool SendAll(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

}  // namespace

Session::Session(const ProbeModel& model, const PolicyConfig& config)
    : model_(model), config_(config) {}

Session::Output Session::Malformed(const std::string& what) {
  return ErrorReply(pr::codes::kMalformed, what, /*close=*/true);
}

Session::Output Session::Handle(const pr::Frame& frame) {
  if (const auto* hello = std::get_if<pr::Hello>(&frame)) {
    if (hello->hidden_dim != model_.dim()) {
      return ErrorReply(pr::codes::kDimMismatch,
                        "hidden_dim " + std::to_string(hello->hidden_dim) +
                            " != model dim " + std::to_string(model_.dim()));
    }
    greeted_ = true;
    return Reply(pr::Hello{static_cast<std::uint32_t>(model_.dim())});
  }
  if (const auto* ev = std::get_if<pr::ChunkEvent>(&frame)) {
    if (!greeted_) {
      return ErrorReply(pr::codes::kHelloRequired,
                        "CHUNK_EVENT before a successful HELLO", true);
    }
    return OnEvent(*ev);
  }
  if (const auto* reset = std::get_if<pr::Reset>(&frame)) {
    streams_.erase(reset->stream_id);
    return {};
  }
  return ErrorReply(pr::codes::kUnexpected,
                    "clients may not send DECISION or ERROR frames", true);
}

Session::Output Session::OnEvent(const pr::ChunkEvent& ev) {
  if (ev.hidden.size() != model_.dim()) {
    return ErrorReply(pr::codes::kDimMismatch,
                      "event dim " + std::to_string(ev.hidden.size()) +
                          " != model dim " + std::to_string(model_.dim()));
  }
  DetectorState& state = streams_[ev.stream_id];
  if (state.chopped && config_.single_chop) {
    return ErrorReply(pr::codes::kStreamChopped,
                      "stream " + std::to_string(ev.stream_id) +
                          " already chopped; send RESET to reuse it");
  }
  const double p = model_.Predict(ev.hidden);
  const ChopDecision d = OnChunkBoundary(state, p, ev.chunk_len, config_);
  pr::Decision out;
  out.stream_id = ev.stream_id;
  out.action = d.chop() ? 1 : 0;
  out.probability = static_cast<float>(p);
  out.regen_budget =
      d.chop() ? static_cast<std::uint32_t>(d.regen->budget) : 0;
  return Reply(out);
}

Server::Server(ProbeModel model, PolicyConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
  config_.Validate();
}

Server::~Server() { Stop(); }

void Server::Listen(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                             port_str.c_str(), &hints, &res);
      rc != 0) {
    throw IoError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) {
    throw IoError("listen on " + host + ":" + port_str + ": " + last_error);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

void Server::Serve() {
  if (listen_fd_ < 0) throw IoError("Serve() before Listen()");
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;  // listener closed by Stop()
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    ReapFinishedLocked();
    client_fds_.push_back(fd);
    Worker& w = workers_.emplace_back();
    w.thread = std::thread([this, fd, &w] {
      HandleConnection(fd);
      w.done = true;
    });
  }
}

void Server::ReapFinishedLocked() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::Start() {
  accept_thread_ = std::thread([this] { Serve(); });
}

void Server::Stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::list<Worker> workers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.thread.join();
}

void Server::HandleConnection(int fd) {
  Session session(model_, config_);
  pr::FrameReader reader;
  std::vector<std::uint8_t> buf(64 * 1024);
  std::vector<std::uint8_t> out;
  bool open = true;
  while (open) {
    const ssize_t k = ::recv(fd, buf.data(), buf.size(), 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) break;
    reader.Append(std::span(buf.data(), static_cast<std::size_t>(k)));
    out.clear();
    while (open) {
      Session::Output result;
      try {
        auto frame = reader.Next();
        if (!frame) break;
        result = session.Handle(*frame);
      } catch (const pr::ProtocolError& e) {
        result = Session::Malformed(e.what());
      }
      for (const auto& f : result.replies) pr::EncodeTo(f, out);
      if (result.close) open = false;
    }
    if (!out.empty() && !SendAll(fd, out.data(), out.size())) break;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd),
                      client_fds_.end());
  }
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
}

Client::~Client() { Close(); }

void Client::Connect(const std::string& host, std::uint16_t port) {
  Close();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res);
      rc != 0) {
    throw IoError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw IoError("connect " + host + ":" + port_str + " failed");
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void Client::Send(const pr::Frame& frame) { SendRaw(pr::Encode(frame)); }

void Client::SendRaw(const std::vector<std::uint8_t>& bytes) {
  if (fd_ < 0 || !SendAll(fd_, bytes.data(), bytes.size())) {
    throw IoError("send failed");
  }
}

std::optional<pr::Frame> Client::Receive() {
  std::uint8_t buf[4096];
  while (true) {
    if (auto f = reader_.Next()) return f;
    if (fd_ < 0) return std::nullopt;
    const ssize_t k = ::recv(fd_, buf, sizeof(buf), 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return std::nullopt;
    reader_.Append(std::span(buf, static_cast<std::size_t>(k)));
  }
}

void Client::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  reader_ = pr::FrameReader();
}

std::pair<std::string, std::uint16_t> ParseEndpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 == s.size()) {
    throw ValidationError("endpoint must be HOST:PORT, got '" + s + "'");
  }
  std::string host = s.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  const std::string port = s.substr(colon + 1);
  if (port.find_first_not_of("0123456789") != std::string::npos ||
      port.size() > 5 || std::stoul(port) > 65535) {
    throw ValidationError("bad port in endpoint '" + s + "'");
  }
  return {host, static_cast<std::uint16_t>(std::stoul(port))};
}

}  // namespace wsc
