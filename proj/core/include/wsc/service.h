// SPDX-License-Identifier: Apache-2.0
//
// Chop-decision sidecar: a per-connection protocol session and a TCP server
// running one session per connection. The service only advises; truncation
// and prompt injection stay with the caller's inference engine.

#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "wsc/chop_policy.h"
#include "wsc/probe.h"
#include "wsc/protocol.h"

namespace wsc {

// Protocol state for one connection. Stream ids are scoped to the
// connection; each stream owns an independent DetectorState.
class Session {
 public:
  Session(const ProbeModel& model, const PolicyConfig& config);

  struct Output {
    std::vector<protocol::Frame> replies;
    bool close = false;
  };

  // HELLO with a matching dim is acknowledged by echoing HELLO with the
  // model dim. A mismatching dim, an event of the wrong width, or an event on
  // an already-chopped stream gets an ERROR and the connection stays open.
  // Events before HELLO or client-sent DECISION/ERROR frames get an ERROR
  // and close the connection. RESET is not acknowledged.
  Output Handle(const protocol::Frame& frame);

  // Reply for bytes that failed to decode; always closes.
  static Output Malformed(const std::string& what);

  std::size_t live_streams() const { return streams_.size(); }

 private:
  Output OnEvent(const protocol::ChunkEvent& ev);

  const ProbeModel& model_;
  const PolicyConfig& config_;
  bool greeted_ = false;
  std::unordered_map<std::uint64_t, DetectorState> streams_;
};

class Server {
 public:
  Server(ProbeModel model, PolicyConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens; port 0 picks an ephemeral port. Throws IoError.
  void Listen(const std::string& host, std::uint16_t port);
  std::uint16_t port() const { return port_; }

  // Accepts connections until Stop(); each connection gets its own thread.
  void Serve();
  // Starts Serve() on a background thread.
  void Start();
  // Closes the listener and every open connection, then joins all threads.
  void Stop();

 private:
  struct Worker {
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void HandleConnection(int fd);
  // Joins workers whose connections have ended. Caller holds mu_.
  void ReapFinishedLocked();

  ProbeModel model_;
  PolicyConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::list<Worker> workers_;
  std::vector<int> client_fds_;
};

// Blocking client for the sidecar protocol.
class Client {
 public:
  Client() = default;
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  // Throws IoError.
  void Connect(const std::string& host, std::uint16_t port);
  void Send(const protocol::Frame& frame);
  void SendRaw(const std::vector<std::uint8_t>& bytes);
  // Blocks for the next frame; nullopt when the peer closed the connection.
  std::optional<protocol::Frame> Receive();
  void Close();

 private:
  int fd_ = -1;
  protocol::FrameReader reader_;
};

// Parses "HOST:PORT"; throws ValidationError.
std::pair<std::string, std::uint16_t> ParseEndpoint(const std::string& s);

}  // namespace wsc
