#pragma once

// Live mode: one WebSocket client drives the hand while the pipeline runs
// against the wall clock and state snapshots stream back at 30 Hz.

#include "glove/pipeline.hpp"
#include "glove/scenario.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

namespace glove::session {

inline constexpr int kGatewayVersion = 1;

class PortInUse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Client message failed validation; the gateway answers with an error
/// frame and closes.
class ClientProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PoseMessage {
  PoseRecord pose;
};
struct ResetMessage {};
using ClientMessage = std::variant<PoseMessage, ResetMessage>;

/// Parses one client text frame. Throws ClientProtocolError on anything
/// that is not a well-formed, version-1 pose or reset message.
ClientMessage parse_client_message(const std::string& text);

/// State snapshot as sent to the client.
nlohmann::json make_snapshot(const Pipeline& p, const std::vector<flight::GameEvent>& events);
std::string error_frame(const std::string& message);

class Gateway {
 public:
  /// Binds immediately; throws PortInUse if the port is taken. Port 0 picks
  /// a free port.
  Gateway(const Scenario& scenario, std::uint16_t port);
  Gateway(PipelineConfig cfg, std::uint16_t port);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::uint16_t port() const;

  /// Starts the network and tick threads and returns.
  void start();
  /// Stops both threads; safe to call twice.
  void stop();

  std::uint32_t sim_time_ms() const;
  /// Set if the pipeline stopped on an error (for example a handshake failure).
  std::string failure() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glove::session
