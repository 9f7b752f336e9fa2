#pragma once

// The closed loop: hand -> device firmware -> uplink -> tracking ->
// gestures -> flight sim -> haptics -> downlink -> device motors, advanced
// one millisecond at a time on a single logical clock.

#include "glove/device_sim.hpp"
#include "glove/flightsim.hpp"
#include "glove/gestures.hpp"
#include "glove/haptics.hpp"
#include "glove/link.hpp"
#include "glove/pose_script.hpp"
#include "glove/rng.hpp"
#include "glove/run_log.hpp"
#include "glove/scenario.hpp"
#include "glove/tracking.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace glove::session {

/// Handshake version disagreement; the session cannot continue.
class SessionAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground truth for the hand at each master tick.
class HandSource {
 public:
  virtual ~HandSource() = default;
  virtual device::HandPose pose_at(std::uint32_t t_ms) = 0;
};

class ScriptHandSource : public HandSource {
 public:
  explicit ScriptHandSource(PoseScript script) : script_(std::move(script)) {}
  device::HandPose pose_at(std::uint32_t t_ms) override { return script_.pose_at(t_ms); }

 private:
  PoseScript script_;
};

/// Level hand, fingers straight, at mid range.
PoseRecord neutral_record();

/// Hand driven by a live client. After a disconnect the last pose is held
/// for 500 ms, then the hand returns to neutral.
class LiveHandSource : public HandSource {
 public:
  static constexpr std::uint32_t kHoldAfterDisconnectMs = 500;

  void set_pose(const PoseRecord& r, std::uint32_t t_ms);
  void disconnect(std::uint32_t t_ms);
  device::HandPose pose_at(std::uint32_t t_ms) override;

  const PoseRecord& current() const { return current_; }

 private:
  PoseRecord current_ = neutral_record();
  std::optional<std::uint32_t> disconnected_at_;
  std::optional<Quat> last_orientation_;
  std::optional<std::uint32_t> last_t_;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  wire::LinkProfile link = wire::usb_profile();
  std::vector<flight::Target> targets;
  flight::FlightConfig flight{};
  tracking::FilterConfig filter{};
  gestures::GestureConfig gestures{};
  tracking::FlexCalibration calibration{};
  tracking::PositionSensorModel position_sensor{};
  device::DeviceState device{};  // initial device state and sensor models
  std::uint8_t device_protocol_version = wire::kProtocolVersion;
  double sim_rate_hz = 60.0;
  double snapshot_rate_hz = 30.0;
  bool log_sensor_frames = true;

  static PipelineConfig from_scenario(const Scenario& s);
};

struct LatencyStats {
  std::vector<std::uint32_t> samples_ms;  // one per delivered gun buzz
  std::size_t undelivered = 0;

  double percentile(double p) const;
};

class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, HandSource& hand);

  /// Runs master tick now() and advances the clock by 1 ms. Throws
  /// SessionAborted on a protocol version mismatch.
  void tick();
  void run_until(std::uint32_t end_ms);

  std::uint32_t now() const { return now_; }
  bool connected() const { return host_linked_ && device_linked_; }

  /// Restores the world (aircraft, targets, missiles); the device and host
  /// estimation state carry on.
  void reset_world();

  const RunLog& log() const { return log_; }
  RunLog take_log() { return std::move(log_); }
  const flight::World& world() const { return world_; }
  const device::DeviceState& device() const { return device_; }
  const tracking::FusedPose& fused() const { return tracker_.pose(); }
  const gestures::GestureDetector& gestures() const { return gestures_; }
  const device::HandPose& true_hand() const { return hand_pose_; }
  const PipelineConfig& config() const { return cfg_; }

  /// Game events since the last call.
  std::vector<flight::GameEvent> drain_events();

 private:
  void device_side(std::uint32_t t);
  void host_receive(std::uint32_t t);
  void position_sample(std::uint32_t t);
  void sim_step(std::uint32_t t);
  void haptics_tick(std::uint32_t t);

  PipelineConfig cfg_;
  HandSource& hand_;
  Rng rng_;
  device::DeviceState device_;
  wire::Channel uplink_;
  wire::Channel downlink_;
  wire::StreamReassembler device_rx_;
  wire::StreamReassembler host_rx_;
  tracking::Tracker tracker_;
  tracking::PositionSensor position_sensor_;
  gestures::GestureDetector gestures_;
  flight::World world_;
  haptics::HapticScheduler scheduler_;
  RunLog log_;

  device::HandPose hand_pose_;
  std::uint32_t now_ = 0;
  std::uint64_t sim_steps_ = 0;
  bool host_linked_ = false;    // host saw a valid device handshake
  bool device_linked_ = false;  // device saw the host's answer
  std::vector<flight::GameEvent> pending_events_;
};

/// Delay from each GunFired to the device applying its index-finger buzz.
LatencyStats gun_haptic_latency(const RunLog& log);

}  // namespace glove::session
