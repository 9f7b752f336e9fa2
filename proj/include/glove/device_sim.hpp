#pragma once

// Emulated glove hardware: five optical flex sensors, a 9-axis IMU, five
// fingertip vibration motors and the fixed-rate firmware loop that samples
// them.

#include "glove/math.hpp"
#include "glove/rng.hpp"
#include "glove/wire_protocol.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace glove::device {

inline constexpr int kFingers = 5;

/// Ground-truth hand state. Finger index 0 = thumb .. 4 = pinky.
struct HandPose {
  Quat orientation = Quat::Identity();  // body -> world
  Vec3 position = Vec3::Zero();         // meters, position-sensor frame
  std::array<double, kFingers> flex{};  // 0 = straight, 1 = fully bent
  Vec3 angular_velocity = Vec3::Zero(); // deg/s, body frame

  bool valid() const;
};

/// Optical bend sensor: received light, and so the ADC reading, falls as the
/// tube bends.
struct FlexSensorModel {
  double raw_straight = 900.0;
  double raw_bent = 200.0;
  double noise_sigma = 3.0;

  /// Throws std::invalid_argument unless 0 <= raw_bent < raw_straight <= 1023.
  void validate() const;
};

struct ImuModel {
  Vec3 gyro_bias = Vec3::Zero();      // deg/s, drifts by random walk
  double gyro_bias_walk_sigma = 0.005;  // deg/s per sqrt(s)
  double gyro_noise_sigma = 0.05;     // deg/s
  double accel_noise_sigma = 3.0;     // milli-g
  double mag_noise_sigma = 2.0;       // 0.1 uT units
  Vec3 mag_reference = kEarthField;  // uT

  void validate() const;

  static ImuModel noiseless();
};

struct ImuSample {
  std::array<std::int16_t, 3> gyro{};   // 0.1 deg/s
  std::array<std::int16_t, 3> accel{};  // milli-g
  std::array<std::int16_t, 3> mag{};    // 0.1 uT
};

struct Motor {
  std::uint8_t intensity = 0;
  std::uint32_t remaining_ms = 0;

  bool active() const { return remaining_ms > 0; }
  bool operator==(const Motor&) const = default;
};

using MotorState = std::array<Motor, kFingers>;

enum class LinkMode { Wired, Wireless };

struct DeviceState {
  MotorState motor{};
  double battery_pct = 100.0;
  std::uint16_t seq = 0;
  LinkMode mode = LinkMode::Wired;
  std::uint32_t sample_period_ms = 10;

  std::uint32_t clock_ms = 0;
  std::uint32_t since_sample_ms = 0;
  double battery_drain_pct_per_s = 0.002;

  std::array<FlexSensorModel, kFingers> flex_models{};
  ImuModel imu{};
};

/// One ADC reading for a finger bent by `bend`.
std::uint16_t synth_flex(double bend, const FlexSensorModel& model, Rng& rng);

/// One IMU sample for `pose`. Advances the model's gyro bias by its random
/// walk over `dt_s` before sampling.
ImuSample synth_imu(const HandPose& pose, ImuModel& model, double dt_s, Rng& rng);

/// Advances the firmware by dt_ms: ages the motors, drains the battery in
/// wireless mode, and emits a frame when a sampling instant is reached.
/// dt_ms must be in (0, sample_period_ms], so at most one instant elapses.
std::optional<wire::SensorFrame> step_firmware(DeviceState& device, const HandPose& pose,
                                               std::uint32_t dt_ms, Rng& rng);

/// Applies a command with max-merge on intensity and remaining time. A
/// zero-intensity command is a stop and idles the motor. Throws
/// std::out_of_range for a motor index above 4.
void apply_haptic(DeviceState& device, const wire::HapticCommand& cmd);

}  // namespace glove::device
