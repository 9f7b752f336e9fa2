#include "glove/device_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace glove::device {

namespace {

std::int16_t saturate_i16(double v) {
  const double r = std::round(v);
  constexpr double lo = std::numeric_limits<std::int16_t>::min();
  constexpr double hi = std::numeric_limits<std::int16_t>::max();
  return static_cast<std::int16_t>(std::clamp(r, lo, hi));
}

std::array<std::int16_t, 3> quantize(const Vec3& v) {
  return {saturate_i16(v.x()), saturate_i16(v.y()), saturate_i16(v.z())};
}

Vec3 gaussian3(Rng& rng, double sigma) {
  // Always draw three variates so the stream position does not depend on sigma.
  const double x = rng.gaussian(), y = rng.gaussian(), z = rng.gaussian();
  return Vec3(x, y, z) * sigma;
}

const Vec3 kGravityMg{0.0, 0.0, -1000.0};

}  // namespace

bool HandPose::valid() const {
  if (std::abs(orientation.norm() - 1.0) > 1e-6) return false;
  return std::all_of(flex.begin(), flex.end(), [](double f) { return f >= 0.0 && f <= 1.0; });
}

void FlexSensorModel::validate() const {
  if (!(raw_bent >= 0.0 && raw_bent < raw_straight && raw_straight <= 1023.0))
    throw std::invalid_argument("flex model requires 0 <= raw_bent < raw_straight <= 1023");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("flex noise_sigma must be >= 0");
}

void ImuModel::validate() const {
  if (!(gyro_bias_walk_sigma >= 0.0 && gyro_noise_sigma >= 0.0 && accel_noise_sigma >= 0.0 &&
        mag_noise_sigma >= 0.0))
    throw std::invalid_argument("IMU noise parameters must be >= 0");
}

ImuModel ImuModel::noiseless() {
  ImuModel m;
  m.gyro_bias_walk_sigma = 0.0;
  m.gyro_noise_sigma = 0.0;
  m.accel_noise_sigma = 0.0;
  m.mag_noise_sigma = 0.0;
  return m;
}

std::uint16_t synth_flex(double bend, const FlexSensorModel& model, Rng& rng) {
  bend = std::clamp(bend, 0.0, 1.0);
  const double noise = rng.gaussian() * model.noise_sigma;
  const double raw = model.raw_straight - bend * (model.raw_straight - model.raw_bent) + noise;
  return static_cast<std::uint16_t>(std::clamp(std::round(raw), 0.0, 1023.0));
}

ImuSample synth_imu(const HandPose& pose, ImuModel& model, double dt_s, Rng& rng) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("synth_imu: dt must be positive");

  model.gyro_bias += gaussian3(rng, model.gyro_bias_walk_sigma * std::sqrt(dt_s));

  const Quat world_to_body = pose.orientation.conjugate();
  const Vec3 gyro_dps = pose.angular_velocity + model.gyro_bias + gaussian3(rng, model.gyro_noise_sigma);
  const Vec3 accel_mg = world_to_body * kGravityMg + gaussian3(rng, model.accel_noise_sigma);
  const Vec3 mag_raw = world_to_body * model.mag_reference * 10.0 + gaussian3(rng, model.mag_noise_sigma);

  ImuSample s;
  s.gyro = quantize(gyro_dps * 10.0);
  s.accel = quantize(accel_mg);
  s.mag = quantize(mag_raw);
  return s;
}

std::optional<wire::SensorFrame> step_firmware(DeviceState& device, const HandPose& pose,
                                               std::uint32_t dt_ms, Rng& rng) {
  if (dt_ms == 0 || dt_ms > device.sample_period_ms)
    throw std::invalid_argument("step_firmware: dt_ms must be in (0, sample_period_ms]");

  device.clock_ms += dt_ms;
  for (auto& m : device.motor) {
    m.remaining_ms -= std::min(m.remaining_ms, dt_ms);
    if (m.remaining_ms == 0) m.intensity = 0;
  }
  if (device.mode == LinkMode::Wireless) {
    device.battery_pct = std::max(0.0, device.battery_pct - device.battery_drain_pct_per_s * dt_ms / 1000.0);
  }

  device.since_sample_ms += dt_ms;
  if (device.since_sample_ms < device.sample_period_ms) return std::nullopt;
  device.since_sample_ms -= device.sample_period_ms;

  const ImuSample imu = synth_imu(pose, device.imu, device.sample_period_ms / 1000.0, rng);
  wire::SensorFrame f;
  f.seq = device.seq++;
  f.t_ms = device.clock_ms;
  f.gyro = imu.gyro;
  f.accel = imu.accel;
  f.mag = imu.mag;
  for (int i = 0; i < kFingers; ++i) f.flex[i] = synth_flex(pose.flex[i], device.flex_models[i], rng);
  f.battery = static_cast<std::uint8_t>(std::clamp(std::round(device.battery_pct), 0.0, 100.0));
  f.flags = device.mode == LinkMode::Wireless ? wire::kFlagWireless : 0;
  return f;
}

void apply_haptic(DeviceState& device, const wire::HapticCommand& cmd) {
  if (cmd.motor >= kFingers)
    throw std::out_of_range("haptic command addresses motor " + std::to_string(cmd.motor));
  Motor& m = device.motor[cmd.motor];
  if (cmd.is_stop() || cmd.duration_ms == 0) {
    m = Motor{};
    return;
  }
  if (m.active()) {
    m.intensity = std::max(m.intensity, cmd.intensity);
    m.remaining_ms = std::max<std::uint32_t>(m.remaining_ms, cmd.duration_ms);
  } else {
    m.intensity = cmd.intensity;
    m.remaining_ms = cmd.duration_ms;
  }
}

}  // namespace glove::device
