#include "glove/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glove::tracking {

void FlexCalibration::validate() const {
  for (int i = 0; i < kFingers; ++i) {
    if (!(raw_min[i] < raw_max[i]))
      throw std::invalid_argument("flex calibration needs raw_min < raw_max for finger " + std::to_string(i));
  }
}

FlexCalibration calibrate_flex(std::span<const FlexSample> straight, std::span<const FlexSample> bent) {
  using Kind = CalibrationError::Kind;
  if (straight.size() < kMinCalibrationSamples || bent.size() < kMinCalibrationSamples) {
    throw CalibrationError(Kind::InsufficientSamples, -1,
                           "calibration needs at least " + std::to_string(kMinCalibrationSamples) +
                               " samples per pose");
  }
  auto mean = [](std::span<const FlexSample> samples, int finger) {
    double sum = 0.0;
    for (const auto& s : samples) sum += s[finger];
    return sum / static_cast<double>(samples.size());
  };
  FlexCalibration cal;
  for (int i = 0; i < kFingers; ++i) {
    cal.raw_max[i] = mean(straight, i);
    cal.raw_min[i] = mean(bent, i);
    if (cal.raw_max[i] - cal.raw_min[i] < kMinCalibrationSpan) {
      throw CalibrationError(Kind::DegenerateCalibration, i,
                             "finger " + std::to_string(i) + " flex span below " +
                                 std::to_string(static_cast<int>(kMinCalibrationSpan)) + " counts");
    }
  }
  return cal;
}

double normalize_flex(double raw, double raw_min, double raw_max) {
  return std::clamp((raw_max - raw) / (raw_max - raw_min), 0.0, 1.0);
}

std::array<double, kFingers> normalize_flex(const FlexSample& raw, const FlexCalibration& cal) {
  std::array<double, kFingers> out{};
  for (int i = 0; i < kFingers; ++i) out[i] = normalize_flex(raw[i], cal.raw_min[i], cal.raw_max[i]);
  return out;
}

bool PositionSensor::due(std::uint32_t t_ms) {
  const auto instant = static_cast<std::uint64_t>(std::floor(next_index_ * 1000.0 / model_.rate_hz));
  if (t_ms < instant) return false;
  ++next_index_;
  return true;
}

std::optional<PositionMeasurement> PositionSensor::sample(const Vec3& true_position, std::uint32_t t_ms,
                                                          Rng& rng) const {
  if (rng.bernoulli(model_.dropout_prob)) return std::nullopt;
  const double x = rng.gaussian(), y = rng.gaussian(), z = rng.gaussian();
  return PositionMeasurement{true_position + Vec3(x, y, z) * model_.noise_sigma_m, t_ms};
}

Tracker::Tracker(FilterConfig cfg, FlexCalibration cal, Vec3 sensor_axis)
    : cfg_(cfg), cal_(cal), axis_(sensor_axis.normalized()) {
  cfg_.validate();
  cal_.validate();
  pose_.distance = std::abs(pose_.position.dot(axis_));
}

const FusedPose& Tracker::on_frame(const wire::SensorFrame& frame, std::uint32_t host_t_ms) {
  const Vec3 gyro = Vec3(frame.gyro[0], frame.gyro[1], frame.gyro[2]) * 0.1;
  const Vec3 accel(frame.accel[0], frame.accel[1], frame.accel[2]);
  const Vec3 mag = Vec3(frame.mag[0], frame.mag[1], frame.mag[2]) * 0.1;

  if (!last_device_t_) {
    // First frame: align fully to gravity and north instead of integrating.
    FilterConfig snap = cfg_;
    snap.accel_gain = 1.0;
    snap.mag_gain = 1.0;
    pose_.orientation = update_orientation(Quat::Identity(), Vec3::Zero().eval(), accel, mag, 1e-3, snap);
  } else if (frame.t_ms > *last_device_t_) {
    const double dt = (frame.t_ms - *last_device_t_) / 1000.0;
    pose_.orientation = update_orientation(pose_.orientation, gyro, accel, mag, dt, cfg_);
  }
  last_device_t_ = frame.t_ms;
  pose_.flex_norm = normalize_flex(frame.flex, cal_);
  pose_.timestamp_ms = host_t_ms;
  ++frames_;
  return pose_;
}

const FusedPose& Tracker::on_position(const PositionMeasurement& m, std::uint32_t now_ms) {
  // The first measurement is taken as-is; there is nothing to blend with.
  const bool fresh = m.t_ms <= now_ms && now_ms - m.t_ms <= kMaxMeasurementAgeMs;
  if (!fresh) return pose_;
  const double gain = have_position_ ? cfg_.position_gain : 1.0;
  pose_.position = fuse_position(pose_.position, m.position, m.t_ms, now_ms, gain);
  have_position_ = true;
  pose_.distance = std::abs(pose_.position.dot(axis_));
  return pose_;
}

const FusedPose& Tracker::on_orientation(const Quat& measured) {
  if (cfg_.orientation_aid_gain > 0.0) {
    pose_.orientation = pose_.orientation.slerp(cfg_.orientation_aid_gain, measured).normalized();
  }
  return pose_;
}

}  // namespace glove::tracking
