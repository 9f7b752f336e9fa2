#pragma once

// Host-side estimation: complementary orientation filter, flex calibration,
// and blending of a low-rate absolute position source into the hand pose.

#include "glove/math.hpp"
#include "glove/rng.hpp"
#include "glove/wire_protocol.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

namespace glove::tracking {

inline constexpr int kFingers = 5;

template <typename Scalar>
struct BasicFilterConfig {
  Scalar accel_gain{0.02};     // fraction of the tilt error removed per sample
  Scalar mag_gain{0.01};       // fraction of the heading error removed per sample
  Scalar position_gain{0.3};   // blend per absolute position sample
  Scalar orientation_aid_gain{0};  // blend toward an absolute orientation, when one is supplied
  Scalar accel_gate_lo_g{0.5};
  Scalar accel_gate_hi_g{1.5};
  Vector3<Scalar> mag_reference = kEarthField.cast<Scalar>();

  /// Throws std::invalid_argument unless every gain lies in [0, 1].
  void validate() const {
    auto in01 = [](Scalar g) { return g >= Scalar(0) && g <= Scalar(1); };
    if (!in01(accel_gain) || !in01(mag_gain) || !in01(position_gain) || !in01(orientation_aid_gain))
      throw std::invalid_argument("filter gains must lie in [0, 1]");
  }
};

using FilterConfig = BasicFilterConfig<double>;

/// Rotation by `gain` times the angle of `full` about the same axis.
template <typename Scalar>
Quaternion<Scalar> scaled_rotation(const Quaternion<Scalar>& full, Scalar gain) {
  Eigen::AngleAxis<Scalar> aa(full);
  return Quaternion<Scalar>(Eigen::AngleAxis<Scalar>(aa.angle() * gain, aa.axis()));
}

/// Pulls the estimate's tilt toward the measured gravity direction.
/// The correction axis is horizontal; it never turns the estimate about
/// the vertical.
template <typename Scalar>
Quaternion<Scalar> correct_tilt(const Quaternion<Scalar>& q, const Vector3<Scalar>& accel, Scalar gain) {
  const Vector3<Scalar> measured_world = (q * accel).normalized();
  const Vector3<Scalar> down(Scalar(0), Scalar(0), Scalar(-1));
  const auto full = Quaternion<Scalar>::FromTwoVectors(measured_world, down);
  return (scaled_rotation(full, gain) * q).normalized();
}

/// Pulls the estimate's heading toward the magnetic reference, rotating
/// about world z only.
template <typename Scalar>
Quaternion<Scalar> correct_heading(const Quaternion<Scalar>& q, const Vector3<Scalar>& mag,
                                   const Vector3<Scalar>& reference, Scalar gain) {
  const Vector3<Scalar> m = q * mag;
  const Scalar mx = m.x(), my = m.y(), rx = reference.x(), ry = reference.y();
  constexpr Scalar kTiny = Scalar(1e-9);
  if (mx * mx + my * my < kTiny || rx * rx + ry * ry < kTiny) return q;
  const Scalar error = std::atan2(mx * ry - my * rx, mx * rx + my * ry);
  return (axis_angle<Scalar>(Vector3<Scalar>::UnitZ(), gain * error) * q).normalized();
}

/// One complementary-filter step: integrate the gyro, then nudge tilt toward
/// the accelerometer (only when |accel| is near 1 g) and heading toward the
/// magnetometer. gyro in deg/s, accel in milli-g, mag in any unit; dt in s.
template <typename Scalar>
Quaternion<Scalar> update_orientation(const Quaternion<Scalar>& q, const Vector3<Scalar>& gyro_dps,
                                      const Vector3<Scalar>& accel_mg, const Vector3<Scalar>& mag,
                                      Scalar dt, const BasicFilterConfig<Scalar>& cfg) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("update_orientation: dt must be positive");

  const Vector3<Scalar> w = gyro_dps * deg2rad(Scalar(1));
  const Quaternion<Scalar> omega(Scalar(0), w.x(), w.y(), w.z());
  Quaternion<Scalar> qdot = q * omega;
  Quaternion<Scalar> pred(q.coeffs() + qdot.coeffs() * (Scalar(0.5) * dt));
  pred.normalize();

  const Scalar g = accel_mg.norm() / Scalar(1000);
  if (cfg.accel_gain > Scalar(0) && g >= cfg.accel_gate_lo_g && g <= cfg.accel_gate_hi_g) {
    pred = correct_tilt(pred, accel_mg, cfg.accel_gain);
  }
  if (cfg.mag_gain > Scalar(0) && mag.squaredNorm() > Scalar(0)) {
    pred = correct_heading(pred, mag, cfg.mag_reference, cfg.mag_gain);
  }
  return pred.normalized();
}

/// Observed ADC range per finger; raw counts fall as the finger bends.
struct FlexCalibration {
  std::array<double, kFingers> raw_min{200, 200, 200, 200, 200};  // fully bent
  std::array<double, kFingers> raw_max{900, 900, 900, 900, 900};  // straight

  void validate() const;
};

class CalibrationError : public std::runtime_error {
 public:
  enum class Kind { InsufficientSamples, DegenerateCalibration };
  CalibrationError(Kind kind, int finger, const std::string& what)
      : std::runtime_error(what), kind_(kind), finger_(finger) {}
  Kind kind() const { return kind_; }
  int finger() const { return finger_; }

 private:
  Kind kind_;
  int finger_;
};

using FlexSample = std::array<std::uint16_t, kFingers>;

inline constexpr std::size_t kMinCalibrationSamples = 10;
inline constexpr double kMinCalibrationSpan = 50.0;

/// Two-pose calibration: mean of the straight-hand samples becomes raw_max,
/// mean of the fist samples becomes raw_min.
FlexCalibration calibrate_flex(std::span<const FlexSample> straight, std::span<const FlexSample> bent);

/// clamp((raw_max - raw) / (raw_max - raw_min), 0, 1)
double normalize_flex(double raw, double raw_min, double raw_max);
std::array<double, kFingers> normalize_flex(const FlexSample& raw, const FlexCalibration& cal);

struct PositionMeasurement {
  Vec3 position = Vec3::Zero();
  std::uint32_t t_ms = 0;
};

inline constexpr std::uint32_t kMaxMeasurementAgeMs = 200;

/// Blends an absolute measurement into the predicted position. Measurements
/// older than 200 ms (or from the future) leave the prediction untouched.
template <typename Scalar>
Vector3<Scalar> fuse_position(const Vector3<Scalar>& predicted, const Vector3<Scalar>& measured,
                              std::uint32_t measured_t_ms, std::uint32_t now_ms, Scalar gain) {
  if (measured_t_ms > now_ms || now_ms - measured_t_ms > kMaxMeasurementAgeMs) return predicted;
  return predicted + gain * (measured - predicted);
}

/// Emulated depth camera: 30 Hz absolute hand position with Gaussian noise
/// and random dropouts.
struct PositionSensorModel {
  double rate_hz = 30.0;
  double noise_sigma_m = 0.02;
  double dropout_prob = 0.05;
};

class PositionSensor {
 public:
  explicit PositionSensor(PositionSensorModel model = {}) : model_(model) {}

  /// True at the sampling instants floor(k * 1000 / rate) ms; advances k.
  bool due(std::uint32_t t_ms);
  std::optional<PositionMeasurement> sample(const Vec3& true_position, std::uint32_t t_ms, Rng& rng) const;

  const PositionSensorModel& model() const { return model_; }

 private:
  PositionSensorModel model_;
  std::uint64_t next_index_ = 0;
};

/// Host-side estimate of the hand.
struct FusedPose {
  Quat orientation = Quat::Identity();
  std::array<double, kFingers> flex_norm{};
  Vec3 position{0.0, 0.0, 1.25};
  double distance = 1.25;
  std::uint32_t timestamp_ms = 0;
};

/// Owns the filter state for one session and folds frames and position
/// measurements into a FusedPose.
class Tracker {
 public:
  /// `sensor_axis` is the position sensor's viewing axis; distance is the
  /// position's component along it.
  explicit Tracker(FilterConfig cfg = {}, FlexCalibration cal = {}, Vec3 sensor_axis = Vec3::UnitZ());

  const FusedPose& on_frame(const wire::SensorFrame& frame, std::uint32_t host_t_ms);
  const FusedPose& on_position(const PositionMeasurement& m, std::uint32_t now_ms);
  /// Optional absolute orientation aid; no-op while orientation_aid_gain is 0.
  const FusedPose& on_orientation(const Quat& measured);

  const FusedPose& pose() const { return pose_; }
  const FilterConfig& config() const { return cfg_; }
  std::uint64_t frames() const { return frames_; }

 private:
  FilterConfig cfg_;
  FlexCalibration cal_;
  Vec3 axis_;
  FusedPose pose_;
  std::optional<std::uint32_t> last_device_t_;
  bool have_position_ = false;
  std::uint64_t frames_ = 0;
};

}  // namespace glove::tracking
