#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glove {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Quaternion = Eigen::Quaternion<Scalar>;

using Vec3 = Vector3<double>;
using Quat = Quaternion<double>;

/// Geomagnetic field seen by the emulated magnetometer and assumed by the
/// host filter, microtesla, world frame (x north, z up).
inline const Vec3 kEarthField{20.0, 0.0, -45.0};

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Roll/pitch/yaw angles in the Z-Y-X (yaw, then pitch, then roll) convention.
template <typename Scalar>
struct EulerZYX {
  Scalar roll{0};
  Scalar pitch{0};
  Scalar yaw{0};
};

/// q = Rz(yaw) * Ry(pitch) * Rx(roll), angles in degrees.
template <typename Scalar>
Quaternion<Scalar> quat_from_euler_deg(Scalar roll, Scalar pitch, Scalar yaw) {
  using AA = Eigen::AngleAxis<Scalar>;
  return Quaternion<Scalar>(AA(deg2rad(yaw), Vector3<Scalar>::UnitZ()) *
                            AA(deg2rad(pitch), Vector3<Scalar>::UnitY()) *
                            AA(deg2rad(roll), Vector3<Scalar>::UnitX()));
}

/// Inverse of quat_from_euler_deg; pitch is confined to [-90, 90].
template <typename Scalar>
EulerZYX<Scalar> euler_deg_from_quat(const Quaternion<Scalar>& q) {
  const Scalar w = q.w(), x = q.x(), y = q.y(), z = q.z();
  EulerZYX<Scalar> e;
  e.roll = rad2deg(std::atan2(Scalar(2) * (w * x + y * z), Scalar(1) - Scalar(2) * (x * x + y * y)));
  const Scalar s = std::clamp(Scalar(2) * (w * y - z * x), Scalar(-1), Scalar(1));
  e.pitch = rad2deg(std::asin(s));
  e.yaw = rad2deg(std::atan2(Scalar(2) * (w * z + x * y), Scalar(1) - Scalar(2) * (y * y + z * z)));
  return e;
}

/// Rotation angle between two orientations, degrees in [0, 180].
template <typename Scalar>
Scalar angle_between_deg(const Quaternion<Scalar>& a, const Quaternion<Scalar>& b) {
  const Scalar d = std::clamp(std::abs(a.dot(b)), Scalar(0), Scalar(1));
  return rad2deg(Scalar(2) * std::acos(d));
}

/// Rotation of `angle` radians about a unit `axis`, as a quaternion.
template <typename Scalar>
Quaternion<Scalar> axis_angle(const Vector3<Scalar>& axis, Scalar angle) {
  return Quaternion<Scalar>(Eigen::AngleAxis<Scalar>(angle, axis));
}

}  // namespace glove
