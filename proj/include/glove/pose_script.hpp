#pragma once

#include "glove/device_sim.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace glove::session {

class ScriptParseError : public std::runtime_error {
 public:
  ScriptParseError(std::size_t line, const std::string& what)
      : std::runtime_error("pose script line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PoseRecord {
  std::uint32_t t_ms = 0;
  std::array<double, 3> euler_deg{};  // roll, pitch, yaw
  std::array<double, 5> flex{};
  double distance_m = 1.25;
};

/// Viewing axis of the position sensor in its own frame; the hand sits at
/// distance_m along it.
inline const Vec3 kSensorAxis = Vec3::UnitZ();

/// Hand trajectory, linearly interpolated between records and held
/// constant outside them.
class PoseScript {
 public:
  PoseScript() = default;
  /// Throws ScriptParseError unless t_ms strictly increases, flex lies in
  /// [0, 1] and distance is non-negative.
  explicit PoseScript(std::vector<PoseRecord> records);

  static PoseScript parse(std::istream& in);
  static PoseScript load(const std::filesystem::path& path);

  PoseRecord record_at(double t_ms) const;
  /// Ground-truth hand pose at t_ms, including body angular velocity.
  device::HandPose pose_at(std::uint32_t t_ms) const;

  const std::vector<PoseRecord>& records() const { return records_; }
  std::uint32_t end_ms() const { return records_.empty() ? 0 : records_.back().t_ms; }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<PoseRecord> records_;
};

/// Pose for a stationary hand given as roll/pitch/yaw degrees.
device::HandPose pose_from_record(const PoseRecord& r);

/// Body-frame angular velocity (deg/s) that turns `from` into `to` over dt_s.
Vec3 body_rate_dps(const Quat& from, const Quat& to, double dt_s);

}  // namespace glove::session
