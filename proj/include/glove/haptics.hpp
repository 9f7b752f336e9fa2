#pragma once

#include "glove/wire_protocol.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace glove::haptics {

inline constexpr int kMotors = 5;
inline constexpr std::uint32_t kMaxPatternMs = 2000;

struct PatternStep {
  std::uint8_t intensity = 0;  // 0 = gap
  std::uint32_t duration_ms = 0;
};

/// Vibration envelope applied to every motor in `fingers` (bit i = finger i).
struct HapticPattern {
  std::vector<PatternStep> steps;
  std::uint8_t fingers = 0;

  std::uint32_t total_ms() const;
  /// Throws std::invalid_argument on an empty pattern, a zero-length step,
  /// a total over 2000 ms, or a finger mask beyond five bits.
  void validate() const;
};

constexpr std::uint8_t finger_bit(int finger) { return static_cast<std::uint8_t>(1u << finger); }
inline constexpr std::uint8_t kAllFingers = 0x1F;

struct Interval {
  std::uint64_t start_ms = 0;
  std::uint64_t end_ms = 0;  // exclusive
  std::uint8_t intensity = 0;
};

/// Merges overlapping vibration envelopes per motor and turns the merged
/// timeline into wire commands.
///
/// The scheduler tracks what the device is doing under its max-merge rule.
/// When a change cannot be expressed as a merge (the new value is weaker or
/// shorter than what is still running) it sends a stop first.
class HapticScheduler {
 public:
  /// Expands pattern steps into absolute intervals starting at now_ms.
  void enqueue(const HapticPattern& pattern, std::uint64_t now_ms);

  /// Commands for every motor whose merged (intensity, end) changed. now_ms
  /// must not decrease.
  std::vector<wire::HapticCommand> tick(std::uint64_t now_ms);

  /// Max over the intervals covering t.
  std::uint8_t effective_intensity(int motor, std::uint64_t t_ms) const;

  const std::vector<Interval>& intervals(int motor) const { return motors_[motor].intervals; }
  bool idle() const;

 private:
  struct Commanded {
    std::uint8_t intensity = 0;
    std::uint64_t end_ms = 0;
  };
  struct MotorQueue {
    std::vector<Interval> intervals;
    std::optional<Commanded> last;  // nullopt = idle on the device side
    bool stop_sent = true;
  };

  // End of the constant run of the merged timeline that contains now_ms.
  std::uint64_t segment_end(const MotorQueue& q, std::uint64_t now_ms) const;
  wire::HapticCommand make(int motor, std::uint8_t intensity, std::uint16_t duration);

  std::array<MotorQueue, kMotors> motors_;
  std::uint8_t next_seq_ = 0;
};

}  // namespace glove::haptics
