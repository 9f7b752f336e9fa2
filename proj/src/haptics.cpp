#include "glove/haptics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace glove::haptics {

std::uint32_t HapticPattern::total_ms() const {
  std::uint32_t total = 0;
  for (const auto& s : steps) total += s.duration_ms;
  return total;
}

void HapticPattern::validate() const {
  if (steps.empty()) throw std::invalid_argument("haptic pattern needs at least one step");
  for (const auto& s : steps)
    if (s.duration_ms == 0) throw std::invalid_argument("haptic pattern step must last > 0 ms");
  if (total_ms() > kMaxPatternMs) throw std::invalid_argument("haptic pattern longer than 2000 ms");
  if (fingers & ~kAllFingers) throw std::invalid_argument("haptic finger mask has bits beyond five fingers");
}

void HapticScheduler::enqueue(const HapticPattern& pattern, std::uint64_t now_ms) {
  pattern.validate();
  std::uint64_t t = now_ms;
  for (const auto& step : pattern.steps) {
    const std::uint64_t end = t + step.duration_ms;
    if (step.intensity > 0) {
      for (int m = 0; m < kMotors; ++m)
        if (pattern.fingers & finger_bit(m)) motors_[m].intervals.push_back({t, end, step.intensity});
    }
    t = end;
  }
}

std::uint8_t HapticScheduler::effective_intensity(int motor, std::uint64_t t_ms) const {
  std::uint8_t best = 0;
  for (const auto& iv : motors_[motor].intervals)
    if (iv.start_ms <= t_ms && t_ms < iv.end_ms) best = std::max(best, iv.intensity);
  return best;
}

bool HapticScheduler::idle() const {
  return std::all_of(motors_.begin(), motors_.end(), [](const MotorQueue& q) { return q.intervals.empty(); });
}

std::uint64_t HapticScheduler::segment_end(const MotorQueue& q, std::uint64_t now_ms) const {
  std::vector<std::uint64_t> points;
  for (const auto& iv : q.intervals) {
    if (iv.start_ms > now_ms) points.push_back(iv.start_ms);
    if (iv.end_ms > now_ms) points.push_back(iv.end_ms);
  }
  std::sort(points.begin(), points.end());
  auto value_at = [&q](std::uint64_t t) {
    std::uint8_t best = 0;
    for (const auto& iv : q.intervals)
      if (iv.start_ms <= t && t < iv.end_ms) best = std::max(best, iv.intensity);
    return best;
  };
  const std::uint8_t now_value = value_at(now_ms);
  for (const auto p : points)
    if (value_at(p) != now_value) return p;
  return points.empty() ? now_ms : points.back();
}

wire::HapticCommand HapticScheduler::make(int motor, std::uint8_t intensity, std::uint16_t duration) {
  wire::HapticCommand c;
  c.seq = next_seq_++;
  c.motor = static_cast<std::uint8_t>(motor);
  c.intensity = intensity;
  c.duration_ms = duration;
  return c;
}

std::vector<wire::HapticCommand> HapticScheduler::tick(std::uint64_t now_ms) {
  std::vector<wire::HapticCommand> out;
  for (int m = 0; m < kMotors; ++m) {
    MotorQueue& q = motors_[m];
    std::erase_if(q.intervals, [now_ms](const Interval& iv) { return iv.end_ms <= now_ms; });
    if (q.last && q.last->end_ms <= now_ms) q.last.reset();  // expired on the device

    const std::uint8_t intensity = effective_intensity(m, now_ms);
    if (intensity == 0) {
      if (!q.stop_sent) {
        out.push_back(make(m, 0, 0));
        q.stop_sent = true;
      }
      q.last.reset();
      continue;
    }

    // Runs longer than a u16 are sent in pieces; the remainder is resent
    // when the first piece ends.
    const std::uint64_t end = std::min<std::uint64_t>(segment_end(q, now_ms),
                                                      now_ms + std::numeric_limits<std::uint16_t>::max());
    if (q.last && q.last->intensity == intensity && q.last->end_ms == end) continue;

    if (q.last) {
      const bool mergeable = intensity >= q.last->intensity && end >= q.last->end_ms;
      if (!mergeable) out.push_back(make(m, 0, 0));
    }
    out.push_back(make(m, intensity, static_cast<std::uint16_t>(end - now_ms)));
    q.last = Commanded{intensity, end};
    q.stop_sent = false;
  }
  return out;
}

}  // namespace glove::haptics
