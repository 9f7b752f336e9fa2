#pragma once

#include "glove/math.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace glove::gestures {

struct GestureConfig {
  double press_threshold = 0.6;
  double release_threshold = 0.4;
  double fist_threshold = 0.7;
  std::uint32_t debounce_ms = 50;

  /// Throws std::invalid_argument unless 0 < release < press < 1 and the
  /// fist threshold lies in (0, 1).
  void validate() const;
};

enum class GestureKind { ThumbTrigger, FistClench };
enum class Edge { Pressed, Released };

struct GestureEvent {
  GestureKind kind;
  Edge edge;
  std::uint32_t t_ms;

  bool operator==(const GestureEvent&) const = default;
};

std::string_view to_string(GestureKind k);
std::string_view to_string(Edge e);

/// Debounced two-threshold detector for the thumb trigger and the fist.
///
/// A kind is pressed once its press condition has held continuously for
/// debounce_ms and released once its release condition has. A held fist
/// suppresses the thumb trigger: the thumb cannot press while the fist is
/// held or forming, and a held thumb is released when the fist presses.
class GestureDetector {
 public:
  explicit GestureDetector(GestureConfig cfg = {});

  /// t_ms must not decrease between calls.
  std::vector<GestureEvent> detect(const std::array<double, 5>& flex_norm, std::uint32_t t_ms);

  bool thumb_held() const { return thumb_.held; }
  bool fist_held() const { return fist_.held; }
  const GestureConfig& config() const { return cfg_; }

 private:
  struct Channel {
    bool held = false;
    std::optional<std::uint32_t> since;  // start of the pending opposite condition
  };

  // Returns the edge produced this sample, if any.
  std::optional<Edge> advance(Channel& ch, bool press_cond, bool release_cond, std::uint32_t t_ms) const;

  GestureConfig cfg_;
  Channel thumb_;
  Channel fist_;
  std::optional<std::uint32_t> last_t_;
};

struct ScreenPoint {
  double x = 0.5;
  double y = 0.5;
};

/// Wrist orientation to normalized screen coordinates: yaw drives x and
/// pitch drives y over +/- range_deg, clamped to [0, 1].
template <typename Scalar>
ScreenPoint mouse_map(const Quaternion<Scalar>& orientation, Scalar range_deg = Scalar(30)) {
  const auto e = euler_deg_from_quat(orientation);
  auto axis = [range_deg](Scalar angle) {
    return static_cast<double>(std::clamp((angle + range_deg) / (Scalar(2) * range_deg), Scalar(0), Scalar(1)));
  };
  return {axis(e.yaw), axis(e.pitch)};
}

}  // namespace glove::gestures
