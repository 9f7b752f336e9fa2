#include "glove/gestures.hpp"

#include <algorithm>
#include <stdexcept>

namespace glove::gestures {

void GestureConfig::validate() const {
  const bool ok = release_threshold > 0.0 && release_threshold < press_threshold && press_threshold < 1.0 &&
                  fist_threshold > 0.0 && fist_threshold < 1.0;
  if (!ok) throw std::invalid_argument("gesture thresholds must satisfy 0 < release < press < 1");
}

std::string_view to_string(GestureKind k) {
  return k == GestureKind::ThumbTrigger ? "thumb" : "fist";
}

std::string_view to_string(Edge e) { return e == Edge::Pressed ? "pressed" : "released"; }

GestureDetector::GestureDetector(GestureConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<Edge> GestureDetector::advance(Channel& ch, bool press_cond, bool release_cond,
                                             std::uint32_t t_ms) const {
  const bool pending = ch.held ? release_cond : press_cond;
  if (!pending) {
    ch.since.reset();
    return std::nullopt;
  }
  if (!ch.since) ch.since = t_ms;
  if (t_ms - *ch.since < cfg_.debounce_ms) return std::nullopt;
  ch.since.reset();
  ch.held = !ch.held;
  return ch.held ? Edge::Pressed : Edge::Released;
}

std::vector<GestureEvent> GestureDetector::detect(const std::array<double, 5>& flex, std::uint32_t t_ms) {
  if (last_t_ && t_ms < *last_t_) throw std::invalid_argument("gesture samples must be time-ordered");
  last_t_ = t_ms;

  std::vector<GestureEvent> events;

  const bool fist_press = std::all_of(flex.begin() + 1, flex.end(), [&](double f) { return f >= cfg_.fist_threshold; });
  const bool fist_release = std::any_of(flex.begin() + 1, flex.end(), [&](double f) { return f <= cfg_.release_threshold; });
  const auto fist_edge = advance(fist_, fist_press, fist_release, t_ms);
  if (fist_edge == Edge::Pressed && thumb_.held) {
    thumb_.held = false;
    thumb_.since.reset();
    events.push_back({GestureKind::ThumbTrigger, Edge::Released, t_ms});
  }
  if (fist_edge) events.push_back({GestureKind::FistClench, *fist_edge, t_ms});

  const bool fist_active = fist_.held || fist_press;
  const bool thumb_press = !fist_active && flex[0] >= cfg_.press_threshold;
  const bool thumb_release = flex[0] <= cfg_.release_threshold;
  if (fist_.held && !thumb_.held) {
    thumb_.since.reset();
  } else if (auto e = advance(thumb_, thumb_press, thumb_release, t_ms)) {
    events.push_back({GestureKind::ThumbTrigger, *e, t_ms});
  }
  return events;
}

}  // namespace glove::gestures
