#pragma once

// Synthetic flex traces for the gesture detector, sampled at 100 Hz like the
// device.

#include "glove/gestures.hpp"
#include "glove/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace traces {

struct Sample {
  std::array<double, 5> flex{};
  std::uint32_t t_ms = 0;
};
using Trace = std::vector<Sample>;

inline void hold(Trace& tr, std::uint32_t& t, const std::array<double, 5>& flex, std::uint32_t ms) {
  for (std::uint32_t end = t + ms; t < end; t += 10) tr.push_back({flex, t});
}

/// `thumbs` deliberate thumb presses followed by `fists` fist clenches, each
/// held 150 ms with 200 ms of relaxed hand between.
inline Trace presses(int thumbs, int fists) {
  Trace tr;
  std::uint32_t t = 0;
  hold(tr, t, {}, 200);
  for (int i = 0; i < thumbs; ++i) {
    hold(tr, t, {0.9, 0.1, 0.1, 0.1, 0.1}, 150);
    hold(tr, t, {}, 200);
  }
  for (int i = 0; i < fists; ++i) {
    hold(tr, t, {0.2, 0.9, 0.9, 0.9, 0.9}, 150);
    hold(tr, t, {}, 200);
  }
  return tr;
}

/// Every finger wanders inside the open band (release, press).
inline Trace band_noise(glove::Rng& rng, const glove::gestures::GestureConfig& cfg, std::size_t n) {
  Trace tr;
  const double eps = 1e-6;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.t_ms = static_cast<std::uint32_t>(10 * i);
    for (auto& f : s.flex) f = rng.uniform(cfg.release_threshold + eps, cfg.press_threshold - eps);
    tr.push_back(s);
  }
  return tr;
}

/// Unconstrained trace: random levels, random jumps, uneven sample spacing.
inline Trace fuzz(glove::Rng& rng, std::size_t n) {
  Trace tr;
  std::array<double, 5> level{};
  std::uint32_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& f : level) {
      if (rng.bernoulli(0.05)) f = rng.uniform();
      f = std::clamp(f + rng.gaussian(0.0, 0.05), 0.0, 1.0);
    }
    tr.push_back({level, t});
    t += static_cast<std::uint32_t>(rng.next_u64() % 25);
  }
  return tr;
}

inline std::vector<glove::gestures::GestureEvent> run(const Trace& tr, glove::gestures::GestureConfig cfg = {}) {
  glove::gestures::GestureDetector det(cfg);
  std::vector<glove::gestures::GestureEvent> out;
  for (const auto& s : tr) {
    auto e = det.detect(s.flex, s.t_ms);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

/// Per kind, edges go Pressed, Released, Pressed, ... starting with Pressed.
inline bool alternates(const std::vector<glove::gestures::GestureEvent>& events) {
  using glove::gestures::Edge;
  for (auto kind : {glove::gestures::GestureKind::ThumbTrigger, glove::gestures::GestureKind::FistClench}) {
    Edge expected = Edge::Pressed;
    for (const auto& e : events) {
      if (e.kind != kind) continue;
      if (e.edge != expected) return false;
      expected = expected == Edge::Pressed ? Edge::Released : Edge::Pressed;
    }
  }
  return true;
}

inline std::size_t count(const std::vector<glove::gestures::GestureEvent>& events, glove::gestures::GestureKind k,
                         glove::gestures::Edge e) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [&](const auto& ev) { return ev.kind == k && ev.edge == e; }));
}

}  // namespace traces
