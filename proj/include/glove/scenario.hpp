#pragma once

#include "glove/flightsim.hpp"
#include "glove/tracking.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glove::session {

class ScenarioInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kInteractive = "interactive";

/// Everything that determines a run. The seed alone fixes every random draw.
struct Scenario {
  std::uint64_t seed = 0;
  std::string link = "usb";
  std::vector<flight::Target> targets;
  double duration_s = 10.0;
  /// Path to a pose script (relative paths resolve against the scenario
  /// file), or "interactive" for a live hand.
  std::string hand_source = kInteractive;
  std::optional<tracking::FlexCalibration> calibration;

  bool interactive() const { return hand_source == kInteractive; }
  std::uint32_t duration_ms() const;

  /// Throws ScenarioInvalid on an unknown link, a non-positive duration,
  /// duplicate target ids or a non-positive target radius.
  void validate() const;
};

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace glove::session
