#pragma once

#include "glove/pipeline.hpp"
#include "glove/run_log.hpp"
#include "glove/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace glove::session {

class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line overrides applied on top of a scenario file.
struct RunOverrides {
  std::optional<std::string> script;
  std::optional<std::string> link;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
};

/// Scenario with overrides applied and re-validated.
Scenario apply_overrides(Scenario s, const RunOverrides& o);

/// Headless run of a scripted scenario. Throws ScenarioInvalid for an
/// interactive hand source and ScriptParseError for a bad script.
RunLog run(const Scenario& scenario);
RunLog run(const Scenario& scenario, PipelineConfig cfg);

struct ReplayReport {
  bool clean = true;
  std::size_t line = 0;       // 1-based line of the first divergence
  std::uint32_t t_ms = 0;     // timestamp at the divergence
  std::string expected;       // line from the log ("" if the log ended)
  std::string actual;         // line from the re-run ("" if the re-run ended)
  std::size_t lines_compared = 0;
};

/// Runs the device alone over a calibration script and fits the flex
/// calibration. Samples taken while the script holds every finger at 0
/// count as straight, at 1 as bent. Throws CalibrationError.
tracking::FlexCalibration calibrate_from_script(const PoseScript& script, std::uint64_t seed = 0,
                                                const device::DeviceState& device = {});

/// Re-runs `scenario` for the logged duration and diffs line by line.
/// Throws VersionMismatch if the log came from another log version.
ReplayReport replay(const LogFile& log, const Scenario& scenario);

}  // namespace glove::session
