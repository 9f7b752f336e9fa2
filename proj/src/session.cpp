#include "glove/session.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace glove::session {

Scenario apply_overrides(Scenario s, const RunOverrides& o) {
  if (o.script) s.hand_source = *o.script;
  if (o.link) s.link = *o.link;
  if (o.seed) s.seed = *o.seed;
  if (o.duration_s) s.duration_s = *o.duration_s;
  s.validate();
  return s;
}

RunLog run(const Scenario& scenario) { return run(scenario, PipelineConfig::from_scenario(scenario)); }

RunLog run(const Scenario& scenario, PipelineConfig cfg) {
  scenario.validate();
  if (scenario.interactive()) throw ScenarioInvalid("headless runs need a pose script as hand source");
  ScriptHandSource hand(PoseScript::load(scenario.hand_source));
  Pipeline pipeline(std::move(cfg), hand);
  pipeline.run_until(scenario.duration_ms());
  return pipeline.take_log();
}

tracking::FlexCalibration calibrate_from_script(const PoseScript& script, std::uint64_t seed,
                                                const device::DeviceState& initial) {
  Rng rng(seed);
  device::DeviceState dev = initial;
  std::vector<tracking::FlexSample> straight, bent;
  for (std::uint32_t t = 1; t <= script.end_ms(); ++t) {
    const auto frame = device::step_firmware(dev, script.pose_at(t), 1, rng);
    if (!frame) continue;
    const auto flex = script.record_at(t).flex;
    if (std::all_of(flex.begin(), flex.end(), [](double f) { return f == 0.0; }))
      straight.push_back(frame->flex);
    else if (std::all_of(flex.begin(), flex.end(), [](double f) { return f == 1.0; }))
      bent.push_back(frame->flex);
  }
  return tracking::calibrate_flex(straight, bent);
}

namespace {

std::uint32_t line_time(const std::string& line) {
  try {
    return nlohmann::json::parse(line).at("t_ms").get<std::uint32_t>();
  } catch (const nlohmann::json::exception&) {
    return 0;
  }
}

}  // namespace

ReplayReport replay(const LogFile& log, const Scenario& scenario) {
  if (log.meta.version != kLogVersion) {
    throw VersionMismatch("log version " + std::to_string(log.meta.version) + " cannot be replayed by version " +
                          std::to_string(kLogVersion));
  }
  Scenario s = scenario;
  s.duration_s = log.meta.duration_ms / 1000.0;
  const auto rerun = run(s).lines();

  ReplayReport report;
  const std::size_t n = std::max(log.lines.size(), rerun.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string expected = i < log.lines.size() ? log.lines[i] : std::string{};
    const std::string actual = i < rerun.size() ? rerun[i] : std::string{};
    ++report.lines_compared;
    if (expected == actual) continue;
    report.clean = false;
    report.line = i + 1;
    report.t_ms = line_time(expected.empty() ? actual : expected);
    report.expected = expected;
    report.actual = actual;
    break;
  }
  return report;
}

}  // namespace glove::session
