// glovesim: headless runs, replay checks, the live gateway and flex
// calibration from the command line.

#include "glove/gateway.hpp"
#include "glove/session.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

using namespace glove;
using namespace glove::session;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void add_overrides(CLI::App* cmd, RunOverrides& o, bool with_duration) {
  cmd->add_option("--script", o.script, "Pose script (JSONL) replacing the scenario's hand source");
  cmd->add_option("--link", o.link, "Link profile")->check(CLI::IsMember({"usb", "bluetooth"}));
  cmd->add_option("--seed", o.seed, "Seed overriding the scenario");
  if (with_duration) cmd->add_option("--duration-s", o.duration_s, "Run length in seconds");
}

int cmd_run(const std::string& scenario_path, const RunOverrides& o, const std::string& log_path) {
  const Scenario s = apply_overrides(load_scenario(scenario_path), o);
  const RunLog log = run(s);
  if (!log_path.empty()) log.save(log_path);

  std::size_t destroyed = 0;
  for (const auto& g : log.of_type<GameRecord>())
    if (g.event.kind == flight::GameEventKind::TargetDestroyed) ++destroyed;
  std::cout << "hash " << hex64(log.hash()) << "\n"
            << "duration_ms " << log.meta().duration_ms << "\n"
            << "sensor_frames " << log.of_type<SensorRecord>().size() << "\n"
            << "gesture_events " << log.of_type<GestureRecord>().size() << "\n"
            << "game_events " << log.of_type<GameRecord>().size() << "\n"
            << "targets_destroyed " << destroyed << "\n"
            << "haptic_records " << log.of_type<HapticRecord>().size() << "\n";
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& scenario_path, const RunOverrides& o) {
  const LogFile log = read_log(log_path);
  const Scenario s = apply_overrides(load_scenario(scenario_path), o);
  const ReplayReport r = replay(log, s);
  if (r.clean) {
    std::cout << "clean " << r.lines_compared << " lines\n";
    return 0;
  }
  std::cout << "divergence line " << r.line << " t_ms " << r.t_ms << "\n"
            << "expected " << (r.expected.empty() ? "<end of log>" : r.expected) << "\n"
            << "actual   " << (r.actual.empty() ? "<end of run>" : r.actual) << "\n";
  return 1;
}

int cmd_serve(const std::string& scenario_path, std::uint16_t port, const RunOverrides& o) {
  const Scenario s = apply_overrides(load_scenario(scenario_path), o);
  if (!s.interactive()) throw ScenarioInvalid("serve needs \"hand_source\": \"interactive\"");
  Gateway gw(s, port);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  gw.start();
  std::cout << "listening on ws://0.0.0.0:" << gw.port() << "/ (link " << s.link << ", seed " << s.seed << ")"
            << std::endl;
  while (!g_interrupted && gw.failure().empty()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  gw.stop();
  if (!gw.failure().empty()) {
    std::cerr << "session aborted: " << gw.failure() << "\n";
    return 1;
  }
  return 0;
}

int cmd_calibrate(const std::string& script_path, std::uint64_t seed) {
  const auto cal = calibrate_from_script(PoseScript::load(script_path), seed);
  std::cout << nlohmann::ordered_json{{"raw_min", cal.raw_min}, {"raw_max", cal.raw_max}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haptic glove flight simulation"};
  app.require_subcommand(1);

  std::string scenario_path, log_path, script_path;
  RunOverrides run_o, replay_o, serve_o;
  std::uint16_t port = 8765;
  std::uint64_t cal_seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Run a scripted scenario headless");
  run_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  add_overrides(run_cmd, run_o, true);
  run_cmd->add_option("--log", log_path, "Write the run log here");

  auto* replay_cmd = app.add_subcommand("replay", "Re-run a logged scenario and diff");
  replay_cmd->add_option("--log", log_path, "Run log")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  add_overrides(replay_cmd, replay_o, false);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the live WebSocket gateway");
  serve_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "TCP port (0 picks one)");
  serve_cmd->add_option("--link", serve_o.link, "Link profile")->check(CLI::IsMember({"usb", "bluetooth"}));
  serve_cmd->add_option("--seed", serve_o.seed, "Seed overriding the scenario");

  auto* cal_cmd = app.add_subcommand("calibrate", "Fit a flex calibration from a calibration script");
  cal_cmd->add_option("--script", script_path, "Calibration pose script")->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--seed", cal_seed, "Noise seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(scenario_path, run_o, log_path);
    if (*replay_cmd) return cmd_replay(log_path, scenario_path, replay_o);
    if (*serve_cmd) return cmd_serve(scenario_path, port, serve_o);
    if (*cal_cmd) return cmd_calibrate(script_path, cal_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
