#include "glove/scenario.hpp"

#include "glove/link.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace glove::session {

using nlohmann::json;

std::uint32_t Scenario::duration_ms() const { return static_cast<std::uint32_t>(std::llround(duration_s * 1000.0)); }

void Scenario::validate() const {
  try {
    wire::profile_by_name(link);
  } catch (const std::invalid_argument& e) {
    throw ScenarioInvalid(e.what());
  }
  if (!(duration_s > 0.0) || duration_s > 86400.0) throw ScenarioInvalid("duration_s must be in (0, 86400]");
  std::set<int> ids;
  for (const auto& t : targets) {
    if (!ids.insert(t.id).second) throw ScenarioInvalid("duplicate target id " + std::to_string(t.id));
    if (!(t.radius > 0.0)) throw ScenarioInvalid("target " + std::to_string(t.id) + " needs a positive radius");
  }
  if (hand_source.empty()) throw ScenarioInvalid("hand_source must name a script or 'interactive'");
  if (calibration) {
    try {
      calibration->validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioInvalid(e.what());
    }
  }
}

namespace {

Vec3 read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ScenarioInvalid(what + " must be [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::array<double, 5> read_five(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 5) throw ScenarioInvalid(what + " must hold five numbers");
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i) out[i] = j[i].get<double>();
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  Scenario s;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ScenarioInvalid("scenario must be a JSON object");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned()) throw ScenarioInvalid("'seed' must be a u64");
    s.seed = j["seed"].get<std::uint64_t>();
    s.link = j.value("link", std::string("usb"));
    s.duration_s = j.value("duration_s", 10.0);
    s.hand_source = j.value("hand_source", std::string(kInteractive));
    if (s.hand_source != kInteractive) {
      const std::filesystem::path p(s.hand_source);
      if (p.is_relative() && !base_dir.empty()) s.hand_source = (base_dir / p).lexically_normal().string();
    }
    for (const auto& t : j.value("targets", json::array())) {
      flight::Target target;
      target.id = t.at("id").get<int>();
      target.position = read_vec3(t.at("pos"), "target pos");
      target.radius = t.value("radius", 5.0);
      s.targets.push_back(target);
    }
    if (j.contains("calibration")) {
      tracking::FlexCalibration cal;
      cal.raw_min = read_five(j["calibration"].at("raw_min"), "calibration raw_min");
      cal.raw_max = read_five(j["calibration"].at("raw_max"), "calibration raw_max");
      s.calibration = cal;
    }
  } catch (const json::exception& e) {
    throw ScenarioInvalid(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

}  // namespace glove::session
