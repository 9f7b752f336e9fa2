#include "glove/pose_script.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace glove::session {

using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> read_array(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N)
    throw ScriptParseError(line, std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) throw ScriptParseError(line, std::string("'") + key + "' holds a non-number");
    out[i] = j[key][i].get<double>();
  }
  return out;
}

void check_record(const PoseRecord& r, std::size_t line) {
  for (double f : r.flex)
    if (!(f >= 0.0 && f <= 1.0)) throw ScriptParseError(line, "flex values must lie in [0, 1]");
  if (!(r.distance_m >= 0.0)) throw ScriptParseError(line, "distance_m must be non-negative");
}

}  // namespace

PoseScript::PoseScript(std::vector<PoseRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_record(records_[i], i + 1);
    if (i > 0 && records_[i].t_ms <= records_[i - 1].t_ms)
      throw ScriptParseError(i + 1, "t_ms must strictly increase");
  }
}

PoseScript PoseScript::parse(std::istream& in) {
  std::vector<PoseRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ScriptParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ScriptParseError(line, "record must be a JSON object");
    PoseRecord r;
    if (!j.contains("t_ms") || !j["t_ms"].is_number_unsigned())
      throw ScriptParseError(line, "'t_ms' must be a non-negative integer");
    r.t_ms = j["t_ms"].get<std::uint32_t>();
    r.euler_deg = read_array<3>(j, "euler_deg", line);
    r.flex = read_array<5>(j, "flex", line);
    if (!j.contains("distance_m") || !j["distance_m"].is_number())
      throw ScriptParseError(line, "'distance_m' must be a number");
    r.distance_m = j["distance_m"].get<double>();
    check_record(r, line);
    if (!records.empty() && r.t_ms <= records.back().t_ms) throw ScriptParseError(line, "t_ms must strictly increase");
    records.push_back(r);
  }
  if (records.empty()) throw ScriptParseError(line, "script has no records");
  return PoseScript(std::move(records));
}

PoseScript PoseScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScriptParseError(0, "cannot open " + path.string());
  return parse(in);
}

PoseRecord PoseScript::record_at(double t_ms) const {
  if (records_.empty()) return {};
  if (t_ms <= records_.front().t_ms) return records_.front();
  if (t_ms >= records_.back().t_ms) return records_.back();
  const auto hi = std::upper_bound(records_.begin(), records_.end(), t_ms,
                                   [](double t, const PoseRecord& r) { return t < r.t_ms; });
  const auto lo = hi - 1;
  const double a = (t_ms - lo->t_ms) / static_cast<double>(hi->t_ms - lo->t_ms);
  PoseRecord r;
  r.t_ms = static_cast<std::uint32_t>(t_ms);
  for (int i = 0; i < 3; ++i) r.euler_deg[i] = lo->euler_deg[i] + a * (hi->euler_deg[i] - lo->euler_deg[i]);
  for (int i = 0; i < 5; ++i) r.flex[i] = lo->flex[i] + a * (hi->flex[i] - lo->flex[i]);
  r.distance_m = lo->distance_m + a * (hi->distance_m - lo->distance_m);
  return r;
}

device::HandPose pose_from_record(const PoseRecord& r) {
  device::HandPose p;
  p.orientation = quat_from_euler_deg(r.euler_deg[0], r.euler_deg[1], r.euler_deg[2]);
  p.position = kSensorAxis * r.distance_m;
  for (int i = 0; i < 5; ++i) p.flex[i] = std::clamp(r.flex[i], 0.0, 1.0);
  return p;
}

Vec3 body_rate_dps(const Quat& from, const Quat& to, double dt_s) {
  Quat delta = from.conjugate() * to;
  if (delta.w() < 0.0) delta.coeffs() *= -1.0;
  const Eigen::AngleAxisd aa(delta);
  return aa.axis() * rad2deg(aa.angle()) / dt_s;
}

device::HandPose PoseScript::pose_at(std::uint32_t t_ms) const {
  device::HandPose p = pose_from_record(record_at(t_ms));
  // Backward difference: the rate over the millisecond that just ended.
  const double t0 = t_ms > 0 ? t_ms - 1.0 : 0.0;
  const double t1 = t_ms > 0 ? static_cast<double>(t_ms) : 1.0;
  const auto r0 = record_at(t0), r1 = record_at(t1);
  const Quat q0 = quat_from_euler_deg(r0.euler_deg[0], r0.euler_deg[1], r0.euler_deg[2]);
  const Quat q1 = quat_from_euler_deg(r1.euler_deg[0], r1.euler_deg[1], r1.euler_deg[2]);
  p.angular_velocity = body_rate_dps(q0, q1, 1e-3);
  return p;
}

}  // namespace glove::session
