#include "glove/run_log.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glove::session {

namespace {

template <typename T, std::size_t N>
void put_array(std::ostringstream& os, const std::array<T, N>& a) {
  os << '[';
  for (std::size_t i = 0; i < N; ++i) {
    if (i) os << ',';
    os << static_cast<long long>(a[i]);
  }
  os << ']';
}

struct Serializer {
  std::ostringstream& os;

  void operator()(const SensorRecord& r) const {
    const auto& f = r.frame;
    os << "{\"t_ms\":" << r.t_ms << ",\"kind\":\"sensor\",\"seq\":" << f.seq << ",\"dev_t_ms\":" << f.t_ms
       << ",\"gyro\":";
    put_array(os, f.gyro);
    os << ",\"accel\":";
    put_array(os, f.accel);
    os << ",\"mag\":";
    put_array(os, f.mag);
    os << ",\"flex\":";
    put_array(os, f.flex);
    os << ",\"battery\":" << static_cast<int>(f.battery) << ",\"flags\":" << static_cast<int>(f.flags) << '}';
  }
  void operator()(const GestureRecord& r) const {
    os << "{\"t_ms\":" << r.t_ms << ",\"kind\":\"gesture\",\"gesture\":\"" << gestures::to_string(r.event.kind)
       << "\",\"edge\":\"" << gestures::to_string(r.event.edge) << "\"}";
  }
  void operator()(const GameRecord& r) const {
    os << "{\"t_ms\":" << r.t_ms << ",\"kind\":\"game\",\"event\":\"" << flight::to_string(r.event.kind) << '"';
    if (r.event.target_id) os << ",\"target_id\":" << *r.event.target_id;
    os << '}';
  }
  void operator()(const HapticRecord& r) const {
    const auto& c = r.command;
    os << "{\"t_ms\":" << r.t_ms << ",\"kind\":\"haptic\",\"stage\":\""
       << (r.stage == HapticStage::Sent ? "sent" : "applied") << "\",\"seq\":" << static_cast<int>(c.seq)
       << ",\"motor\":" << static_cast<int>(c.motor) << ",\"intensity\":" << static_cast<int>(c.intensity)
       << ",\"duration_ms\":" << c.duration_ms << '}';
  }
};

}  // namespace

std::string serialize(const RunMeta& meta) {
  std::ostringstream os;
  os << "{\"t_ms\":0,\"kind\":\"meta\",\"version\":" << meta.version << ",\"seed\":" << meta.seed
     << ",\"link\":" << nlohmann::json(meta.link).dump() << ",\"duration_ms\":" << meta.duration_ms << '}';
  return os.str();
}

std::string serialize(const LogRecord& record) {
  std::ostringstream os;
  std::visit(Serializer{os}, record);
  return os.str();
}

std::vector<std::string> RunLog::lines() const {
  std::vector<std::string> out;
  out.reserve(records_.size() + 1);
  out.push_back(serialize(meta_));
  for (const auto& r : records_) out.push_back(serialize(r));
  return out;
}

void RunLog::write(std::ostream& out) const {
  for (const auto& line : lines()) out << line << '\n';
}

void RunLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write log " + path.string());
  write(out);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x00000100000001b3ull;
  }
  return h;
}

std::uint64_t RunLog::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& line : lines()) {
    h = fnv1a64(line, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

LogFile read_log(std::istream& in) {
  LogFile f;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) f.lines.push_back(line);
  }
  if (f.lines.empty()) throw std::runtime_error("run log is empty");
  try {
    const auto j = nlohmann::json::parse(f.lines.front());
    if (j.at("kind") != "meta") throw std::runtime_error("run log does not start with a meta record");
    f.meta.version = j.at("version").get<int>();
    f.meta.seed = j.at("seed").get<std::uint64_t>();
    f.meta.link = j.at("link").get<std::string>();
    f.meta.duration_ms = j.at("duration_ms").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad run log header: ") + e.what());
  }
  return f;
}

LogFile read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log " + path.string());
  return read_log(in);
}

}  // namespace glove::session
