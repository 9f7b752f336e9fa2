#pragma once

#include "glove/flightsim.hpp"
#include "glove/gestures.hpp"
#include "glove/wire_protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace glove::session {

/// Bumped whenever the pipeline or the log layout changes in a way that
/// makes older logs unreplayable.
inline constexpr int kLogVersion = 1;

struct SensorRecord {
  std::uint32_t t_ms;  // host receive time
  wire::SensorFrame frame;
};

struct GestureRecord {
  std::uint32_t t_ms;
  gestures::GestureEvent event;
};

struct GameRecord {
  std::uint32_t t_ms;
  flight::GameEvent event;
};

enum class HapticStage { Sent, Applied };

struct HapticRecord {
  std::uint32_t t_ms;
  HapticStage stage;  // queued on the host link, or applied on the device
  wire::HapticCommand command;
};

using LogRecord = std::variant<SensorRecord, GestureRecord, GameRecord, HapticRecord>;

struct RunMeta {
  int version = kLogVersion;
  std::uint64_t seed = 0;
  std::string link;
  std::uint32_t duration_ms = 0;
};

/// Append-only record of a run. Every record serializes to one canonical
/// JSON line (fixed field order, integers only), so the text and its hash
/// are byte-stable.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(RunMeta meta) : meta_(std::move(meta)) {}

  void append(LogRecord r) { records_.push_back(std::move(r)); }
  void set_duration_ms(std::uint32_t d) { meta_.duration_ms = d; }

  const RunMeta& meta() const { return meta_; }
  const std::vector<LogRecord>& records() const { return records_; }

  std::vector<std::string> lines() const;
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  std::uint64_t hash() const;

  template <typename T>
  std::vector<T> of_type() const {
    std::vector<T> out;
    for (const auto& r : records_)
      if (const auto* p = std::get_if<T>(&r)) out.push_back(*p);
    return out;
  }

 private:
  RunMeta meta_;
  std::vector<LogRecord> records_;
};

std::string serialize(const RunMeta& meta);
std::string serialize(const LogRecord& record);

/// FNV-1a 64 over the serialized log, LF line endings included.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

/// Lines of a log file, with the header line parsed. Throws
/// std::runtime_error if the first line is not a meta record.
struct LogFile {
  RunMeta meta;
  std::vector<std::string> lines;  // includes the header line
};

LogFile read_log(std::istream& in);
LogFile read_log(const std::filesystem::path& path);

}  // namespace glove::session
