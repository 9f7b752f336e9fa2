#pragma once

// Device wire ABI. All multi-byte fields are little-endian. See docs/wire_abi.md.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace glove::wire {

inline constexpr std::uint8_t kSync = 0xA5;
inline constexpr std::uint8_t kTypeHandshake = 0x00;
inline constexpr std::uint8_t kTypeSensorFrame = 0x01;
inline constexpr std::uint8_t kTypeHapticCommand = 0x02;
inline constexpr std::uint8_t kProtocolVersion = 0x01;

inline constexpr std::size_t kSensorFrameSize = 40;
inline constexpr std::size_t kHapticCommandSize = 8;
inline constexpr std::size_t kHandshakeSize = 4;
inline constexpr std::size_t kMaxFrameSize = kSensorFrameSize;

inline constexpr std::uint8_t kFlagWireless = 0x01;
inline constexpr std::uint16_t kFlexMax = 1023;
inline constexpr std::uint8_t kMotorCount = 5;

struct SensorFrame {
  std::uint16_t seq = 0;
  std::uint32_t t_ms = 0;
  std::array<std::int16_t, 3> gyro{};   // 0.1 deg/s
  std::array<std::int16_t, 3> accel{};  // milli-g
  std::array<std::int16_t, 3> mag{};    // 0.1 uT
  std::array<std::uint16_t, 5> flex{};  // ADC counts, 0..1023
  std::uint8_t battery = 100;           // percent
  std::uint8_t flags = 0;

  bool wireless() const { return (flags & kFlagWireless) != 0; }
  bool operator==(const SensorFrame&) const = default;
};

/// Vibration directive for one fingertip motor (0 = thumb .. 4 = pinky).
struct HapticCommand {
  std::uint8_t seq = 0;
  std::uint8_t motor = 0;
  std::uint8_t intensity = 0;
  std::uint16_t duration_ms = 0;

  bool is_stop() const { return intensity == 0; }
  bool operator==(const HapticCommand&) const = default;
};

struct Handshake {
  std::uint8_t version = kProtocolVersion;
  bool operator==(const Handshake&) const = default;
};

enum class DecodeError {
  BadSync,
  BadType,
  ShortFrame,
  BadCrc,
  BadMotorIndex,
  InvalidField,  // CRC-valid frame whose fields break the frame invariants
};

std::string_view to_string(DecodeError e);

class DecodeFailure : public std::runtime_error {
 public:
  explicit DecodeFailure(DecodeError e);
  DecodeError error() const { return error_; }

 private:
  DecodeError error_;
};

/// Either a decoded value or the check that rejected the bytes.
template <typename T>
class Decoded {
 public:
  Decoded(T value) : state_(std::move(value)) {}
  Decoded(DecodeError error) : state_(error) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    if (!ok()) throw DecodeFailure(error());
    return std::get<T>(state_);
  }
  const T& operator*() const { return value(); }
  const T* operator->() const { return &value(); }

  DecodeError error() const { return std::get<DecodeError>(state_); }

 private:
  std::variant<T, DecodeError> state_;
};

/// CRC-8, polynomial 0x07, init 0x00, MSB first, no reflection, no final XOR.
std::uint8_t crc8(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, kSensorFrameSize> encode_sensor_frame(const SensorFrame& f);
Decoded<SensorFrame> decode_sensor_frame(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, kHapticCommandSize> encode_haptic_command(const HapticCommand& c);
Decoded<HapticCommand> decode_haptic_command(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, kHandshakeSize> encode_handshake(const Handshake& h);
Decoded<Handshake> decode_handshake(std::span<const std::uint8_t> bytes);

using Packet = std::variant<SensorFrame, HapticCommand, Handshake>;

/// Encoded length for a packet type byte, or nullopt for unknown types.
std::optional<std::size_t> frame_size_for_type(std::uint8_t type);

struct ResyncResult {
  std::vector<Packet> packets;
  std::size_t cursor = 0;   // first byte not yet consumed
  std::size_t skipped = 0;  // bytes discarded as corruption
};

/// Scans `stream` from `cursor` for frames. Bytes that cannot start a valid
/// frame are skipped one at a time. A candidate that runs past the end of the
/// stream is left unconsumed so more bytes can complete it.
ResyncResult resync_stream(std::span<const std::uint8_t> stream, std::size_t cursor = 0);

/// Incremental wrapper around resync_stream for a byte stream that arrives in
/// pieces. Never holds more than two maximum-length frames of bytes.
class StreamReassembler {
 public:
  std::vector<Packet> feed(std::span<const std::uint8_t> bytes);

  std::size_t skipped() const { return skipped_; }
  std::size_t buffered() const { return buffer_.size(); }
  std::size_t max_buffered() const { return max_buffered_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t skipped_ = 0;
  std::size_t max_buffered_ = 0;
};

}  // namespace glove::wire
