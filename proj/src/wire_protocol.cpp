#include "glove/wire_protocol.hpp"

#include <algorithm>
#include <string>

namespace glove::wire {

namespace {

class Writer {
 public:
  explicit Writer(std::span<std::uint8_t> out) : out_(out) {}

  void u8(std::uint8_t v) { out_[pos_++] = v; }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xFF));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v & 0xFFFF));
    u16(static_cast<std::uint16_t>(v >> 16));
  }

 private:
  std::span<std::uint8_t> out_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::size_t pos) : in_(in), pos_(pos) {}

  std::uint8_t u8() { return in_[pos_++]; }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>(lo | (hi << 8));
  }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    const std::uint32_t hi = u16();
    return lo | (hi << 16);
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_;
};

// Common header and trailer checks. The CRC covers bytes 1..n-2.
std::optional<DecodeError> check_envelope(std::span<const std::uint8_t> bytes, std::uint8_t type,
                                          std::size_t size) {
  if (bytes.empty()) return DecodeError::ShortFrame;
  if (bytes[0] != kSync) return DecodeError::BadSync;
  if (bytes.size() < 2) return DecodeError::ShortFrame;
  if (bytes[1] != type) return DecodeError::BadType;
  if (bytes.size() < size) return DecodeError::ShortFrame;
  if (crc8(bytes.subspan(1, size - 2)) != bytes[size - 1]) return DecodeError::BadCrc;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::BadSync: return "BadSync";
    case DecodeError::BadType: return "BadType";
    case DecodeError::ShortFrame: return "ShortFrame";
    case DecodeError::BadCrc: return "BadCrc";
    case DecodeError::BadMotorIndex: return "BadMotorIndex";
    case DecodeError::InvalidField: return "InvalidField";
  }
  return "Unknown";
}

DecodeFailure::DecodeFailure(DecodeError e)
    : std::runtime_error("frame decode failed: " + std::string(to_string(e))), error_(e) {}

std::uint8_t crc8(std::span<const std::uint8_t> bytes) {
  static constexpr auto kTable = [] {
    std::array<std::uint8_t, 256> t{};
    for (unsigned i = 0; i < 256; ++i) {
      unsigned c = i;
      for (int b = 0; b < 8; ++b) c = (c & 0x80) ? ((c << 1) ^ 0x07) : (c << 1);
      t[i] = static_cast<std::uint8_t>(c & 0xFF);
    }
    return t;
  }();
  std::uint8_t crc = 0x00;
  for (const std::uint8_t b : bytes) crc = kTable[crc ^ b];
  return crc;
}

std::array<std::uint8_t, kSensorFrameSize> encode_sensor_frame(const SensorFrame& f) {
  std::array<std::uint8_t, kSensorFrameSize> out{};
  Writer w(out);
  w.u8(kSync);
  w.u8(kTypeSensorFrame);
  w.u16(f.seq);
  w.u32(f.t_ms);
  for (auto v : f.gyro) w.i16(v);
  for (auto v : f.accel) w.i16(v);
  for (auto v : f.mag) w.i16(v);
  for (auto v : f.flex) w.u16(v);
  w.u8(f.battery);
  w.u8(f.flags);
  w.u8(0x00);  // reserved
  out[kSensorFrameSize - 1] = crc8(std::span(out).subspan(1, kSensorFrameSize - 2));
  return out;
}

Decoded<SensorFrame> decode_sensor_frame(std::span<const std::uint8_t> bytes) {
  if (auto err = check_envelope(bytes, kTypeSensorFrame, kSensorFrameSize)) return *err;
  Reader r(bytes, 2);
  SensorFrame f;
  f.seq = r.u16();
  f.t_ms = r.u32();
  for (auto& v : f.gyro) v = r.i16();
  for (auto& v : f.accel) v = r.i16();
  for (auto& v : f.mag) v = r.i16();
  for (auto& v : f.flex) v = r.u16();
  f.battery = r.u8();
  f.flags = r.u8();
  const bool flex_ok = std::all_of(f.flex.begin(), f.flex.end(), [](auto v) { return v <= kFlexMax; });
  if (!flex_ok || f.battery > 100) return DecodeError::InvalidField;
  return f;
}

std::array<std::uint8_t, kHapticCommandSize> encode_haptic_command(const HapticCommand& c) {
  std::array<std::uint8_t, kHapticCommandSize> out{};
  Writer w(out);
  w.u8(kSync);
  w.u8(kTypeHapticCommand);
  w.u8(c.seq);
  w.u8(c.motor);
  w.u8(c.intensity);
  w.u16(c.duration_ms);
  out[kHapticCommandSize - 1] = crc8(std::span(out).subspan(1, kHapticCommandSize - 2));
  return out;
}

Decoded<HapticCommand> decode_haptic_command(std::span<const std::uint8_t> bytes) {
  if (auto err = check_envelope(bytes, kTypeHapticCommand, kHapticCommandSize)) return *err;
  Reader r(bytes, 2);
  HapticCommand c;
  c.seq = r.u8();
  c.motor = r.u8();
  c.intensity = r.u8();
  c.duration_ms = r.u16();
  if (c.motor >= kMotorCount) return DecodeError::BadMotorIndex;
  return c;
}

std::array<std::uint8_t, kHandshakeSize> encode_handshake(const Handshake& h) {
  std::array<std::uint8_t, kHandshakeSize> out{kSync, kTypeHandshake, h.version, 0};
  out[3] = crc8(std::span(out).subspan(1, 2));
  return out;
}

Decoded<Handshake> decode_handshake(std::span<const std::uint8_t> bytes) {
  if (auto err = check_envelope(bytes, kTypeHandshake, kHandshakeSize)) return *err;
  return Handshake{bytes[2]};
}

std::optional<std::size_t> frame_size_for_type(std::uint8_t type) {
  switch (type) {
    case kTypeHandshake: return kHandshakeSize;
    case kTypeSensorFrame: return kSensorFrameSize;
    case kTypeHapticCommand: return kHapticCommandSize;
    default: return std::nullopt;
  }
}

namespace {

std::optional<Packet> decode_packet(std::span<const std::uint8_t> bytes, std::uint8_t type) {
  switch (type) {
    case kTypeSensorFrame:
      if (auto d = decode_sensor_frame(bytes)) return Packet{*d};
      break;
    case kTypeHapticCommand:
      if (auto d = decode_haptic_command(bytes)) return Packet{*d};
      break;
    case kTypeHandshake:
      if (auto d = decode_handshake(bytes)) return Packet{*d};
      break;
    default: break;
  }
  return std::nullopt;
}

}  // namespace

ResyncResult resync_stream(std::span<const std::uint8_t> stream, std::size_t cursor) {
  ResyncResult result;
  std::size_t i = std::min(cursor, stream.size());
  while (i < stream.size()) {
    if (stream[i] != kSync) {
      ++i;
      ++result.skipped;
      continue;
    }
    if (i + 1 >= stream.size()) break;  // need the type byte
    const std::uint8_t type = stream[i + 1];
    const auto size = frame_size_for_type(type);
    if (!size) {
      ++i;
      ++result.skipped;
      continue;
    }
    if (i + *size > stream.size()) break;  // incomplete candidate
    if (auto packet = decode_packet(stream.subspan(i, *size), type)) {
      result.packets.push_back(std::move(*packet));
      i += *size;
    } else {
      ++i;
      ++result.skipped;
    }
  }
  result.cursor = i;
  return result;
}

std::vector<Packet> StreamReassembler::feed(std::span<const std::uint8_t> bytes) {
  std::vector<Packet> out;
  // Chunking keeps the buffer at most (max frame - 1) + max frame bytes.
  while (!bytes.empty()) {
    const std::size_t take = std::min(bytes.size(), kMaxFrameSize);
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(take));
    bytes = bytes.subspan(take);
    max_buffered_ = std::max(max_buffered_, buffer_.size());

    auto r = resync_stream(buffer_, 0);
    skipped_ += r.skipped;
    for (auto& p : r.packets) out.push_back(std::move(p));
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.cursor));
  }
  return out;
}

}  // namespace glove::wire
