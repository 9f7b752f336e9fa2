#include "glove/wire_protocol.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <string_view>

using namespace glove;
using namespace glove::wire;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next_u64());
  return out;
}

std::vector<std::uint8_t> noise_without_sync(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) {
    do b = static_cast<std::uint8_t>(rng.next_u64());
    while (b == kSync);
  }
  return out;
}

template <std::size_t N>
void append(std::vector<std::uint8_t>& v, const std::array<std::uint8_t, N>& a) {
  v.insert(v.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("crc8 check values") {
  CHECK(crc8({}) == 0x00);
  const auto digits = bytes_of("123456789");
  CHECK(crc8(digits) == 0xF4);
  CHECK(oracle::crc8_bitwise(digits) == 0xF4);
}

TEST_CASE("crc8 agrees with the bit-serial oracle") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const auto b = random_bytes(rng, rng.next_u64() % 100);
    CHECK(crc8(b) == oracle::crc8_bitwise(b));
  }
}

TEST_CASE("appending the crc yields a zero remainder") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    auto b = random_bytes(rng, rng.next_u64() % 64);
    b.push_back(crc8(b));
    CHECK(crc8(b) == 0x00);
  }
}

TEST_CASE("sensor frame layout") {
  SensorFrame f;
  f.seq = 1;
  f.battery = 0;
  const auto b = encode_sensor_frame(f);
  REQUIRE(b.size() == 40);
  CHECK(b[0] == 0xA5);
  CHECK(b[1] == 0x01);
  CHECK(b[2] == 0x01);
  CHECK(b[3] == 0x00);
  CHECK(b[39] == oracle::crc8_bitwise(std::span(b).subspan(1, 38)));

  SensorFrame g;
  g.seq = 0x1234;
  g.t_ms = 0xA1B2C3D4;
  g.gyro = {-2, 0x0102, 0};
  g.flex = {1023, 0, 0, 0, 0x0155};
  g.battery = 87;
  g.flags = kFlagWireless;
  const auto e = encode_sensor_frame(g);
  CHECK(e[2] == 0x34);
  CHECK(e[3] == 0x12);
  CHECK(e[4] == 0xD4);
  CHECK(e[7] == 0xA1);
  CHECK(e[8] == 0xFE);  // -2 little-endian two's complement
  CHECK(e[9] == 0xFF);
  CHECK(e[10] == 0x02);
  CHECK(e[11] == 0x01);
  CHECK(e[26] == 0xFF);  // flex[0] = 1023
  CHECK(e[27] == 0x03);
  CHECK(e[34] == 0x55);
  CHECK(e[35] == 0x01);
  CHECK(e[36] == 87);
  CHECK(e[37] == kFlagWireless);
  CHECK(e[38] == 0x00);
  CHECK(e[39] == oracle::crc8_bitwise(std::span(e).subspan(1, 38)));
}

TEST_CASE("sensor frame round trip") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const auto f = oracle::random_frame(rng);
    const auto d = decode_sensor_frame(encode_sensor_frame(f));
    REQUIRE(d.ok());
    CHECK(*d == f);
  }
}

TEST_CASE("sensor frame decode errors") {
  const auto good = encode_sensor_frame(SensorFrame{});
  SUBCASE("flipped payload bit") {
    auto b = good;
    b[20] ^= 0x01;
    CHECK(decode_sensor_frame(b).error() == DecodeError::BadCrc);
  }
  SUBCASE("short input") {
    CHECK(decode_sensor_frame(std::span(good).first(39)).error() == DecodeError::ShortFrame);
    CHECK(decode_sensor_frame({}).error() == DecodeError::ShortFrame);
  }
  SUBCASE("bad sync and type") {
    auto b = good;
    b[0] = 0x5A;
    CHECK(decode_sensor_frame(b).error() == DecodeError::BadSync);
    CHECK(decode_sensor_frame(encode_haptic_command({})).error() == DecodeError::BadType);
  }
  SUBCASE("CRC-valid frame with an out-of-range field") {
    auto b = good;
    b[26] = 0xFF;
    b[27] = 0x07;  // flex[0] = 2047
    b[39] = crc8(std::span(b).subspan(1, 38));
    CHECK(decode_sensor_frame(b).error() == DecodeError::InvalidField);
    auto c = good;
    c[36] = 101;
    c[39] = crc8(std::span(c).subspan(1, 38));
    CHECK(decode_sensor_frame(c).error() == DecodeError::InvalidField);
  }
  SUBCASE("value() on an error throws") {
    auto b = good;
    b[5] ^= 0xFF;
    CHECK_THROWS_AS(decode_sensor_frame(b).value(), DecodeFailure);
  }
}

TEST_CASE("every single-byte corruption of a frame body is rejected") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto good = encode_sensor_frame(oracle::random_frame(rng));
    for (std::size_t pos = 1; pos < good.size(); ++pos) {
      for (int delta = 1; delta < 256; ++delta) {
        auto b = good;
        b[pos] = static_cast<std::uint8_t>(b[pos] ^ delta);
        CHECK_FALSE(decode_sensor_frame(b).ok());
      }
    }
  }
}

TEST_CASE("haptic command layout") {
  const auto b = encode_haptic_command({0, 1, 180, 40});
  const std::array<std::uint8_t, 7> head{0xA5, 0x02, 0x00, 0x01, 0xB4, 0x28, 0x00};
  CHECK(std::equal(head.begin(), head.end(), b.begin()));
  CHECK(b[7] == oracle::crc8_bitwise(std::span(b).subspan(1, 6)));
}

TEST_CASE("haptic command round trip and bounds") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto c = oracle::random_command(rng);
    const auto d = decode_haptic_command(encode_haptic_command(c));
    REQUIRE(d.ok());
    CHECK(*d == c);
  }
  CHECK(decode_haptic_command(encode_haptic_command({3, 5, 100, 10})).error() == DecodeError::BadMotorIndex);
  const auto full = encode_haptic_command({});
  CHECK(decode_haptic_command(std::span(full).first(7)).error() == DecodeError::ShortFrame);
}

TEST_CASE("handshake layout") {
  const auto b = encode_handshake({});
  CHECK(b[0] == 0xA5);
  CHECK(b[1] == 0x00);
  CHECK(b[2] == 0x01);
  CHECK(b[3] == oracle::crc8_bitwise(std::span(b).subspan(1, 2)));
  CHECK(decode_handshake(b)->version == 1);
}

TEST_CASE("resync recovers a frame after garbage") {
  Rng rng(6);
  const SensorFrame f = oracle::random_frame(rng);
  auto stream = noise_without_sync(rng, 17);
  append(stream, encode_sensor_frame(f));
  const auto r = resync_stream(stream);
  REQUIRE(r.packets.size() == 1);
  CHECK(std::get<SensorFrame>(r.packets[0]) == f);
  CHECK(r.skipped == 17);
  CHECK(r.cursor == stream.size());
}

TEST_CASE("resync recovers concatenated frames in order") {
  const HapticCommand a{1, 0, 10, 20}, b{2, 4, 30, 40};
  std::vector<std::uint8_t> stream;
  append(stream, encode_haptic_command(a));
  append(stream, encode_haptic_command(b));
  const auto r = resync_stream(stream);
  REQUIRE(r.packets.size() == 2);
  CHECK(std::get<HapticCommand>(r.packets[0]) == a);
  CHECK(std::get<HapticCommand>(r.packets[1]) == b);
  CHECK(r.skipped == 0);
}

TEST_CASE("resync leaves an incomplete frame for later") {
  const auto f = encode_sensor_frame(SensorFrame{});
  const auto r = resync_stream(std::span(f).first(25));
  CHECK(r.packets.empty());
  CHECK(r.cursor == 0);
  CHECK(r.skipped == 0);
}

TEST_CASE("resync over (noise ++ frame)* recovers exactly the embedded frames") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Packet> embedded;
    std::vector<std::uint8_t> stream;
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    for (int i = 0; i < n; ++i) {
      const auto noise = noise_without_sync(rng, rng.next_u64() % 30);
      stream.insert(stream.end(), noise.begin(), noise.end());
      Packet p;
      switch (rng.next_u64() % 3) {
        case 0: p = oracle::random_frame(rng); break;
        case 1: p = oracle::random_command(rng); break;
        default: p = Handshake{static_cast<std::uint8_t>(rng.next_u64())}; break;
      }
      const auto bytes = oracle::encode_packet(p);
      stream.insert(stream.end(), bytes.begin(), bytes.end());
      embedded.push_back(p);
    }
    const auto r = resync_stream(stream);
    CHECK(r.packets == embedded);
    // The reassembler sees the same packets however the stream is split.
    StreamReassembler re;
    std::vector<Packet> pieces;
    for (std::size_t pos = 0; pos < stream.size();) {
      const std::size_t len = std::min<std::size_t>(stream.size() - pos, 1 + rng.next_u64() % 60);
      auto got = re.feed(std::span(stream).subspan(pos, len));
      pieces.insert(pieces.end(), got.begin(), got.end());
      pos += len;
    }
    CHECK(pieces == embedded);
    CHECK(re.max_buffered() <= 2 * kMaxFrameSize);
  }
}

TEST_CASE("random streams never yield a CRC-invalid frame") {
  Rng rng(8);
  for (int trial = 0; trial < 20000; ++trial) {
    auto stream = random_bytes(rng, rng.next_u64() % 200);
    // Bias toward plausible headers so candidates actually get decoded.
    for (std::size_t i = 0; i + 1 < stream.size(); i += 1 + rng.next_u64() % 16) {
      stream[i] = kSync;
      stream[i + 1] = static_cast<std::uint8_t>(rng.next_u64() % 3);
    }
    const auto r = resync_stream(stream);
    CHECK(r.cursor <= stream.size());
    for (const auto& p : r.packets) {
      const auto bytes = oracle::encode_packet(p);
      CHECK(oracle::frame_crc_ok(bytes));
      const auto it = std::search(stream.begin(), stream.end(), bytes.begin(), bytes.end());
      CHECK(it != stream.end());
    }
  }
}
