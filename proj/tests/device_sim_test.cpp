#include "glove/device_sim.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace glove;
using namespace glove::device;

namespace {

FlexSensorModel quiet_flex() { return {900.0, 200.0, 0.0}; }

DeviceState quiet_device() {
  DeviceState d;
  d.imu = ImuModel::noiseless();
  for (auto& m : d.flex_models) m = quiet_flex();
  return d;
}

}  // namespace

TEST_CASE("synth_flex follows the linear bend law") {
  Rng rng(1);
  CHECK(synth_flex(0.0, quiet_flex(), rng) == 900);
  CHECK(synth_flex(1.0, quiet_flex(), rng) == 200);
  CHECK(synth_flex(0.5, quiet_flex(), rng) == 550);
}

TEST_CASE("synth_flex stays in ADC range under heavy noise") {
  Rng rng(2);
  FlexSensorModel m{1023.0, 0.0, 400.0};
  for (int i = 0; i < 10000; ++i) {
    const auto v = synth_flex(rng.uniform(), m, rng);
    CHECK(v <= 1023);
  }
}

TEST_CASE("flex sensor model validation") {
  CHECK_NOTHROW(FlexSensorModel{}.validate());
  CHECK_THROWS_AS((FlexSensorModel{200.0, 900.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FlexSensorModel{1100.0, 200.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FlexSensorModel{900.0, 200.0, -1.0}.validate()), std::invalid_argument);
  ImuModel imu;
  imu.gyro_noise_sigma = -0.1;
  CHECK_THROWS_AS(imu.validate(), std::invalid_argument);
}

TEST_CASE("synth_imu at rest with identity orientation") {
  Rng rng(3);
  ImuModel m = ImuModel::noiseless();
  HandPose pose;
  const auto s = synth_imu(pose, m, 0.01, rng);
  CHECK(s.gyro == std::array<std::int16_t, 3>{0, 0, 0});
  CHECK(s.accel == std::array<std::int16_t, 3>{0, 0, -1000});
  // Reference field 20, 0, -45 uT quantized to 0.1 uT.
  CHECK(s.mag == std::array<std::int16_t, 3>{200, 0, -450});
}

TEST_CASE("synth_imu gravity under a 90 degree roll matches a rotation oracle") {
  Rng rng(4);
  ImuModel m = ImuModel::noiseless();
  HandPose pose;
  pose.orientation = quat_from_euler_deg(90.0, 0.0, 0.0);
  const auto s = synth_imu(pose, m, 0.01, rng);
  // Body sees world gravity rotated by the inverse orientation.
  const Vec3 expected = oracle::rotate(pose.orientation.conjugate(), Vec3(0, 0, -1000));
  CHECK(s.accel[0] == std::lround(expected.x()));
  CHECK(s.accel[1] == std::lround(expected.y()));
  CHECK(s.accel[2] == std::lround(expected.z()));
  // Rolling right by 90 degrees puts gravity on the body y axis.
  CHECK(s.accel[1] == -1000);
  CHECK(s.accel[2] == 0);
}

TEST_CASE("synth_imu reports gyro bias in raw units") {
  Rng rng(5);
  ImuModel m = ImuModel::noiseless();
  m.gyro_bias = Vec3(10, 0, 0);
  const auto s = synth_imu(HandPose{}, m, 0.01, rng);
  CHECK(s.gyro == std::array<std::int16_t, 3>{100, 0, 0});
}

TEST_CASE("noise-free gyro is invertible to quantization error") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    ImuModel m = ImuModel::noiseless();
    HandPose pose;
    pose.orientation = quat_from_euler_deg(rng.uniform(-180, 180), rng.uniform(-89, 89), rng.uniform(-180, 180));
    pose.angular_velocity = Vec3(rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-500, 500));
    const auto s = synth_imu(pose, m, 0.01, rng);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(s.gyro[k] / 10.0 - pose.angular_velocity[k]) <= 0.05 + 1e-12);
    // Gravity and field directions recover the orientation itself.
    const Vec3 a = Vec3(s.accel[0], s.accel[1], s.accel[2]);
    const Vec3 expected = pose.orientation.conjugate() * Vec3(0, 0, -1000);
    CHECK((a - expected).cwiseAbs().maxCoeff() <= 0.5 + 1e-9);
  }
}

TEST_CASE("step_firmware emits at the sampling instants") {
  Rng rng(7);
  SUBCASE("one full period") {
    DeviceState d = quiet_device();
    CHECK(step_firmware(d, HandPose{}, 10, rng).has_value());
  }
  SUBCASE("two half periods") {
    DeviceState d = quiet_device();
    int frames = 0;
    frames += step_firmware(d, HandPose{}, 5, rng).has_value();
    frames += step_firmware(d, HandPose{}, 5, rng).has_value();
    CHECK(frames == 1);
  }
  SUBCASE("1 ms steps give one frame per 10 ms") {
    DeviceState d = quiet_device();
    std::vector<std::uint32_t> times;
    for (int t = 1; t <= 1000; ++t)
      if (auto f = step_firmware(d, HandPose{}, 1, rng)) times.push_back(f->t_ms);
    REQUIRE(times.size() == 100);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(times[i] == 10 * (i + 1));
  }
  SUBCASE("a step longer than the period is refused") {
    DeviceState d = quiet_device();
    CHECK_THROWS_AS(step_firmware(d, HandPose{}, 11, rng), std::invalid_argument);
    CHECK_THROWS_AS(step_firmware(d, HandPose{}, 0, rng), std::invalid_argument);
  }
}

TEST_CASE("frame sequence numbers increment and wrap") {
  Rng rng(8);
  DeviceState d = quiet_device();
  d.seq = 65534;
  std::vector<std::uint16_t> seqs;
  for (int i = 0; i < 4; ++i) seqs.push_back(step_firmware(d, HandPose{}, 10, rng)->seq);
  CHECK(seqs == std::vector<std::uint16_t>{65534, 65535, 0, 1});
}

TEST_CASE("motor expires after its duration") {
  Rng rng(9);
  DeviceState d = quiet_device();
  d.motor[0] = {200, 15};
  step_firmware(d, HandPose{}, 10, rng);
  CHECK(d.motor[0].intensity == 200);
  step_firmware(d, HandPose{}, 10, rng);
  CHECK(d.motor[0].intensity == 0);
  CHECK(d.motor[0].remaining_ms == 0);
}

TEST_CASE("apply_haptic") {
  DeviceState d;
  SUBCASE("idle motor is set directly") {
    apply_haptic(d, {0, 1, 180, 40});
    CHECK(d.motor[1] == Motor{180, 40});
  }
  SUBCASE("active motor max-merges") {
    d.motor[2] = {200, 30};
    apply_haptic(d, {0, 2, 150, 100});
    CHECK(d.motor[2] == Motor{200, 100});
  }
  SUBCASE("stop idles the motor") {
    d.motor[3] = {200, 30};
    apply_haptic(d, {0, 3, 0, 0});
    CHECK(d.motor[3] == Motor{});
  }
  SUBCASE("motor index out of range") {
    CHECK_THROWS_AS(apply_haptic(d, {0, 7, 100, 10}), std::out_of_range);
  }
}

TEST_CASE("battery drains only in wireless mode") {
  Rng rng(10);
  DeviceState wired = quiet_device();
  DeviceState wireless = quiet_device();
  wireless.mode = LinkMode::Wireless;
  wireless.battery_drain_pct_per_s = 1.0;
  wired.battery_drain_pct_per_s = 1.0;
  std::optional<wire::SensorFrame> last;
  for (int i = 0; i < 1000; ++i) {
    step_firmware(wired, HandPose{}, 10, rng);
    last = step_firmware(wireless, HandPose{}, 10, rng);
  }
  CHECK(wired.battery_pct == 100.0);
  CHECK(wireless.battery_pct == doctest::Approx(90.0));
  CHECK(last->battery == 90);
  CHECK(last->wireless());
}

TEST_CASE("identical inputs give identical frames") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    DeviceState d;
    std::vector<wire::SensorFrame> frames;
    Rng pose_rng(99);
    for (int t = 1; t <= 2000; ++t) {
      HandPose p;
      p.orientation = quat_from_euler_deg(t * 0.01, 0.0, -t * 0.02);
      p.angular_velocity = Vec3(10, 0, -20);
      for (auto& f : p.flex) f = pose_rng.uniform();
      if (t % 97 == 0) apply_haptic(d, {0, static_cast<std::uint8_t>(t % 5), 200, 50});
      if (auto f = step_firmware(d, p, 1, rng)) frames.push_back(*f);
    }
    return frames;
  };
  CHECK(run(11) == run(11));
  CHECK(run(11) != run(12));
}

TEST_CASE("motor on-time equals commanded time for non-overlapping commands") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    DeviceState d = quiet_device();
    // Commands per motor, each starting after the previous one has ended.
    std::array<std::uint32_t, 5> free_at{};
    std::vector<std::pair<std::uint32_t, wire::HapticCommand>> plan;
    std::uint64_t commanded = 0;
    for (int i = 0; i < 40; ++i) {
      const auto motor = static_cast<std::uint8_t>(rng.next_u64() % 5);
      const auto start = free_at[motor] + static_cast<std::uint32_t>(rng.next_u64() % 100);
      const auto dur = static_cast<std::uint16_t>(1 + rng.next_u64() % 300);
      plan.push_back({start, {0, motor, static_cast<std::uint8_t>(1 + rng.next_u64() % 255), dur}});
      free_at[motor] = start + dur;
      commanded += dur;
    }
    std::sort(plan.begin(), plan.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::uint64_t on_time = 0;
    std::size_t next = 0;
    for (std::uint32_t t = 0; t < 20000; ++t) {
      while (next < plan.size() && plan[next].first == t) apply_haptic(d, plan[next++].second);
      for (const auto& m : d.motor) on_time += m.intensity > 0;
      step_firmware(d, HandPose{}, 1, rng);
      for (const auto& m : d.motor) CHECK((m.intensity == 0) == (m.remaining_ms == 0));
    }
    CHECK(on_time == commanded);
  }
}
