#include "glove/gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <doctest.h>

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>

using namespace glove;
using namespace glove::session;
using nlohmann::json;

namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

class TestClient {
 public:
  explicit TestClient(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }

  /// Next text frame, or nullopt once the server has closed.
  std::optional<json> read() {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws_.read(buf, ec);
    if (ec) return std::nullopt;
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  /// Reads until `pred` holds on a frame or the deadline passes.
  std::optional<json> read_until(const std::function<bool(const json&)>& pred, std::chrono::milliseconds within) {
    const auto deadline = Clock::now() + within;
    while (Clock::now() < deadline) {
      auto j = read();
      if (!j) return std::nullopt;
      if (pred(*j)) return j;
    }
    return std::nullopt;
  }

  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

std::string pose_msg(double distance, double flex = 0.0) {
  return json{{"v", 1},
              {"type", "pose"},
              {"euler_deg", {0, 0, 0}},
              {"flex", {flex, flex, flex, flex, flex}},
              {"distance_m", distance}}
      .dump();
}

bool is_state(const json& j) { return j.value("type", "") == "state"; }

PipelineConfig live_config() {
  PipelineConfig cfg;
  cfg.seed = 3;
  cfg.targets = {{1, Vec3(5000, 0, 100), 5.0, true}};
  return cfg;
}

}  // namespace

TEST_CASE("client messages") {
  SUBCASE("pose") {
    const auto m = parse_client_message(
        R"({"v":1,"type":"pose","euler_deg":[10,-5,3],"flex":[0,0.5,1,0,0],"distance_m":0.8})");
    const auto* p = std::get_if<PoseMessage>(&m);
    REQUIRE(p);
    CHECK(p->pose.euler_deg == std::array<double, 3>{10, -5, 3});
    CHECK(p->pose.flex[2] == 1.0);
    CHECK(p->pose.distance_m == 0.8);
  }
  SUBCASE("reset") { CHECK(std::holds_alternative<ResetMessage>(parse_client_message(R"({"v":1,"type":"reset"})"))); }
  SUBCASE("rejections") {
    for (const char* bad : {
             "not json",
             "[1,2,3]",
             R"({"type":"reset"})",
             R"({"v":2,"type":"reset"})",
             R"({"v":1,"type":"warp"})",
             R"({"v":1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0],"flex":[0,0,0,0,0],"distance_m":1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0,"x"],"flex":[0,0,0,0,0],"distance_m":1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0,0],"flex":[0,0,0,0,1.5],"distance_m":1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0,0],"flex":[0,0,0,0],"distance_m":1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0,0],"flex":[0,0,0,0,0],"distance_m":-0.1})",
             R"({"v":1,"type":"pose","euler_deg":[0,0,0],"flex":[0,0,0,0,0]})",
         }) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_client_message(bad), ClientProtocolError);
    }
  }
}

TEST_CASE("error frames") {
  const auto j = json::parse(error_frame("boom"));
  CHECK(j["v"] == 1);
  CHECK(j["type"] == "error");
  CHECK(j["message"] == "boom");
}

TEST_CASE("snapshot layout") {
  LiveHandSource hand;
  Pipeline p(live_config(), hand);
  p.run_until(200);
  const auto s = make_snapshot(p, {{flight::GameEventKind::TargetDestroyed, 150, 1}});
  CHECK(s["v"] == 1);
  CHECK(s["type"] == "state");
  CHECK(s["t_ms"] == 200);
  CHECK(s["aircraft"]["pos"].size() == 3);
  CHECK(s["aircraft"]["quat"].size() == 4);
  CHECK(s["aircraft"]["speed"].get<double>() == doctest::Approx(50.0).epsilon(0.05));
  CHECK(s["hand"]["flex"].size() == 5);
  CHECK(s["hand"]["distance"].get<double>() == doctest::Approx(1.25).epsilon(0.05));
  CHECK(s["motors"].size() == 5);
  REQUIRE(s["targets"].size() == 1);
  CHECK(s["targets"][0]["id"] == 1);
  CHECK(s["targets"][0]["alive"] == true);
  REQUIRE(s["events"].size() == 1);
  CHECK(s["events"][0]["kind"] == "target_destroyed");
  CHECK(s["events"][0]["target_id"] == 1);
}

TEST_CASE("a live client flies the aircraft") {
  Gateway gw(live_config(), 0);
  gw.start();
  TestClient c(gw.port());
  REQUIRE(c.read_until(is_state, std::chrono::seconds(2)));

  // Hand close to the sensor: throttle up toward 80 m/s.
  c.send(pose_msg(0.5));
  const auto fast = c.read_until(
      [](const json& j) { return is_state(j) && j["aircraft"]["speed"].get<double>() > 70.0; }, std::chrono::seconds(6));
  REQUIRE(fast);
  CHECK((*fast)["aircraft"]["pos"][0].get<double>() > 50.0);

  // Snapshots arrive at about 30 Hz of simulated time.
  const auto a = c.read_until(is_state, std::chrono::seconds(1));
  const auto b = c.read_until(is_state, std::chrono::seconds(1));
  REQUIRE(a);
  REQUIRE(b);
  const auto gap = (*b)["t_ms"].get<int>() - (*a)["t_ms"].get<int>();
  CHECK(gap >= 30);
  CHECK(gap <= 120);

  // Level hand at mid range: back to cruise.
  c.send(pose_msg(1.25));
  CHECK(c.read_until([](const json& j) { return is_state(j) && j["aircraft"]["speed"].get<double>() < 51.0; },
                     std::chrono::seconds(8)));

  c.send(R"({"v":1,"type":"reset"})");
  CHECK(c.read_until([](const json& j) { return is_state(j) && j["aircraft"]["pos"][0].get<double>() < 20.0; },
                     std::chrono::seconds(2)));
  c.close();
  gw.stop();
  CHECK(gw.failure().empty());
}

TEST_CASE("a malformed message gets an error frame and a close") {
  Gateway gw(live_config(), 0);
  gw.start();
  TestClient c(gw.port());
  c.send(R"({"v":1,"type":"pose","flex":"lots"})");
  const auto err = c.read_until([](const json& j) { return j.value("type", "") == "error"; }, std::chrono::seconds(2));
  REQUIRE(err);
  CHECK_FALSE((*err)["message"].get<std::string>().empty());
  // After the error only the close remains (a snapshot may still be queued).
  bool closed = false;
  for (int i = 0; i < 100 && !closed; ++i) closed = !c.read().has_value();
  CHECK(closed);
}

TEST_CASE("only one client controls a session") {
  Gateway gw(live_config(), 0);
  gw.start();
  TestClient first(gw.port());
  REQUIRE(first.read_until(is_state, std::chrono::seconds(2)));
  TestClient second(gw.port());
  const auto err =
      second.read_until([](const json& j) { return j.value("type", "") == "error"; }, std::chrono::seconds(2));
  REQUIRE(err);
  CHECK((*err)["message"].get<std::string>().find("another client") != std::string::npos);
  // The first client is unaffected.
  CHECK(first.read_until(is_state, std::chrono::seconds(1)));
}

TEST_CASE("a taken port is reported") {
  Gateway gw(live_config(), 0);
  CHECK(gw.port() != 0);
  CHECK_THROWS_AS(Gateway(live_config(), gw.port()), PortInUse);
}

TEST_CASE("a dropped client leaves the hand to relax back to neutral") {
  Gateway gw(live_config(), 0);
  gw.start();
  {
    TestClient c(gw.port());
    c.send(pose_msg(1.25, 1.0));
    REQUIRE(c.read_until([](const json& j) { return is_state(j) && j["hand"]["flex"][1].get<double>() > 0.8; },
                         std::chrono::seconds(3)));
    c.close();
  }
  TestClient watcher(gw.port());
  const auto start = Clock::now();
  const auto relaxed = watcher.read_until(
      [](const json& j) { return is_state(j) && j["hand"]["flex"][1].get<double>() < 0.2; }, std::chrono::seconds(3));
  REQUIRE(relaxed);
  // Held for the hold period first.
  CHECK(Clock::now() - start >= std::chrono::milliseconds(300));
}

TEST_CASE("a handshake failure is surfaced") {
  auto cfg = live_config();
  cfg.device_protocol_version = wire::kProtocolVersion + 1;
  Gateway gw(cfg, 0);
  gw.start();
  const auto deadline = Clock::now() + std::chrono::seconds(3);
  while (gw.failure().empty() && Clock::now() < deadline) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  CHECK_FALSE(gw.failure().empty());
  gw.stop();
}
