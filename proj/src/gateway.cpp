#include "glove/gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cmath>
#include <deque>
#include <mutex>
#include <thread>

namespace glove::session {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N)
    throw ClientProtocolError(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) throw ClientProtocolError(std::string("'") + key + "' holds a non-number");
    out[i] = j[key][i].get<double>();
    if (!std::isfinite(out[i])) throw ClientProtocolError(std::string("'") + key + "' holds a non-finite value");
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

// Outbound frames are queued per client; past this depth the oldest
// snapshot is dropped since only the latest state matters.
constexpr std::size_t kMaxOutbox = 64;

}  // namespace

ClientMessage parse_client_message(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw ClientProtocolError("message is not valid JSON");
  }
  if (!j.is_object()) throw ClientProtocolError("message must be a JSON object");
  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kGatewayVersion)
    throw ClientProtocolError("unsupported or missing protocol version 'v'");
  if (!j.contains("type") || !j["type"].is_string()) throw ClientProtocolError("missing message 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "reset") return ResetMessage{};
  if (type != "pose") throw ClientProtocolError("unknown message type '" + type + "'");

  PoseMessage m;
  m.pose.euler_deg = number_array<3>(j, "euler_deg");
  m.pose.flex = number_array<5>(j, "flex");
  for (double f : m.pose.flex)
    if (f < 0.0 || f > 1.0) throw ClientProtocolError("flex values must lie in [0, 1]");
  if (!j.contains("distance_m") || !j["distance_m"].is_number())
    throw ClientProtocolError("'distance_m' must be a number");
  m.pose.distance_m = j["distance_m"].get<double>();
  if (!(m.pose.distance_m >= 0.0) || !std::isfinite(m.pose.distance_m))
    throw ClientProtocolError("'distance_m' must be a non-negative number");
  return m;
}

json make_snapshot(const Pipeline& p, const std::vector<flight::GameEvent>& events) {
  const auto& a = p.world().aircraft();
  const auto& hand = p.fused();
  json motors = json::array();
  for (const auto& m : p.device().motor) motors.push_back(m.intensity);
  json targets = json::array();
  for (const auto& t : p.world().targets())
    targets.push_back({{"id", t.id}, {"pos", vec_json(t.position)}, {"alive", t.alive}});
  json ev = json::array();
  for (const auto& e : events) {
    json item = {{"kind", flight::to_string(e.kind)}, {"t_ms", e.t_ms}};
    if (e.target_id) item["target_id"] = *e.target_id;
    ev.push_back(std::move(item));
  }
  return {
      {"v", kGatewayVersion},
      {"type", "state"},
      {"t_ms", p.now()},
      {"aircraft", {{"pos", vec_json(a.position)}, {"quat", quat_json(a.attitude)}, {"speed", a.speed}}},
      {"hand", {{"quat", quat_json(hand.orientation)}, {"flex", hand.flex_norm}, {"distance", hand.distance}}},
      {"motors", motors},
      {"targets", targets},
      {"events", ev},
  };
}

std::string error_frame(const std::string& message) {
  return json{{"v", kGatewayVersion}, {"type", "error"}, {"message", message}}.dump();
}

namespace {

struct Connected {};
struct Disconnected {};
using Inbound = std::variant<PoseMessage, ResetMessage, Connected, Disconnected>;

}  // namespace

struct Gateway::Impl {
  class Client;

  Impl(PipelineConfig cfg, std::uint16_t port) : cfg(std::move(cfg)), acceptor(ioc) {
    try {
      const tcp::endpoint ep(net::ip::make_address("0.0.0.0"), port);
      acceptor.open(ep.protocol());
      acceptor.set_option(net::socket_base::reuse_address(true));
      acceptor.bind(ep);
      acceptor.listen();
    } catch (const boost::system::system_error& e) {
      throw PortInUse("cannot listen on port " + std::to_string(port) + ": " + e.what());
    }
  }

  void push(Inbound m) {
    std::lock_guard lock(inbound_mu);
    inbound.push_back(std::move(m));
  }

  std::deque<Inbound> drain() {
    std::lock_guard lock(inbound_mu);
    return std::exchange(inbound, {});
  }

  void accept();
  void publish(std::string text);
  void tick_loop();

  PipelineConfig cfg;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::thread tick_thread;
  std::atomic<bool> running{false};
  std::atomic<std::uint32_t> sim_time{0};

  std::mutex inbound_mu;
  std::deque<Inbound> inbound;

  mutable std::mutex failure_mu;
  std::string failure;

  std::weak_ptr<Client> active;  // touched only on the io thread
};

class Gateway::Impl::Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, Impl& owner, bool controlling)
      : ws_(std::move(socket)), owner_(owner), controlling_(controlling) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Client::on_accept, shared_from_this()));
  }

  void send(std::string text) {
    if (closing_) return;
    if (outbox_.size() >= kMaxOutbox) outbox_.erase(outbox_.begin() + (writing_ ? 1 : 0));
    outbox_.push_back(std::move(text));
    if (!writing_) write_next();
  }

  void close_with_error(const std::string& message) {
    if (closing_) return;
    outbox_.push_back(error_frame(message));
    closing_ = true;
    if (!writing_) write_next();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    if (!controlling_) {
      close_with_error("another client is already controlling this session");
      return;
    }
    owner_.push(Connected{});
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Client::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (controlling_) owner_.push(Disconnected{});
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (closing_) return;
    try {
      std::visit([this](auto&& m) { owner_.push(m); }, parse_client_message(text));
    } catch (const ClientProtocolError& e) {
      close_with_error(e.what());
      // Keep reading so the close handshake and the disconnect are observed.
    }
    read_next();
  }

  void write_next() {
    if (outbox_.empty()) {
      if (closing_ && !close_sent_) {
        close_sent_ = true;
        ws_.async_close(websocket::close_code::policy_error,
                        [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&Client::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) return;
    outbox_.pop_front();
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Impl& owner_;
  bool controlling_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
};

void Gateway::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (running) accept();
      return;
    }
    const bool controlling = active.expired();
    auto client = std::make_shared<Client>(std::move(socket), *this, controlling);
    if (controlling) active = client;
    client->start();
    accept();
  });
}

void Gateway::Impl::publish(std::string text) {
  net::post(ioc, [this, text = std::move(text)]() mutable {
    if (auto c = active.lock()) c->send(std::move(text));
  });
}

void Gateway::Impl::tick_loop() {
  LiveHandSource hand;
  Pipeline pipeline(cfg, hand);
  std::uint64_t snapshots = 0;
  const auto start = std::chrono::steady_clock::now();
  try {
    while (running) {
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      while (running && pipeline.now() < static_cast<std::uint64_t>(elapsed.count())) {
        const std::uint32_t t = pipeline.now();
        for (auto& m : drain()) {
          if (auto* pose = std::get_if<PoseMessage>(&m)) {
            hand.set_pose(pose->pose, t);
          } else if (std::holds_alternative<ResetMessage>(m)) {
            pipeline.reset_world();
          } else if (std::holds_alternative<Disconnected>(m)) {
            hand.disconnect(t);
          }
        }
        pipeline.tick();
        sim_time = pipeline.now();
        const auto due = static_cast<std::uint32_t>(std::floor(snapshots * 1000.0 / cfg.snapshot_rate_hz));
        if (t >= due) {
          ++snapshots;
          publish(make_snapshot(pipeline, pipeline.drain_events()).dump());
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  } catch (const std::exception& e) {
    std::lock_guard lock(failure_mu);
    failure = e.what();
    publish(error_frame(failure));
  }
}

Gateway::Gateway(const Scenario& scenario, std::uint16_t port) : Gateway(PipelineConfig::from_scenario(scenario), port) {}

Gateway::Gateway(PipelineConfig cfg, std::uint16_t port) : impl_(std::make_unique<Impl>(std::move(cfg), port)) {
  // The live session logs only game-level records.
  impl_->cfg.log_sensor_frames = false;
}

Gateway::~Gateway() { stop(); }

std::uint16_t Gateway::port() const { return impl_->acceptor.local_endpoint().port(); }

void Gateway::start() {
  if (impl_->running.exchange(true)) return;
  impl_->accept();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->tick_thread = std::thread([this] { impl_->tick_loop(); });
}

void Gateway::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  if (impl_->tick_thread.joinable()) impl_->tick_thread.join();
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
}

std::uint32_t Gateway::sim_time_ms() const { return impl_->sim_time; }

std::string Gateway::failure() const {
  std::lock_guard lock(impl_->failure_mu);
  return impl_->failure;
}

}  // namespace glove::session
