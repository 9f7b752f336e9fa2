#include "glove/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace glove::session {

namespace {

constexpr std::uint32_t kHandshakeRetryMs = 100;
// Live hands move at most this fast, so the emulated gyro sees every turn.
constexpr double kLiveSlewDegPerS = 720.0;

template <std::size_t N>
std::vector<std::uint8_t> to_vector(const std::array<std::uint8_t, N>& a) {
  return {a.begin(), a.end()};
}

}  // namespace

PoseRecord neutral_record() {
  PoseRecord r;
  r.distance_m = 1.25;
  return r;
}

void LiveHandSource::set_pose(const PoseRecord& r, std::uint32_t t_ms) {
  current_ = r;
  current_.t_ms = t_ms;
  disconnected_at_.reset();
}

void LiveHandSource::disconnect(std::uint32_t t_ms) { disconnected_at_ = t_ms; }

device::HandPose LiveHandSource::pose_at(std::uint32_t t_ms) {
  PoseRecord target = current_;
  if (disconnected_at_ && t_ms >= *disconnected_at_ + kHoldAfterDisconnectMs) target = neutral_record();

  device::HandPose p = pose_from_record(target);
  const Quat goal = p.orientation;
  if (last_orientation_ && last_t_ && t_ms > *last_t_) {
    const double dt_s = (t_ms - *last_t_) / 1000.0;
    const double max_step = deg2rad(kLiveSlewDegPerS * dt_s);
    const double gap = deg2rad(angle_between_deg(*last_orientation_, goal));
    const Quat next = gap <= max_step ? goal : last_orientation_->slerp(max_step / gap, goal).normalized();
    p.angular_velocity = body_rate_dps(*last_orientation_, next, dt_s);
    p.orientation = next;
  } else if (last_orientation_) {
    p.orientation = *last_orientation_;
  }
  last_orientation_ = p.orientation;
  last_t_ = t_ms;
  return p;
}

PipelineConfig PipelineConfig::from_scenario(const Scenario& s) {
  PipelineConfig c;
  c.seed = s.seed;
  c.link = wire::profile_by_name(s.link);
  c.targets = s.targets;
  if (s.calibration) c.calibration = *s.calibration;
  c.device.mode = s.link == "bluetooth" ? device::LinkMode::Wireless : device::LinkMode::Wired;
  return c;
}

double LatencyStats::percentile(double p) const {
  if (samples_ms.empty()) return 0.0;
  std::vector<std::uint32_t> sorted = samples_ms;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank definition.
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

Pipeline::Pipeline(PipelineConfig cfg, HandSource& hand)
    : cfg_(std::move(cfg)),
      hand_(hand),
      rng_(cfg_.seed),
      device_(cfg_.device),
      uplink_(cfg_.link),
      downlink_(cfg_.link),
      tracker_(cfg_.filter, cfg_.calibration, kSensorAxis),
      position_sensor_(cfg_.position_sensor),
      gestures_(cfg_.gestures),
      world_(cfg_.targets, cfg_.flight),
      log_(RunMeta{kLogVersion, cfg_.seed, cfg_.link.name, 0}) {
  for (const auto& m : device_.flex_models) m.validate();
  device_.imu.validate();
}

void Pipeline::run_until(std::uint32_t end_ms) {
  while (now_ < end_ms) tick();
}

void Pipeline::reset_world() {
  world_.reset();
  sim_steps_ = static_cast<std::uint64_t>(std::ceil(now_ * cfg_.sim_rate_hz / 1000.0));
}

std::vector<flight::GameEvent> Pipeline::drain_events() { return std::exchange(pending_events_, {}); }

void Pipeline::tick() {
  const std::uint32_t t = now_;
  hand_pose_ = hand_.pose_at(t);
  device_side(t);
  host_receive(t);
  position_sample(t);
  sim_step(t);
  haptics_tick(t);
  ++now_;
  log_.set_duration_ms(now_);
}

void Pipeline::device_side(std::uint32_t t) {
  for (const auto& bytes : downlink_.poll(t)) {
    for (const auto& packet : device_rx_.feed(bytes)) {
      if (const auto* cmd = std::get_if<wire::HapticCommand>(&packet)) {
        device::apply_haptic(device_, *cmd);
        log_.append(HapticRecord{t, HapticStage::Applied, *cmd});
      } else if (const auto* hs = std::get_if<wire::Handshake>(&packet)) {
        if (hs->version != cfg_.device_protocol_version)
          throw SessionAborted("device rejected host protocol version " + std::to_string(hs->version));
        device_linked_ = true;
      }
    }
  }

  if (!device_linked_ && t % kHandshakeRetryMs == 0) {
    uplink_.send(to_vector(wire::encode_handshake({cfg_.device_protocol_version})), t, rng_);
  }

  // The firmware step at tick t covers the millisecond (t-1, t].
  if (t == 0) return;
  if (auto frame = device::step_firmware(device_, hand_pose_, 1, rng_)) {
    uplink_.send(to_vector(wire::encode_sensor_frame(*frame)), t, rng_);
  }
}

void Pipeline::host_receive(std::uint32_t t) {
  for (const auto& bytes : uplink_.poll(t)) {
    for (const auto& packet : host_rx_.feed(bytes)) {
      if (const auto* hs = std::get_if<wire::Handshake>(&packet)) {
        if (hs->version != wire::kProtocolVersion)
          throw SessionAborted("host rejected device protocol version " + std::to_string(hs->version));
        host_linked_ = true;
        downlink_.send(to_vector(wire::encode_handshake({wire::kProtocolVersion})), t, rng_);
      } else if (const auto* frame = std::get_if<wire::SensorFrame>(&packet)) {
        if (!host_linked_) continue;
        if (cfg_.log_sensor_frames) log_.append(SensorRecord{t, *frame});
        const auto& pose = tracker_.on_frame(*frame, t);
        for (const auto& e : gestures_.detect(pose.flex_norm, t)) log_.append(GestureRecord{t, e});
      }
    }
  }
}

void Pipeline::position_sample(std::uint32_t t) {
  if (!position_sensor_.due(t)) return;
  if (auto m = position_sensor_.sample(hand_pose_.position, t, rng_)) tracker_.on_position(*m, t);
}

void Pipeline::sim_step(std::uint32_t t) {
  const auto instant = static_cast<std::uint32_t>(std::floor(sim_steps_ * 1000.0 / cfg_.sim_rate_hz));
  if (t < instant) return;
  ++sim_steps_;
  const flight::GestureHolds holds{gestures_.thumb_held(), gestures_.fist_held()};
  const auto u = flight::map_controls(tracker_.pose(), holds, cfg_.flight);
  const auto events = world_.step(u, 1.0 / cfg_.sim_rate_hz, t);
  for (const auto& e : events) {
    log_.append(GameRecord{t, e});
    pending_events_.push_back(e);
  }
  for (const auto& pattern : flight::events_to_haptics(events)) scheduler_.enqueue(pattern, t);
}

void Pipeline::haptics_tick(std::uint32_t t) {
  for (const auto& cmd : scheduler_.tick(t)) {
    log_.append(HapticRecord{t, HapticStage::Sent, cmd});
    downlink_.send(to_vector(wire::encode_haptic_command(cmd)), t, rng_);
  }
}

LatencyStats gun_haptic_latency(const RunLog& log) {
  constexpr std::uint32_t kSearchWindowMs = 1000;
  LatencyStats stats;
  const auto& records = log.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto* game = std::get_if<GameRecord>(&records[i]);
    if (!game || game->event.kind != flight::GameEventKind::GunFired) continue;
    const std::uint32_t fired = game->t_ms;

    // The buzz is queued in the same tick; a running stronger vibration
    // can mask it, in which case nothing is sent.
    std::optional<std::size_t> sent;
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const auto* h = std::get_if<HapticRecord>(&records[j]);
      if (h && h->t_ms > fired) break;
      if (const auto* g = std::get_if<GameRecord>(&records[j]); g && g->t_ms > fired) break;
      if (h && h->stage == HapticStage::Sent && h->command.motor == 1 && h->command.intensity == 180) {
        sent = j;
        break;
      }
    }
    if (!sent) continue;
    const auto& cmd = std::get<HapticRecord>(records[*sent]).command;

    bool delivered = false;
    for (std::size_t j = *sent + 1; j < records.size(); ++j) {
      const auto* h = std::get_if<HapticRecord>(&records[j]);
      if (!h) continue;
      if (h->t_ms > fired + kSearchWindowMs) break;
      if (h->stage == HapticStage::Applied && h->command == cmd) {
        stats.samples_ms.push_back(h->t_ms - fired);
        delivered = true;
        break;
      }
    }
    if (!delivered) ++stats.undelivered;
  }
  return stats;
}

}  // namespace glove::session
