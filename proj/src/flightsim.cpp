#include "glove/flightsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glove::flight {

namespace {

constexpr double kTimeEps = 1e-9;

double lag_factor(double dt, double tau) { return tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0; }

}  // namespace

std::string_view to_string(GameEventKind k) {
  switch (k) {
    case GameEventKind::GunFired: return "gun_fired";
    case GameEventKind::MissileLaunched: return "missile_launched";
    case GameEventKind::TargetDestroyed: return "target_destroyed";
    case GameEventKind::MissileExpired: return "missile_expired";
  }
  return "unknown";
}

AircraftState initial_aircraft(const FlightConfig& cfg) {
  AircraftState s;
  s.position = cfg.start_position;
  s.yaw = cfg.start_heading_deg;
  s.speed = std::clamp(cfg.start_speed, cfg.v_min, cfg.v_max);
  s.attitude = quat_from_euler_deg(0.0, 0.0, s.yaw);
  return s;
}

ControlInput map_controls(const tracking::FusedPose& pose, GestureHolds holds, const FlightConfig& cfg) {
  const double d = std::clamp(pose.distance, cfg.near_distance_m, cfg.far_distance_m);
  const double span = cfg.far_distance_m - cfg.near_distance_m;
  const double closeness = cfg.closer_is_faster ? (cfg.far_distance_m - d) / span : (d - cfg.near_distance_m) / span;

  const auto e = euler_deg_from_quat(pose.orientation);
  ControlInput u;
  u.speed_target = cfg.v_min + closeness * (cfg.v_max - cfg.v_min);
  u.bank_cmd = std::clamp(e.roll, -cfg.bank_limit_deg, cfg.bank_limit_deg);
  u.pitch_cmd = std::clamp(e.pitch, -cfg.pitch_limit_deg, cfg.pitch_limit_deg);
  u.fire_gun = holds.thumb;
  u.fire_missile = holds.fist;
  return u;
}

AircraftState step_aircraft(const AircraftState& s, const ControlInput& u, double dt, const FlightConfig& cfg) {
  if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("step_aircraft: dt must be in (0, 0.1]");

  AircraftState n = s;
  const double bank_cmd = std::clamp(u.bank_cmd, -cfg.bank_limit_deg, cfg.bank_limit_deg);
  const double pitch_cmd = std::clamp(u.pitch_cmd, -cfg.pitch_limit_deg, cfg.pitch_limit_deg);
  if (cfg.direct_attitude) {
    n.bank = bank_cmd;
    n.pitch = pitch_cmd;
  } else {
    const double a = lag_factor(dt, cfg.attitude_time_constant_s);
    n.bank += (bank_cmd - n.bank) * a;
    n.pitch += (pitch_cmd - n.pitch) * a;
  }
  const double target = std::clamp(u.speed_target, cfg.v_min, cfg.v_max);
  n.speed += (target - n.speed) * lag_factor(dt, cfg.speed_time_constant_s);
  n.speed = std::clamp(n.speed, cfg.v_min, cfg.v_max);

  n.yaw -= cfg.turn_rate_deg_s * std::sin(deg2rad(n.bank)) * dt;
  n.yaw = std::remainder(n.yaw, 360.0);
  n.attitude = quat_from_euler_deg(n.bank, n.pitch, n.yaw);

  n.position += n.nose() * (n.speed * dt);
  n.position.z() = std::max(0.0, n.position.z());
  return n;
}

double gun_acceptance_deg(double radius, double range, const FlightConfig& cfg) {
  return cfg.gun_cone_deg + rad2deg(std::atan2(radius, range));
}

std::optional<int> gun_hit(const AircraftState& s, const std::vector<Target>& targets, const FlightConfig& cfg) {
  const Vec3 nose = s.nose();
  std::optional<int> best;
  double best_range = 0.0;
  for (const auto& t : targets) {
    if (!t.alive) continue;
    const Vec3 v = t.position - s.position;
    const double range = v.norm();
    if (range > cfg.gun_range_m) continue;
    const double angle = range > 0.0 ? rad2deg(std::acos(std::clamp(nose.dot(v) / range, -1.0, 1.0))) : 0.0;
    if (angle > gun_acceptance_deg(t.radius, range, cfg)) continue;
    if (!best || range < best_range || (range == best_range && t.id < *best)) {
      best = t.id;
      best_range = range;
    }
  }
  return best;
}

Missile launch_missile(const AircraftState& s, int id, const FlightConfig& cfg) {
  Missile m;
  m.id = id;
  m.position = s.position;
  m.velocity = s.nose() * (s.speed + cfg.missile_speed);
  m.ttl_s = cfg.missile_ttl_s;
  m.proximity_radius = cfg.missile_proximity_m;
  return m;
}

std::optional<double> segment_entry(const Vec3& a, const Vec3& b, const Vec3& center, double radius) {
  const Vec3 rel = a - center;
  const double c = rel.squaredNorm() - radius * radius;
  if (c <= 0.0) return 0.0;
  const Vec3 d = b - a;
  const double qa = d.squaredNorm();
  if (qa == 0.0) return std::nullopt;
  const double qb = 2.0 * d.dot(rel);
  const double disc = qb * qb - 4.0 * qa * c;
  if (disc < 0.0) return std::nullopt;
  const double s = (-qb - std::sqrt(disc)) / (2.0 * qa);
  if (s < 0.0 || s > 1.0) return std::nullopt;
  return s;
}

std::vector<GameEvent> step_missiles(std::vector<Missile>& missiles, std::vector<Target>& targets, double dt,
                                     std::uint32_t t_ms) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_missiles: dt must be positive");
  std::vector<GameEvent> events;
  std::vector<Missile> remaining;
  remaining.reserve(missiles.size());
  for (auto& m : missiles) {
    const Vec3 end = m.position + m.velocity * dt;
    Target* hit = nullptr;
    double hit_s = 0.0;
    for (auto& t : targets) {
      if (!t.alive) continue;
      const auto s = segment_entry(m.position, end, t.position, m.proximity_radius);
      if (!s) continue;
      if (!hit || *s < hit_s || (*s == hit_s && t.id < hit->id)) {
        hit = &t;
        hit_s = *s;
      }
    }
    if (hit) {
      hit->alive = false;
      events.push_back({GameEventKind::TargetDestroyed, t_ms, hit->id});
      continue;
    }
    m.position = end;
    m.ttl_s -= dt;
    if (m.ttl_s <= kTimeEps) {
      events.push_back({GameEventKind::MissileExpired, t_ms, std::nullopt});
      continue;
    }
    remaining.push_back(m);
  }
  missiles = std::move(remaining);
  return events;
}

std::vector<haptics::HapticPattern> events_to_haptics(const std::vector<GameEvent>& events) {
  using haptics::HapticPattern;
  std::vector<HapticPattern> out;
  for (const auto& e : events) {
    switch (e.kind) {
      case GameEventKind::GunFired:
        out.push_back(HapticPattern{{{180, 40}}, haptics::finger_bit(1)});
        break;
      case GameEventKind::MissileLaunched:
        out.push_back(HapticPattern{{{255, 120}}, haptics::kAllFingers});
        break;
      case GameEventKind::TargetDestroyed:
        out.push_back(HapticPattern{{{220, 60}, {0, 60}, {220, 60}}, haptics::kAllFingers});
        break;
      case GameEventKind::MissileExpired:
        break;
    }
  }
  return out;
}

World::World(std::vector<Target> targets, FlightConfig cfg)
    : cfg_(cfg), initial_targets_(std::move(targets)) {
  reset();
}

void World::reset() {
  targets_ = initial_targets_;
  missiles_.clear();
  aircraft_ = initial_aircraft(cfg_);
  gun_ready_in_s_ = 0.0;
  missile_ready_in_s_ = 0.0;
  next_missile_id_ = 1;
}

std::vector<GameEvent> World::step(const ControlInput& u, double dt, std::uint32_t t_ms) {
  aircraft_ = step_aircraft(aircraft_, u, dt, cfg_);
  auto events = step_missiles(missiles_, targets_, dt, t_ms);

  gun_ready_in_s_ = std::max(0.0, gun_ready_in_s_ - dt);
  missile_ready_in_s_ = std::max(0.0, missile_ready_in_s_ - dt);

  if (u.fire_gun && gun_ready_in_s_ <= kTimeEps) {
    gun_ready_in_s_ = cfg_.gun_cooldown_s;
    events.push_back({GameEventKind::GunFired, t_ms, std::nullopt});
    if (auto id = gun_hit(aircraft_, targets_, cfg_)) {
      for (auto& t : targets_)
        if (t.id == *id) t.alive = false;
      events.push_back({GameEventKind::TargetDestroyed, t_ms, *id});
    }
  }
  if (u.fire_missile && missile_ready_in_s_ <= kTimeEps) {
    missile_ready_in_s_ = cfg_.missile_cooldown_s;
    missiles_.push_back(launch_missile(aircraft_, next_missile_id_++, cfg_));
    events.push_back({GameEventKind::MissileLaunched, t_ms, std::nullopt});
  }
  return events;
}

}  // namespace glove::flight
