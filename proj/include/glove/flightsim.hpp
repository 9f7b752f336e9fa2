#pragma once

// Toy bank-to-turn flight model, static targets, hitscan guns and
// straight-flying proximity-fused missiles.
//
// World frame: x and y horizontal, z up. Aircraft attitude uses the same
// Z-Y-X convention as the hand, so a positive pitch angle lowers the nose
// and a positive bank turns right (yaw decreasing).

#include "glove/haptics.hpp"
#include "glove/math.hpp"
#include "glove/tracking.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace glove::flight {

/// Every tunable of the game in one place.
struct FlightConfig {
  double v_min = 20.0;  // m/s
  double v_max = 80.0;
  double near_distance_m = 0.5;
  double far_distance_m = 2.0;
  bool closer_is_faster = true;
  bool direct_attitude = false;  // hand angles become aircraft angles without lag

  double bank_limit_deg = 60.0;
  double pitch_limit_deg = 45.0;
  double attitude_time_constant_s = 0.5;
  double speed_time_constant_s = 1.0;
  double turn_rate_deg_s = 30.0;  // yaw rate at 90 deg bank

  double gun_cooldown_s = 0.1;
  double gun_range_m = 1000.0;
  double gun_cone_deg = 2.0;

  double missile_speed = 150.0;  // added to the launching aircraft's speed
  double missile_proximity_m = 10.0;
  double missile_ttl_s = 10.0;
  double missile_cooldown_s = 1.0;

  Vec3 start_position{0.0, 0.0, 100.0};
  double start_heading_deg = 0.0;
  double start_speed = 50.0;
};

struct ControlInput {
  double speed_target = 50.0;
  double bank_cmd = 0.0;   // deg
  double pitch_cmd = 0.0;  // deg
  bool fire_gun = false;
  bool fire_missile = false;
};

struct AircraftState {
  Vec3 position = Vec3::Zero();
  Quat attitude = Quat::Identity();
  double speed = 50.0;
  double bank = 0.0;   // deg
  double pitch = 0.0;  // deg
  double yaw = 0.0;    // deg

  Vec3 nose() const { return attitude * Vec3::UnitX(); }
};

AircraftState initial_aircraft(const FlightConfig& cfg);

struct Target {
  int id = 0;
  Vec3 position = Vec3::Zero();
  double radius = 5.0;
  bool alive = true;
};

struct Missile {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double ttl_s = 10.0;
  double proximity_radius = 10.0;
};

enum class GameEventKind { GunFired, MissileLaunched, TargetDestroyed, MissileExpired };

struct GameEvent {
  GameEventKind kind;
  std::uint32_t t_ms = 0;
  std::optional<int> target_id;

  bool operator==(const GameEvent&) const = default;
};

std::string_view to_string(GameEventKind k);

struct GestureHolds {
  bool thumb = false;
  bool fist = false;
};

/// Hand distance sets throttle, hand roll and pitch set bank and pitch,
/// held gestures set the fire flags (thumb -> gun, fist -> missile).
ControlInput map_controls(const tracking::FusedPose& pose, GestureHolds holds, const FlightConfig& cfg);

/// Integrates the aircraft over dt in (0, 0.1] s.
AircraftState step_aircraft(const AircraftState& s, const ControlInput& u, double dt, const FlightConfig& cfg);

/// Angular half-width of the gun cone against a target at `range`.
double gun_acceptance_deg(double radius, double range, const FlightConfig& cfg);

/// Hitscan along the nose. Returns the id of the nearest alive target inside
/// the cone and range, if any. Does not modify targets.
std::optional<int> gun_hit(const AircraftState& s, const std::vector<Target>& targets, const FlightConfig& cfg);

Missile launch_missile(const AircraftState& s, int id, const FlightConfig& cfg);

/// Earliest fraction s in [0, 1] of the segment a->b that lies within
/// `radius` of `center`, or nullopt if the segment never comes that close.
std::optional<double> segment_entry(const Vec3& a, const Vec3& b, const Vec3& center, double radius);

/// Moves every missile one step. A missile detonates on the alive target its
/// swept segment reaches first (ties go to the lower id), killing it. Missiles
/// whose ttl runs out are removed with MissileExpired.
std::vector<GameEvent> step_missiles(std::vector<Missile>& missiles, std::vector<Target>& targets, double dt,
                                     std::uint32_t t_ms);

/// Vibration feedback for game events: a short index-finger buzz per gun
/// burst, a strong all-finger buzz on missile launch, a double pulse on a
/// kill. Expired missiles produce nothing.
std::vector<haptics::HapticPattern> events_to_haptics(const std::vector<GameEvent>& events);

/// Game state stepped at the fixed simulation rate.
class World {
 public:
  explicit World(std::vector<Target> targets, FlightConfig cfg = {});

  /// One fixed step: aircraft, then missiles in flight, then weapons.
  std::vector<GameEvent> step(const ControlInput& u, double dt, std::uint32_t t_ms);

  const AircraftState& aircraft() const { return aircraft_; }
  const std::vector<Target>& targets() const { return targets_; }
  const std::vector<Missile>& missiles() const { return missiles_; }
  const FlightConfig& config() const { return cfg_; }

  void reset();

 private:
  FlightConfig cfg_;
  std::vector<Target> initial_targets_;
  std::vector<Target> targets_;
  std::vector<Missile> missiles_;
  AircraftState aircraft_;
  double gun_ready_in_s_ = 0.0;
  double missile_ready_in_s_ = 0.0;
  int next_missile_id_ = 1;
};

}  // namespace glove::flight
