#pragma once

#include "dbench/dynamics.hpp"
#include "dbench/map.hpp"
#include "dbench/sensors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dbench {

// ---------------------------------------------------------------------------
// Longitudinal and lateral control primitives

struct IdmParams {
  double time_headway = 1.5;
  double min_gap = 2.0;
  double max_accel = 1.5;
  double comfortable_decel = 2.0;
  double exponent = 4.0;
};

/// Bumper-to-bumper gap and along-path speed of whatever the ego must not hit.
struct Leader {
  double gap = 0;
  double speed = 0;
  std::optional<ActorId> id;
};

/// Intelligent Driver Model acceleration toward desired speed `v0`.
double idm_acceleration(const IdmParams& p, double v, double v0, const std::optional<Leader>& leader);

/// Gap at which a follower at speed `v` behind an equal-speed leader has zero acceleration.
double idm_equilibrium_gap(const IdmParams& p, double v, double v0);

/// Splits an acceleration into throttle or brake; never both.
Continuous accel_to_controls(double accel, const DynamicsLimits& limits);

/// Pure-pursuit steering command in [-1, 1] toward the waypoint `lookahead`
/// meters ahead along the list.
double pure_pursuit_steering(const VehicleState& ego, const std::vector<Waypoint>& waypoints,
                             double lookahead, const DynamicsLimits& limits);

/// Highest speed from which the ego can slow to every curve-limited speed
/// ahead at `decel`, with lateral acceleration capped at `lat_accel`.
double curve_speed_limit(const std::vector<Waypoint>& waypoints, double lat_accel, double decel);

struct LeaderSearch {
  bool predict_conflicts = true;
  bool stop_at_path_end = false;
  bool obey_signals = true;
  double corridor_margin = 0.4;
  double min_gap = 2.0;
  double comfortable_decel = 2.0;
};

/// Nearest obstacle along the waypoint corridor: neighbors inside it now or
/// predicted to enter it within 1 s or 2 s, red signals as stopped leaders,
/// and optionally the end of the path.
std::optional<Leader> find_leader(const Observation& obs, const LeaderSearch& search);

// ---------------------------------------------------------------------------
// Reactive social driver

struct ReactiveParams {
  IdmParams idm;
  std::optional<double> desired_speed;  // lane limit when unset
  double lookahead_min = 6.0;
  double lookahead_gain = 1.0;  // seconds
  double curve_lat_accel = 2.5;
  bool stop_at_path_end = false;
};

/// IDM toward the nearest leader plus pure-pursuit steering on the waypoints.
Continuous reactive_action(const Observation& obs, const ReactiveParams& params,
                           const DynamicsLimits& limits);

/// Sensor settings for scripted and reactive traffic: kinematic neighbors only.
SensorConfig kinematic_sensor();

/// Drives a route with reactive_action, tracking the path projection hint.
class ReactiveDriver {
 public:
  ReactiveDriver(const RoadNetwork& net, const Route& route, ReactiveParams params,
                 DynamicsLimits limits);

  Continuous act(const Scene& scene, const ActorId& self, double time);
  /// True once the actor's front is about to leave the path.
  bool finished() const { return finished_; }
  const RoutePath& path() const { return path_; }

 private:
  const RoadNetwork* net_;
  Route route_;
  RoutePath path_;
  ReactiveParams params_;
  DynamicsLimits limits_;
  double hint_ = -1;
  bool finished_ = false;
};

// ---------------------------------------------------------------------------
// Replay

enum class Interpolation { hold, linear };

std::string to_string(Interpolation m);
Interpolation interpolation_from_string(const std::string& s);

struct ReplayKeyframe {
  std::int64_t step = 0;
  Pose pose;
  double speed = 0;
};

struct ReplayTrack {
  ActorId id;
  std::vector<ReplayKeyframe> keyframes;
  Interpolation mode = Interpolation::linear;
};

/// Throws ValidationError unless keyframes exist with strictly increasing steps.
void validate(const ReplayTrack& track);

/// Pose at `step`, holding the end keyframes outside the track span.
Pose replay_pose(const ReplayTrack& track, std::int64_t step);
TargetPose replay_action(const ReplayTrack& track, std::int64_t step);

// ---------------------------------------------------------------------------
// Scripted lead vehicle

enum class LeadBehavior { cruise, merge, exit, turn, stop };
enum class TriggerKind { station, step };

std::string to_string(LeadBehavior b);
LeadBehavior lead_behavior_from_string(const std::string& s);

struct LeadSegment {
  LeadBehavior behavior = LeadBehavior::cruise;
  double speed = 0;      // cruise
  LaneId lane;           // merge target, exit ramp, or junction connection
  double duration = 0;   // stop, seconds
  TriggerKind trigger = TriggerKind::step;
  double at = 0;         // odometer meters or step index
};

struct LeadScript {
  std::vector<LaneId> route;  // lanes driven when no segment redirects
  std::vector<LeadSegment> segments;
};

/// Throws ValidationError for decreasing triggers or unknown lanes.
void validate(const LeadScript& script, const RoadNetwork& net);

/// Executes a lead script. Station triggers use the distance driven so far.
class LeadController {
 public:
  LeadController(const RoadNetwork& net, LeadScript script, ReactiveParams params,
                 DynamicsLimits limits);

  Continuous act(const Scene& scene, const ActorId& self, std::int64_t step, double time,
                 double dt);

  const RoutePath& path() const { return path_; }
  /// Number of segments activated so far.
  std::size_t activated() const { return next_; }
  double odometer() const { return odometer_; }
  bool holding_stop() const { return stopping_ && stopped_; }

 private:
  void activate(const LeadSegment& seg, const Vec2& position);
  bool reroute(std::vector<LaneId> lanes, const Vec2& position);
  std::vector<LaneId> continuation(const LaneId& from) const;
  std::size_t current_lane(const Vec2& position);

  const RoadNetwork* net_;
  LeadScript script_;
  ReactiveParams params_;
  DynamicsLimits limits_;
  RoutePath path_;
  double hint_ = -1;
  std::size_t next_ = 0;
  double odometer_ = 0;
  std::optional<Vec2> last_position_;
  double cruise_speed_ = 0;
  bool stopping_ = false;
  bool stopped_ = false;
  double stop_duration_ = 0;
  double held_ = 0;
};

}  // namespace dbench
