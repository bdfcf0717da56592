#pragma once

#include "dbench/geometry.hpp"

#include <cstdint>
#include <variant>

namespace dbench {

/// Kinematic state of one actor. Acceleration and jerk are (longitudinal,
/// lateral) components in the vehicle frame.
struct VehicleState {
  Vec2 position = Vec2::Zero();
  double heading = 0;
  double speed = 0;
  Vec2 acceleration = Vec2::Zero();
  Vec2 jerk = Vec2::Zero();
  double length = 4.5;
  double width = 1.8;
  std::int64_t step = 0;

  Pose pose() const { return {position, heading}; }
  Vec2 velocity() const { return speed * heading_vector(heading); }
};

/// Displacement and heading change in the ego frame (x forward, y left).
struct RelativeTargetPose {
  double dx = 0;
  double dy = 0;
  double dheading = 0;
};

/// Desired pose in the world frame.
struct TargetPose {
  double x = 0;
  double y = 0;
  double heading = 0;
};

struct Continuous {
  double throttle = 0;  // [0, 1]
  double brake = 0;     // [0, 1]
  double steering = 0;  // [-1, 1], positive turns left
};

using Action = std::variant<RelativeTargetPose, TargetPose, Continuous>;

enum class ActionSpace { relative_target_pose, target_pose, continuous };

ActionSpace action_space_of(const Action& a);
const char* to_string(ActionSpace s);
ActionSpace action_space_from_string(const std::string& s);

struct DynamicsLimits {
  double max_speed = 22.0;
  double max_accel = 3.0;
  double max_decel = 6.0;
  double max_steer_angle = 0.5;
  double wheelbase = 2.8;
};

/// Throws std::invalid_argument unless every limit is strictly positive.
void validate(const DynamicsLimits& limits);

/// Kinematic bicycle update with arc-exact integration of the mean speed.
VehicleState step_continuous(const VehicleState& state, const Continuous& action,
                             const DynamicsLimits& limits, double dt);

/// Converts a world-frame target into the equivalent ego-frame request.
RelativeTargetPose to_relative(const VehicleState& state, const TargetPose& target);

/// Pose actions: displacement magnitude is capped at max_speed * dt, backward
/// motion is dropped, and the heading change is capped at the bicycle model's
/// yaw rate for the realized displacement.
VehicleState step_pose(const VehicleState& state, const RelativeTargetPose& action,
                       const DynamicsLimits& limits, double dt);
VehicleState step_pose(const VehicleState& state, const TargetPose& action,
                       const DynamicsLimits& limits, double dt);

/// Dispatches on the action variant.
VehicleState step_action(const VehicleState& state, const Action& action,
                         const DynamicsLimits& limits, double dt);

/// Places the state exactly at `pose` (kinematic playback); speed, acceleration
/// and jerk follow from finite differences.
VehicleState teleport(const VehicleState& state, const Pose& pose, double dt);

Box footprint(const VehicleState& state);

}  // namespace dbench
