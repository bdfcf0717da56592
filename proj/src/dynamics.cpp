#include "dbench/dynamics.hpp"

#include <stdexcept>
#include <string>

namespace dbench {

ActionSpace action_space_of(const Action& a) {
  switch (a.index()) {
    case 0: return ActionSpace::relative_target_pose;
    case 1: return ActionSpace::target_pose;
    default: return ActionSpace::continuous;
  }
}

const char* to_string(ActionSpace s) {
  switch (s) {
    case ActionSpace::relative_target_pose: return "relative_target_pose";
    case ActionSpace::target_pose: return "target_pose";
    case ActionSpace::continuous: return "continuous";
  }
  return "continuous";
}

ActionSpace action_space_from_string(const std::string& s) {
  if (s == "relative_target_pose") return ActionSpace::relative_target_pose;
  if (s == "target_pose") return ActionSpace::target_pose;
  if (s == "continuous") return ActionSpace::continuous;
  throw std::invalid_argument("unknown action space '" + s + "'");
}

void validate(const DynamicsLimits& l) {
  if (!(l.max_speed > 0 && l.max_accel > 0 && l.max_decel > 0 && l.max_steer_angle > 0 &&
        l.wheelbase > 0))
    throw std::invalid_argument("dynamics limits must all be strictly positive");
}

namespace {

void check_dt(double dt) {
  if (!(dt > 0 && dt <= 0.5)) throw std::invalid_argument("dt must lie in (0, 0.5]");
}

// Fills speed, acceleration and jerk of `next` by first differences against `prev`.
VehicleState finish(const VehicleState& prev, const Vec2& position, double heading, double speed,
                    double dt) {
  VehicleState next = prev;
  next.position = position;
  next.heading = normalize_angle(heading);
  next.speed = speed;
  next.step = prev.step + 1;

  const Vec2 v_old = prev.velocity();
  const Vec2 v_new = next.velocity();
  const Vec2 a_old = rotation(prev.heading) * prev.acceleration;
  const Vec2 a_new = (v_new - v_old) / dt;
  const Vec2 j_new = (a_new - a_old) / dt;
  const Rot2T<double> to_body = rotation(next.heading).transpose();
  next.acceleration = to_body * a_new;
  next.jerk = to_body * j_new;
  return next;
}

}  // namespace

VehicleState step_continuous(const VehicleState& state, const Continuous& action,
                             const DynamicsLimits& limits, double dt) {
  check_dt(dt);
  const double throttle = std::clamp(action.throttle, 0.0, 1.0);
  const double brake = std::clamp(action.brake, 0.0, 1.0);
  const double steering = std::clamp(action.steering, -1.0, 1.0);

  const double v0 = std::clamp(state.speed, 0.0, limits.max_speed);
  const double accel = throttle * limits.max_accel - brake * limits.max_decel;
  const double v1 = std::clamp(v0 + accel * dt, 0.0, limits.max_speed);
  const double v_mean = 0.5 * (v0 + v1);
  const double steer = steering * limits.max_steer_angle;
  const double yaw_rate = v_mean * std::tan(steer) / limits.wheelbase;

  const double h0 = state.heading;
  const double h1 = h0 + yaw_rate * dt;
  Vec2 p = state.position;
  if (std::abs(yaw_rate * dt) < 1e-12) {
    p += v_mean * dt * heading_vector(h0);
  } else {
    const double r = v_mean / yaw_rate;
    p += r * Vec2(std::sin(h1) - std::sin(h0), std::cos(h0) - std::cos(h1));
  }
  return finish(state, p, h1, v1, dt);
}

RelativeTargetPose to_relative(const VehicleState& state, const TargetPose& target) {
  const Vec2 d = rotation(state.heading).transpose() * (Vec2(target.x, target.y) - state.position);
  return {d.x(), d.y(), normalize_angle(target.heading - state.heading)};
}

VehicleState step_pose(const VehicleState& state, const RelativeTargetPose& action,
                       const DynamicsLimits& limits, double dt) {
  check_dt(dt);
  Vec2 disp(std::max(action.dx, 0.0), action.dy);
  const double cap = limits.max_speed * dt;
  const double mag = disp.norm();
  if (mag > cap) disp *= cap / mag;
  const double moved = disp.norm();
  const double max_turn = moved * std::tan(limits.max_steer_angle) / limits.wheelbase;
  const double turn = std::clamp(normalize_angle(action.dheading), -max_turn, max_turn);
  const Vec2 world = rotation(state.heading) * disp;
  return finish(state, state.position + world, state.heading + turn, moved / dt, dt);
}

VehicleState step_pose(const VehicleState& state, const TargetPose& action,
                       const DynamicsLimits& limits, double dt) {
  return step_pose(state, to_relative(state, action), limits, dt);
}

VehicleState step_action(const VehicleState& state, const Action& action,
                         const DynamicsLimits& limits, double dt) {
  return std::visit(
      [&](const auto& a) -> VehicleState {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Continuous>)
          return step_continuous(state, a, limits, dt);
        else
          return step_pose(state, a, limits, dt);
      },
      action);
}

VehicleState teleport(const VehicleState& state, const Pose& pose, double dt) {
  check_dt(dt);
  const double speed = (pose.position - state.position).norm() / dt;
  VehicleState next = finish(state, pose.position, pose.heading, speed, dt);
  next.position = pose.position;
  next.heading = normalize_angle(pose.heading);
  return next;
}

Box footprint(const VehicleState& state) {
  return Box{state.position, state.heading, state.length, state.width};
}

}  // namespace dbench
