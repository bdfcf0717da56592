#include "dbench/policies.hpp"

#include "dbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dbench {

using nlohmann::json;

json to_json(const Action& a) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RelativeTargetPose>)
          return {{"space", "relative_target_pose"}, {"dx", v.dx}, {"dy", v.dy}, {"dheading", v.dheading}};
        else if constexpr (std::is_same_v<T, TargetPose>)
          return {{"space", "target_pose"}, {"x", v.x}, {"y", v.y}, {"heading", v.heading}};
        else
          return {{"space", "continuous"},
                  {"throttle", v.throttle},
                  {"brake", v.brake},
                  {"steering", v.steering}};
      },
      a);
}

Action action_from_json(const json& j) {
  try {
    const std::string space = j.at("space").get<std::string>();
    if (space == "relative_target_pose")
      return RelativeTargetPose{j.at("dx").get<double>(), j.at("dy").get<double>(),
                                j.at("dheading").get<double>()};
    if (space == "target_pose")
      return TargetPose{j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>()};
    if (space == "continuous")
      return Continuous{j.at("throttle").get<double>(), j.at("brake").get<double>(),
                        j.at("steering").get<double>()};
    throw ParseError("unknown action space '" + space + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("action: ") + e.what());
  }
}

void Policy::reset(const Scenario& scenario) {
  limits_ = scenario.limits;
  dt_ = scenario.dt;
}

Action convert_action(const Continuous& c, const VehicleState& ego, ActionSpace space,
                      const DynamicsLimits& limits, double dt) {
  if (space == ActionSpace::continuous) return c;
  const VehicleState next = step_continuous(ego, c, limits, dt);
  // Pose actions realize speed as displacement over dt: keep the chord
  // direction, with the end-of-step speed as its length.
  const Vec2 chord = next.position - ego.position;
  const Vec2 dir = chord.norm() > 0 ? Vec2(chord.normalized()) : heading_vector(next.heading);
  const Vec2 disp = dir * (next.speed * dt);
  const TargetPose target{ego.position.x() + disp.x(), ego.position.y() + disp.y(), next.heading};
  if (space == ActionSpace::target_pose) return target;
  return to_relative(ego, target);
}

namespace {

// No motion: zero displacement, the current pose, or full brake.
Action hold(const VehicleState& ego, ActionSpace space) {
  switch (space) {
    case ActionSpace::relative_target_pose: return RelativeTargetPose{};
    case ActionSpace::target_pose: return TargetPose{ego.position.x(), ego.position.y(), ego.heading};
    default: return Continuous{0, 1, 0};
  }
}

}  // namespace

Action WaypointFollower::act(const Observation& obs) {
  if ((obs.ego.position - obs.goal).norm() <= obs.arrival_radius) return hold(obs.ego, space_);
  return convert_action(reactive_action(obs, ReactiveParams{}, limits_), obs.ego, space_, limits_, dt_);
}

void LeadFollower::reset(const Scenario& scenario) {
  Policy::reset(scenario);
  memory_.clear();
}

Action LeadFollower::act(const Observation& obs) {
  Memory& m = memory_[obs.ego_id];
  const VehicleState& ego = obs.ego;
  std::optional<VehicleState> lead;
  if (obs.follow_target)
    for (const auto& n : obs.neighbors)
      if (n.id == *obs.follow_target) lead = n.state;
  if (lead) {
    m.last_seen = lead;
    if (m.trail.empty() || (m.trail.back() - lead->position).norm() >= 0.5)
      m.trail.push_back(lead->position);
  }
  const Vec2 h = heading_vector(ego.heading);
  while (!m.trail.empty() && (m.trail.front() - ego.position).dot(h) < 1.0) m.trail.pop_front();

  if (!m.last_seen) return hold(ego, space_);

  const double limit = obs.lane.speed_limit > 0 ? obs.lane.speed_limit : limits_.max_speed;
  std::vector<Vec2> pts{ego.position};
  for (const auto& p : m.trail) pts.push_back(p);
  if ((m.last_seen->position - pts.back()).norm() >= 0.5) pts.push_back(m.last_seen->position);
  Observation o = obs;
  o.waypoints.clear();
  double station = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) station += (pts[i] - pts[i - 1]).norm();
    Waypoint w;
    w.pose.position = pts[i];
    w.pose.heading = i + 1 < pts.size()
                         ? std::atan2(pts[i + 1].y() - pts[i].y(), pts[i + 1].x() - pts[i].x())
                         : m.last_seen->heading;
    if (i == 0) w.pose.heading = ego.heading;
    w.speed_limit = limit;
    w.station = station;
    o.waypoints.push_back(w);
  }

  // Gap to the lead along the trail.
  Leader leader;
  leader.gap = std::max(station - (ego.length + m.last_seen->length) / 2, 0.01);
  leader.speed = lead ? lead->speed : m.last_seen->speed;
  leader.id = obs.follow_target;
  LeaderSearch search;
  search.min_gap = idm.min_gap;
  search.comfortable_decel = idm.comfortable_decel;
  if (auto other = find_leader(o, search); other && other->gap < leader.gap) leader = *other;

  const double v0 = std::min({limit, limits_.max_speed,
                              curve_speed_limit(o.waypoints, 2.5, idm.comfortable_decel)});
  Continuous c = accel_to_controls(idm_acceleration(idm, ego.speed, std::max(v0, 0.1), leader), limits_);
  c.steering = pure_pursuit_steering(ego, o.waypoints, std::max(6.0, ego.speed), limits_);
  return convert_action(c, ego, space_, limits_, dt_);
}

Action ZeroPolicy::act(const Observation& obs) {
  switch (space_) {
    case ActionSpace::relative_target_pose: return RelativeTargetPose{};
    case ActionSpace::target_pose:
      return TargetPose{obs.ego.position.x(), obs.ego.position.y(), obs.ego.heading};
    default: return Continuous{};
  }
}

PolicySpec parse_policy_spec(const std::string& spec) {
  PolicySpec out;
  const auto colon = spec.find(':');
  out.name = spec.substr(0, colon);
  if (out.name.empty()) throw UsageError("empty policy name");
  if (colon != std::string::npos) {
    try {
      out.space = action_space_from_string(spec.substr(colon + 1));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("policy '") + spec + "': " + e.what());
    }
  }
  return out;
}

std::unique_ptr<Policy> make_builtin_policy(const std::string& spec) {
  const auto p = parse_policy_spec(spec);
  if (p.name == "waypoint_follower")
    return std::make_unique<WaypointFollower>(p.space.value_or(ActionSpace::relative_target_pose));
  if (p.name == "lead_follower")
    return std::make_unique<LeadFollower>(p.space.value_or(ActionSpace::continuous));
  if (p.name == "zero")
    return std::make_unique<ZeroPolicy>(p.space.value_or(ActionSpace::relative_target_pose));
  throw UsageError("unknown policy '" + p.name + "' (builtins: waypoint_follower, lead_follower, zero)");
}

}  // namespace dbench
