#include "dbench/agents.hpp"

#include "dbench/errors.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

namespace dbench {

double idm_acceleration(const IdmParams& p, double v, double v0, const std::optional<Leader>& leader) {
  v = std::max(v, 0.0);
  const double free = v0 > 0 ? 1.0 - std::pow(v / v0, p.exponent) : -1.0;
  double interaction = 0;
  if (leader) {
    const double dv = v - leader->speed;
    const double s_star =
        p.min_gap + std::max(0.0, v * p.time_headway +
                                      v * dv / (2 * std::sqrt(p.max_accel * p.comfortable_decel)));
    const double s = std::max(leader->gap, 0.01);
    interaction = (s_star / s) * (s_star / s);
  }
  return p.max_accel * (free - interaction);
}

double idm_equilibrium_gap(const IdmParams& p, double v, double v0) {
  const double s_star = p.min_gap + v * p.time_headway;
  return s_star / std::sqrt(1.0 - std::pow(v / v0, p.exponent));
}

Continuous accel_to_controls(double accel, const DynamicsLimits& limits) {
  Continuous c;
  if (accel > 0)
    c.throttle = std::min(accel / limits.max_accel, 1.0);
  else if (accel < 0)
    c.brake = std::min(-accel / limits.max_decel, 1.0);
  return c;
}

double pure_pursuit_steering(const VehicleState& ego, const std::vector<Waypoint>& waypoints,
                             double lookahead, const DynamicsLimits& limits) {
  if (waypoints.empty()) return 0.0;
  const double s0 = waypoints.front().station;
  const Waypoint* target = &waypoints.back();
  for (const auto& w : waypoints)
    if (w.station - s0 >= lookahead) {
      target = &w;
      break;
    }
  Vec2 aim = target->pose.position;
  Vec2 rel = aim - ego.position;
  if (rel.norm() < 1.0) {
    // Path end is under the vehicle; hold the path heading instead.
    aim = target->pose.position + heading_vector(target->pose.heading) * lookahead;
    rel = aim - ego.position;
  }
  const double dist = rel.norm();
  const double alpha = normalize_angle(std::atan2(rel.y(), rel.x()) - ego.heading);
  const double curvature = 2 * std::sin(alpha) / dist;
  const double delta = std::atan(curvature * limits.wheelbase);
  return std::clamp(delta / limits.max_steer_angle, -1.0, 1.0);
}

double curve_speed_limit(const std::vector<Waypoint>& wps, double lat_accel, double decel) {
  double limit = std::numeric_limits<double>::infinity();
  if (wps.size() < 3) return limit;
  const double s0 = wps.front().station;
  for (std::size_t k = 1; k + 1 < wps.size(); ++k) {
    const double ds = wps[k + 1].station - wps[k - 1].station;
    if (ds < 1e-6) continue;
    const double dh = std::abs(normalize_angle(wps[k + 1].pose.heading - wps[k - 1].pose.heading));
    if (dh < 1e-9) continue;
    const double v_curve = std::sqrt(lat_accel * ds / dh);
    const double d = std::max(0.0, wps[k].station - s0);
    limit = std::min(limit, std::sqrt(v_curve * v_curve + 2 * decel * d));
  }
  return limit;
}

namespace {

Polyline corridor_line(const Observation& obs) {
  std::vector<Vec2> pts;
  pts.push_back(obs.ego.position);
  for (const auto& w : obs.waypoints)
    if ((w.pose.position - pts.back()).norm() > 1e-6) pts.push_back(w.pose.position);
  if (pts.size() < 2) pts.push_back(obs.ego.position + heading_vector(obs.ego.heading) * 50.0);
  return Polyline(std::move(pts));
}

// Smallest corridor station reached by the box, if any part of it lies inside.
std::optional<double> corridor_hit(const Polyline& line, const Box& box, double half_width) {
  std::optional<double> best;
  const auto c = box.corners();
  const std::array<Vec2, 5> pts = {c[0], c[1], c[2], c[3], box.center};
  for (const auto& p : pts) {
    const auto proj = line.project(p);
    if (proj.station <= 1e-6 || proj.distance > half_width) continue;
    if (!best || proj.station < *best) best = proj.station;
  }
  return best;
}

}  // namespace

std::optional<Leader> find_leader(const Observation& obs, const LeaderSearch& search) {
  const VehicleState& ego = obs.ego;
  const Polyline line = corridor_line(obs);
  const double half_width = ego.width / 2 + search.corridor_margin;
  const double front = ego.length / 2;
  const Vec2 fwd = heading_vector(ego.heading);
  std::optional<Leader> best;
  const auto offer = [&](double gap, double speed, std::optional<ActorId> id) {
    if (!best || gap < best->gap) best = Leader{gap, speed, std::move(id)};
  };

  for (const auto& n : obs.neighbors) {
    if ((n.state.position - ego.position).dot(fwd) < 0) continue;
    const Box box = footprint(n.state);
    if (const auto s = corridor_hit(line, box, half_width)) {
      const double path_heading = line.heading_at(*s);
      const double along = std::max(0.0, n.state.speed * std::cos(n.state.heading - path_heading));
      offer(*s - front, along, n.id);
      continue;
    }
    if (!search.predict_conflicts || n.state.speed < 0.5) continue;
    for (const double tau : {1.0, 2.0}) {
      Box future = box;
      future.center += n.state.velocity() * tau;
      const auto s = corridor_hit(line, future, half_width);
      if (!s) continue;
      const double gap = *s - front;
      if (gap <= ego.speed * tau + search.min_gap + ego.length) {
        offer(gap, 0.0, n.id);
        break;
      }
    }
  }

  if (search.obey_signals) {
    for (const auto& sig : obs.signals) {
      if (!sig.route_distance || sig.state == SignalState::green) continue;
      const double dist = *sig.route_distance;
      if (dist < front) continue;  // already committed to the junction
      const double gap = dist - front - 1.0;
      if (sig.state == SignalState::yellow &&
          gap < ego.speed * ego.speed / (2 * search.comfortable_decel))
        continue;  // cannot stop comfortably; clear the junction
      offer(gap, 0.0, std::nullopt);
    }
  }

  if (search.stop_at_path_end && !obs.waypoints.empty())
    offer(obs.route_remaining - front, 0.0, std::nullopt);
  return best;
}

Continuous reactive_action(const Observation& obs, const ReactiveParams& params,
                           const DynamicsLimits& limits) {
  const double lane_limit =
      obs.waypoints.empty() ? obs.lane.speed_limit : obs.waypoints.front().speed_limit;
  double v0 = params.desired_speed.value_or(lane_limit);
  v0 = std::min({v0, limits.max_speed,
                 curve_speed_limit(obs.waypoints, params.curve_lat_accel,
                                   params.idm.comfortable_decel)});
  LeaderSearch search;
  search.stop_at_path_end = params.stop_at_path_end;
  search.min_gap = params.idm.min_gap;
  search.comfortable_decel = params.idm.comfortable_decel;
  const auto leader = find_leader(obs, search);
  const double accel = idm_acceleration(params.idm, obs.ego.speed, std::max(v0, 0.1), leader);
  Continuous c = accel_to_controls(accel, limits);
  const double lookahead = std::max(params.lookahead_min, params.lookahead_gain * obs.ego.speed);
  c.steering = pure_pursuit_steering(obs.ego, obs.waypoints, lookahead, limits);
  return c;
}

SensorConfig kinematic_sensor() {
  SensorConfig c;
  c.range = 60.0;
  c.occlusion = false;
  return c;
}

ReactiveDriver::ReactiveDriver(const RoadNetwork& net, const Route& route, ReactiveParams params,
                               DynamicsLimits limits)
    : net_(&net), route_(route), path_(net, route), params_(params), limits_(limits) {}

Continuous ReactiveDriver::act(const Scene& scene, const ActorId& self, double time) {
  RouteContext ctx;
  ctx.path = &path_;
  ctx.goal = route_.goal;
  ctx.arrival_radius = route_.arrival_radius;
  ctx.hint = hint_;
  const Observation obs = observe(scene, self, *net_, ctx, time, kinematic_sensor());
  if (!obs.waypoints.empty()) hint_ = obs.route_station;
  finished_ = !obs.waypoints.empty() && obs.route_remaining < obs.ego.length / 2 + 0.5;
  return reactive_action(obs, params_, limits_);
}

// ---------------------------------------------------------------------------

std::string to_string(Interpolation m) { return m == Interpolation::hold ? "hold" : "linear"; }

Interpolation interpolation_from_string(const std::string& s) {
  if (s == "hold") return Interpolation::hold;
  if (s == "linear") return Interpolation::linear;
  throw ParseError("unknown interpolation '" + s + "'");
}

void validate(const ReplayTrack& track) {
  if (track.keyframes.empty())
    throw ValidationError("replay track '" + track.id + "' has no keyframes");
  for (std::size_t i = 1; i < track.keyframes.size(); ++i)
    if (track.keyframes[i].step <= track.keyframes[i - 1].step)
      throw ValidationError("replay track '" + track.id + "' keyframe steps must strictly increase");
}

Pose replay_pose(const ReplayTrack& track, std::int64_t step) {
  const auto& k = track.keyframes;
  if (step <= k.front().step) return k.front().pose;
  if (step >= k.back().step) return k.back().pose;
  const auto it = std::upper_bound(k.begin(), k.end(), step,
                                   [](std::int64_t s, const ReplayKeyframe& f) { return s < f.step; });
  const ReplayKeyframe& b = *it;
  const ReplayKeyframe& a = *(it - 1);
  if (step == a.step || track.mode == Interpolation::hold) return a.pose;
  const double t = double(step - a.step) / double(b.step - a.step);
  Pose p;
  p.position = a.pose.position + t * (b.pose.position - a.pose.position);
  p.heading = normalize_angle(a.pose.heading + t * normalize_angle(b.pose.heading - a.pose.heading));
  return p;
}

TargetPose replay_action(const ReplayTrack& track, std::int64_t step) {
  const Pose p = replay_pose(track, step);
  return {p.position.x(), p.position.y(), p.heading};
}

// ---------------------------------------------------------------------------

std::string to_string(LeadBehavior b) {
  switch (b) {
    case LeadBehavior::cruise: return "cruise";
    case LeadBehavior::merge: return "merge";
    case LeadBehavior::exit: return "exit";
    case LeadBehavior::turn: return "turn";
    case LeadBehavior::stop: return "stop";
  }
  return "cruise";
}

LeadBehavior lead_behavior_from_string(const std::string& s) {
  if (s == "cruise") return LeadBehavior::cruise;
  if (s == "merge") return LeadBehavior::merge;
  if (s == "exit") return LeadBehavior::exit;
  if (s == "turn") return LeadBehavior::turn;
  if (s == "stop") return LeadBehavior::stop;
  throw ParseError("unknown lead behavior '" + s + "'");
}

void validate(const LeadScript& script, const RoadNetwork& net) {
  if (script.route.empty()) throw ValidationError("lead script has no route");
  for (const auto& id : script.route)
    if (!net.has_lane(id)) throw ValidationError("lead route references missing lane '" + id + "'");
  double last_station = 0, last_step = 0;
  for (std::size_t i = 0; i < script.segments.size(); ++i) {
    const auto& seg = script.segments[i];
    const std::string where = "lead segment " + std::to_string(i);
    double& last = seg.trigger == TriggerKind::station ? last_station : last_step;
    if (seg.at < last) throw ValidationError(where + ": triggers must be non-decreasing");
    last = seg.at;
    switch (seg.behavior) {
      case LeadBehavior::cruise:
        if (!(seg.speed >= 0)) throw ValidationError(where + ": cruise speed must be non-negative");
        break;
      case LeadBehavior::stop:
        if (!(seg.duration > 0)) throw ValidationError(where + ": stop duration must be positive");
        break;
      default:
        if (!net.has_lane(seg.lane))
          throw ValidationError(where + " references missing lane '" + seg.lane + "'");
    }
  }
}

LeadController::LeadController(const RoadNetwork& net, LeadScript script, ReactiveParams params,
                               DynamicsLimits limits)
    : net_(&net), script_(std::move(script)), params_(params), limits_(limits) {
  validate(script_, net);
  params_.stop_at_path_end = true;
  Route r;
  r.lanes = script_.route;
  r.goal = net.lane(r.lanes.back()).centerline.points().back();
  path_ = RoutePath(net, r);
  cruise_speed_ = params_.desired_speed.value_or(net.lane(r.lanes.front()).speed_limit);
}

std::size_t LeadController::current_lane(const Vec2& position) {
  const auto proj = hint_ >= 0 ? path_.project_near(position, hint_) : path_.project(position);
  return path_.segment_lane(proj.segment);
}

std::vector<LaneId> LeadController::continuation(const LaneId& from) const {
  const std::set<LaneId> preferred(script_.route.begin(), script_.route.end());
  std::vector<LaneId> chain;
  std::set<LaneId> seen{from};
  LaneId cur = from;
  for (int k = 0; k < 32; ++k) {
    const auto& succ = net_->lane(cur).successors;
    if (succ.empty()) break;
    std::optional<LaneId> pick;
    for (const auto& s : succ)
      if (preferred.count(s) && (!pick || s < *pick)) pick = s;
    if (!pick) {
      // Straightest successor, by the turn between the lanes' end headings.
      const auto& line = net_->lane(cur).centerline;
      const double h = line.heading_at(line.length());
      double best = 0;
      for (const auto& s : succ) {
        const auto& sl = net_->lane(s).centerline;
        const double turn = std::abs(normalize_angle(sl.heading_at(sl.length()) - h));
        if (!pick || turn < best - 1e-9 || (std::abs(turn - best) <= 1e-9 && s < *pick)) {
          pick = s;
          best = turn;
        }
      }
    }
    if (!seen.insert(*pick).second) break;
    chain.push_back(*pick);
    cur = *pick;
  }
  return chain;
}

bool LeadController::reroute(std::vector<LaneId> lanes, const Vec2& position) {
  const Lane& first = net_->lane(lanes.front());
  const auto tail = continuation(lanes.back());
  lanes.insert(lanes.end(), tail.begin(), tail.end());
  Route r;
  r.lanes = std::move(lanes);
  r.goal = net_->lane(r.lanes.back()).centerline.points().back();
  r.start_station = std::min(first.centerline.project(position).station, first.length() - 1e-3);
  try {
    path_ = RoutePath(*net_, r);
  } catch (const ValidationError&) {
    return false;
  }
  hint_ = 0;
  return true;
}

void LeadController::activate(const LeadSegment& seg, const Vec2& position) {
  switch (seg.behavior) {
    case LeadBehavior::cruise:
      cruise_speed_ = seg.speed;
      stopping_ = false;
      break;
    case LeadBehavior::stop:
      stopping_ = true;
      stopped_ = false;
      stop_duration_ = seg.duration;
      held_ = 0;
      break;
    case LeadBehavior::merge: {
      const Lane& cur = net_->lanes()[current_lane(position)];
      if (cur.left == seg.lane || cur.right == seg.lane) reroute({cur.id, seg.lane}, position);
      break;
    }
    case LeadBehavior::exit:
    case LeadBehavior::turn: {
      // Breadth-first search over successors to the requested lane.
      const LaneId start = net_->lanes()[current_lane(position)].id;
      std::map<LaneId, LaneId> parent;
      std::deque<LaneId> queue{start};
      parent[start] = start;
      while (!queue.empty() && !parent.count(seg.lane)) {
        const LaneId l = queue.front();
        queue.pop_front();
        auto succ = net_->lane(l).successors;
        std::sort(succ.begin(), succ.end());
        for (const auto& s : succ)
          if (parent.emplace(s, l).second) queue.push_back(s);
      }
      if (!parent.count(seg.lane)) break;
      std::vector<LaneId> lanes{seg.lane};
      while (lanes.back() != start) lanes.push_back(parent[lanes.back()]);
      std::reverse(lanes.begin(), lanes.end());
      reroute(std::move(lanes), position);
      break;
    }
  }
}

Continuous LeadController::act(const Scene& scene, const ActorId& self, std::int64_t step,
                               double time, double dt) {
  const SceneActor* me = scene.find(self);
  if (!me) throw UnknownActorError("no actor '" + self + "'");
  const VehicleState& s = me->state;
  if (last_position_) odometer_ += (s.position - *last_position_).norm();
  last_position_ = s.position;

  while (next_ < script_.segments.size()) {
    const auto& seg = script_.segments[next_];
    const double now = seg.trigger == TriggerKind::station ? odometer_ : double(step);
    if (seg.at > now) break;
    activate(seg, s.position);
    ++next_;
  }

  RouteContext ctx;
  ctx.path = &path_;
  ctx.goal = path_.line().points().back();
  ctx.hint = hint_;
  const Observation obs = observe(scene, self, *net_, ctx, time, kinematic_sensor());
  if (!obs.waypoints.empty()) hint_ = obs.route_station;
  const double lookahead = std::max(params_.lookahead_min, params_.lookahead_gain * s.speed);
  const double steering = pure_pursuit_steering(s, obs.waypoints, lookahead, limits_);

  if (stopping_) {
    if (!stopped_ && s.speed < 0.1) stopped_ = true;
    Continuous c;
    c.steering = steering;
    if (stopped_) {
      c.brake = 1.0;
      held_ += dt;
      if (held_ >= stop_duration_) stopping_ = stopped_ = false;
    } else {
      c.brake = std::min(3.0 / limits_.max_decel, 1.0);
    }
    return c;
  }

  ReactiveParams p = params_;
  p.desired_speed = cruise_speed_;
  return reactive_action(obs, p, limits_);
}

}  // namespace dbench
