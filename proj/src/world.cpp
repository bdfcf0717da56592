#include "dbench/world.hpp"

#include "dbench/errors.hpp"

#include <stdexcept>

namespace dbench {

std::map<ActorId, MissionOutcome> check_termination(
    const WorldState& state, const Scenario& scenario,
    const std::map<ActorId, MissionOutcome>& previous) {
  std::map<ActorId, MissionOutcome> out;
  for (const auto& m : scenario.missions) {
    const auto prev = previous.find(m.id);
    if (prev != previous.end() && prev->second.kind != OutcomeKind::running) {
      out[m.id] = prev->second;
      continue;
    }
    MissionOutcome o{OutcomeKind::running, state.step, ""};
    const auto it = state.actors.find(m.id);
    if (it == state.actors.end()) {
      out[m.id] = prev != previous.end() ? prev->second : o;
      continue;
    }
    const ActorSlot& slot = it->second;
    if (slot.frozen) {
      o.kind = OutcomeKind::terminated;
      o.reason = slot.frozen_reason;
    } else if ((slot.state.position - m.route.goal).norm() <= m.route.arrival_radius) {
      o.kind = OutcomeKind::goal_reached;
    } else if (state.step >= scenario.limit_steps()) {
      o.kind = OutcomeKind::timed_out;
    }
    out[m.id] = o;
  }
  return out;
}

bool wrong_way_flag(const RoadNetwork& net, const VehicleState& state) {
  const auto against = [&](const LaneQuery& q) {
    return std::abs(normalize_angle(state.heading - lane_heading(net, q))) > kPi / 2;
  };
  const auto here = lanes_at(net, state.position);
  if (here.empty()) return against(nearest_lane(net, state.position));
  for (const auto& q : here)
    if (!against(q)) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

VehicleState make_state(const Pose& pose, double speed, const VehicleSize& size) {
  VehicleState s;
  s.position = pose.position;
  s.heading = normalize_angle(pose.heading);
  s.speed = speed;
  s.length = size.length;
  s.width = size.width;
  return s;
}

VehicleState frozen_step(const VehicleState& s) {
  VehicleState n = s;
  n.speed = 0;
  n.acceleration = Vec2::Zero();
  n.jerk = Vec2::Zero();
  n.step = s.step + 1;
  return n;
}

}  // namespace

World::World(Scenario scenario)
    : scenario_(std::move(scenario)), bus_(scenario_.v2v, scenario_.seed) {
  validate(scenario_);
  const RoadNetwork& net = *scenario_.network;

  for (const auto& m : scenario_.missions) {
    MissionRuntime rt;
    rt.spec = &m;
    rt.path = RoutePath(net, m.route);
    missions_.emplace(m.id, std::move(rt));
    state_.actors[m.id] = {ActorRole::mission, make_state(m.start, m.speed, m.size), false, ""};
  }
  if (scenario_.lead) {
    const auto& l = *scenario_.lead;
    ReactiveParams params;
    lead_ = std::make_unique<LeadController>(net, l.script, params, scenario_.limits);
    state_.actors[l.id] = {ActorRole::lead, make_state(l.start, l.speed, l.size), false, ""};
  }
  for (const auto& s : scenario_.social) pending_.push_back(&s);
  std::stable_sort(pending_.begin(), pending_.end(), [](const SocialSpec* a, const SocialSpec* b) {
    return a->spawn_step != b->spawn_step ? a->spawn_step < b->spawn_step : a->id < b->id;
  });

  log_.scenario_id = scenario_.id;
  log_.family = scenario_.family;
  log_.dt = scenario_.dt;
  log_.time_limit = scenario_.time_limit;
  log_.seed = scenario_.seed;
  log_.map = net.to_json();
  for (const auto& m : scenario_.missions) {
    MissionInfo info{m.id, m.route.goal, m.route.arrival_radius, m.follow};
    if (!info.lead && scenario_.lead) info.lead = scenario_.lead->id;
    log_.missions.push_back(std::move(info));
  }

  spawn_due();
  for (const auto& sig : net.signals()) state_.signal_phases[sig.id] = sig.state_at(0.0);
  const auto events = evaluate();
  log_.events.insert(log_.events.end(), events.begin(), events.end());
  rebuild_scene();
  record_snapshot();
}

std::vector<ActorId> World::active_missions() const {
  std::vector<ActorId> out;
  for (const auto& [id, o] : outcomes_)
    if (o.kind == OutcomeKind::running) out.push_back(id);
  return out;
}

bool World::done() const {
  for (const auto& [id, o] : outcomes_)
    if (o.kind == OutcomeKind::running) return false;
  return true;
}

std::map<std::string, Vec2> World::positions() const {
  std::map<std::string, Vec2> out;
  for (const auto& [id, slot] : state_.actors) out.emplace(id, slot.state.position);
  return out;
}

bool World::spawn_blocked(const VehicleState& st) const {
  // Two meters clear behind, and a headway's worth ahead.
  const double rear = 2.0, front = 2.0 + 1.5 * st.speed;
  Box padded = footprint(st);
  padded.center += heading_vector(st.heading) * ((front - rear) / 2);
  padded.length += front + rear;
  padded.width += 0.5;
  for (const auto& [id, slot] : state_.actors)
    if (overlaps(padded, footprint(slot.state))) return true;
  return false;
}

void World::spawn_due() {
  const RoadNetwork& net = *scenario_.network;
  std::vector<const SocialSpec*> still;
  for (const SocialSpec* s : pending_) {
    if (s->spawn_step > state_.step) {
      still.push_back(s);
      continue;
    }
    VehicleState st;
    SocialRuntime rt;
    rt.spec = s;
    if (s->kind == SocialKind::reactive) {
      ReactiveParams params;
      params.desired_speed = s->desired_speed;
      rt.driver = std::make_unique<ReactiveDriver>(net, s->route, params, scenario_.limits);
      const auto& line = rt.driver->path().line();
      st = make_state({line.point_at(0), line.heading_at(0)}, s->speed, s->size);
    } else {
      const auto& kf = s->track.keyframes;
      const Pose pose = replay_pose(s->track, state_.step);
      double speed = kf.front().speed;
      for (const auto& f : kf)
        if (f.step <= state_.step) speed = f.speed;
      st = make_state(pose, speed, s->size);
    }
    st.step = state_.step;
    if (spawn_blocked(st)) {
      still.push_back(s);
      continue;
    }
    state_.actors[s->id] = {ActorRole::social, st, false, ""};
    social_.emplace(s->id, std::move(rt));
  }
  pending_ = std::move(still);
}

std::vector<Event> World::evaluate() {
  const RoadNetwork& net = *scenario_.network;
  std::vector<Event> events;
  const std::int64_t k = state_.step;

  context_.clear();
  std::vector<std::pair<const ActorId*, Box>> boxes;
  for (const auto& [id, slot] : state_.actors) {
    ActorRecord r;
    r.id = id;
    r.role = slot.role;
    r.frozen = slot.frozen;
    r.state = slot.state;
    const LaneQuery q = nearest_lane(net, slot.state.position);
    const Lane& lane = net.lanes()[q.lane_index];
    r.lane = q.lane;
    r.lane_offset = q.offset;
    r.lane_width = lane.width;
    r.speed_limit = lane.speed_limit;
    const Box box = footprint(slot.state);
    r.offroad = offroad_status(net, box);
    r.wrong_way = wrong_way_flag(net, slot.state);
    context_.emplace(id, std::move(r));
    boxes.emplace_back(&id, box);
  }

  std::map<ActorId, std::string> freeze;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const ActorSlot& a = state_.actors.at(*boxes[i].first);
      const ActorSlot& b = state_.actors.at(*boxes[j].first);
      if (a.frozen && b.frozen) continue;
      if (!overlaps(boxes[i].second, boxes[j].second)) continue;
      Event e;
      e.step = k;
      e.actor = *boxes[i].first;
      e.kind = EventKind::collision;
      e.other = *boxes[j].first;
      events.push_back(std::move(e));
      if (!a.frozen) freeze.emplace(*boxes[i].first, "collision");
      if (!b.frozen) freeze.emplace(*boxes[j].first, "collision");
    }

  for (const auto& [id, slot] : state_.actors) {
    if (slot.frozen) continue;
    const ActorRecord& r = context_.at(id);
    const auto emit = [&](EventKind kind) {
      Event e;
      e.step = k;
      e.actor = id;
      e.kind = kind;
      events.push_back(e);
      return &events.back();
    };
    if (r.offroad == OffroadStatus::full_offroad) {
      emit(EventKind::full_offroad);
      freeze.emplace(id, "full_offroad");
    } else if (r.offroad == OffroadStatus::partial_offroad) {
      emit(EventKind::partial_offroad);
    }
    if (r.wrong_way) emit(EventKind::wrong_way);
    if (slot.state.speed > r.speed_limit) {
      Event* e = emit(EventKind::speed_violation);
      e->amount = slot.state.speed - r.speed_limit;
      e->limit = r.speed_limit;
    }
  }

  for (const auto& [id, reason] : freeze) {
    ActorSlot& slot = state_.actors.at(id);
    slot.frozen = true;
    slot.frozen_reason = reason;
    context_.at(id).frozen = true;
  }

  const auto next = check_termination(state_, scenario_, outcomes_);
  for (const auto& [id, o] : next) {
    const auto prev = outcomes_.find(id);
    const bool changed = prev == outcomes_.end() ? o.kind != OutcomeKind::running
                                                 : prev->second.kind != o.kind;
    if (changed) {
      if (o.kind == OutcomeKind::goal_reached) {
        events.push_back({k, id, EventKind::goal_reached, std::nullopt, 0, 0, {}});
        retiring_.insert(id);
      } else if (o.kind == OutcomeKind::timed_out) {
        events.push_back({k, id, EventKind::timeout, std::nullopt, 0, 0, {}});
      }
    }
  }
  outcomes_ = next;

  for (auto& [id, rt] : social_)
    if (rt.driver && rt.driver->finished() && !state_.actors.at(id).frozen) retiring_.insert(id);
  return events;
}

void World::rebuild_scene() {
  std::vector<SceneActor> actors;
  actors.reserve(state_.actors.size());
  for (const auto& [id, slot] : state_.actors)
    actors.push_back({id, slot.role, slot.state, footprint(slot.state), slot.frozen});
  scene_ = Scene(std::move(actors));
}

void World::record_snapshot() {
  Snapshot snap;
  snap.step = state_.step;
  snap.time = state_.sim_time;
  snap.actors.reserve(context_.size());
  for (const auto& [id, r] : context_) snap.actors.push_back(r);
  for (const auto& [id, phase] : state_.signal_phases) snap.signals.push_back({id, phase});
  log_.snapshots.push_back(std::move(snap));
}

Observation World::observe(const ActorId& mission) const {
  const auto it = missions_.find(mission);
  if (it == missions_.end()) throw UnknownActorError("no mission actor '" + mission + "'");
  if (!state_.actors.count(mission))
    throw UnknownActorError("mission '" + mission + "' has left the world");
  const MissionSpec& spec = *it->second.spec;
  RouteContext ctx;
  ctx.path = &it->second.path;
  ctx.goal = spec.route.goal;
  ctx.arrival_radius = spec.route.arrival_radius;
  ctx.hint = it->second.hint;
  Observation obs =
      dbench::observe(scene_, mission, *scenario_.network, ctx, state_.sim_time, scenario_.sensor);
  obs.follow_target = spec.follow;
  if (!obs.follow_target && scenario_.lead) obs.follow_target = scenario_.lead->id;
  if (const auto in = inbox_.find(mission); in != inbox_.end()) obs.inbox = in->second;
  return obs;
}

SendStatus World::send(const ActorId& sender, std::string payload,
                       std::optional<ActorId> recipient) {
  V2VMessage m;
  m.sender = sender;
  m.recipient = std::move(recipient);
  m.send_step = state_.step;
  m.payload = std::move(payload);
  return bus_.send(std::move(m), positions());
}

std::vector<Event> World::step(const std::map<ActorId, Action>& actions) {
  if (done()) throw std::logic_error("episode of scenario '" + scenario_.id + "' has finished");
  for (const auto& [id, action] : actions)
    if (!missions_.count(id))
      throw UnknownActorError("actions name '" + id + "', which is not a mission actor");
  for (const auto& id : active_missions()) {
    if (state_.actors.at(id).frozen) continue;
    if (!actions.count(id)) throw std::invalid_argument("no action for mission '" + id + "'");
  }

  const std::int64_t k = state_.step;
  const double dt = scenario_.dt;
  std::vector<Event> events;

  // Messages due now are delivered against the positions of this snapshot.
  inbox_ = bus_.deliver(positions(), k);
  for (const auto& rec : bus_.take_log()) {
    Event e;
    e.step = k;
    e.actor = rec.sender;
    e.kind = EventKind::v2v;
    e.other = rec.receiver;
    e.payload = {{"status", to_string(rec.status)}, {"bytes", rec.bytes}};
    events.push_back(std::move(e));
  }

  std::map<ActorId, VehicleState> next;
  for (const auto& [id, slot] : state_.actors) {
    if (retiring_.count(id)) continue;
    if (slot.frozen) {
      next[id] = frozen_step(slot.state);
      continue;
    }
    switch (slot.role) {
      case ActorRole::mission: {
        const auto a = actions.find(id);
        next[id] = a == actions.end() ? frozen_step(slot.state)
                                      : step_action(slot.state, a->second, scenario_.limits, dt);
        break;
      }
      case ActorRole::lead:
        next[id] = step_continuous(slot.state, lead_->act(scene_, id, k, state_.sim_time, dt),
                                   scenario_.limits, dt);
        break;
      case ActorRole::social: {
        SocialRuntime& rt = social_.at(id);
        const SocialSpec& spec = *rt.spec;
        const bool replaying =
            spec.kind == SocialKind::replay && (!spec.reactive_from || k + 1 < *spec.reactive_from);
        if (replaying) {
          next[id] = teleport(slot.state, replay_pose(spec.track, k + 1), dt);
          break;
        }
        if (!rt.driver) {
          ReactiveParams params;
          params.desired_speed = spec.desired_speed;
          Route r = spec.route;
          rt.driver = std::make_unique<ReactiveDriver>(*scenario_.network, r, params,
                                                       scenario_.limits);
        }
        next[id] = step_continuous(slot.state, rt.driver->act(scene_, id, state_.sim_time),
                                   scenario_.limits, dt);
        break;
      }
    }
  }

  for (const auto& id : retiring_) {
    state_.actors.erase(id);
    social_.erase(id);
    inbox_.erase(id);
  }
  retiring_.clear();
  for (auto& [id, s] : next) state_.actors.at(id).state = s;

  state_.step = k + 1;
  state_.sim_time = double(state_.step) * dt;
  spawn_due();
  for (const auto& sig : scenario_.network->signals())
    state_.signal_phases[sig.id] = sig.state_at(state_.sim_time);

  auto evaluated = evaluate();
  events.insert(events.end(), evaluated.begin(), evaluated.end());
  rebuild_scene();

  for (auto& [id, rt] : missions_) {
    const auto slot = state_.actors.find(id);
    if (slot == state_.actors.end()) continue;
    const Vec2 p = slot->second.state.position;
    const auto proj = rt.hint >= 0 ? rt.path.project_near(p, rt.hint) : rt.path.project(p);
    if (proj.distance <= kMaxRouteDistance) rt.hint = proj.station;
  }

  log_.events.insert(log_.events.end(), events.begin(), events.end());
  record_snapshot();
  return events;
}

TrajectoryLog World::finish_log() const {
  TrajectoryLog out = log_;
  for (const auto& [id, o] : outcomes_) out.outcomes.emplace_back(id, o);
  return out;
}

}  // namespace dbench
