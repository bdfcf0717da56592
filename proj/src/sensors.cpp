#include "dbench/sensors.hpp"

#include "dbench/errors.hpp"

#include <stdexcept>
#include <unordered_map>

namespace dbench {

void validate(const SensorConfig& c) {
  if (!(c.range > 0)) throw std::invalid_argument("sensor range must be positive");
  if (c.ray_count < 36) throw std::invalid_argument("sensor ray count must be at least 36");
  if (!(c.visibility_threshold >= 0 && c.visibility_threshold <= 1))
    throw std::invalid_argument("visibility threshold must lie in [0, 1]");
  if (c.boundary_samples < 4) throw std::invalid_argument("need at least 4 boundary samples");
}

Scene::Scene(std::vector<SceneActor> actors) : actors_(std::move(actors)) {
  std::sort(actors_.begin(), actors_.end(),
            [](const SceneActor& a, const SceneActor& b) { return a.id < b.id; });
}

Scene Scene::from_snapshot(const Snapshot& snap) {
  std::vector<SceneActor> actors;
  actors.reserve(snap.actors.size());
  for (const auto& a : snap.actors)
    actors.push_back({a.id, a.role, a.state, footprint(a.state), a.frozen});
  return Scene(std::move(actors));
}

std::size_t Scene::index_of(const ActorId& id) const {
  const auto it = std::lower_bound(actors_.begin(), actors_.end(), id,
                                   [](const SceneActor& a, const ActorId& k) { return a.id < k; });
  if (it == actors_.end() || it->id != id) throw UnknownActorError("no actor '" + id + "'");
  return std::size_t(it - actors_.begin());
}

const SceneActor* Scene::find(const ActorId& id) const {
  const auto it = std::lower_bound(actors_.begin(), actors_.end(), id,
                                   [](const SceneActor& a, const ActorId& k) { return a.id < k; });
  return it != actors_.end() && it->id == id ? &*it : nullptr;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<Vec2>& ray_directions(int n) {
  thread_local std::unordered_map<int, std::vector<Vec2>> cache;
  auto& dirs = cache[n];
  if (dirs.empty()) {
    dirs.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) dirs.push_back(heading_vector(2 * kPi * i / n));
  }
  return dirs;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

VisibilityPolygon visibility_polygon(const Scene& scene, const ActorId& ego_id,
                                     const SensorConfig& config) {
  const std::size_t ego = scene.index_of(ego_id);
  const int n = config.ray_count;
  const auto& dirs = ray_directions(n);
  const double step = 2 * kPi / n;

  VisibilityPolygon poly;
  poly.origin = scene.actors()[ego].state.position;
  poly.ranges.assign(std::size_t(n), config.range);

  const auto& actors = scene.actors();
  for (std::size_t j = 0; j < actors.size(); ++j) {
    if (j == ego) continue;
    const Box& box = actors[j].box;
    const Vec2 rel = box.center - poly.origin;
    const double d = rel.norm();
    const double r = box.circumradius();
    if (d - r > config.range) continue;
    long i0 = 0, i1 = n - 1;
    if (d > r) {
      const double bearing = std::atan2(rel.y(), rel.x());
      const double half = std::asin(r / d);
      i0 = long(std::floor((bearing - half) / step));
      i1 = long(std::ceil((bearing + half) / step));
    }
    for (long i = i0; i <= i1; ++i) {
      const std::size_t k = std::size_t(((i % n) + n) % n);
      const auto t = ray_box_distance(poly.origin, dirs[k], box, poly.ranges[k]);
      if (t && *t < poly.ranges[k]) poly.ranges[k] = *t;
    }
  }

  poly.vertices.reserve(std::size_t(n));
  for (int k = 0; k < n; ++k) poly.vertices.push_back(poly.origin + poly.ranges[k] * dirs[k]);
  return poly;
}

std::vector<Vec2> boundary_samples(const Box& box, int count) {
  const auto c = box.corners();
  const double edge[4] = {box.length, box.width, box.length, box.width};
  const double perimeter = 2 * (box.length + box.width);
  std::vector<Vec2> out;
  out.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    double s = perimeter * k / count;
    int e = 0;
    while (e < 3 && s > edge[e]) {
      s -= edge[e];
      ++e;
    }
    const Vec2& a = c[std::size_t(e)];
    const Vec2& b = c[std::size_t((e + 1) % 4)];
    out.push_back(a + (b - a) * (s / edge[e]));
  }
  return out;
}

double visibility_fraction(const Scene& scene, std::size_t ego, std::size_t target, int samples) {
  const auto& actors = scene.actors();
  const Vec2 o = actors[ego].state.position;
  const Box& tbox = actors[target].box;
  const double rt = tbox.circumradius();

  std::vector<const Box*> occluders;
  for (std::size_t j = 0; j < actors.size(); ++j) {
    if (j == ego || j == target) continue;
    const Box& b = actors[j].box;
    if (point_segment_distance(b.center, o, tbox.center) <= b.circumradius() + rt)
      occluders.push_back(&b);
  }
  if (occluders.empty()) return 1.0;

  int clear = 0;
  for (const Vec2& p : boundary_samples(tbox, samples)) {
    bool blocked = false;
    for (const Box* b : occluders)
      if (segment_crosses_box(o, p, *b)) {
        blocked = true;
        break;
      }
    if (!blocked) ++clear;
  }
  return double(clear) / samples;
}

std::vector<NeighborObservation> visible_neighbors(const Scene& scene, const ActorId& ego_id,
                                                   const SensorConfig& config) {
  const std::size_t ego = scene.index_of(ego_id);
  const auto& actors = scene.actors();
  const Vec2 o = actors[ego].state.position;
  const double r2 = config.range * config.range;
  std::vector<NeighborObservation> out;
  for (std::size_t j = 0; j < actors.size(); ++j) {
    if (j == ego) continue;
    if ((actors[j].state.position - o).squaredNorm() > r2) continue;
    const double frac =
        config.occlusion ? visibility_fraction(scene, ego, j, config.boundary_samples) : 1.0;
    if (frac >= config.visibility_threshold) out.push_back({actors[j].id, actors[j].state, frac});
  }
  return out;
}

Observation observe(const Scene& scene, const ActorId& ego_id, const RoadNetwork& net,
                    const RouteContext& route, double time, const SensorConfig& config) {
  const SceneActor* ego = scene.find(ego_id);
  if (!ego) throw UnknownActorError("no actor '" + ego_id + "'");

  Observation obs;
  obs.step = ego->state.step;
  obs.time = time;
  obs.ego_id = ego_id;
  obs.ego = ego->state;
  obs.neighbors = visible_neighbors(scene, ego_id, config);
  if (config.occlusion) obs.visibility_polygon = visibility_polygon(scene, ego_id, config).vertices;

  const Vec2 p = ego->state.position;
  const LaneQuery q = nearest_lane(net, p);
  const Lane& lane = net.lanes()[q.lane_index];
  obs.lane = {q.lane, q.offset, q.station, lane.width, lane.speed_limit, lane_heading(net, q)};

  obs.goal = route.goal;
  obs.arrival_radius = route.arrival_radius;
  std::optional<double> station;
  if (route.path && route.path->line().size() >= 2) {
    const auto proj =
        route.hint >= 0 ? route.path->project_near(p, route.hint) : route.path->project(p);
    if (proj.distance <= kMaxRouteDistance) {
      station = proj.station;
      obs.route_station = proj.station;
      obs.route_remaining = route.path->length() - proj.station;
      obs.waypoints = waypoints_along(net, *route.path, proj, route.horizon, route.spacing);
    }
  }

  const double r2 = config.range * config.range;
  for (const auto& sig : net.signals()) {
    const Lane& sl = net.lane(sig.lane);
    const Vec2 stop = sl.centerline.points().back();
    const double d2 = (stop - p).squaredNorm();
    if (d2 > r2) continue;
    SignalObservation so{sig.id, sig.state_at(time), std::sqrt(d2), std::nullopt};
    if (station && route.path) {
      if (const auto end = route.path->lane_end_station(net.lane_index(sig.lane))) {
        const double ahead = *end - *station;
        if (ahead >= 0) so.route_distance = ahead;
      }
    }
    obs.signals.push_back(std::move(so));
  }
  return obs;
}

namespace {

nlohmann::json state_json(const VehicleState& s) {
  return {{"x", s.position.x()},
          {"y", s.position.y()},
          {"heading", s.heading},
          {"speed", s.speed},
          {"acc", {s.acceleration.x(), s.acceleration.y()}},
          {"jerk", {s.jerk.x(), s.jerk.y()}},
          {"length", s.length},
          {"width", s.width},
          {"step", s.step}};
}

VehicleState state_from(const nlohmann::json& j) {
  VehicleState s;
  s.position = Vec2(j.at("x").get<double>(), j.at("y").get<double>());
  s.heading = j.at("heading").get<double>();
  s.speed = j.at("speed").get<double>();
  s.acceleration = Vec2(j.at("acc").at(0).get<double>(), j.at("acc").at(1).get<double>());
  s.jerk = Vec2(j.at("jerk").at(0).get<double>(), j.at("jerk").at(1).get<double>());
  s.length = j.at("length").get<double>();
  s.width = j.at("width").get<double>();
  s.step = j.at("step").get<std::int64_t>();
  return s;
}

}  // namespace

nlohmann::json to_json(const Observation& obs) {
  using nlohmann::json;
  json neighbors = json::array();
  for (const auto& n : obs.neighbors)
    neighbors.push_back({{"id", n.id}, {"state", state_json(n.state)}, {"visibility", n.visibility}});
  json polygon = json::array();
  for (const auto& v : obs.visibility_polygon) polygon.push_back({v.x(), v.y()});
  json waypoints = json::array();
  for (const auto& w : obs.waypoints)
    waypoints.push_back({{"x", w.pose.position.x()},
                         {"y", w.pose.position.y()},
                         {"heading", w.pose.heading},
                         {"lane", w.lane},
                         {"speed_limit", w.speed_limit},
                         {"station", w.station}});
  json signals = json::array();
  for (const auto& s : obs.signals) {
    json sj{{"id", s.id}, {"state", to_string(s.state)}, {"distance", s.distance}};
    sj["route_distance"] = s.route_distance ? json(*s.route_distance) : json(nullptr);
    signals.push_back(std::move(sj));
  }
  json inbox = json::array();
  for (const auto& m : obs.inbox)
    inbox.push_back({{"sender", m.sender},
                     {"recipient", m.recipient ? json(*m.recipient) : json(nullptr)},
                     {"send_step", m.send_step},
                     {"delivery_step", m.delivery_step},
                     {"payload", m.payload}});
  return {{"step", obs.step},
          {"time", obs.time},
          {"ego_id", obs.ego_id},
          {"ego", state_json(obs.ego)},
          {"neighbors", std::move(neighbors)},
          {"visibility_polygon", std::move(polygon)},
          {"waypoints", std::move(waypoints)},
          {"lane",
           {{"id", obs.lane.lane},
            {"offset", obs.lane.offset},
            {"station", obs.lane.station},
            {"width", obs.lane.lane_width},
            {"speed_limit", obs.lane.speed_limit},
            {"heading", obs.lane.lane_heading}}},
          {"signals", std::move(signals)},
          {"goal", {obs.goal.x(), obs.goal.y()}},
          {"arrival_radius", obs.arrival_radius},
          {"route_station", obs.route_station},
          {"route_remaining", obs.route_remaining},
          {"follow_target", obs.follow_target ? json(*obs.follow_target) : json(nullptr)},
          {"inbox", std::move(inbox)}};
}

Observation observation_from_json(const nlohmann::json& j) {
  try {
    Observation obs;
    obs.step = j.at("step").get<std::int64_t>();
    obs.time = j.at("time").get<double>();
    obs.ego_id = j.at("ego_id").get<std::string>();
    obs.ego = state_from(j.at("ego"));
    for (const auto& n : j.at("neighbors"))
      obs.neighbors.push_back({n.at("id").get<std::string>(), state_from(n.at("state")),
                               n.at("visibility").get<double>()});
    for (const auto& v : j.at("visibility_polygon"))
      obs.visibility_polygon.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    for (const auto& wj : j.at("waypoints")) {
      Waypoint w;
      w.pose.position = Vec2(wj.at("x").get<double>(), wj.at("y").get<double>());
      w.pose.heading = wj.at("heading").get<double>();
      w.lane = wj.at("lane").get<std::string>();
      w.speed_limit = wj.at("speed_limit").get<double>();
      w.station = wj.at("station").get<double>();
      obs.waypoints.push_back(std::move(w));
    }
    const auto& l = j.at("lane");
    obs.lane = {l.at("id").get<std::string>(), l.at("offset").get<double>(),
                l.at("station").get<double>(), l.at("width").get<double>(),
                l.at("speed_limit").get<double>(), l.at("heading").get<double>()};
    for (const auto& sj : j.at("signals")) {
      SignalObservation so;
      so.id = sj.at("id").get<std::string>();
      so.state = signal_state_from_string(sj.at("state").get<std::string>());
      so.distance = sj.at("distance").get<double>();
      if (!sj.at("route_distance").is_null()) so.route_distance = sj.at("route_distance").get<double>();
      obs.signals.push_back(std::move(so));
    }
    obs.goal = Vec2(j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>());
    obs.arrival_radius = j.at("arrival_radius").get<double>();
    obs.route_station = j.at("route_station").get<double>();
    obs.route_remaining = j.at("route_remaining").get<double>();
    if (!j.at("follow_target").is_null()) obs.follow_target = j.at("follow_target").get<std::string>();
    for (const auto& m : j.at("inbox")) {
      V2VMessage msg;
      msg.sender = m.at("sender").get<std::string>();
      msg.send_step = m.at("send_step").get<std::int64_t>();
      msg.delivery_step = m.at("delivery_step").get<std::int64_t>();
      msg.payload = m.at("payload").get<std::string>();
      if (!m.at("recipient").is_null()) msg.recipient = m.at("recipient").get<std::string>();
      obs.inbox.push_back(std::move(msg));
    }
    return obs;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("observation: ") + e.what());
  }
}

}  // namespace dbench
