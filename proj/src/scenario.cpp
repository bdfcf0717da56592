#include "dbench/scenario.hpp"

#include "dbench/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace dbench {

using nlohmann::json;

std::int64_t Scenario::limit_steps() const {
  return static_cast<std::int64_t>(std::llround(time_limit / dt));
}

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

template <typename Fn>
void rethrow_as_validation(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

void check_size(const VehicleSize& s, const std::string& where) {
  check(s.length > 0 && s.width > 0, where + ": vehicle dimensions must be positive");
}

}  // namespace

void validate(const Scenario& sc) {
  const std::string where = "scenario '" + sc.id + "'";
  check(!sc.id.empty(), "scenario id must not be empty");
  check(sc.network != nullptr, where + ": no road network");
  check(sc.dt > 0 && sc.dt <= 0.5, where + ": dt must lie in (0, 0.5]");
  check(sc.time_limit > 0, where + ": time_limit must be positive");
  check(!sc.missions.empty(), where + ": at least one mission is required");
  check(sc.lead.has_value() == (sc.family == TaskFamily::adaptive),
        where + ": a lead vehicle is required exactly for adaptive scenarios");
  rethrow_as_validation(where + " limits", [&] { validate(sc.limits); });
  rethrow_as_validation(where + " sensor", [&] { validate(sc.sensor); });
  rethrow_as_validation(where + " v2v", [&] { validate(sc.v2v); });

  const RoadNetwork& net = *sc.network;
  std::set<ActorId> ids;
  const auto unique = [&](const ActorId& id) {
    check(!id.empty(), where + ": actor ids must not be empty");
    check(ids.insert(id).second, where + ": duplicate actor id '" + id + "'");
  };

  for (const auto& m : sc.missions) {
    const std::string mw = where + " mission '" + m.id + "'";
    unique(m.id);
    check_size(m.size, mw);
    check(m.speed >= 0, mw + ": initial speed must be non-negative");
    try {
      validate_route(net, m.route);
    } catch (const ValidationError& e) {
      throw ValidationError(mw + ": " + e.what());
    }
    const RoutePath path(net, m.route);
    check(path.project(m.start.position).distance <= kMaxRouteDistance,
          mw + ": start pose is more than 20 m from its route");
    check((m.start.position - m.route.goal).norm() > m.route.arrival_radius,
          mw + ": starts within the arrival radius of its goal");
    if (m.follow)
      check(sc.lead && sc.lead->id == *m.follow, mw + ": follows unknown lead '" + *m.follow + "'");
  }

  for (const auto& s : sc.social) {
    const std::string sw = where + " social '" + s.id + "'";
    unique(s.id);
    check_size(s.size, sw);
    check(s.spawn_step >= 0, sw + ": spawn_step must be non-negative");
    if (s.kind == SocialKind::reactive || s.reactive_from) {
      try {
        validate_route(net, s.route);
      } catch (const ValidationError& e) {
        throw ValidationError(sw + ": " + e.what());
      }
    }
    if (s.kind == SocialKind::replay) {
      try {
        validate(s.track);
      } catch (const ValidationError& e) {
        throw ValidationError(sw + ": " + e.what());
      }
    }
  }

  if (sc.lead) {
    const std::string lw = where + " lead '" + sc.lead->id + "'";
    unique(sc.lead->id);
    check_size(sc.lead->size, lw);
    try {
      validate(sc.lead->script, net);
    } catch (const ValidationError& e) {
      throw ValidationError(lw + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T req(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T opt(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return req<T>(j, key, where);
}

Pose pose_from(const json& j, const std::string& where) {
  return {Vec2(req<double>(j, "x", where), req<double>(j, "y", where)),
          req<double>(j, "heading", where)};
}

json pose_json(const Pose& p) {
  return {{"x", p.position.x()}, {"y", p.position.y()}, {"heading", p.heading}};
}

VehicleSize size_from(const json& j, const std::string& where) {
  VehicleSize s;
  if (!j.contains("size")) return s;
  const auto& sj = j.at("size");
  s.length = opt(sj, "length", s.length, where + ".size");
  s.width = opt(sj, "width", s.width, where + ".size");
  return s;
}

json size_json(const VehicleSize& s) { return {{"length", s.length}, {"width", s.width}}; }

Vec2 point_from(const json& j, const char* key, const std::string& where) {
  const auto v = req<std::vector<double>>(j, key, where);
  if (v.size() != 2) throw ParseError(where + ": field '" + key + "' must be [x, y]");
  return Vec2(v[0], v[1]);
}

Route route_from(const json& j, const std::string& where) {
  Route r;
  r.lanes = req<std::vector<std::string>>(j, "lanes", where);
  r.goal = point_from(j, "goal", where);
  r.arrival_radius = opt(j, "arrival_radius", r.arrival_radius, where);
  r.start_station = opt(j, "start_station", r.start_station, where);
  return r;
}

json route_json(const Route& r) {
  return {{"lanes", r.lanes},
          {"goal", {r.goal.x(), r.goal.y()}},
          {"arrival_radius", r.arrival_radius},
          {"start_station", r.start_station}};
}

LeadScript script_from(const json& j, const std::string& where) {
  LeadScript s;
  s.route = req<std::vector<std::string>>(j, "route", where);
  const json segs = opt(j, "segments", json::array(), where);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string w = where + ".segments[" + std::to_string(i) + "]";
    const json& sj = segs[i];
    LeadSegment seg;
    try {
      seg.behavior = lead_behavior_from_string(req<std::string>(sj, "behavior", w));
    } catch (const ParseError& e) {
      throw ParseError(w + ": " + e.what());
    }
    seg.speed = opt(sj, "speed", 0.0, w);
    seg.lane = opt(sj, "lane", std::string(), w);
    seg.duration = opt(sj, "duration", 0.0, w);
    const std::string trig = opt(sj, "trigger", std::string("step"), w);
    if (trig == "step")
      seg.trigger = TriggerKind::step;
    else if (trig == "station")
      seg.trigger = TriggerKind::station;
    else
      throw ParseError(w + ": field 'trigger' must be 'step' or 'station'");
    seg.at = opt(sj, "at", 0.0, w);
    s.segments.push_back(std::move(seg));
  }
  return s;
}

json script_json(const LeadScript& s) {
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json sj{{"behavior", to_string(seg.behavior)},
            {"trigger", seg.trigger == TriggerKind::step ? "step" : "station"},
            {"at", seg.at}};
    switch (seg.behavior) {
      case LeadBehavior::cruise: sj["speed"] = seg.speed; break;
      case LeadBehavior::stop: sj["duration"] = seg.duration; break;
      default: sj["lane"] = seg.lane;
    }
    segs.push_back(std::move(sj));
  }
  return {{"route", s.route}, {"segments", std::move(segs)}};
}

std::shared_ptr<const RoadNetwork> map_from(const json& j, const std::filesystem::path& base,
                                            const std::string& where) {
  if (!j.contains("map")) throw ParseError(where + ": missing field 'map'");
  const json& m = j.at("map");
  if (m.is_string()) {
    std::filesystem::path p = m.get<std::string>();
    if (p.is_relative()) p = base / p;
    return std::make_shared<const RoadNetwork>(load_map(p));
  }
  return std::make_shared<const RoadNetwork>(RoadNetwork::from_json(m));
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::filesystem::path& base) {
  Scenario sc;
  sc.id = req<std::string>(j, "id", "scenario");
  const std::string where = "scenario '" + sc.id + "'";
  try {
    sc.family = task_family_from_string(opt(j, "family", std::string("collaborative"), where));
  } catch (const ParseError& e) {
    throw ParseError(where + ": field 'family': " + e.what());
  }
  sc.network = map_from(j, base, where);
  sc.dt = opt(j, "dt", sc.dt, where);
  sc.time_limit =
      opt(j, "time_limit", sc.family == TaskFamily::adaptive ? 120.0 : 60.0, where);
  sc.seed = opt<std::uint64_t>(j, "seed", 0, where);

  if (j.contains("limits")) {
    const auto& l = j.at("limits");
    const std::string w = where + ".limits";
    sc.limits.max_speed = opt(l, "max_speed", sc.limits.max_speed, w);
    sc.limits.max_accel = opt(l, "max_accel", sc.limits.max_accel, w);
    sc.limits.max_decel = opt(l, "max_decel", sc.limits.max_decel, w);
    sc.limits.max_steer_angle = opt(l, "max_steer_angle", sc.limits.max_steer_angle, w);
    sc.limits.wheelbase = opt(l, "wheelbase", sc.limits.wheelbase, w);
  }
  if (j.contains("sensor")) {
    const auto& s = j.at("sensor");
    const std::string w = where + ".sensor";
    sc.sensor.range = opt(s, "range", sc.sensor.range, w);
    sc.sensor.ray_count = opt(s, "ray_count", sc.sensor.ray_count, w);
    sc.sensor.visibility_threshold =
        opt(s, "visibility_threshold", sc.sensor.visibility_threshold, w);
    sc.sensor.boundary_samples = opt(s, "boundary_samples", sc.sensor.boundary_samples, w);
  }
  if (j.contains("v2v")) {
    const auto& v = j.at("v2v");
    const std::string w = where + ".v2v";
    sc.v2v.max_range = opt(v, "max_range", sc.v2v.max_range, w);
    sc.v2v.latency = opt(v, "latency", sc.v2v.latency, w);
    sc.v2v.drop_probability = opt(v, "drop_probability", sc.v2v.drop_probability, w);
    sc.v2v.max_payload = opt(v, "max_payload", sc.v2v.max_payload, w);
    const std::string mode = opt(v, "mode", std::string("broadcast"), w);
    if (mode != "broadcast" && mode != "unicast")
      throw ParseError(w + ": field 'mode' must be 'broadcast' or 'unicast'");
    sc.v2v.mode = mode == "unicast" ? ChannelMode::unicast : ChannelMode::broadcast;
  }
  sc.tags = opt(j, "tags", std::map<std::string, std::string>{}, where);

  const json missions = req<json>(j, "missions", where);
  for (std::size_t i = 0; i < missions.size(); ++i) {
    const json& mj = missions[i];
    const std::string w = where + ".missions[" + std::to_string(i) + "]";
    MissionSpec m;
    m.id = req<std::string>(mj, "id", w);
    m.start = pose_from(req<json>(mj, "start", w), w + ".start");
    m.speed = opt(mj, "speed", 0.0, w);
    m.size = size_from(mj, w);
    m.route = route_from(req<json>(mj, "route", w), w + ".route");
    if (mj.contains("follow") && !mj.at("follow").is_null())
      m.follow = req<std::string>(mj, "follow", w);
    sc.missions.push_back(std::move(m));
  }

  const json social = opt(j, "social", json::array(), where);
  for (std::size_t i = 0; i < social.size(); ++i) {
    const json& sj = social[i];
    const std::string w = where + ".social[" + std::to_string(i) + "]";
    SocialSpec s;
    s.id = req<std::string>(sj, "id", w);
    const std::string kind = opt(sj, "kind", std::string("reactive"), w);
    if (kind != "reactive" && kind != "replay")
      throw ParseError(w + ": field 'kind' must be 'reactive' or 'replay'");
    s.kind = kind == "replay" ? SocialKind::replay : SocialKind::reactive;
    s.spawn_step = opt<std::int64_t>(sj, "spawn_step", 0, w);
    s.size = size_from(sj, w);
    if (sj.contains("route")) s.route = route_from(sj.at("route"), w + ".route");
    else if (s.kind == SocialKind::reactive) throw ParseError(w + ": missing field 'route'");
    s.speed = opt(sj, "speed", 0.0, w);
    if (sj.contains("desired_speed")) s.desired_speed = req<double>(sj, "desired_speed", w);
    if (s.kind == SocialKind::replay) {
      const json tj = req<json>(sj, "track", w);
      s.track.id = s.id;
      try {
        s.track.mode = interpolation_from_string(opt(tj, "mode", std::string("linear"), w));
      } catch (const ParseError& e) {
        throw ParseError(w + ".track: " + e.what());
      }
      const json kfs = req<json>(tj, "keyframes", w + ".track");
      for (std::size_t k = 0; k < kfs.size(); ++k) {
        const std::string kw = w + ".track.keyframes[" + std::to_string(k) + "]";
        ReplayKeyframe f;
        f.step = req<std::int64_t>(kfs[k], "step", kw);
        f.pose = pose_from(kfs[k], kw);
        f.speed = opt(kfs[k], "speed", 0.0, kw);
        s.track.keyframes.push_back(f);
      }
      if (sj.contains("reactive_from")) s.reactive_from = req<std::int64_t>(sj, "reactive_from", w);
    }
    sc.social.push_back(std::move(s));
  }

  if (j.contains("lead") && !j.at("lead").is_null()) {
    const json& lj = j.at("lead");
    const std::string w = where + ".lead";
    LeadSpec l;
    l.id = req<std::string>(lj, "id", w);
    l.start = pose_from(req<json>(lj, "start", w), w + ".start");
    l.speed = opt(lj, "speed", 0.0, w);
    l.size = size_from(lj, w);
    l.script = script_from(req<json>(lj, "script", w), w + ".script");
    sc.lead = std::move(l);
  }
  validate(sc);
  return sc;
}

json to_json(const Scenario& sc) {
  json missions = json::array();
  for (const auto& m : sc.missions) {
    json mj{{"id", m.id},
            {"start", pose_json(m.start)},
            {"speed", m.speed},
            {"size", size_json(m.size)},
            {"route", route_json(m.route)}};
    if (m.follow) mj["follow"] = *m.follow;
    missions.push_back(std::move(mj));
  }
  json social = json::array();
  for (const auto& s : sc.social) {
    json sj{{"id", s.id},
            {"kind", s.kind == SocialKind::replay ? "replay" : "reactive"},
            {"spawn_step", s.spawn_step},
            {"size", size_json(s.size)},
            {"speed", s.speed}};
    if (s.kind == SocialKind::reactive || s.reactive_from) sj["route"] = route_json(s.route);
    if (s.desired_speed) sj["desired_speed"] = *s.desired_speed;
    if (s.kind == SocialKind::replay) {
      json kfs = json::array();
      for (const auto& f : s.track.keyframes) {
        json fj = pose_json(f.pose);
        fj["step"] = f.step;
        fj["speed"] = f.speed;
        kfs.push_back(std::move(fj));
      }
      sj["track"] = {{"mode", to_string(s.track.mode)}, {"keyframes", std::move(kfs)}};
      if (s.reactive_from) sj["reactive_from"] = *s.reactive_from;
    }
    social.push_back(std::move(sj));
  }
  json j{{"id", sc.id},
         {"family", to_string(sc.family)},
         {"map", sc.network->to_json()},
         {"dt", sc.dt},
         {"time_limit", sc.time_limit},
         {"seed", sc.seed},
         {"limits",
          {{"max_speed", sc.limits.max_speed},
           {"max_accel", sc.limits.max_accel},
           {"max_decel", sc.limits.max_decel},
           {"max_steer_angle", sc.limits.max_steer_angle},
           {"wheelbase", sc.limits.wheelbase}}},
         {"sensor",
          {{"range", sc.sensor.range},
           {"ray_count", sc.sensor.ray_count},
           {"visibility_threshold", sc.sensor.visibility_threshold},
           {"boundary_samples", sc.sensor.boundary_samples}}},
         {"v2v",
          {{"max_range", sc.v2v.max_range},
           {"latency", sc.v2v.latency},
           {"drop_probability", sc.v2v.drop_probability},
           {"max_payload", sc.v2v.max_payload},
           {"mode", sc.v2v.mode == ChannelMode::unicast ? "unicast" : "broadcast"}}},
         {"tags", sc.tags},
         {"missions", std::move(missions)},
         {"social", std::move(social)}};
  if (sc.lead)
    j["lead"] = {{"id", sc.lead->id},
                 {"start", pose_json(sc.lead->start)},
                 {"speed", sc.lead->speed},
                 {"size", size_json(sc.lead->size)},
                 {"script", script_json(sc.lead->script)}};
  return j;
}

void validate(const SuiteManifest& suite) {
  const std::string where = "suite '" + suite.name + "'";
  const auto& w = suite.weights;
  for (double v : {w.progress, w.rule_compliance, w.humanness, w.task})
    check(v >= 0, where + ": weights must be non-negative");
  check(std::abs(w.progress + w.rule_compliance + w.humanness + w.task - 1.0) <= 1e-9,
        where + ": weights must sum to 1");
  check(!suite.scenarios.empty(), where + ": no scenarios");
  std::set<std::string> ids;
  for (const auto& sc : suite.scenarios) {
    check(sc.family == suite.family,
          where + ": scenario '" + sc.id + "' belongs to a different task family");
    check(ids.insert(sc.id).second, where + ": duplicate scenario id '" + sc.id + "'");
  }
}

SuiteManifest manifest_from_json(const json& j, const std::filesystem::path& base) {
  SuiteManifest suite;
  suite.name = opt(j, "name", std::string("suite"), "manifest");
  const std::string where = "manifest '" + suite.name + "'";
  try {
    suite.family = task_family_from_string(req<std::string>(j, "family", where));
  } catch (const ParseError& e) {
    throw ParseError(where + ": field 'family': " + e.what());
  }
  if (j.contains("weights")) {
    const auto& wj = j.at("weights");
    const std::string w = where + ".weights";
    suite.weights.progress = opt(wj, "PR", suite.weights.progress, w);
    suite.weights.rule_compliance = opt(wj, "RC", suite.weights.rule_compliance, w);
    suite.weights.humanness = opt(wj, "Humanness", suite.weights.humanness, w);
    suite.weights.task = opt(wj, "task", suite.weights.task, w);
  }
  const json scenarios = req<json>(j, "scenarios", where);
  if (!scenarios.is_array()) throw ParseError(where + ": field 'scenarios' must be an array");
  for (const auto& sj : scenarios) {
    if (sj.is_string()) {
      std::filesystem::path p = sj.get<std::string>();
      if (p.is_relative()) p = base / p;
      std::ifstream in(p);
      if (!in) throw ParseError(where + ": cannot open scenario file '" + p.string() + "'");
      json parsed;
      try {
        parsed = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(p.string() + ": " + e.what());
      }
      suite.scenarios.push_back(scenario_from_json(parsed, p.parent_path()));
    } else {
      suite.scenarios.push_back(scenario_from_json(sj, base));
    }
  }
  validate(suite);
  return suite;
}

json to_json(const SuiteManifest& suite) {
  json scenarios = json::array();
  for (const auto& sc : suite.scenarios) scenarios.push_back(to_json(sc));
  return {{"name", suite.name},
          {"family", to_string(suite.family)},
          {"weights",
           {{"PR", suite.weights.progress},
            {"RC", suite.weights.rule_compliance},
            {"Humanness", suite.weights.humanness},
            {"task", suite.weights.task}}},
          {"scenarios", std::move(scenarios)}};
}

SuiteManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

}  // namespace dbench
